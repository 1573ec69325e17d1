// Command-line front end: train scenarios, run the obstacle-course
// benchmarks, export trained fields to OBJ sequences, fine-tune edits, and
// run the fast derivative/oracle property suite.
//
// Exit codes: 0 success, 1 benchmark failure, 2 usage/config error,
// 3 numeric abort.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "neuralshell/checks.hpp"
#include "neuralshell/energy.hpp"
#include "neuralshell/kinematics.hpp"
#include "neuralshell/ndf.hpp"
#include "neuralshell/rng.hpp"
#include "neuralshell/scenarios.hpp"
#include "neuralshell/trainer.hpp"

using namespace neuralshell;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBenchFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

std::array<double, 4> material_array(const MaterialParams& m) {
  return {m.rho, m.h, m.E, m.nu};
}

// A scenario argument is a builtin name or a path to a config file.
ScenarioConfig resolve_scenario(const std::string& arg) {
  if (std::filesystem::exists(arg)) return load_scenario_file(arg);
  try {
    return find_scenario(arg);
  } catch (const std::out_of_range& e) {
    throw std::invalid_argument(std::string(e.what()) + " (and no such file exists)");
  }
}

// Scenario a checkpoint belongs to: explicit --config wins, otherwise the
// setup digest is matched against the builtin registry.
ScenarioConfig scenario_for_checkpoint(const CheckpointMeta& meta, const std::string& config) {
  if (!config.empty()) {
    ScenarioConfig sc = resolve_scenario(config);
    const std::uint64_t digest =
        setup_digest(sc.problem.surface, sc.problem.embed, sc.problem.constraints);
    if (digest != meta.setup_digest)
      std::fprintf(stderr,
                   "warning: checkpoint setup digest %016llx does not match the config "
                   "(%016llx); the field will be interpreted against the config\n",
                   static_cast<unsigned long long>(meta.setup_digest),
                   static_cast<unsigned long long>(digest));
    return sc;
  }
  for (ScenarioConfig& sc : builtin_scenarios()) {
    if (setup_digest(sc.problem.surface, sc.problem.embed, sc.problem.constraints) ==
        meta.setup_digest)
      return sc;
  }
  throw std::invalid_argument(
      "checkpoint does not match any builtin scenario; pass --config <file>");
}

BudgetProfile parse_profile(const std::string& s) {
  if (s == "ci") return BudgetProfile::Ci;
  if (s == "paper") return BudgetProfile::Paper;
  throw std::invalid_argument("profile must be 'ci' or 'paper'");
}

// ---------------------------------------------------------------------------

int cmd_train(const std::string& config, std::optional<std::uint64_t> seed,
              std::optional<int> iters, const std::string& out, const std::string& profile,
              int threads, int log_every) {
  ScenarioConfig sc = resolve_scenario(config);
  apply_profile(sc, parse_profile(profile));
  if (iters) sc.training.iterations = *iters;
  if (seed) sc.sampling.seed = *seed;
  validate(sc);

  SirenConfig net = network_for(sc, parse_profile(profile));
  if (seed) net.seed = *seed;
  NdfWeights w = init_siren(net);

  std::filesystem::create_directories(out);
  TrainConfig tc = sc.training;
  tc.threads = threads;
  tc.log_every = log_every;
  tc.metrics_path = (std::filesystem::path(out) / (sc.name + "-metrics.csv")).string();
  tc.checkpoint_path = (std::filesystem::path(out) / (sc.name + ".ndf")).string();

  const TrainReport r = train(sc.problem, w, sc.sampling, tc);
  const IterationStats& last = r.history.back();
  std::printf("%s: %d iterations%s, final loss %.6g, mean |u| %.6g\n", sc.name.c_str(),
              r.iterations_run, r.stopped_on_plateau ? " (plateau stop)" : "", last.loss,
              last.mean_abs_u);
  std::printf("metrics: %s\ncheckpoint: %s\n", tc.metrics_path.c_str(),
              r.checkpoint_path.c_str());
  return kExitOk;
}

int cmd_bench(const std::string& which, const std::string& profile, const std::string& out) {
  const BudgetProfile bp = parse_profile(profile);
  std::vector<BenchmarkCase> cases;
  if (which == "all") {
    cases = benchmark_cases();
  } else {
    cases.push_back(find_benchmark(which));
  }

  bool all_pass = true;
  for (const BenchmarkCase& c : cases) {
    std::string metrics, ckpt;
    if (!out.empty()) {
      std::filesystem::create_directories(out);
      metrics = (std::filesystem::path(out) / (c.scenario.name + "-metrics.csv")).string();
      ckpt = (std::filesystem::path(out) / (c.scenario.name + ".ndf")).string();
    }
    const auto t0 = std::chrono::steady_clock::now();
    const BenchmarkReport r = run_benchmark(c, bp, metrics, ckpt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-24s measured %.6g vs %.6g  rel err %5.2f%% (tol %.0f%%)  %s  [%.0f s]\n",
                r.name.c_str(), r.measured, r.reference, 100.0 * r.rel_error,
                100.0 * r.tolerance, r.pass ? "PASS" : "FAIL", secs);
    all_pass = all_pass && r.pass;
  }
  return all_pass ? kExitOk : kExitBenchFail;
}

// A missing checkpoint is a usage error, not a numeric one.
NdfWeights checkpoint_or_usage(const std::string& path, CheckpointMeta* meta) {
  if (!std::filesystem::exists(path))
    throw std::invalid_argument("checkpoint file '" + path + "' does not exist");
  return load_checkpoint(path, meta);
}

int cmd_export(const std::string& ckpt, const std::string& grid, int frames, double fps,
               const std::string& out, const std::string& config) {
  CheckpointMeta meta;
  const NdfWeights w = checkpoint_or_usage(ckpt, &meta);
  const ScenarioConfig sc = scenario_for_checkpoint(meta, config);

  ExportOptions opt;
  if (std::sscanf(grid.c_str(), "%dx%d", &opt.n1, &opt.n2) != 2 || opt.n1 < 2 || opt.n2 < 2)
    throw std::invalid_argument("--grid expects AxB with A, B >= 2 (e.g. 100x100)");
  opt.frames = frames;
  opt.fps = fps;
  opt.out_dir = out;
  std::filesystem::create_directories(out);

  const auto files = export_meshes(w, sc.problem, opt);
  std::printf("%s: wrote %zu frame(s) on a %dx%d grid to %s\n", sc.name.c_str(), files.size(),
              opt.n1, opt.n2, out.c_str());
  return kExitOk;
}

int cmd_edit(const std::string& ckpt, const std::string& force, const std::string& pose_file,
             int iters, int snap, const std::string& out, const std::string& config) {
  CheckpointMeta meta;
  NdfWeights w = checkpoint_or_usage(ckpt, &meta);
  const ScenarioConfig sc = scenario_for_checkpoint(meta, config);

  EditTarget target;
  if (!force.empty()) {
    Vec3 f;
    if (std::sscanf(force.c_str(), "%lf,%lf,%lf", &f.x, &f.y, &f.z) != 3)
      throw std::invalid_argument("--force expects \"fx,fy,fz\"");
    target.has_force = true;
    target.force = f;
  }
  if (!pose_file.empty()) {
    std::ifstream in(pose_file);
    if (!in) throw std::invalid_argument("cannot open pose file: " + pose_file);
    const nlohmann::json j = nlohmann::json::parse(in);
    target.has_pose = true;
    if (j.contains("axis")) {
      const auto axis = j.at("axis");
      target.pose_rotation = Quat::from_axis_angle(
          {axis.at(0).get<double>(), axis.at(1).get<double>(), axis.at(2).get<double>()},
          j.at("angle").get<double>());
    }
    if (j.contains("translation")) {
      const auto tr = j.at("translation");
      target.pose_translation = {tr.at(0).get<double>(), tr.at(1).get<double>(),
                                 tr.at(2).get<double>()};
    }
  }
  if (!target.has_force && !target.has_pose)
    throw std::invalid_argument("edit needs --force and/or --pose");

  std::filesystem::create_directories(out);
  const EditReport er = fine_tune_edit(sc.problem, w, target, iters, sc.sampling, sc.training,
                                       snap);

  // The edited field answers the target scene; persist the final weights and
  // any trajectory snapshots.
  CheckpointMeta out_meta = meta;
  const std::string final_path =
      (std::filesystem::path(out) / (sc.name + "-edited.ndf")).string();
  save_checkpoint(final_path, w, out_meta);
  if (snap > 0) {
    for (std::size_t i = 0; i < er.trajectory.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "edit_%04zu_alpha_%.3f.ndf", i, er.alphas[i]);
      save_checkpoint((std::filesystem::path(out) / name).string(), er.trajectory[i], out_meta);
    }
  }
  std::printf("%s: %d edit iterations, final loss %.6g, %zu snapshot(s)\n", sc.name.c_str(),
              iters, er.training.history.back().loss, snap > 0 ? er.trajectory.size() : 0u);
  std::printf("checkpoint: %s\n", final_path.c_str());
  return kExitOk;
}

// Fast FD/oracle property suite (seconds, not minutes): the same invariants
// the acceptance gate checks, at a smaller draw count.
int cmd_check() {
  int bad = 0;
  auto report = [&](const char* name, bool ok, double worst, double tol) {
    std::printf("[%s] %-34s worst %.2e (tol %.0e)\n", ok ? "ok  " : "FAIL", name, worst, tol);
    if (!ok) ++bad;
  };

  {  // Network jets against central differences through the full embedding.
    SurfaceSpec s = SurfaceSpec::cylinder(0.25, 1.0);
    EmbedSpec e = embed_for(s, true, 1.0);
    SirenConfig c;
    c.in_width = e.width();
    c.hidden_layers = 2;
    c.hidden_width = 8;
    c.seed = 5;
    NdfWeights w = init_siren(c);
    const std::array<double, 4> mat{1.0, 0.01, 1e4, 0.3};

    JetCheckReport worst;
    SplitMix64 rng(17);
    for (int k = 0; k < 5; ++k) {
      for (int comp = 0; comp < 3; ++comp) {
        JetProgram prog = [&, comp](Tape& t, const std::array<double, 3>& x) {
          const PackedNet net = register_net(t, w);
          return eval_raw(t, net, e, x[0], x[1], x[2], mat)[std::size_t(comp)];
        };
        const std::array<double, 3> x{rng.uniform(0.3, 6.0), rng.uniform(0.1, 0.9),
                                      rng.uniform(0.1, 0.9)};
        const JetCheckReport r = check_jet_derivatives(prog, x);
        worst.d1_max = std::max(worst.d1_max, r.d1_max);
        worst.d2_max = std::max(worst.d2_max, r.d2_max);
      }
    }
    report("network jet derivatives", worst.d1_max <= 1e-5 && worst.d2_max <= 1e-5,
           std::max(worst.d1_max, worst.d2_max), 1e-5);
  }

  {  // Loss parameter gradients against central differences.
    ScenarioConfig sc = find_scenario("napkin-corners-moving");
    const ShellProblem& p = sc.problem;
    SirenConfig c;
    c.in_width = p.embed.width();
    c.hidden_layers = 2;
    c.hidden_width = 6;
    c.seed = 3;
    NdfWeights w = init_siren(c);
    SamplingPlan plan;
    plan.n1 = plan.n2 = 2;
    plan.nt = 2;
    const auto batch = stratified_samples(plan, p.surface, p.embed.duration, true, 0);

    std::vector<double> grad(w.theta.size());
    loss_and_gradient(p, w, batch, p.material, 4, 1, grad);
    double worst = 0.0;
    SplitMix64 pick(9);
    for (int k = 0; k < 8; ++k) {
      const std::size_t i = pick.next() % w.theta.size();
      const double h = 1e-6 * std::max(1.0, std::abs(w.theta[i]));
      NdfWeights wp = w, wm = w;
      wp.theta[i] += h;
      wm.theta[i] -= h;
      std::vector<double> scratch(w.theta.size());
      const double lp = loss_and_gradient(p, wp, batch, p.material, 4, 1, scratch);
      const double lm = loss_and_gradient(p, wm, batch, p.material, 4, 1, scratch);
      worst = std::max(worst, rel_error((lp - lm) / (2.0 * h), grad[i]));
    }
    report("loss parameter gradients", worst <= 1e-6, worst, 1e-6);
  }

  {  // Tape strains against the independent finite-difference oracle.
    double worst = 0.0;
    for (const SurfaceSpec& s : {SurfaceSpec::plane(1.0), SurfaceSpec::cylinder(0.25, 1.0),
                                 SurfaceSpec::cone(0.2, 0.4, 0.7)}) {
      auto field = [](double a, double b) {
        return Vec3{1e-3 * std::sin(2 * a + b), -2e-3 * std::cos(a - b), 1.5e-3 * std::sin(a + 2 * b)};
      };
      const double x1 = 0.4 * (s.hi[0] - s.lo[0]) + s.lo[0];
      const double x2 = 0.6 * (s.hi[1] - s.lo[1]) + s.lo[1];

      Tape t;
      const SurfaceFrame f = frame(s, x1, x2);
      std::array<Jet, 3> u;
      {  // exact jets of the analytic field above
        const double c1[3] = {1e-3, -2e-3, 1.5e-3};
        const double w1[3] = {2, 1, 1}, w2[3] = {1, -1, 2};
        for (int comp = 0; comp < 3; ++comp) {
          const double arg = w1[comp] * x1 + w2[comp] * x2;
          const double sv = comp == 1 ? std::cos(arg) : std::sin(arg);
          const double dv = comp == 1 ? -std::sin(arg) : std::cos(arg);
          const double d2v = comp == 1 ? -std::cos(arg) : -std::sin(arg);
          DJet j;
          j.v = c1[comp] * sv;
          j.d1[0] = c1[comp] * w1[comp] * dv;
          j.d1[1] = c1[comp] * w2[comp] * dv;
          j.d2[0] = c1[comp] * w1[comp] * w1[comp] * d2v;
          j.d2[1] = c1[comp] * w1[comp] * w2[comp] * d2v;
          j.d2[2] = c1[comp] * w2[comp] * w2[comp] * d2v;
          u[std::size_t(comp)] = Jet::constant(t, j);
        }
      }
      const auto ucov = covariant_jets(t, f, u);
      const auto g = deformation_gradients(t, f, ucov);
      const auto eps = membrane_strain(t, f, g, true);
      const OracleStrains o = strain_oracle(s, field, x1, x2);
      const double ref[4] = {o.eps(0, 0), o.eps(0, 1), o.eps(1, 0), o.eps(1, 1)};
      for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(t.value(eps[k]) - ref[k]));
    }
    report("membrane strain vs FD oracle", worst <= 1e-7, worst, 1e-7);
  }

  {  // Hard constraints at machine precision over random draws.
    ScenarioConfig sc = find_scenario("napkin-corner");
    const ShellProblem& p = sc.problem;
    double worst = 0.0;
    SplitMix64 rng(23);
    for (int k = 0; k < 50; ++k) {
      SirenConfig c;
      c.in_width = p.embed.width();
      c.hidden_layers = 2;
      c.hidden_width = 8;
      c.seed = rng.next();
      NdfWeights w = init_siren(c);
      const Vec3 u0 = eval_values(w, p.embed, p.constraints, p.surface, rng.uniform(0.0, 1.0),
                                  rng.uniform(0.0, 1.0), 0.0, material_array(p.material));
      worst = std::max(worst, norm(u0));
    }
    report("initial-state constraint", worst <= 1e-12, worst, 1e-12);
  }

  {  // Periodic seam closure on the cylinder.
    SurfaceSpec s = SurfaceSpec::cylinder(0.25, 1.0);
    EmbedSpec e = embed_for(s, false, 0.0);
    SirenConfig c;
    c.in_width = e.width();
    c.hidden_layers = 2;
    c.hidden_width = 8;
    c.seed = 77;
    NdfWeights w = init_siren(c);
    ConstraintSpec none;
    const std::array<double, 4> mat{1.0, 0.01, 1e4, 0.3};
    double worst = 0.0;
    for (double x2 : {0.1, 0.5, 0.9}) {
      const Vec3 a = eval_values(w, e, none, s, 0.0, x2, 0.0, mat);
      const Vec3 b = eval_values(w, e, none, s, 2 * std::numbers::pi, x2, 0.0, mat);
      worst = std::max(worst, norm(a - b));
    }
    report("periodic seam closure", worst == 0.0, worst, 0.0);
  }

  if (bad > 0) {
    std::printf("check: %d propert%s failed\n", bad, bad == 1 ? "y" : "ies");
    return kExitNumeric;
  }
  std::printf("check: all properties hold\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neural thin-shell cloth simulator"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "train a scenario to a checkpoint");
  std::string train_config, train_out = ".", train_profile = "ci";
  std::optional<std::uint64_t> train_seed;
  std::optional<int> train_iters;
  int train_threads = 1, train_log = 100;
  train_cmd->add_option("config", train_config, "builtin scenario name or config file")
      ->required();
  train_cmd->add_option("--seed", train_seed, "sampling and init seed");
  train_cmd->add_option("--iters", train_iters, "iteration count override");
  train_cmd->add_option("--out", train_out, "output directory");
  train_cmd->add_option("--profile", train_profile, "network/sampling budget: ci or paper");
  train_cmd->add_option("--threads", train_threads, "worker threads");
  train_cmd->add_option("--log", train_log, "stdout cadence (iterations)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "run obstacle-course benchmarks");
  std::string bench_which, bench_profile = "ci", bench_out;
  bench_cmd->add_option("case", bench_which, "benchmark name or 'all'")->required();
  bench_cmd->add_option("--profile", bench_profile, "budget profile: ci or paper");
  bench_cmd->add_option("--out", bench_out, "directory for metrics and checkpoints");

  // export
  auto* export_cmd = app.add_subcommand("export", "sample a checkpoint to OBJ frames");
  std::string export_ckpt, export_grid = "100x100", export_out = ".", export_config;
  int export_frames = 1;
  double export_fps = 0.0;
  export_cmd->add_option("checkpoint", export_ckpt, "checkpoint file (.ndf)")->required();
  export_cmd->add_option("--grid", export_grid, "vertex grid AxB");
  export_cmd->add_option("--frames", export_frames, "frame count");
  export_cmd->add_option("--fps", export_fps, "frame rate (0: spread over the horizon)");
  export_cmd->add_option("--out", export_out, "output directory");
  export_cmd->add_option("--config", export_config,
                         "scenario for the field (default: builtin digest match)");

  // edit
  auto* edit_cmd = app.add_subcommand("edit", "fine-tune a checkpoint toward edited scene");
  std::string edit_ckpt, edit_force, edit_pose, edit_out = ".", edit_config;
  int edit_iters = 0, edit_snap = 0;
  edit_cmd->add_option("checkpoint", edit_ckpt, "pretrained checkpoint (.ndf)")->required();
  edit_cmd->add_option("--force", edit_force, "target distributed force \"fx,fy,fz\"");
  edit_cmd->add_option("--pose", edit_pose, "pose file: {axis, angle, translation}");
  edit_cmd->add_option("--iters", edit_iters, "fine-tune iterations")->required();
  edit_cmd->add_option("--snap", edit_snap, "snapshot cadence (0: none)");
  edit_cmd->add_option("--out", edit_out, "output directory");
  edit_cmd->add_option("--config", edit_config,
                       "scenario for the field (default: builtin digest match)");

  // check
  app.add_subcommand("check", "run the FD/oracle property suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed())
      return cmd_train(train_config, train_seed, train_iters, train_out, train_profile,
                       train_threads, train_log);
    if (bench_cmd->parsed()) return cmd_bench(bench_which, bench_profile, bench_out);
    if (export_cmd->parsed())
      return cmd_export(export_ckpt, export_grid, export_frames, export_fps, export_out,
                        export_config);
    if (edit_cmd->parsed())
      return cmd_edit(edit_ckpt, edit_force, edit_pose, edit_iters, edit_snap, edit_out,
                      edit_config);
    return cmd_check();
  } catch (const TrainingDiverged& e) {
    std::fprintf(stderr, "numeric abort: %s (iteration %lld, loss %g)\n", e.what(),
                 static_cast<long long>(e.iteration), e.loss);
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric abort: %s\n", e.what());
    return kExitNumeric;
  }
}
