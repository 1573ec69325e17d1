// Python bindings for the main operations: scenario access, training,
// benchmarking, field evaluation, mesh export, and checkpoint inspection.
// The binding layer is deliberately thin -- plain functions over JSON
// strings, dicts, and numpy arrays -- so the C++ API stays the single
// source of truth.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "neuralshell/ndf.hpp"
#include "neuralshell/scenarios.hpp"
#include "neuralshell/trainer.hpp"

namespace py = pybind11;
using namespace neuralshell;

namespace {

// A scenario argument is either a builtin name or a path to a JSON config.
ScenarioConfig resolve_scenario(const std::string& spec) {
  if (std::filesystem::exists(spec)) return load_scenario_file(spec);
  try {
    return find_scenario(spec);
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("unknown scenario '" + spec + "' (and no such file exists)");
  }
}

BudgetProfile parse_profile(const std::string& name) {
  if (name == "ci") return BudgetProfile::Ci;
  if (name == "paper") return BudgetProfile::Paper;
  throw std::invalid_argument("unknown profile '" + name + "' (expected 'ci' or 'paper')");
}

std::array<double, 4> material_array(const MaterialParams& m) {
  return {m.rho, m.h, m.E, m.nu};
}

// Scenario a checkpoint belongs to: an explicit spec wins (but must match the
// stored digest); otherwise the digest picks it out of the builtin table.
ScenarioConfig scenario_for(const CheckpointMeta& meta, const std::string& spec) {
  if (!spec.empty()) {
    ScenarioConfig sc = resolve_scenario(spec);
    const ShellProblem& p = sc.problem;
    if (setup_digest(p.surface, p.embed, p.constraints) != meta.setup_digest)
      throw std::invalid_argument("scenario '" + spec +
                                  "' does not match the checkpoint (setup digest differs)");
    return sc;
  }
  for (const ScenarioConfig& sc : builtin_scenarios()) {
    const ShellProblem& p = sc.problem;
    if (setup_digest(p.surface, p.embed, p.constraints) == meta.setup_digest) return sc;
  }
  throw std::invalid_argument(
      "checkpoint does not match any builtin scenario; pass scenario=<config.json>");
}

py::dict report_dict(const std::string& name, const TrainReport& rep,
                     const std::string& metrics_path) {
  py::dict d;
  d["name"] = name;
  d["iterations"] = rep.iterations_run;
  d["final_loss"] = rep.history.empty() ? 0.0 : rep.history.back().loss;
  d["mean_abs_u"] = rep.history.empty() ? 0.0 : rep.history.back().mean_abs_u;
  d["stopped_on_plateau"] = rep.stopped_on_plateau;
  d["checkpoint"] = rep.checkpoint_path;
  d["metrics"] = metrics_path;
  return d;
}

}  // namespace

PYBIND11_MODULE(_neuralshell, m) {
  m.doc() = "Continuous space-time displacement fields for thin-shell cloth";

  m.def(
      "builtin_scenarios",
      [] {
        std::vector<std::string> names;
        for (const ScenarioConfig& sc : builtin_scenarios()) names.push_back(sc.name);
        return names;
      },
      "Names of the builtin scenarios.");

  m.def(
      "scenario_json",
      [](const std::string& scenario) { return scenario_to_json(resolve_scenario(scenario)); },
      py::arg("scenario"),
      "Full JSON description of a scenario (builtin name or config file path).");

  m.def(
      "train",
      [](const std::string& scenario, const std::string& profile, const std::string& out_dir,
         std::int64_t seed, std::int64_t iterations, int threads) {
        ScenarioConfig sc = resolve_scenario(scenario);
        const BudgetProfile prof = parse_profile(profile);
        apply_profile(sc, prof);
        if (iterations >= 0) sc.training.iterations = static_cast<std::size_t>(iterations);
        if (seed >= 0) sc.sampling.seed = static_cast<std::uint64_t>(seed);
        sc.training.threads = threads;
        validate(sc);

        SirenConfig net = network_for(sc, prof);
        if (seed >= 0) net.seed = static_cast<std::uint64_t>(seed);

        std::filesystem::create_directories(out_dir);
        sc.training.metrics_path = (std::filesystem::path(out_dir) / (sc.name + "-metrics.csv")).string();
        sc.training.checkpoint_path = (std::filesystem::path(out_dir) / (sc.name + ".ndf")).string();

        NdfWeights w = init_siren(net);
        TrainReport rep = [&] {
          py::gil_scoped_release release;
          return train(sc.problem, w, sc.sampling, sc.training);
        }();
        return report_dict(sc.name, rep, sc.training.metrics_path);
      },
      py::arg("scenario"), py::arg("profile") = "ci", py::arg("out_dir") = ".",
      py::arg("seed") = -1, py::arg("iterations") = -1, py::arg("threads") = 1,
      "Train a scenario under a budget profile; writes <name>.ndf and "
      "<name>-metrics.csv into out_dir and returns a summary dict.");

  m.def(
      "benchmark",
      [](const std::string& name, const std::string& profile) {
        const BenchmarkCase c = find_benchmark(name);
        const BudgetProfile prof = parse_profile(profile);
        BenchmarkReport r = [&] {
          py::gil_scoped_release release;
          return run_benchmark(c, prof);
        }();
        py::dict d;
        d["name"] = r.name;
        d["measured"] = r.measured;
        d["reference"] = r.reference;
        d["rel_error"] = r.rel_error;
        d["tolerance"] = r.tolerance;
        d["passed"] = r.pass;
        d["grid_max"] = r.grid_max;
        d["iterations"] = r.training.iterations_run;
        return d;
      },
      py::arg("name"), py::arg("profile") = "ci",
      "Run one obstacle-course benchmark and return the comparison against "
      "the analytic reference.");

  m.def(
      "evaluate",
      [](const std::string& checkpoint, std::vector<double> xi1, std::vector<double> xi2,
         double t, const std::string& scenario) {
        if (xi1.size() != xi2.size())
          throw std::invalid_argument("xi1 and xi2 must have equal length");
        CheckpointMeta meta;
        const NdfWeights w = load_checkpoint(checkpoint, &meta);
        const ScenarioConfig sc = scenario_for(meta, scenario);
        const ShellProblem& p = sc.problem;
        const std::array<double, 4> mat = material_array(p.material);

        const py::ssize_t n = static_cast<py::ssize_t>(xi1.size());
        py::array_t<double> u({n, py::ssize_t{3}});
        py::array_t<double> x({n, py::ssize_t{3}});
        auto uu = u.mutable_unchecked<2>();
        auto xx = x.mutable_unchecked<2>();
        for (py::ssize_t i = 0; i < n; ++i) {
          const Vec3 ui =
              eval_values(w, p.embed, p.constraints, p.surface, xi1[i], xi2[i], t, mat);
          const ReferencePoint r = eval_reference(p.surface, xi1[i], xi2[i]);
          for (int k = 0; k < 3; ++k) {
            uu(i, k) = ui[k];
            xx(i, k) = r.x[k];
          }
        }
        py::dict d;
        d["displacement"] = u;
        d["position"] = x;
        return d;
      },
      py::arg("checkpoint"), py::arg("xi1"), py::arg("xi2"), py::arg("t") = 0.0,
      py::arg("scenario") = "",
      "Evaluate a trained field at parameter points (xi1[i], xi2[i]) and time "
      "t; returns rest positions and displacements as (n, 3) arrays.");

  m.def(
      "export_meshes",
      [](const std::string& checkpoint, const std::string& out_dir, int n1, int n2, int frames,
         double fps, const std::string& scenario) {
        CheckpointMeta meta;
        const NdfWeights w = load_checkpoint(checkpoint, &meta);
        const ScenarioConfig sc = scenario_for(meta, scenario);
        ExportOptions opt;
        opt.n1 = n1;
        opt.n2 = n2;
        opt.frames = frames;
        opt.fps = fps;
        opt.out_dir = out_dir;
        std::filesystem::create_directories(out_dir);
        return export_meshes(w, sc.problem, opt);
      },
      py::arg("checkpoint"), py::arg("out_dir") = ".", py::arg("n1") = 100, py::arg("n2") = 100,
      py::arg("frames") = 1, py::arg("fps") = 0.0, py::arg("scenario") = "",
      "Sample a trained field onto OBJ meshes (frame_%04d.obj); returns the "
      "written paths.");

  m.def(
      "checkpoint_info",
      [](const std::string& path) {
        CheckpointMeta meta;
        const NdfWeights w = load_checkpoint(path, &meta);
        py::dict d;
        d["domain"] = py::make_tuple(meta.lo1, meta.hi1, meta.lo2, meta.hi2);
        d["duration"] = meta.duration;
        d["setup_digest"] = meta.setup_digest;
        d["seed"] = meta.seed;
        d["parameters"] = w.theta.size();
        d["hidden_layers"] = w.config.hidden_layers;
        d["hidden_width"] = w.config.hidden_width;
        d["in_width"] = w.config.in_width;
        d["omega0"] = w.config.omega0;
        d["activation"] = w.config.activation == Activation::Sine ? "sine" : "gelu";
        return d;
      },
      py::arg("path"), "Header metadata and network shape of a saved checkpoint.");
}
