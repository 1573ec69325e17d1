#include "neuralshell/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <thread>

#include "neuralshell/rng.hpp"

namespace neuralshell {

std::vector<SamplePoint> stratified_samples(const SamplingPlan& plan, const SurfaceSpec& s,
                                            double duration, bool dynamic,
                                            std::uint64_t iteration) {
  if (plan.n1 < 1 || plan.n2 < 1 || plan.nt < 1) {
    throw std::invalid_argument("sampling plan needs at least one cell per axis");
  }
  const int nt = dynamic ? plan.nt : 1;
  SplitMix64 rng(mix_seed(plan.seed, iteration));
  std::vector<SamplePoint> out;
  out.reserve(static_cast<std::size_t>(plan.n1) * plan.n2 * nt);
  const double c1 = s.period(0) / plan.n1;
  const double c2 = s.period(1) / plan.n2;
  const double ct = dynamic ? duration / nt : 0.0;
  for (int i = 0; i < plan.n1; ++i) {
    for (int j = 0; j < plan.n2; ++j) {
      for (int k = 0; k < nt; ++k) {
        SamplePoint sp;
        sp.xi1 = s.lo[0] + (i + rng.uniform()) * c1;
        sp.xi2 = s.lo[1] + (j + rng.uniform()) * c2;
        sp.t = dynamic ? (k + rng.uniform()) * ct : 0.0;
        out.push_back(sp);
      }
    }
  }
  return out;
}

OptimState make_optim(std::size_t n_params, const AdamConfig& cfg) {
  OptimState st;
  st.cfg = cfg;
  st.m.assign(n_params, 0.0);
  st.v.assign(n_params, 0.0);
  return st;
}

void adam_step(OptimState& st, std::span<const double> grad, std::span<double> params) {
  if (grad.size() != params.size() || grad.size() != st.m.size()) {
    throw std::invalid_argument("optimizer state, gradient and parameters disagree in shape");
  }
  double g2 = 0.0;
  for (const double g : grad) g2 += g * g;
  if (!std::isfinite(g2)) {
    double p2 = 0.0;
    for (const double p : params) p2 += p * p;
    throw TrainingDiverged("non-finite gradient reached the optimizer", st.step, 0.0,
                           std::sqrt(p2), g2, {});
  }
  st.step += 1;
  const double b1 = st.cfg.beta1, b2 = st.cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
  const double lr = st.cfg.lr, eps = st.cfg.eps;
  for (std::size_t k = 0; k < grad.size(); ++k) {
    st.m[k] = b1 * st.m[k] + (1.0 - b1) * grad[k];
    st.v[k] = b2 * st.v[k] + (1.0 - b2) * grad[k] * grad[k];
    params[k] -= lr * (st.m[k] / c1) / (std::sqrt(st.v[k] / c2) + eps);
  }
}

double loss_and_gradient(const ShellProblem& p, const NdfWeights& w,
                         std::span<const SamplePoint> batch, const MaterialParams& draw,
                         int chunk, int threads, std::span<double> grad) {
  if (grad.size() != w.theta.size()) {
    throw std::invalid_argument("gradient buffer does not match the parameter count");
  }
  if (batch.empty()) throw std::invalid_argument("empty sample batch");
  if (chunk < 1) chunk = 1;
  const std::size_t n = batch.size();
  const std::size_t nchunks = (n + static_cast<std::size_t>(chunk) - 1) / chunk;
  std::fill(grad.begin(), grad.end(), 0.0);

  auto eval_chunk = [&](Tape& tape, std::vector<double>& tmp, std::size_t ci,
                        std::span<double> gacc) -> double {
    tape.reset();
    const PackedNet net = register_net(tape, w);
    const std::size_t s0 = ci * chunk;
    const std::size_t len = std::min(n - s0, static_cast<std::size_t>(chunk));
    const Scalar l =
        material_conditioned_loss(tape, net, p, batch.subspan(s0, len), n, draw, ci == 0);
    tape.backward(l);
    tape.gradient(tmp);
    for (std::size_t k = 0; k < gacc.size(); ++k) gacc[k] += tmp[k];
    return tape.value(l);
  };

  if (threads <= 1 || nchunks == 1) {
    Tape tape;
    std::vector<double> tmp(w.theta.size());
    double loss = 0.0;
    for (std::size_t ci = 0; ci < nchunks; ++ci) loss += eval_chunk(tape, tmp, ci, grad);
    return loss;
  }

  // Fan chunks out round-robin; each worker owns a tape and a gradient
  // buffer, reduced in worker order afterwards (deterministic per count).
  const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(threads), nchunks);
  std::vector<std::vector<double>> gbuf(nw, std::vector<double>(w.theta.size(), 0.0));
  std::vector<double> lbuf(nw, 0.0);
  std::vector<std::exception_ptr> errs(nw);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t ti = 0; ti < nw; ++ti) {
    pool.emplace_back([&, ti] {
      try {
        Tape tape;
        std::vector<double> tmp(w.theta.size());
        for (std::size_t ci = ti; ci < nchunks; ci += nw) {
          lbuf[ti] += eval_chunk(tape, tmp, ci, gbuf[ti]);
        }
      } catch (...) {
        errs[ti] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errs) {
    if (e) std::rethrow_exception(e);
  }
  double loss = 0.0;
  for (std::size_t ti = 0; ti < nw; ++ti) {
    loss += lbuf[ti];
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += gbuf[ti][k];
  }
  return loss;
}

namespace {

MaterialParams material_draw(const ShellProblem& p, std::uint64_t stream, int iteration) {
  MaterialParams d = p.material;
  if (p.embed.material_dims != 4) return d;
  SplitMix64 rng(mix_seed(stream, static_cast<std::uint64_t>(iteration)));
  double* fields[4] = {&d.rho, &d.h, &d.E, &d.nu};
  for (int k = 0; k < 4; ++k) {
    const double lo = p.embed.mat_lo[static_cast<std::size_t>(k)];
    const double hi = p.embed.mat_hi[static_cast<std::size_t>(k)];
    *fields[k] = hi > lo ? rng.uniform(lo, hi) : lo;
  }
  return d;
}

double mean_displacement(const ShellProblem& p, const NdfWeights& w,
                         std::span<const SamplePoint> batch, const MaterialParams& draw) {
  static const ConstraintSpec kNone{};
  const ConstraintSpec& c = p.soft_constraints ? kNone : p.constraints;
  const std::array<double, 4> mat{draw.rho, draw.h, draw.E, draw.nu};
  double acc = 0.0;
  for (const auto& sp : batch) {
    acc += norm(eval_values(w, p.embed, c, p.surface, sp.xi1, sp.xi2, sp.t, mat));
  }
  return acc / static_cast<double>(batch.size());
}

struct MetricsStream {
  std::ofstream f;

  void open(const std::string& path) {
    if (path.empty()) return;
    f.open(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open metrics stream: " + path);
    f << "iteration,loss,mean_abs_u,wall_ms\n";
  }

  void row(const IterationStats& s) {
    if (!f.is_open()) return;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.3f\n", s.iteration, s.loss, s.mean_abs_u,
                  s.wall_ms);
    f << buf;
    f.flush();
  }
};

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

// One resample -> loss/gradient -> Adam pass; throws TrainingDiverged with a
// batch snapshot when the loss or gradient stops being finite.
IterationStats training_iteration(const ShellProblem& prob, NdfWeights& w, OptimState& opt,
                                  const SamplingPlan& plan, const TrainConfig& cfg, int it,
                                  std::vector<double>& grad) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t draw_index = plan.resample ? static_cast<std::uint64_t>(it) : 0;
  const std::vector<SamplePoint> batch =
      stratified_samples(plan, prob.surface, prob.embed.duration, prob.dynamic, draw_index);
  const MaterialParams draw = material_draw(prob, cfg.material_seed, it);

  const double loss =
      loss_and_gradient(prob, w, batch, draw, cfg.chunk, cfg.threads, grad);
  const double gnorm = l2_norm(grad);
  if (!std::isfinite(loss) || !std::isfinite(gnorm)) {
    char msg[256];
    std::snprintf(msg, sizeof(msg),
                  "training diverged at iteration %d: loss=%g |grad|=%g |theta|=%g", it, loss,
                  gnorm, l2_norm(w.theta));
    throw TrainingDiverged(msg, it, loss, l2_norm(w.theta), gnorm, batch);
  }
  adam_step(opt, grad, w.theta);

  IterationStats s;
  s.iteration = it;
  s.loss = loss;
  s.mean_abs_u = mean_displacement(prob, w, batch, draw);
  s.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                  .count();
  return s;
}

// Smoothed metric (trailing 50-sample mean) used by the plateau rule.
double smoothed(const std::vector<IterationStats>& h, int end) {
  const int first = std::max(0, end - 49);
  double s = 0.0;
  for (int i = first; i <= end; ++i) s += h[static_cast<std::size_t>(i)].mean_abs_u;
  return s / (end - first + 1);
}

}  // namespace

TrainReport train(const ShellProblem& p, NdfWeights& w, const SamplingPlan& plan,
                  const TrainConfig& cfg) {
  if (cfg.iterations < 0) throw std::invalid_argument("negative iteration budget");
  OptimState opt = make_optim(w.theta.size(), cfg.adam);
  std::vector<double> grad(w.theta.size());
  MetricsStream metrics;
  metrics.open(cfg.metrics_path);

  CheckpointMeta meta;
  meta.lo1 = p.surface.lo[0];
  meta.hi1 = p.surface.hi[0];
  meta.lo2 = p.surface.lo[1];
  meta.hi2 = p.surface.hi[1];
  meta.duration = p.embed.duration;
  meta.setup_digest = setup_digest(p.surface, p.embed, p.constraints);
  meta.seed = w.config.seed;

  TrainReport rep;
  for (int it = 0; it < cfg.iterations; ++it) {
    const IterationStats s = training_iteration(p, w, opt, plan, cfg, it, grad);
    rep.history.push_back(s);
    rep.iterations_run = it + 1;
    metrics.row(s);
    if (cfg.log_every > 0 && (it % cfg.log_every == 0 || it + 1 == cfg.iterations)) {
      std::printf("iter %6d  loss %-14.6g  mean|u| %-12.6g  %.0f ms\n", it, s.loss,
                  s.mean_abs_u, s.wall_ms);
      std::fflush(stdout);
    }
    if (!cfg.checkpoint_path.empty() && cfg.checkpoint_every > 0 &&
        (it + 1) % cfg.checkpoint_every == 0) {
      save_checkpoint(cfg.checkpoint_path, w, meta);
    }
    const int now = static_cast<int>(rep.history.size()) - 1;
    const int then = now - cfg.plateau_window;
    if (cfg.plateau_stop && then >= 49) {
      const double a = smoothed(rep.history, then);
      const double b = smoothed(rep.history, now);
      if (std::abs(b - a) <= cfg.plateau_tol * std::max(std::abs(a), 1e-12)) {
        rep.stopped_on_plateau = true;
        break;
      }
    }
  }
  if (!cfg.checkpoint_path.empty()) {
    save_checkpoint(cfg.checkpoint_path, w, meta);
    rep.checkpoint_path = cfg.checkpoint_path;
  }
  return rep;
}

EditReport fine_tune_edit(const ShellProblem& base, NdfWeights& w, const EditTarget& target,
                          int iterations, const SamplingPlan& plan, const TrainConfig& cfg,
                          int snapshot_every) {
  if (iterations < 1) throw std::invalid_argument("editing needs at least one iteration");
  if (target.has_force && base.load.kind != LoadSpec::Kind::Distributed) {
    throw std::invalid_argument("force edits require a distributed load");
  }
  const int snap = snapshot_every > 0 ? snapshot_every : std::max(1, iterations / 10);

  OptimState opt = make_optim(w.theta.size(), cfg.adam);
  std::vector<double> grad(w.theta.size());
  MetricsStream metrics;
  metrics.open(cfg.metrics_path);

  EditReport er;
  er.trajectory.push_back(w);
  er.alphas.push_back(0.0);

  ShellProblem prob = base;
  for (int i = 1; i <= iterations; ++i) {
    const double alpha = static_cast<double>(i) / iterations;
    if (target.has_force) {
      prob.load.constant = lerp(base.load.constant, target.force, alpha);
    }
    if (target.has_pose) {
      prob.surface.pose_rotation =
          slerp(base.surface.pose_rotation, target.pose_rotation, alpha);
      prob.surface.pose_translation =
          lerp(base.surface.pose_translation, target.pose_translation, alpha);
    }
    const IterationStats s = training_iteration(prob, w, opt, plan, cfg, i - 1, grad);
    er.training.history.push_back(s);
    er.training.iterations_run = i;
    metrics.row(s);
    if (i % snap == 0 || i == iterations) {
      er.trajectory.push_back(w);
      er.alphas.push_back(alpha);
    }
  }

  if (!cfg.checkpoint_path.empty()) {
    CheckpointMeta meta;
    meta.lo1 = prob.surface.lo[0];
    meta.hi1 = prob.surface.hi[0];
    meta.lo2 = prob.surface.lo[1];
    meta.hi2 = prob.surface.hi[1];
    meta.duration = prob.embed.duration;
    meta.setup_digest = setup_digest(prob.surface, prob.embed, prob.constraints);
    meta.seed = w.config.seed;
    save_checkpoint(cfg.checkpoint_path, w, meta);
    er.training.checkpoint_path = cfg.checkpoint_path;
  }
  return er;
}

}  // namespace neuralshell
