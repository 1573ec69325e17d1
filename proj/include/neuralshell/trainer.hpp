#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "neuralshell/energy.hpp"
#include "neuralshell/ndf.hpp"
#include "neuralshell/vec.hpp"

namespace neuralshell {

// Stratified Monte-Carlo sampling, the Adam loop, convergence metrics, and
// simulation editing by fine-tuning against interpolated scene parameters.

struct SamplingPlan {
  int n1 = 16, n2 = 16;  // spatial grid cells per axis
  int nt = 1;            // time strata (ignored unless the problem is dynamic)
  std::uint64_t seed = 0;
  bool resample = true;  // fresh draw every iteration (off: iteration-0 batch reused)
};

// One uniform draw per (cell x time-stratum); deterministic in (seed, iteration).
// Quasi-static problems get t = 0 and a single time stratum.
std::vector<SamplePoint> stratified_samples(const SamplingPlan& plan, const SurfaceSpec& s,
                                            double duration, bool dynamic,
                                            std::uint64_t iteration);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimState {
  AdamConfig cfg;
  std::vector<double> m, v;  // first/second moments, shaped like the parameters
  std::int64_t step = 0;
};

OptimState make_optim(std::size_t n_params, const AdamConfig& cfg);

// Standard bias-corrected Adam update in place; throws TrainingDiverged on a
// non-finite gradient.
void adam_step(OptimState& st, std::span<const double> grad, std::span<double> params);

// Raised when the loss or gradient stops being finite; carries a snapshot of
// where training stood.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::string msg, std::int64_t iter, double loss_value, double param_norm,
                   double grad_norm, std::vector<SamplePoint> batch_snapshot)
      : std::runtime_error(std::move(msg)),
        iteration(iter),
        loss(loss_value),
        parameter_norm(param_norm),
        gradient_norm(grad_norm),
        batch(std::move(batch_snapshot)) {}

  std::int64_t iteration = 0;
  double loss = 0.0;
  double parameter_norm = 0.0;
  double gradient_norm = 0.0;
  std::vector<SamplePoint> batch;
};

struct TrainConfig {
  int iterations = 2000;
  AdamConfig adam;
  int chunk = 8;    // samples per tape build (bounds tape memory)
  int threads = 1;  // >1 fans chunk evaluation out; bitwise-reproducible at 1
  int checkpoint_every = 0;     // 0: final write only (when a path is set)
  std::string checkpoint_path;  // empty: never write checkpoints
  std::string metrics_path;     // empty: no CSV stream
  int log_every = 0;            // stdout cadence; 0 = silent
  bool plateau_stop = false;    // stop when smoothed mean |u| flattens out
  double plateau_tol = 1e-4;
  int plateau_window = 200;
  std::uint64_t material_seed = 0x6d617464;  // conditioned-material draw stream
};

struct IterationStats {
  int iteration = 0;
  double loss = 0.0;
  double mean_abs_u = 0.0;
  double wall_ms = 0.0;
};

struct TrainReport {
  std::vector<IterationStats> history;
  int iterations_run = 0;
  bool stopped_on_plateau = false;
  std::string checkpoint_path;  // final checkpoint, when one was written
};

// Full training loop: resample -> loss -> backward -> Adam, with metrics and
// checkpoints.  Weights are updated in place; (seed, config) fully determine
// the trajectory when threads == 1.
TrainReport train(const ShellProblem& p, NdfWeights& w, const SamplingPlan& plan,
                  const TrainConfig& cfg);

// Gradient of the full-batch loss at fixed weights (chunked evaluation);
// returns the loss value.  Exposed for derivative validation.
double loss_and_gradient(const ShellProblem& p, const NdfWeights& w,
                         std::span<const SamplePoint> batch, const MaterialParams& draw,
                         int chunk, int threads, std::span<double> grad);

// Simulation editing: what the fine-tune trajectory is steered toward.
struct EditTarget {
  bool has_force = false;
  Vec3 force{};  // target distributed load (the `constant` field)
  bool has_pose = false;
  Quat pose_rotation = Quat::identity();
  Vec3 pose_translation{};
};

struct EditReport {
  TrainReport training;
  std::vector<NdfWeights> trajectory;  // snapshots at cadence, final included
  std::vector<double> alphas;          // interpolation state of each snapshot
};

// Fine-tunes pretrained weights while the scene parameters sweep linearly
// (forces; translation) and spherically (rotation) from the base problem to
// the target over `iterations` steps: step i trains against the mix at
// alpha = i/iterations, so the last step sees exactly the target scene.
EditReport fine_tune_edit(const ShellProblem& base, NdfWeights& w, const EditTarget& target,
                          int iterations, const SamplingPlan& plan, const TrainConfig& cfg,
                          int snapshot_every = 0);

}  // namespace neuralshell
