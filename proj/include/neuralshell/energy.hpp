#pragma once

#include <array>
#include <span>
#include <vector>

#include "neuralshell/ndf.hpp"
#include "neuralshell/surface.hpp"
#include "neuralshell/tape.hpp"
#include "neuralshell/vec.hpp"

namespace neuralshell {

// Thin-shell energy terms and the Monte-Carlo training loss.

struct MaterialParams {
  double rho = 0.0;  // area mass density
  double h = 0.0;    // thickness
  double E = 0.0;    // Young's modulus
  double nu = 0.0;   // Poisson's ratio

  // Stretching and bending stiffness; always derived from the current
  // fields so edits can never leave them stale.
  double stretching() const { return E * h / (1.0 - nu * nu); }
  double bending() const { return E * h * h * h / (12.0 * (1.0 - nu * nu)); }
};

// {D, B} pair for a material.
std::array<double, 2> stiffness(const MaterialParams& m);

struct LoadSpec {
  enum class Kind : std::uint8_t { Distributed, Points };
  Kind kind = Kind::Distributed;

  // Distributed force density: constant part (optionally scaled by the
  // material density, for gravity-type loads) plus a sinusoidal-in-time
  // part  amp * sin(omega t + phase) * dir  (wind-type loads).
  Vec3 constant{};
  bool scale_by_density = false;
  Vec3 sin_dir{};
  double sin_amp = 0.0, sin_omega = 0.0, sin_phase = 0.0;

  struct PointLoad {
    double xi1 = 0.0, xi2 = 0.0;
    Vec3 force{};
  };
  std::vector<PointLoad> points;

  Vec3 distributed_at(double t, double rho) const {
    Vec3 f = scale_by_density ? constant * rho : constant;
    if (sin_amp != 0.0) f += sin_dir * (sin_amp * std::sin(sin_omega * t + sin_phase));
    return f;
  }
};

// Everything the loss needs to evaluate one scenario's physics.
struct ShellProblem {
  SurfaceSpec surface;
  EmbedSpec embed;
  ConstraintSpec constraints;
  LoadSpec load;
  MaterialParams material;
  bool dynamic = false;    // keep the kinetic term and the time input
  bool nonlinear = true;   // quadratic strain terms on/off (ablation)
  // Soft-constraint ablation: skip the hard composition and add a weighted
  // boundary penalty instead.
  bool soft_constraints = false;
  double soft_weight = 1e3;
};

struct SamplePoint {
  double xi1 = 0.0, xi2 = 0.0, t = 0.0;
};

// 1/2 D eps.H.eps + 1/2 B kappa.H.kappa for flattened (11,12,21,22) strains.
Scalar energy_density(Tape& t, const ElasticityTensor& H, double D, double B,
                      std::span<const Scalar, 4> eps, std::span<const Scalar, 4> kappa);

// External work density f.u (identically f^a u_a + f^3 u_3).
Scalar external_energy_density(Tape& t, const Vec3& load, const std::array<Jet, 3>& u);

// 1/2 rho |du/dt|^2 of the Cartesian displacement jets.
Scalar kinetic_energy_density(Tape& t, double rho, const std::array<Jet, 3>& u);

// Monte-Carlo loss over `samples`, normalized by `total_samples` (callers
// streaming the batch through several tape builds pass the full batch size
// and set with_global_terms on exactly one call: it controls the terms that
// are not per-sample, i.e. point-load work and the soft-constraint penalty).
Scalar total_loss(Tape& t, const PackedNet& net, const ShellProblem& p,
                  std::span<const SamplePoint> samples, std::size_t total_samples,
                  bool with_global_terms = true);

// Same loss with an explicit material draw (conditioned training); throws
// std::invalid_argument when the draw leaves the embedded material range.
Scalar material_conditioned_loss(Tape& t, const PackedNet& net, const ShellProblem& p,
                                 std::span<const SamplePoint> samples,
                                 std::size_t total_samples, const MaterialParams& draw,
                                 bool with_global_terms = true);

}  // namespace neuralshell
