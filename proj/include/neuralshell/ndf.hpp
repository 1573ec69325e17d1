#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neuralshell/jet.hpp"
#include "neuralshell/surface.hpp"
#include "neuralshell/tape.hpp"
#include "neuralshell/vec.hpp"

namespace neuralshell {

// Neural displacement field: a sinusoidal MLP over embedded space-time
// coordinates, composed with closed-form constraint factors so boundary and
// initial conditions hold exactly for any weights.

enum class Activation : std::uint8_t { Sine, Gelu };

struct SirenConfig {
  int in_width = 3;
  int hidden_layers = 5;
  int hidden_width = 512;
  int out_width = 3;
  double omega0 = 15.0;
  Activation activation = Activation::Sine;
  std::uint64_t seed = 0;
};

// Shape of one dense layer inside the packed parameter vector.
struct LayerShape {
  std::int32_t w_off = 0;  // offset of the row-major (nout x nin) weight block
  std::int32_t b_off = 0;  // offset of the bias block
  std::int32_t nin = 0;
  std::int32_t nout = 0;
};

std::vector<LayerShape> layer_shapes(const SirenConfig& c);
std::size_t parameter_count(const SirenConfig& c);

struct NdfWeights {
  SirenConfig config;
  std::vector<double> theta;  // packed [W0, b0, W1, b1, ...]
};

// Deterministic sinusoidal-network initialization: first layer uniform in
// +-1/nin, deeper layers uniform in +-sqrt(6/nin)/omega0 (so pre-activation
// magnitudes stay in the sine's expressive range).  The GELU variant uses
// plain +-sqrt(6/nin) fan-in scaling.
NdfWeights init_siren(const SirenConfig& c);

// ---------------------------------------------------------------------------
// Input embedding

struct EmbedSpec {
  struct Axis {
    bool periodic = false;
    double lo = 0.0, hi = 1.0;
  };
  std::array<Axis, 2> axis;
  bool dynamic = false;   // append normalized time when true
  double duration = 1.0;  // t in [0, duration]
  int material_dims = 0;  // 0 or 4 (rho, h, E, nu)
  std::array<double, 4> mat_lo{};
  std::array<double, 4> mat_hi{};

  int width() const {
    return (axis[0].periodic ? 2 : 1) + (axis[1].periodic ? 2 : 1) + (dynamic ? 1 : 0) +
           material_dims;
  }
};

// Network inputs as plain jets over (xi1, xi2, t): non-periodic axes map
// affinely to [0,1], periodic axes become a (cos, sin) pair of the angular
// coordinate, time maps to t/duration, material values map affinely from
// their ranges to [0,1] with zero derivatives.  Callers pass coordinates
// already wrapped onto the base period.
std::vector<DJet> embed_inputs(const EmbedSpec& e, double xi1, double xi2, double t,
                               std::span<const double, 4> mat);

// ---------------------------------------------------------------------------
// Hard constraints

struct ConstraintFactor {
  enum class Kind : std::uint8_t { PointGaussian, EdgeGaussian, PolyEdges };
  Kind kind = Kind::PointGaussian;
  double c1 = 0.0, c2 = 0.0;  // PointGaussian anchor
  int axis = 0;               // EdgeGaussian axis
  double at = 0.0;            // EdgeGaussian anchor coordinate
  std::array<bool, 2> poly_axes{false, false};  // PolyEdges pinned axes
  double sigma = 0.01;
  std::array<bool, 3> mask{true, true, true};  // gated Cartesian components
};

struct PrescribedMotion {
  enum class Kind : std::uint8_t { TranslationRamp, RimRotation };
  Kind kind = Kind::TranslationRamp;
  int factor = 0;     // the constraint factor whose complement localizes it
  double sign = 1.0;
  Vec3 velocity{};    // TranslationRamp: b(t) = velocity * t
  double radius = 0.0, rate = 0.0;  // RimRotation about the axis through y
};

struct ConstraintSpec {
  std::vector<ConstraintFactor> factors;
  std::vector<PrescribedMotion> motions;
  bool initial_state = false;  // multiply the raw field by I(t) = t^2
};

// Distance-factor jet B(xi): exactly zero at the anchor set, ~1 away from it.
DJet factor_jet(const ConstraintFactor& f, const SurfaceSpec& s, double xi1, double xi2);

// Prescribed boundary displacement b(xi, t) and its jets; rotated by the
// surface's rigid pose so edits carry the boundary motion along.
std::array<DJet, 3> prescribed_motion(const PrescribedMotion& m, const SurfaceSpec& s,
                                      double xi1, double t);

// ---------------------------------------------------------------------------
// Field evaluation

// The packed network registered on a tape (weights become parameter leaves).
struct PackedNet {
  std::int32_t base = 0;
  SirenConfig config;
  std::vector<LayerRef> layers;
};

PackedNet register_net(Tape& t, const NdfWeights& w);

struct DisplacementJet {
  std::array<Jet, 3> u;
};

// Raw network output jets (no constraints); coordinates must be pre-wrapped.
std::array<Jet, 3> eval_raw(Tape& t, const PackedNet& net, const EmbedSpec& e, double xi1,
                            double xi2, double tm, std::span<const double, 4> mat);

// Constraint composition:
//   u_c = F_c * [I(t)] * prod_{j: mask_j[c]} B_j  +  sum_k s_k (1 - B_{f_k}) b_k,c
DisplacementJet apply_constraints(Tape& t, const ConstraintSpec& c, const SurfaceSpec& s,
                                  const std::array<Jet, 3>& raw, double xi1, double xi2,
                                  double tm);

// Full field evaluation on the tape (wraps periodic coordinates first).
DisplacementJet eval_ndf(Tape& t, const PackedNet& net, const EmbedSpec& e,
                         const ConstraintSpec& c, const SurfaceSpec& s, double xi1, double xi2,
                         double tm, std::span<const double, 4> mat);

// Value-only evaluation in plain doubles (probing, mesh export, FD oracles).
Vec3 eval_values(const NdfWeights& w, const EmbedSpec& e, const ConstraintSpec& c,
                 const SurfaceSpec& s, double xi1, double xi2, double tm,
                 std::span<const double, 4> mat);

// ---------------------------------------------------------------------------
// Checkpoints ("NDF1": little-endian header + float32 row-major layer blocks)

struct CheckpointMeta {
  double lo1 = 0.0, hi1 = 1.0, lo2 = 0.0, hi2 = 1.0, duration = 0.0;
  std::uint64_t setup_digest = 0;  // FNV-1a over surface + embedding + constraints
  std::uint64_t seed = 0;
};

// Stable digest of everything the weights are only meaningful against.
std::uint64_t setup_digest(const SurfaceSpec& s, const EmbedSpec& e, const ConstraintSpec& c);

void save_checkpoint(const std::string& path, const NdfWeights& w, const CheckpointMeta& meta);
NdfWeights load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr);

}  // namespace neuralshell
