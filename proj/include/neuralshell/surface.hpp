#pragma once

#include <array>
#include <cstdint>

#include "neuralshell/jet.hpp"
#include "neuralshell/tape.hpp"
#include "neuralshell/vec.hpp"

namespace neuralshell {

// Reference midsurface geometry.  Each supported surface is an analytic
// chart over a rectangle in curvilinear coordinates (xi1, xi2); frames carry
// position derivatives to third order so that covariant derivatives of the
// displacement gradients (and hence bending strains) close exactly.

enum class SurfaceKind : std::uint8_t { Plane, Cylinder, RoofArc, Cone };

// Index of the symmetric third-derivative slot for axes (a, b, c).
constexpr int triple_index(int a, int b, int c) { return a + b + c; }  // 111,112,122,222

struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::Plane;
  double radius = 0.0;                          // cylinder / arc radius
  double radius_top = 0.0, radius_bottom = 0.0; // cone rim radii
  double angle_offset = 0.0;                    // arc start angle (radians)
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<bool, 2> periodic{false, false};

  // Optional rigid pose applied to the embedding (reference edits).  The
  // intrinsic geometry (metric, curvature) is unchanged by construction.
  Quat pose_rotation = Quat::identity();
  Vec3 pose_translation{};

  // x = (xi1, xi2, 0) over [0, side]^2
  static SurfaceSpec plane(double side);
  // x = (R cos xi1, xi2, R sin xi1) over [0, 2pi) x [0, length], periodic in xi1
  static SurfaceSpec cylinder(double radius, double length);
  // x = (R cos(xi1 + offset), R sin(xi1 + offset), xi2) over [0, span] x [0, length]
  static SurfaceSpec roof_arc(double radius, double length, double angle_span,
                              double angle_offset);
  // x = (r(xi2) cos xi1, xi2, r(xi2) sin xi1), r linear from radius_bottom to
  // radius_top, over [0, 2pi) x [0, length], periodic in xi1
  static SurfaceSpec cone(double radius_top, double radius_bottom, double length);

  double period(int axis) const { return hi[axis] - lo[axis]; }
  double domain_area() const { return (hi[0] - lo[0]) * (hi[1] - lo[1]); }

  // Modular reduction onto [lo, lo+period) for periodic axes (identity for
  // in-range inputs and for non-periodic axes).  The reduction itself is
  // exact, so exact period offsets from lo wrap onto lo bitwise (closed seam
  // columns in exports); generic congruent inputs agree to the rounding of
  // the offset coordinate itself.
  double wrap(int axis, double xi) const;
};

// Position and its parametric derivatives up to third order.
struct ReferencePoint {
  Vec3 x;
  std::array<Vec3, 2> d1;  // x,1  x,2
  std::array<Vec3, 3> d2;  // x,11  x,12  x,22
  std::array<Vec3, 4> d3;  // x,111  x,112  x,122  x,222
};

ReferencePoint eval_reference(const SurfaceSpec& s, double xi1, double xi2);

// Full first-order frame data plus the parametric derivatives of the
// curvature and Christoffel fields needed by covariant second derivatives.
struct SurfaceFrame {
  Vec3 x;
  std::array<Vec3, 2> a;      // covariant tangents
  Vec3 a3;                    // unit normal
  std::array<Vec3, 2> a_up;   // contravariant tangents
  Sym2 metric;                // a_ab
  Sym2 metric_inv;            // a^ab
  Sym2 curv;                  // b_ab
  double bmix[2][2];          // b_a^l, row a col l
  double gamma[2][3];         // Gamma^l_ab: [l][pair(a,b)]
  double jac = 0.0;           // sqrt(det a_ab) = |a1 x a2|

  std::array<Vec3, 2> a3_d1;  // a3,g
  std::array<Vec3, 3> a3_d2;  // a3,gd by pair
  double curv_d1[2][3];       // b_ab,g: [g][pair(a,b)]
  double bmix_d1[2][2][2];    // b_a^l,g: [g][a][l]
  double gamma_d1[2][2][3];   // Gamma^l_ab,g: [g][l][pair(a,b)]

  std::array<Vec3, 3> x_d2;   // a_{a,b} = x,ab
  std::array<Vec3, 4> x_d3;   // x,abg
};

// Throws std::domain_error when the tangents degenerate (|a1 x a2| ~ 0).
SurfaceFrame frame(const SurfaceSpec& s, double xi1, double xi2);

// Plane-stress elasticity tensor H^{abld} on the frame's metric, flattened
// in index order (11, 12, 21, 22) on both slots.
struct ElasticityTensor {
  double h[4][4];
};

ElasticityTensor elasticity_tensor(const Sym2& metric_inv, double nu);

// Covariant components (u_1, u_2, u_3) = (u.a_1, u.a_2, u.a3) of a Cartesian
// vector at a frame.
std::array<double, 3> to_covariant(const SurfaceFrame& f, const Vec3& u);

// Covariant-component jets of a Cartesian displacement jet; the output
// derivatives include the basis derivatives (product rule against a_l(xi)
// and a3(xi)), which is what the strain kinematics consume.
std::array<Jet, 3> covariant_jets(Tape& t, const SurfaceFrame& f, const std::array<Jet, 3>& u);

// Contravariant in-plane components f^a = f.a^a and normal component
// f^3 = f.a3 of a Cartesian load density; by construction
// f^a u_a + f^3 u_3 == f.u for any displacement.
std::array<double, 3> force_components(const SurfaceFrame& f, const Vec3& load);

// Index gymnastics for symmetric 2-tensors (tests and diagnostics).
Sym2 raise_indices(const Sym2& t_low, const Sym2& metric_inv);
Sym2 lower_indices(const Sym2& t_up, const Sym2& metric);

}  // namespace neuralshell
