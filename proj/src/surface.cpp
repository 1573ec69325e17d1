#include "neuralshell/surface.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace neuralshell {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}
}

SurfaceSpec SurfaceSpec::plane(double side) {
  require_positive(side, "plane side");
  SurfaceSpec s;
  s.kind = SurfaceKind::Plane;
  s.hi = {side, side};
  return s;
}

SurfaceSpec SurfaceSpec::cylinder(double radius, double length) {
  require_positive(radius, "cylinder radius");
  require_positive(length, "cylinder length");
  SurfaceSpec s;
  s.kind = SurfaceKind::Cylinder;
  s.radius = radius;
  s.hi = {kTwoPi, length};
  s.periodic = {true, false};
  return s;
}

SurfaceSpec SurfaceSpec::roof_arc(double radius, double length, double angle_span,
                                  double angle_offset) {
  require_positive(radius, "arc radius");
  require_positive(length, "arc length");
  if (!(angle_span > 0.0) || angle_span > kTwoPi)
    throw std::invalid_argument("arc span must lie in (0, 2*pi]");
  SurfaceSpec s;
  s.kind = SurfaceKind::RoofArc;
  s.radius = radius;
  s.angle_offset = angle_offset;
  s.hi = {angle_span, length};
  return s;
}

SurfaceSpec SurfaceSpec::cone(double radius_top, double radius_bottom, double length) {
  require_positive(radius_top, "cone top radius");
  require_positive(radius_bottom, "cone bottom radius");
  require_positive(length, "cone length");
  SurfaceSpec s;
  s.kind = SurfaceKind::Cone;
  s.radius_top = radius_top;
  s.radius_bottom = radius_bottom;
  s.hi = {kTwoPi, length};
  s.periodic = {true, false};
  return s;
}

double SurfaceSpec::wrap(int axis, double xi) const {
  if (!periodic[axis]) return xi;
  const double p = period(axis);
  double y = std::fmod(xi - lo[axis], p);
  if (y < 0.0) y += p;
  return lo[axis] + y;
}

ReferencePoint eval_reference(const SurfaceSpec& s, double xi1, double xi2) {
  xi1 = s.wrap(0, xi1);
  xi2 = s.wrap(1, xi2);
  ReferencePoint r;
  switch (s.kind) {
    case SurfaceKind::Plane: {
      r.x = {xi1, xi2, 0.0};
      r.d1 = {Vec3{1, 0, 0}, Vec3{0, 1, 0}};
      break;
    }
    case SurfaceKind::Cylinder: {
      const double R = s.radius, c = std::cos(xi1), sn = std::sin(xi1);
      r.x = {R * c, xi2, R * sn};
      r.d1 = {Vec3{-R * sn, 0, R * c}, Vec3{0, 1, 0}};
      r.d2[pair_index(0, 0)] = {-R * c, 0, -R * sn};
      r.d3[triple_index(0, 0, 0)] = {R * sn, 0, -R * c};
      break;
    }
    case SurfaceKind::RoofArc: {
      const double R = s.radius, th = xi1 + s.angle_offset;
      const double c = std::cos(th), sn = std::sin(th);
      r.x = {R * c, R * sn, xi2};
      r.d1 = {Vec3{-R * sn, R * c, 0}, Vec3{0, 0, 1}};
      r.d2[pair_index(0, 0)] = {-R * c, -R * sn, 0};
      r.d3[triple_index(0, 0, 0)] = {R * sn, -R * c, 0};
      break;
    }
    case SurfaceKind::Cone: {
      const double len = s.hi[1] - s.lo[1];
      const double rr = (s.radius_top - s.radius_bottom) / len;
      const double rad = s.radius_bottom + rr * (xi2 - s.lo[1]);
      const double c = std::cos(xi1), sn = std::sin(xi1);
      r.x = {rad * c, xi2, rad * sn};
      r.d1 = {Vec3{-rad * sn, 0, rad * c}, Vec3{rr * c, 1, rr * sn}};
      r.d2[pair_index(0, 0)] = {-rad * c, 0, -rad * sn};
      r.d2[pair_index(0, 1)] = {-rr * sn, 0, rr * c};
      r.d3[triple_index(0, 0, 0)] = {rad * sn, 0, -rad * c};
      r.d3[triple_index(0, 0, 1)] = {-rr * c, 0, -rr * sn};
      break;
    }
  }
  // Rigid pose: rotate every derivative, translate the position.
  const Quat& q = s.pose_rotation;
  r.x = q.rotate(r.x) + s.pose_translation;
  for (auto& v : r.d1) v = q.rotate(v);
  for (auto& v : r.d2) v = q.rotate(v);
  for (auto& v : r.d3) v = q.rotate(v);
  return r;
}

SurfaceFrame frame(const SurfaceSpec& s, double xi1, double xi2) {
  const ReferencePoint r = eval_reference(s, xi1, xi2);
  SurfaceFrame f;
  f.x = r.x;
  f.a = r.d1;
  f.x_d2 = r.d2;
  f.x_d3 = r.d3;

  const Vec3 n = cross(f.a[0], f.a[1]);
  const double j = norm(n);
  if (j < 1e-12) throw std::domain_error("degenerate surface frame: |a1 x a2| ~ 0");
  f.jac = j;
  f.a3 = n / j;

  f.metric = {dot(f.a[0], f.a[0]), dot(f.a[0], f.a[1]), dot(f.a[1], f.a[1])};
  f.metric_inv = f.metric.inverse();
  for (int l = 0; l < 2; ++l)
    f.a_up[l] = f.metric_inv(l, 0) * f.a[0] + f.metric_inv(l, 1) * f.a[1];

  f.curv = {dot(r.d2[0], f.a3), dot(r.d2[1], f.a3), dot(r.d2[2], f.a3)};
  for (int a = 0; a < 2; ++a)
    for (int l = 0; l < 2; ++l)
      f.bmix[a][l] = f.curv(a, 0) * f.metric_inv(0, l) + f.curv(a, 1) * f.metric_inv(1, l);
  for (int l = 0; l < 2; ++l)
    for (int p = 0; p < 3; ++p) f.gamma[l][p] = dot(f.a_up[l], r.d2[p]);

  // --- parametric derivatives of the frame fields --------------------------

  // n,g and n,gd from the cross-product rule.
  std::array<Vec3, 2> n_d1;
  std::array<Vec3, 3> n_d2;
  for (int g = 0; g < 2; ++g)
    n_d1[g] = cross(r.d2[pair_index(0, g)], f.a[1]) + cross(f.a[0], r.d2[pair_index(1, g)]);
  for (int g = 0; g < 2; ++g)
    for (int d = g; d < 2; ++d)
      n_d2[pair_index(g, d)] = cross(r.d3[triple_index(0, g, d)], f.a[1]) +
                               cross(r.d2[pair_index(0, g)], r.d2[pair_index(1, d)]) +
                               cross(r.d2[pair_index(0, d)], r.d2[pair_index(1, g)]) +
                               cross(f.a[0], r.d3[triple_index(1, g, d)]);

  // |n| and unit-normal derivatives.
  double j_d1[2];
  for (int g = 0; g < 2; ++g) j_d1[g] = dot(f.a3, n_d1[g]);
  double j_d2[3];
  for (int g = 0; g < 2; ++g)
    for (int d = g; d < 2; ++d) {
      const int p = pair_index(g, d);
      j_d2[p] = (dot(n_d1[g], n_d1[d]) + dot(n, n_d2[p])) / j - j_d1[g] * j_d1[d] / j;
    }
  for (int g = 0; g < 2; ++g) f.a3_d1[g] = n_d1[g] / j - n * (j_d1[g] / (j * j));
  for (int g = 0; g < 2; ++g)
    for (int d = g; d < 2; ++d) {
      const int p = pair_index(g, d);
      f.a3_d2[p] = n_d2[p] / j - n_d1[g] * (j_d1[d] / (j * j)) - n_d1[d] * (j_d1[g] / (j * j)) -
                   n * (j_d2[p] / (j * j)) + n * (2.0 * j_d1[g] * j_d1[d] / (j * j * j));
    }

  // Metric derivative and the derivative of its inverse.
  Sym2 metric_d1[2];
  for (int g = 0; g < 2; ++g)
    metric_d1[g] = {2.0 * dot(r.d2[pair_index(0, g)], f.a[0]),
                    dot(r.d2[pair_index(0, g)], f.a[1]) + dot(f.a[0], r.d2[pair_index(1, g)]),
                    2.0 * dot(r.d2[pair_index(1, g)], f.a[1])};
  Sym2 metric_inv_d1[2];
  for (int g = 0; g < 2; ++g) {
    // d(A^-1) = -A^-1 dA A^-1
    const Sym2& m = f.metric_inv;
    const Sym2& dm = metric_d1[g];
    Sym2 out;
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b) {
        double v = 0.0;
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q) v -= m(a, p) * dm(p, q) * m(q, b);
        (b == 0 ? out.m11 : (a == 0 ? out.m12 : out.m22)) = v;
      }
    metric_inv_d1[g] = out;
  }

  // b_ab,g ; b_a^l,g ; Gamma^l_ab,g
  for (int g = 0; g < 2; ++g)
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b) {
        const int p = pair_index(a, b);
        f.curv_d1[g][p] = dot(r.d3[triple_index(a, b, g)], f.a3) + dot(r.d2[p], f.a3_d1[g]);
      }
  for (int g = 0; g < 2; ++g)
    for (int a = 0; a < 2; ++a)
      for (int l = 0; l < 2; ++l) {
        double v = 0.0;
        for (int m = 0; m < 2; ++m)
          v += f.curv_d1[g][pair_index(a, m)] * f.metric_inv(m, l) +
               f.curv(a, m) * metric_inv_d1[g](m, l);
        f.bmix_d1[g][a][l] = v;
      }
  std::array<Vec3, 2> a_up_d1[2];  // [g][l]
  for (int g = 0; g < 2; ++g)
    for (int l = 0; l < 2; ++l)
      a_up_d1[g][l] = metric_inv_d1[g](l, 0) * f.a[0] + metric_inv_d1[g](l, 1) * f.a[1] +
                      f.metric_inv(l, 0) * r.d2[pair_index(0, g)] +
                      f.metric_inv(l, 1) * r.d2[pair_index(1, g)];
  for (int g = 0; g < 2; ++g)
    for (int l = 0; l < 2; ++l)
      for (int a = 0; a < 2; ++a)
        for (int b = a; b < 2; ++b) {
          const int p = pair_index(a, b);
          f.gamma_d1[g][l][p] =
              dot(a_up_d1[g][l], r.d2[p]) + dot(f.a_up[l], r.d3[triple_index(a, b, g)]);
        }
  return f;
}

ElasticityTensor elasticity_tensor(const Sym2& metric_inv, double nu) {
  const Sym2& A = metric_inv;
  ElasticityTensor H;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      const int a = m >> 1, b = m & 1, l = n >> 1, d = n & 1;
      H.h[m][n] = nu * A(a, b) * A(l, d) + 0.5 * (1.0 - nu) * (A(a, l) * A(b, d) + A(a, d) * A(b, l));
    }
  return H;
}

std::array<double, 3> to_covariant(const SurfaceFrame& f, const Vec3& u) {
  return {dot(u, f.a[0]), dot(u, f.a[1]), dot(u, f.a3)};
}

std::array<Jet, 3> covariant_jets(Tape& t, const SurfaceFrame& f, const std::array<Jet, 3>& u) {
  std::array<Jet, 3> out;

  // Generic basis-product assembly: component = u . e with e(xi) any of the
  // frame vectors; derivatives pick up the basis derivatives by the product
  // rule.  Terms whose coefficient vanishes (or whose jet slot is the shared
  // zero node) are dropped by the lincomb builder.
  auto assemble = [&](const Vec3& e, const std::array<Vec3, 2>& e_d1,
                      const std::array<Vec3, 3>& e_d2) {
    Jet r;
    double coeff[12];
    Scalar idx[12];
    auto build = [&](int n) -> Scalar {
      int m = 0;
      for (int k = 0; k < n; ++k) {
        if (coeff[k] == 0.0 || idx[k].i == t.zero().i) continue;
        coeff[m] = coeff[k];
        idx[m] = idx[k];
        ++m;
      }
      if (m == 0) return t.zero();
      return t.lincomb(0.0, {coeff, static_cast<std::size_t>(m)}, {idx, static_cast<std::size_t>(m)});
    };
    int n = 0;
    for (int i = 0; i < 3; ++i) { coeff[n] = e[i]; idx[n] = u[i].v; ++n; }
    r.v = build(n);
    for (int al = 0; al < 2; ++al) {
      n = 0;
      for (int i = 0; i < 3; ++i) { coeff[n] = e[i]; idx[n] = u[i].d1[al]; ++n; }
      for (int i = 0; i < 3; ++i) { coeff[n] = e_d1[al][i]; idx[n] = u[i].v; ++n; }
      r.d1[al] = build(n);
    }
    n = 0;
    for (int i = 0; i < 3; ++i) { coeff[n] = e[i]; idx[n] = u[i].d1[2]; ++n; }
    r.d1[2] = build(n);
    for (int al = 0; al < 2; ++al)
      for (int be = al; be < 2; ++be) {
        const int p = pair_index(al, be);
        n = 0;
        for (int i = 0; i < 3; ++i) { coeff[n] = e[i]; idx[n] = u[i].d2[p]; ++n; }
        for (int i = 0; i < 3; ++i) { coeff[n] = e_d1[be][i]; idx[n] = u[i].d1[al]; ++n; }
        for (int i = 0; i < 3; ++i) { coeff[n] = e_d1[al][i]; idx[n] = u[i].d1[be]; ++n; }
        for (int i = 0; i < 3; ++i) { coeff[n] = e_d2[p][i]; idx[n] = u[i].v; ++n; }
        r.d2[p] = build(n);
      }
    return r;
  };

  for (int l = 0; l < 2; ++l) {
    const std::array<Vec3, 2> e_d1{f.x_d2[pair_index(l, 0)], f.x_d2[pair_index(l, 1)]};
    const std::array<Vec3, 3> e_d2{f.x_d3[triple_index(l, 0, 0)], f.x_d3[triple_index(l, 0, 1)],
                                   f.x_d3[triple_index(l, 1, 1)]};
    out[l] = assemble(f.a[l], e_d1, e_d2);
  }
  out[2] = assemble(f.a3, f.a3_d1, f.a3_d2);
  return out;
}

std::array<double, 3> force_components(const SurfaceFrame& f, const Vec3& load) {
  return {dot(load, f.a_up[0]), dot(load, f.a_up[1]), dot(load, f.a3)};
}

Sym2 raise_indices(const Sym2& t_low, const Sym2& metric_inv) {
  const Sym2& A = metric_inv;
  Sym2 r;
  auto entry = [&](int a, int b) {
    double v = 0.0;
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n) v += A(a, m) * A(b, n) * t_low(m, n);
    return v;
  };
  r.m11 = entry(0, 0);
  r.m12 = entry(0, 1);
  r.m22 = entry(1, 1);
  return r;
}

Sym2 lower_indices(const Sym2& t_up, const Sym2& metric) {
  return raise_indices(t_up, metric);
}

}  // namespace neuralshell
