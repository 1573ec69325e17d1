#include "neuralshell/energy.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "neuralshell/kinematics.hpp"

namespace neuralshell {

std::array<double, 2> stiffness(const MaterialParams& m) {
  if (!(m.h > 0.0) || !(m.E > 0.0) || !(m.nu >= 0.0) || m.nu >= 0.5) {
    throw std::invalid_argument("material needs h > 0, E > 0 and 0 <= nu < 0.5");
  }
  return {m.stretching(), m.bending()};
}

namespace {

// s.H.s for a flattened strain vector: the four row contractions are
// constant-coefficient lincombs (H never depends on parameters), whose
// outputs land contiguously, so the quadratic form closes with one fused
// pair-dot node.
Scalar quadratic_form(Tape& t, const ElasticityTensor& H, std::span<const Scalar, 4> s) {
  std::array<Scalar, 4> row;
  for (int m = 0; m < 4; ++m) {
    row[m] = t.lincomb(0.0, std::span<const double>(H.h[m], 4),
                       std::span<const Scalar>(s.data(), 4));
  }
  std::array<std::pair<std::int32_t, std::int32_t>, 4> pairs;
  for (int m = 0; m < 4; ++m) pairs[m] = {row[m].i, s[m].i};
  return t.dot_pairs(pairs);
}

}  // namespace

Scalar energy_density(Tape& t, const ElasticityTensor& H, double D, double B,
                      std::span<const Scalar, 4> eps, std::span<const Scalar, 4> kappa) {
  const std::array<Scalar, 2> q{quadratic_form(t, H, eps), quadratic_form(t, H, kappa)};
  const std::array<double, 2> c{0.5 * D, 0.5 * B};
  return t.lincomb(0.0, c, q);
}

Scalar external_energy_density(Tape& t, const Vec3& load, const std::array<Jet, 3>& u) {
  const std::array<double, 3> c{load.x, load.y, load.z};
  const std::array<Scalar, 3> v{u[0].v, u[1].v, u[2].v};
  return t.lincomb(0.0, c, v);
}

Scalar kinetic_energy_density(Tape& t, double rho, const std::array<Jet, 3>& u) {
  std::array<std::pair<std::int32_t, std::int32_t>, 3> pairs;
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const Scalar dt = u[i].d1[2];
    if (dt.i != t.zero().i) pairs[n++] = {dt.i, dt.i};
  }
  if (n == 0) return t.zero();
  const Scalar sumsq = t.dot_pairs(std::span<const std::pair<std::int32_t, std::int32_t>>(
      pairs.data(), static_cast<std::size_t>(n)));
  const std::array<double, 1> c{0.5 * rho};
  const std::array<Scalar, 1> v{sumsq};
  return t.lincomb(0.0, c, v);
}

namespace {

// Representative anchor points of a constraint factor (for the penalty
// formulation): the Gaussian center, or evenly spaced points along each
// pinned edge.
std::vector<std::array<double, 2>> anchor_points(const ConstraintFactor& f,
                                                 const SurfaceSpec& s) {
  constexpr int kEdgeSamples = 16;
  std::vector<std::array<double, 2>> pts;
  auto edge = [&](int axis, double at) {
    const int other = 1 - axis;
    for (int i = 0; i < kEdgeSamples; ++i) {
      const double frac = (i + 0.5) / kEdgeSamples;
      const double o = s.lo[other] + frac * (s.hi[other] - s.lo[other]);
      std::array<double, 2> xi{};
      xi[axis] = at;
      xi[other] = o;
      pts.push_back(xi);
    }
  };
  switch (f.kind) {
    case ConstraintFactor::Kind::PointGaussian:
      pts.push_back({f.c1, f.c2});
      break;
    case ConstraintFactor::Kind::EdgeGaussian:
      edge(f.axis, f.at);
      break;
    case ConstraintFactor::Kind::PolyEdges:
      for (int a = 0; a < 2; ++a) {
        if (!f.poly_axes[a]) continue;
        edge(a, s.lo[a]);
        edge(a, s.hi[a]);
      }
      break;
  }
  return pts;
}

// Prescribed displacement sum at (xi, t): what the hard composition pins the
// field to wherever the factor weights vanish.
Vec3 motion_target(const ConstraintSpec& c, const SurfaceSpec& s, double xi1, double xi2,
                   double tm) {
  Vec3 b{};
  for (const auto& m : c.motions) {
    const DJet gate = factor_jet(c.factors[static_cast<std::size_t>(m.factor)], s, xi1, xi2);
    const auto bk = prescribed_motion(m, s, xi1, tm);
    const double w = m.sign * (1.0 - gate.v);
    b += Vec3{bk[0].v, bk[1].v, bk[2].v} * w;
  }
  return b;
}

struct LossAccum {
  std::vector<double> coeff;
  std::vector<Scalar> term;
  void add(double c, Scalar s) {
    coeff.push_back(c);
    term.push_back(s);
  }
};

}  // namespace

Scalar material_conditioned_loss(Tape& t, const PackedNet& net, const ShellProblem& p,
                                 std::span<const SamplePoint> samples,
                                 std::size_t total_samples, const MaterialParams& draw,
                                 bool with_global_terms) {
  if (p.load.kind == LoadSpec::Kind::Points && p.dynamic) {
    throw std::invalid_argument("point loads require a quasi-static problem");
  }
  if (total_samples == 0) throw std::invalid_argument("loss needs a nonzero sample count");
  const std::array<double, 4> mat{draw.rho, draw.h, draw.E, draw.nu};
  if (p.embed.material_dims == 4) {
    for (int k = 0; k < 4; ++k) {
      if (p.embed.mat_hi[k] > p.embed.mat_lo[k] &&
          (mat[k] < p.embed.mat_lo[k] || mat[k] > p.embed.mat_hi[k])) {
        throw std::invalid_argument("material draw outside the conditioned range");
      }
    }
  }

  const auto [D, B] = stiffness(draw);
  const double prefactor = p.surface.domain_area() / static_cast<double>(total_samples);
  LossAccum acc;

  for (const auto& sp : samples) {
    const double x1 = p.surface.wrap(0, sp.xi1);
    const double x2 = p.surface.wrap(1, sp.xi2);
    const SurfaceFrame f = frame(p.surface, x1, x2);
    const ElasticityTensor H = elasticity_tensor(f.metric_inv, draw.nu);

    const std::array<Jet, 3> u =
        p.soft_constraints
            ? eval_raw(t, net, p.embed, x1, x2, sp.t, mat)
            : eval_ndf(t, net, p.embed, p.constraints, p.surface, x1, x2, sp.t, mat).u;

    const auto ucov = covariant_jets(t, f, u);
    const auto grads = deformation_gradients(t, f, ucov);
    const auto eps = membrane_strain(t, f, grads, p.nonlinear);
    const auto kap = bending_strain(t, f, grads, p.nonlinear);

    acc.add(prefactor * f.jac, energy_density(t, H, D, B, eps, kap));

    if (p.load.kind == LoadSpec::Kind::Distributed) {
      const Vec3 fv = p.load.distributed_at(sp.t, draw.rho);
      if (fv.x != 0.0 || fv.y != 0.0 || fv.z != 0.0) {
        acc.add(-prefactor * f.jac, external_energy_density(t, fv, u));
      }
    }
    if (p.dynamic) acc.add(prefactor * f.jac, kinetic_energy_density(t, draw.rho, u));
  }

  if (with_global_terms) {
    if (p.load.kind == LoadSpec::Kind::Points) {
      for (const auto& pl : p.load.points) {
        const double x1 = p.surface.wrap(0, pl.xi1);
        const double x2 = p.surface.wrap(1, pl.xi2);
        if (x1 < p.surface.lo[0] || x1 > p.surface.hi[0] || x2 < p.surface.lo[1] ||
            x2 > p.surface.hi[1]) {
          throw std::invalid_argument("point load lies outside the parametric domain");
        }
        const std::array<Jet, 3> u =
            p.soft_constraints
                ? eval_raw(t, net, p.embed, x1, x2, 0.0, mat)
                : eval_ndf(t, net, p.embed, p.constraints, p.surface, x1, x2, 0.0, mat).u;
        acc.add(-1.0, external_energy_density(t, pl.force, u));
      }
    }
    if (p.soft_constraints) {
      // Quadratic anchor penalty replacing the hard composition: the field
      // should match the prescribed displacement (zero for fixed anchors) at
      // every constrained point, at a handful of times when dynamic.
      std::vector<double> times;
      if (p.dynamic) {
        for (int i = 0; i < 4; ++i) times.push_back(p.embed.duration * i / 3.0);
      } else {
        times.push_back(0.0);
      }
      std::vector<std::pair<std::int32_t, std::int32_t>> sq;
      for (const auto& fac : p.constraints.factors) {
        for (const auto& xi : anchor_points(fac, p.surface)) {
          for (const double tm : times) {
            const auto u = eval_raw(t, net, p.embed, p.surface.wrap(0, xi[0]),
                                    p.surface.wrap(1, xi[1]), tm, mat);
            const Vec3 target = motion_target(p.constraints, p.surface, xi[0], xi[1], tm);
            const std::array<double, 3> tc{target.x, target.y, target.z};
            for (int cmp = 0; cmp < 3; ++cmp) {
              if (!fac.mask[static_cast<std::size_t>(cmp)]) continue;
              const std::array<double, 1> one{1.0};
              const std::array<Scalar, 1> node{u[static_cast<std::size_t>(cmp)].v};
              const Scalar diff = t.lincomb(-tc[static_cast<std::size_t>(cmp)], one, node);
              sq.emplace_back(diff.i, diff.i);
            }
          }
        }
      }
      if (p.constraints.initial_state) {
        // Rest-state condition over a coarse domain grid at t = 0.
        constexpr int kGrid = 8;
        for (int i = 0; i < kGrid; ++i) {
          for (int j = 0; j < kGrid; ++j) {
            const double x1 = p.surface.lo[0] + (i + 0.5) / kGrid * p.surface.period(0);
            const double x2 = p.surface.lo[1] + (j + 0.5) / kGrid * p.surface.period(1);
            const auto u = eval_raw(t, net, p.embed, x1, x2, 0.0, mat);
            for (int cmp = 0; cmp < 3; ++cmp) {
              sq.emplace_back(u[static_cast<std::size_t>(cmp)].v.i,
                              u[static_cast<std::size_t>(cmp)].v.i);
            }
          }
        }
      }
      if (!sq.empty()) {
        const Scalar sum = t.dot_pairs(sq);
        acc.add(p.soft_weight / static_cast<double>(sq.size()), sum);
      }
    }
  }

  return t.lincomb(0.0, acc.coeff, acc.term);
}

Scalar total_loss(Tape& t, const PackedNet& net, const ShellProblem& p,
                  std::span<const SamplePoint> samples, std::size_t total_samples,
                  bool with_global_terms) {
  return material_conditioned_loss(t, net, p, samples, total_samples, p.material,
                                   with_global_terms);
}

}  // namespace neuralshell
