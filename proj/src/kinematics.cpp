#include "neuralshell/kinematics.hpp"

namespace neuralshell {

namespace {

// Small fixed-capacity lincomb builder that drops zero coefficients and
// shared-zero nodes before emitting the node.
struct Comb {
  Tape& t;
  double coeff[10];
  Scalar idx[10];
  int n = 0;

  explicit Comb(Tape& tape) : t(tape) {}
  void add(double c, Scalar s) {
    if (c == 0.0 || s.i == t.zero().i) return;
    coeff[n] = c;
    idx[n] = s;
    ++n;
  }
  Scalar done() {
    if (n == 0) return t.zero();
    if (n == 1 && coeff[0] == 1.0) return idx[0];
    return t.lincomb(0.0, {coeff, static_cast<std::size_t>(n)}, {idx, static_cast<std::size_t>(n)});
  }
};

}  // namespace

DeformationGradients deformation_gradients(Tape& t, const SurfaceFrame& f,
                                           const std::array<Jet, 3>& u) {
  DeformationGradients g;

  // phi_{al} = u_l,a - u_m Gamma^m_{la} - b_{al} u_3
  for (int a = 0; a < 2; ++a)
    for (int l = 0; l < 2; ++l) {
      Comb c(t);
      c.add(1.0, u[l].d1[a]);
      for (int m = 0; m < 2; ++m) c.add(-f.gamma[m][pair_index(l, a)], u[m].v);
      c.add(-f.curv(a, l), u[2].v);
      g.phi[a][l] = c.done();
    }

  // phi_{a3} = u_3,a + b_a^l u_l
  for (int a = 0; a < 2; ++a) {
    Comb c(t);
    c.add(1.0, u[2].d1[a]);
    for (int l = 0; l < 2; ++l) c.add(f.bmix[a][l], u[l].v);
    g.phi3[a] = c.done();
  }

  // Raised-index variants.
  for (int b = 0; b < 2; ++b)
    for (int l = 0; l < 2; ++l) {
      Comb c(t);
      for (int m = 0; m < 2; ++m) c.add(f.metric_inv(m, l), g.phi[b][m]);
      g.phi_up[b][l] = c.done();
    }
  for (int l = 0; l < 2; ++l) {
    Comb c(t);
    for (int m = 0; m < 2; ++m) c.add(f.metric_inv(l, m), g.phi3[m]);
    g.phi3_up[l] = c.done();
  }

  // Covariant derivatives.  First the parametric derivative
  //   phi_{al},b = u_l,ab - u_m,b Gamma^m_{la} - u_m Gamma^m_{la},b
  //              - b_{al},b u_3 - b_{al} u_3,b
  // then the tensor correction terms.
  Scalar phi_pd[2][2][2];  // phi_{al},b
  for (int a = 0; a < 2; ++a)
    for (int l = 0; l < 2; ++l)
      for (int b = 0; b < 2; ++b) {
        Comb c(t);
        c.add(1.0, u[l].d2[pair_index(a, b)]);
        for (int m = 0; m < 2; ++m) {
          c.add(-f.gamma[m][pair_index(l, a)], u[m].d1[b]);
          c.add(-f.gamma_d1[b][m][pair_index(l, a)], u[m].v);
        }
        c.add(-f.curv_d1[b][pair_index(a, l)], u[2].v);
        c.add(-f.curv(a, l), u[2].d1[b]);
        phi_pd[a][l][b] = c.done();
      }
  for (int a = 0; a < 2; ++a)
    for (int l = 0; l < 2; ++l)
      for (int b = 0; b < 2; ++b) {
        Comb c(t);
        c.add(1.0, phi_pd[a][l][b]);
        for (int m = 0; m < 2; ++m) {
          c.add(-f.gamma[m][pair_index(a, b)], g.phi[m][l]);
          c.add(-f.gamma[m][pair_index(l, b)], g.phi[a][m]);
        }
        g.phi_cd[a][l][b] = c.done();
      }

  // phi_{a3},b = u_3,ab + b_a^l,b u_l + b_a^l u_l,b ; then the correction.
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Comb c(t);
      c.add(1.0, u[2].d2[pair_index(a, b)]);
      for (int l = 0; l < 2; ++l) {
        c.add(f.bmix_d1[b][a][l], u[l].v);
        c.add(f.bmix[a][l], u[l].d1[b]);
      }
      const Scalar pd = c.done();
      Comb cc(t);
      cc.add(1.0, pd);
      for (int l = 0; l < 2; ++l) cc.add(-f.gamma[l][pair_index(a, b)], g.phi3[l]);
      g.phi3_cd[a][b] = cc.done();
    }

  return g;
}

std::array<Scalar, 4> membrane_strain(Tape& t, const SurfaceFrame& f,
                                      const DeformationGradients& g, bool nonlinear) {
  Scalar e[2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b) {
      Comb c(t);
      c.add(0.5, g.phi[a][b]);
      c.add(0.5, g.phi[b][a]);
      if (nonlinear) {
        for (int l = 0; l < 2; ++l) c.add(0.5, t.mul(g.phi[a][l], g.phi_up[b][l]));
        c.add(0.5, t.mul(g.phi3[a], g.phi3[b]));
      }
      e[a][b] = c.done();
    }
  return {e[0][0], e[0][1], e[0][1], e[1][1]};
}

std::array<Scalar, 4> bending_strain(Tape& t, const SurfaceFrame& f,
                                     const DeformationGradients& g, bool nonlinear) {
  // Unsymmetrized candidate
  //   k_ab = -phi_{a3}|_b - b_b^l phi_{al}
  //        + phi^l_3 (phi_{al}|_b + 1/2 b_ab phi_{l3} - b_{bl} phi_{a3})
  // followed by explicit symmetrization of the mixed components.
  Scalar k[2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Comb c(t);
      c.add(-1.0, g.phi3_cd[a][b]);
      for (int l = 0; l < 2; ++l) c.add(-f.bmix[b][l], g.phi[a][l]);
      if (nonlinear) {
        for (int l = 0; l < 2; ++l) {
          Comb inner(t);
          inner.add(1.0, g.phi_cd[a][l][b]);
          inner.add(0.5 * f.curv(a, b), g.phi3[l]);
          inner.add(-f.curv(b, l), g.phi3[a]);
          c.add(1.0, t.mul(g.phi3_up[l], inner.done()));
        }
      }
      k[a][b] = c.done();
    }
  Comb sym(t);
  sym.add(0.5, k[0][1]);
  sym.add(0.5, k[1][0]);
  const Scalar k12 = sym.done();
  return {k[0][0], k12, k12, k[1][1]};
}

OracleStrains strain_oracle(const SurfaceSpec& s, const DisplacementFn& u, double xi1,
                            double xi2, double rel_step) {
  const double h1 = rel_step * (s.hi[0] - s.lo[0]);
  const double h2 = rel_step * (s.hi[1] - s.lo[1]);

  const Vec3 u0 = u(xi1, xi2);
  const Vec3 up1 = u(xi1 + h1, xi2), um1 = u(xi1 - h1, xi2);
  const Vec3 up2 = u(xi1, xi2 + h2), um2 = u(xi1, xi2 - h2);
  const Vec3 upp = u(xi1 + h1, xi2 + h2), upm = u(xi1 + h1, xi2 - h2);
  const Vec3 ump = u(xi1 - h1, xi2 + h2), umm = u(xi1 - h1, xi2 - h2);

  std::array<Vec3, 2> du;
  du[0] = (up1 - um1) / (2.0 * h1);
  du[1] = (up2 - um2) / (2.0 * h2);
  std::array<Vec3, 3> ddu;
  ddu[pair_index(0, 0)] = (up1 - 2.0 * u0 + um1) / (h1 * h1);
  ddu[pair_index(1, 1)] = (up2 - 2.0 * u0 + um2) / (h2 * h2);
  ddu[pair_index(0, 1)] = (upp - upm - ump + umm) / (4.0 * h1 * h2);

  const ReferencePoint r = eval_reference(s, xi1, xi2);
  const SurfaceFrame f0 = frame(s, xi1, xi2);

  // Deformed tangents and fundamental forms.
  const Vec3 a1 = r.d1[0] + du[0];
  const Vec3 a2 = r.d1[1] + du[1];
  const Vec3 n = cross(a1, a2);
  const Vec3 a3 = n / norm(n);

  const Sym2 metric{dot(a1, a1), dot(a1, a2), dot(a2, a2)};
  Sym2 curv;
  curv.m11 = dot(r.d2[pair_index(0, 0)] + ddu[pair_index(0, 0)], a3);
  curv.m12 = dot(r.d2[pair_index(0, 1)] + ddu[pair_index(0, 1)], a3);
  curv.m22 = dot(r.d2[pair_index(1, 1)] + ddu[pair_index(1, 1)], a3);

  OracleStrains out;
  out.eps = {0.5 * (metric.m11 - f0.metric.m11), 0.5 * (metric.m12 - f0.metric.m12),
             0.5 * (metric.m22 - f0.metric.m22)};
  out.kappa = {f0.curv.m11 - curv.m11, f0.curv.m12 - curv.m12, f0.curv.m22 - curv.m22};
  return out;
}

}  // namespace neuralshell
