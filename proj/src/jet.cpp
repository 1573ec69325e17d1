#include "neuralshell/jet.hpp"

#include <cmath>

namespace neuralshell {

namespace {

// Zero-aware scalar helpers: the tape's shared zero node marks components
// that are identically zero, letting kernels skip dead work.
bool is_zero(Tape& t, Scalar s) { return s.i == t.zero().i; }

Scalar add2(Tape& t, Scalar a, Scalar b) {
  if (is_zero(t, a)) return b;
  if (is_zero(t, b)) return a;
  return t.add(a, b);
}

Scalar mul2(Tape& t, Scalar a, Scalar b) {
  if (is_zero(t, a) || is_zero(t, b)) return t.zero();
  return t.mul(a, b);
}

// c0 + sum of coef*node, dropping zero coefficients and zero nodes.
Scalar lc(Tape& t, double c0, std::initializer_list<std::pair<double, Scalar>> terms) {
  double coeff[8];
  Scalar idx[8];
  int n = 0;
  for (const auto& [c, s] : terms) {
    if (c == 0.0 || is_zero(t, s)) continue;
    coeff[n] = c;
    idx[n] = s;
    ++n;
  }
  if (n == 0) return c0 == 0.0 ? t.zero() : t.constant(c0);
  if (n == 1 && c0 == 0.0 && coeff[0] == 1.0) return idx[0];
  return t.lincomb(c0, {coeff, static_cast<std::size_t>(n)}, {idx, static_cast<std::size_t>(n)});
}

}  // namespace

Jet jet_add(Tape& t, const Jet& a, const Jet& b) {
  Jet r;
  r.v = add2(t, a.v, b.v);
  for (int k = 0; k < 3; ++k) r.d1[k] = add2(t, a.d1[k], b.d1[k]);
  for (int p = 0; p < 3; ++p) r.d2[p] = add2(t, a.d2[p], b.d2[p]);
  return r;
}

Jet jet_sub(Tape& t, const Jet& a, const Jet& b) {
  auto sub2 = [&](Scalar x, Scalar y) {
    if (is_zero(t, y)) return x;
    if (is_zero(t, x)) return t.neg(y);
    return t.sub(x, y);
  };
  Jet r;
  r.v = sub2(a.v, b.v);
  for (int k = 0; k < 3; ++k) r.d1[k] = sub2(a.d1[k], b.d1[k]);
  for (int p = 0; p < 3; ++p) r.d2[p] = sub2(a.d2[p], b.d2[p]);
  return r;
}

Jet jet_mul(Tape& t, const Jet& a, const Jet& b) {
  Jet r;
  r.v = mul2(t, a.v, b.v);
  for (int k = 0; k < 3; ++k) r.d1[k] = add2(t, mul2(t, a.d1[k], b.v), mul2(t, a.v, b.d1[k]));
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      const int p = pair_index(i, j);
      Scalar s = add2(t, mul2(t, a.d2[p], b.v), mul2(t, a.v, b.d2[p]));
      s = add2(t, s, mul2(t, a.d1[i], b.d1[j]));
      s = add2(t, s, mul2(t, a.d1[j], b.d1[i]));
      r.d2[p] = s;
    }
  return r;
}

Jet jet_scale(Tape& t, const Jet& a, double s) {
  Jet r;
  r.v = lc(t, 0.0, {{s, a.v}});
  for (int k = 0; k < 3; ++k) r.d1[k] = lc(t, 0.0, {{s, a.d1[k]}});
  for (int p = 0; p < 3; ++p) r.d2[p] = lc(t, 0.0, {{s, a.d2[p]}});
  return r;
}

Jet jet_mul_const(Tape& t, const Jet& a, const DJet& g) {
  Jet r;
  r.v = lc(t, 0.0, {{g.v, a.v}});
  for (int k = 0; k < 3; ++k) r.d1[k] = lc(t, 0.0, {{g.v, a.d1[k]}, {g.d1[k], a.v}});
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      const int p = pair_index(i, j);
      r.d2[p] = lc(t, 0.0,
                   {{g.v, a.d2[p]}, {g.d1[j], a.d1[i]}, {g.d1[i], a.d1[j]}, {g.d2[p], a.v}});
    }
  return r;
}

Jet jet_add_const(Tape& t, const Jet& a, const DJet& m) {
  auto addc = [&](Scalar s, double c) {
    if (c == 0.0) return s;
    return lc(t, c, {{1.0, s}});
  };
  Jet r;
  r.v = addc(a.v, m.v);
  for (int k = 0; k < 3; ++k) r.d1[k] = addc(a.d1[k], m.d1[k]);
  for (int p = 0; p < 3; ++p) r.d2[p] = addc(a.d2[p], m.d2[p]);
  return r;
}

// ---------------------------------------------------------------------------
// Layer kernels

JetBundle affine_from_jets(Tape& t, const LayerRef& l, std::span<const Jet> in) {
  JetBundle out;
  out.n = l.nout;

  // The set of contributing inputs per component is the same for every unit,
  // so decide it once and emit one unit-stride run of dot nodes per component.
  auto comp_dot = [&](auto comp_of) -> std::int32_t {
    std::vector<std::int32_t> is;
    for (std::int32_t i = 0; i < l.nin; ++i)
      if (!is_zero(t, comp_of(in[i]))) is.push_back(i);
    if (is.empty()) return -1;
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs(is.size());
    std::int32_t base = -1;
    for (std::int32_t o = 0; o < l.nout; ++o) {
      for (std::size_t k = 0; k < is.size(); ++k)
        pairs[k] = {l.w + o * l.nin + is[k], comp_of(in[is[k]]).i};
      const Scalar s = t.dot_pairs(pairs);
      if (o == 0) base = s.i;
    }
    return base;
  };

  const std::int32_t vdot = comp_dot([](const Jet& j) { return j.v; });
  if (vdot < 0) {
    out.v = l.b;  // no value contributions: the bias leaves are the run
  } else {
    for (std::int32_t o = 0; o < l.nout; ++o) {
      const Scalar s = t.add(t.node(vdot + o), t.node(l.b + o));
      if (o == 0) out.v = s.i;
    }
  }
  for (int k = 0; k < 3; ++k)
    out.d1[k] = comp_dot([k](const Jet& j) { return j.d1[k]; });
  for (int p = 0; p < 3; ++p)
    out.d2[p] = comp_dot([p](const Jet& j) { return j.d2[p]; });
  return out;
}

JetBundle affine_from_bundle(Tape& t, const LayerRef& l, const JetBundle& in) {
  JetBundle out;
  out.n = l.nout;

  auto comp_dot = [&](std::int32_t src) -> std::int32_t {
    if (src < 0) return -1;
    std::int32_t base = -1;
    for (std::int32_t o = 0; o < l.nout; ++o) {
      const Scalar s = t.dot_range(l.w + o * l.nin, src, l.nin);
      if (o == 0) base = s.i;
    }
    return base;
  };

  const std::int32_t vdot = comp_dot(in.v);
  for (std::int32_t o = 0; o < l.nout; ++o) {
    const Scalar s = t.add(t.node(vdot + o), t.node(l.b + o));
    if (o == 0) out.v = s.i;
  }
  for (int k = 0; k < 3; ++k) out.d1[k] = comp_dot(in.d1[k]);
  for (int p = 0; p < 3; ++p) out.d2[p] = comp_dot(in.d2[p]);
  return out;
}

namespace {

// Emits one unit-stride run under a per-unit builder; returns the base index.
template <typename F>
std::int32_t run(Tape& t, std::int32_t n, F&& f) {
  std::int32_t base = -1;
  for (std::int32_t o = 0; o < n; ++o) {
    const Scalar s = f(o);
    if (o == 0) base = s.i;
  }
  return base;
}

// Shared elementwise-activation scaffolding: given runs for the activation
// value g0 and chain factors g1 = f'(z), g2 = f''(z), assembles the output
// bundle components   d1 = g1*z.d1,   d2 = g1*z.d2 + g2*z.d1i*z.d1j.
JetBundle chain_bundle(Tape& t, const JetBundle& z, std::int32_t g0, std::int32_t g1,
                       std::int32_t g2) {
  JetBundle out;
  out.n = z.n;
  out.v = g0;
  for (int k = 0; k < 3; ++k)
    if (z.d1[k] >= 0)
      out.d1[k] = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(g1 + o), t.node(z.d1[k] + o)); });
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      const int p = pair_index(i, j);
      std::int32_t pij = -1;
      if (z.d1[i] >= 0 && z.d1[j] >= 0)
        pij = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(z.d1[i] + o), t.node(z.d1[j] + o)); });
      std::int32_t t1 = -1, t2 = -1;
      if (z.d2[p] >= 0)
        t1 = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(g1 + o), t.node(z.d2[p] + o)); });
      if (pij >= 0)
        t2 = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(g2 + o), t.node(pij + o)); });
      if (t1 >= 0 && t2 >= 0)
        out.d2[p] = run(t, z.n, [&](std::int32_t o) { return t.add(t.node(t1 + o), t.node(t2 + o)); });
      else if (t1 >= 0)
        out.d2[p] = t1;
      else
        out.d2[p] = t2;
    }
  return out;
}

}  // namespace

JetBundle sine_bundle(Tape& t, const JetBundle& z, double omega0) {
  const Scalar w = t.constant(omega0);
  const std::int32_t m = run(t, z.n, [&](std::int32_t o) { return t.mul(w, t.node(z.v + o)); });
  const std::int32_t s = run(t, z.n, [&](std::int32_t o) { return t.sin(t.node(m + o)); });
  const std::int32_t c = run(t, z.n, [&](std::int32_t o) { return t.cos(t.node(m + o)); });
  // f' = omega0 cos(m), f'' = -omega0^2 sin(m)
  const std::int32_t g1 = run(t, z.n, [&](std::int32_t o) { return t.mul(w, t.node(c + o)); });
  bool need_g2 = false;
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j)
      if (z.d1[i] >= 0 && z.d1[j] >= 0) need_g2 = true;
  std::int32_t g2 = -1;
  if (need_g2) {
    const Scalar w2 = t.constant(-omega0 * omega0);
    g2 = run(t, z.n, [&](std::int32_t o) { return t.mul(w2, t.node(s + o)); });
  }
  return chain_bundle(t, z, s, g1, g2);
}

JetBundle gelu_bundle(Tape& t, const JetBundle& z) {
  // tanh-form GELU: g(x) = 0.5 x (1 + tanh(u)), u = c (x + a x^3)
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kA = 0.044715;
  const std::int32_t x = z.v;
  const std::int32_t x2 = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(x + o), t.node(x + o)); });
  const std::int32_t x3 = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(x2 + o), t.node(x + o)); });
  const std::int32_t u = run(t, z.n, [&](std::int32_t o) {
    return lc(t, 0.0, {{kC, t.node(x + o)}, {kC * kA, t.node(x3 + o)}});
  });
  const std::int32_t T = run(t, z.n, [&](std::int32_t o) { return t.tanh(t.node(u + o)); });
  const std::int32_t xT = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(x + o), t.node(T + o)); });
  const std::int32_t g0 = run(t, z.n, [&](std::int32_t o) {
    return lc(t, 0.0, {{0.5, t.node(x + o)}, {0.5, t.node(xT + o)}});
  });
  // S = 1 - T^2,  u' = c (1 + 3a x^2),  u'' = 6 c a x
  const std::int32_t tt = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(T + o), t.node(T + o)); });
  const std::int32_t S = run(t, z.n, [&](std::int32_t o) { return lc(t, 1.0, {{-1.0, t.node(tt + o)}}); });
  const std::int32_t u1 = run(t, z.n, [&](std::int32_t o) { return lc(t, kC, {{3.0 * kC * kA, t.node(x2 + o)}}); });
  const std::int32_t Su = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(S + o), t.node(u1 + o)); });
  const std::int32_t xSu = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(x + o), t.node(Su + o)); });
  // g' = 0.5 (1 + T) + 0.5 x S u'
  const std::int32_t g1 = run(t, z.n, [&](std::int32_t o) {
    return lc(t, 0.5, {{0.5, t.node(T + o)}, {0.5, t.node(xSu + o)}});
  });
  // g'' = S u' + 0.5 x (S u'' - 2 T S u'^2)
  const std::int32_t u2 = run(t, z.n, [&](std::int32_t o) { return lc(t, 0.0, {{6.0 * kC * kA, t.node(x + o)}}); });
  const std::int32_t Su2 = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(S + o), t.node(u2 + o)); });
  const std::int32_t TSu = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(T + o), t.node(Su + o)); });
  const std::int32_t TSuu = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(TSu + o), t.node(u1 + o)); });
  const std::int32_t inner = run(t, z.n, [&](std::int32_t o) {
    return lc(t, 0.0, {{1.0, t.node(Su2 + o)}, {-2.0, t.node(TSuu + o)}});
  });
  const std::int32_t xin = run(t, z.n, [&](std::int32_t o) { return t.mul(t.node(x + o), t.node(inner + o)); });
  const std::int32_t g2 = run(t, z.n, [&](std::int32_t o) {
    return lc(t, 0.0, {{1.0, t.node(Su + o)}, {0.5, t.node(xin + o)}});
  });
  return chain_bundle(t, z, g0, g1, g2);
}

std::vector<Jet> bundle_to_jets(Tape& t, const JetBundle& b) {
  std::vector<Jet> out(static_cast<std::size_t>(b.n));
  for (std::int32_t k = 0; k < b.n; ++k) {
    Jet& j = out[k];
    j.v = b.v >= 0 ? t.node(b.v + k) : t.zero();
    for (int d = 0; d < 3; ++d) j.d1[d] = b.d1[d] >= 0 ? t.node(b.d1[d] + k) : t.zero();
    for (int p = 0; p < 3; ++p) j.d2[p] = b.d2[p] >= 0 ? t.node(b.d2[p] + k) : t.zero();
  }
  return out;
}

}  // namespace neuralshell
