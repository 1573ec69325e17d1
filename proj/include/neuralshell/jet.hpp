#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "neuralshell/tape.hpp"

namespace neuralshell {

// Derivative jets over the simulation coordinates (xi1, xi2, t).
//
// A jet carries the value, the three first derivatives and the three
// spatial second derivatives (11, 12, 22) of a scalar field.  Second
// derivatives in time are never needed: the energy uses first time
// derivatives (velocity) and spatial curvature only.
//
// Two flavors exist:
//   DJet - plain doubles, for closed-form fields that do not depend on
//          network parameters (constraint factors, prescribed motions,
//          reference-surface tests);
//   Jet  - tape nodes, for anything that must propagate parameter
//          gradients.  Every component is a tape node, so gradients flow
//          through the derivative channels as well as the value.

// Index of the symmetric second-derivative slot for axis pair (a, b).
constexpr int pair_index(int a, int b) { return a + b; }  // (0,0)->0 (0,1)->1 (1,1)->2

// ---------------------------------------------------------------------------
// Plain-double jets

struct DJet {
  double v = 0.0;
  std::array<double, 3> d1{0.0, 0.0, 0.0};
  std::array<double, 3> d2{0.0, 0.0, 0.0};

  static DJet constant(double c) { return {c, {}, {}}; }

  // Coordinate seed: d(value)/d(axis) = 1.  Axis 2 is time.
  static DJet input(double value, int axis) {
    DJet j;
    j.v = value;
    j.d1[axis] = 1.0;
    return j;
  }
};

inline DJet operator+(const DJet& a, const DJet& b) {
  DJet r;
  r.v = a.v + b.v;
  for (int k = 0; k < 3; ++k) r.d1[k] = a.d1[k] + b.d1[k];
  for (int p = 0; p < 3; ++p) r.d2[p] = a.d2[p] + b.d2[p];
  return r;
}

inline DJet operator-(const DJet& a, const DJet& b) {
  DJet r;
  r.v = a.v - b.v;
  for (int k = 0; k < 3; ++k) r.d1[k] = a.d1[k] - b.d1[k];
  for (int p = 0; p < 3; ++p) r.d2[p] = a.d2[p] - b.d2[p];
  return r;
}

inline DJet operator-(const DJet& a) { return DJet{} - a; }

inline DJet operator*(const DJet& a, double s) {
  DJet r;
  r.v = a.v * s;
  for (int k = 0; k < 3; ++k) r.d1[k] = a.d1[k] * s;
  for (int p = 0; p < 3; ++p) r.d2[p] = a.d2[p] * s;
  return r;
}

inline DJet operator*(double s, const DJet& a) { return a * s; }

inline DJet operator+(const DJet& a, double c) {
  DJet r = a;
  r.v += c;
  return r;
}

inline DJet operator*(const DJet& a, const DJet& b) {
  DJet r;
  r.v = a.v * b.v;
  for (int k = 0; k < 3; ++k) r.d1[k] = a.d1[k] * b.v + a.v * b.d1[k];
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      const int p = pair_index(i, j);
      r.d2[p] = a.d2[p] * b.v + a.d1[i] * b.d1[j] + a.d1[j] * b.d1[i] + a.v * b.d2[p];
    }
  return r;
}

// f applied to g with derivatives f1 = f'(g.v), f2 = f''(g.v).
inline DJet chain(const DJet& g, double f0, double f1, double f2) {
  DJet r;
  r.v = f0;
  for (int k = 0; k < 3; ++k) r.d1[k] = f1 * g.d1[k];
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      const int p = pair_index(i, j);
      r.d2[p] = f1 * g.d2[p] + f2 * g.d1[i] * g.d1[j];
    }
  return r;
}

inline DJet sin(const DJet& g) {
  const double s = std::sin(g.v), c = std::cos(g.v);
  return chain(g, s, c, -s);
}

inline DJet cos(const DJet& g) {
  const double s = std::sin(g.v), c = std::cos(g.v);
  return chain(g, c, -s, -c);
}

inline DJet exp(const DJet& g) {
  const double e = std::exp(g.v);
  return chain(g, e, e, e);
}

// ---------------------------------------------------------------------------
// Tape jets

struct Jet {
  Scalar v;
  std::array<Scalar, 3> d1;
  std::array<Scalar, 3> d2;

  // Materializes a plain jet as tape constants.  Exact zeros map onto the
  // tape's shared zero node so downstream kernels can elide them.
  static Jet constant(Tape& t, const DJet& d) {
    auto c = [&](double x) { return x == 0.0 ? t.zero() : t.constant(x); };
    Jet j;
    j.v = c(d.v);
    for (int k = 0; k < 3; ++k) j.d1[k] = c(d.d1[k]);
    for (int p = 0; p < 3; ++p) j.d2[p] = c(d.d2[p]);
    return j;
  }

  static Jet zero(Tape& t) {
    Jet j;
    j.v = t.zero();
    j.d1 = {t.zero(), t.zero(), t.zero()};
    j.d2 = {t.zero(), t.zero(), t.zero()};
    return j;
  }
};

Jet jet_add(Tape& t, const Jet& a, const Jet& b);
Jet jet_sub(Tape& t, const Jet& a, const Jet& b);
Jet jet_mul(Tape& t, const Jet& a, const Jet& b);
Jet jet_scale(Tape& t, const Jet& a, double s);

// a * g + m for a plain-jet factor g and offset m; the workhorse of the
// constraint composition (network output times closed-form factors).
Jet jet_mul_const(Tape& t, const Jet& a, const DJet& g);
Jet jet_add_const(Tape& t, const Jet& a, const DJet& m);

// ---------------------------------------------------------------------------
// Jet bundles and network layer kernels
//
// A bundle is a set of n jets whose like components occupy unit-stride node
// ranges, the layout produced (and consumed) by the layer kernels below.  A
// base index of -1 marks a component that is identically zero for the whole
// bundle; kernels skip the corresponding work.

struct JetBundle {
  std::int32_t n = 0;
  std::int32_t v = -1;
  std::array<std::int32_t, 3> d1{-1, -1, -1};
  std::array<std::int32_t, 3> d2{-1, -1, -1};
};

// One dense layer's weights as tape nodes: a row-major (nout x nin) weight
// block starting at node w and a bias block starting at node b.
struct LayerRef {
  std::int32_t w = -1;
  std::int32_t b = -1;
  std::int32_t nin = 0;
  std::int32_t nout = 0;
};

// z = W x + b for general input jets (first network layer).
JetBundle affine_from_jets(Tape& t, const LayerRef& l, std::span<const Jet> in);

// z = W x + b for a bundle input (hidden layers).
JetBundle affine_from_bundle(Tape& t, const LayerRef& l, const JetBundle& in);

// Elementwise sin(omega0 * z) with jet chain rule.
JetBundle sine_bundle(Tape& t, const JetBundle& z, double omega0);

// Elementwise tanh-form GELU with jet chain rule (activation ablation).
JetBundle gelu_bundle(Tape& t, const JetBundle& z);

// Unpacks a bundle into individual jets (absent components become zero).
std::vector<Jet> bundle_to_jets(Tape& t, const JetBundle& b);

}  // namespace neuralshell
