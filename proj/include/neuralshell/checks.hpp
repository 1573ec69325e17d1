#pragma once

#include <array>
#include <functional>
#include <span>

#include "neuralshell/jet.hpp"
#include "neuralshell/tape.hpp"

namespace neuralshell {

// Finite-difference validation of jet programs and parameter gradients.
// Used by the test suites and by the `check` CLI subcommand; the probes
// rebuild the program on fresh tapes and never reuse the analytic path
// they are validating.

// Guarded relative error |a-b| / max(1, |a|, |b|): relative for large
// magnitudes, absolute near zero.
inline double rel_error(double a, double b) {
  const double d = std::abs(a - b);
  const double m = std::max({1.0, std::abs(a), std::abs(b)});
  return d / m;
}

struct JetCheckReport {
  double d1_max = 0.0;  // worst first-derivative error (xi1, xi2, t)
  double d2_max = 0.0;  // worst second-derivative error (11, 12, 22)
};

// Builds a scalar-field jet at (xi1, xi2, t) on the given tape.
using JetProgram = std::function<Jet(Tape&, const std::array<double, 3>&)>;

// Compares jet derivatives against central differences of the program's
// value channel.  Steps are scaled by max(1, |x_k|) per axis; the second
// derivatives use the (coarser) step2 to balance truncation and roundoff.
JetCheckReport check_jet_derivatives(const JetProgram& f, const std::array<double, 3>& x,
                                     double step1 = 1e-6, double step2 = 1e-4);

// Registers parameters from theta on the tape and returns the scalar root.
using ScalarProgram = std::function<Scalar(Tape&, std::span<const double>)>;

// Compares the backward-sweep gradient with central differences over every
// parameter; returns the worst guarded relative error.
double check_parameter_gradients(const ScalarProgram& f, std::span<double> theta,
                                 double step = 1e-6);

}  // namespace neuralshell
