#pragma once

#include <array>
#include <functional>

#include "neuralshell/jet.hpp"
#include "neuralshell/surface.hpp"
#include "neuralshell/tape.hpp"
#include "neuralshell/vec.hpp"

namespace neuralshell {

// Shell kinematics: deformation gradients and strain measures built from
// covariant displacement jets on a reference frame.  All outputs are tape
// nodes so parameter gradients flow through the strains.

struct DeformationGradients {
  Scalar phi[2][2];        // phi_{alpha lambda}, [alpha][lambda]
  Scalar phi3[2];          // phi_{alpha 3}
  Scalar phi_up[2][2];     // phi_beta^lambda = phi_{beta mu} a^{mu lambda}, [beta][lambda]
  Scalar phi3_up[2];       // phi^lambda_3 = a^{lambda mu} phi_{mu 3}
  Scalar phi_cd[2][2][2];  // phi_{alpha lambda}|_beta, [alpha][lambda][beta]
  Scalar phi3_cd[2][2];    // phi_{alpha 3}|_beta, [alpha][beta]
};

// ucov are the covariant displacement jets (u_1, u_2, u_3) including basis
// derivatives, as produced by covariant_jets().
DeformationGradients deformation_gradients(Tape& t, const SurfaceFrame& f,
                                           const std::array<Jet, 3>& ucov);

// Flattened symmetric strain vectors in index order (11, 12, 21, 22); the
// 12 and 21 slots share one node.  `nonlinear` keeps the quadratic terms;
// the linear mode exists for the small-strain ablation.
std::array<Scalar, 4> membrane_strain(Tape& t, const SurfaceFrame& f,
                                      const DeformationGradients& g, bool nonlinear);

// Bending strain with explicit symmetrization of the mixed components.
std::array<Scalar, 4> bending_strain(Tape& t, const SurfaceFrame& f,
                                     const DeformationGradients& g, bool nonlinear);

// ---------------------------------------------------------------------------
// Independent strain oracle
//
// Computes the exact fundamental-form strains
//   eps = 1/2 (a_ab - abar_ab),   kappa = bbar_ab - b_ab
// of the deformed surface x = xbar + u by finite-differencing only the
// displacement field (reference derivatives are analytic).  This is the
// reference route the gradient-based strains are validated against; it
// shares no code with them.

struct OracleStrains {
  Sym2 eps;
  Sym2 kappa;
};

using DisplacementFn = std::function<Vec3(double, double)>;

// rel_step scales with the domain extent per axis.
OracleStrains strain_oracle(const SurfaceSpec& s, const DisplacementFn& u, double xi1,
                            double xi2, double rel_step = 1e-5);

}  // namespace neuralshell
