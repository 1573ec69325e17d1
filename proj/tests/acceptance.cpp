// Acceptance gate: one line per criterion, tolerances pinned below.
//
//   [PASS] / [FAIL]  criterion outcome (failures drive the exit code)
//   [GAP ]           desk-scale benchmark miss, reported but non-fatal: the
//                    nightly tier is the quantitative gate for those numbers
//   [SKIP]           nightly tier without NEURALSHELL_ACCEPT_PAPER=1
//
// Run `acceptance <substring>` to execute only matching criteria.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "neuralshell/energy.hpp"
#include "neuralshell/kinematics.hpp"
#include "neuralshell/ndf.hpp"
#include "neuralshell/rng.hpp"
#include "neuralshell/scenarios.hpp"
#include "neuralshell/surface.hpp"
#include "neuralshell/trainer.hpp"

using namespace neuralshell;

namespace {

constexpr double kPi = std::numbers::pi;

// --------------------------------------------------------------------------
// Pinned tolerances and budgets

// Desk-scale (ci) obstacle course: wall-clock bound per case (the error
// bound itself is pinned in the benchmark table).
constexpr double kCiWallSeconds = 900.0;

// Derivative validation.
constexpr double kJetRelTol = 1e-5;    // network jets vs central differences
constexpr double kGradRelTol = 1e-4;   // loss parameter gradients vs central differences

// Strain oracle.
constexpr int kOracleFields = 100;        // random smooth fields, split over 3 charts
constexpr double kOracleSlope = 2e-2;     // displacement-gradient amplitude; large enough
                                          // that the cubic bending term clears the
                                          // oracle's eps*|u|/h^2 rounding floor
constexpr double kOracleStep = 1e-4;      // oracle FD step (relative to the axis period)
constexpr double kMembraneTol = 1e-7;     // |tape eps - oracle eps|
constexpr double kBendingGapCeil = 1e-4;  // model-vs-oracle gap stays small at the base slope
constexpr double kCubicRatioMin = 6.0;    // gap contraction under amplitude halving

// Hard constraints.
constexpr int kConstraintDraws = 1000;
constexpr double kConstraintTol = 1e-12;

// Rigid motion.
constexpr double kRigidTol = 1e-12;
constexpr double kRotationRatioLo = 3.5, kRotationRatioHi = 4.5;

// Ablations (desk-scale budgets).
constexpr double kStrainAblationMinDiff = 0.10;  // relative mean-displacement gap
constexpr int kNapkinAblationIters = 300;
constexpr int kActivationIters = 800;

// Export / memory consistency.
constexpr double kExportTol = 1e-12;

// Editing: fine-tune budget is half the scratch budget.
constexpr int kScratchIters = 240;
constexpr int kEditIters = 120;
constexpr int kEditBaseIters = 1200;  // one-time cost of the reused base field

// Sleeve-twist smoke.
constexpr int kSleeveIters = 150;
constexpr double kSleeveVarianceFloor = 1e-12;

const std::array<double, 4> kMat{1.0, 0.01, 1e4, 0.3};

// --------------------------------------------------------------------------

struct Reporter {
  int failures = 0;
  std::string filter;

  bool wants(const std::string& name) const {
    return filter.empty() || name.find(filter) != std::string::npos;
  }
  void pass(const std::string& name, const std::string& detail) {
    std::printf("[PASS] %s: %s\n", name.c_str(), detail.c_str());
  }
  void fail(const std::string& name, const std::string& detail) {
    std::printf("[FAIL] %s: %s\n", name.c_str(), detail.c_str());
    ++failures;
  }
  void gap(const std::string& name, const std::string& detail) {
    std::printf("[GAP ] %s: %s (nightly tier remains the quantitative gate)\n", name.c_str(),
                detail.c_str());
  }
  void skip(const std::string& name, const std::string& detail) {
    std::printf("[SKIP] %s: %s\n", name.c_str(), detail.c_str());
  }
  void check(const std::string& name, bool ok, const std::string& detail) {
    ok ? pass(name, detail) : fail(name, detail);
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SirenConfig tiny_net_config(int in_width, int width = 8, int layers = 2,
                            std::uint64_t seed = 1, Activation act = Activation::Sine) {
  SirenConfig c;
  c.in_width = in_width;
  c.hidden_layers = layers;
  c.hidden_width = width;
  c.seed = seed;
  c.activation = act;
  return c;
}

Jet lift(Tape& t, const DJet& d) { return Jet::constant(t, d); }

struct StrainValues {
  double eps[4];
  double kappa[4];
};

// Strains of a manufactured displacement field given as exact jets.
StrainValues strains_of(const SurfaceSpec& s, double x1, double x2,
                        const std::array<DJet, 3>& uj, bool nonlinear) {
  Tape t;
  const SurfaceFrame f = frame(s, x1, x2);
  std::array<Jet, 3> u{lift(t, uj[0]), lift(t, uj[1]), lift(t, uj[2])};
  const auto ucov = covariant_jets(t, f, u);
  const auto g = deformation_gradients(t, f, ucov);
  const auto eps = membrane_strain(t, f, g, nonlinear);
  const auto kap = bending_strain(t, f, g, nonlinear);
  StrainValues out;
  for (int k = 0; k < 4; ++k) {
    out.eps[k] = t.value(eps[k]);
    out.kappa[k] = t.value(kap[k]);
  }
  return out;
}

// ==========================================================================
// Obstacle course

void benchmark_tier(Reporter& rep, BudgetProfile profile) {
  const bool nightly = profile == BudgetProfile::Paper;
  const char* tier = nightly ? "nightly" : "ci";
  const bool enabled = !nightly || std::getenv("NEURALSHELL_ACCEPT_PAPER") != nullptr;

  for (const BenchmarkCase& c : benchmark_cases()) {
    const std::string name = std::string("obstacle-") + tier + "-" + c.scenario.name;
    // The desk-scale criterion covers the plate and the roof only.
    if (!nightly && c.scenario.name != "square-plate" && c.scenario.name != "scordelis-lo")
      continue;
    if (!rep.wants(name)) continue;
    if (!enabled) {
      rep.skip(name, fmt("full budget (tol %.0f%%); set NEURALSHELL_ACCEPT_PAPER=1 to run",
                         100.0 * c.tol_paper));
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const BenchmarkReport r = run_benchmark(c, profile);
      const double wall = seconds_since(t0);
      const std::string detail =
          fmt("measured %.6g vs %.6g, rel err %.2f%% (tol %.0f%%), %.0f s", r.measured,
              r.reference, 100.0 * r.rel_error, 100.0 * r.tolerance, wall);
      if (nightly) {
        rep.check(name, r.pass, detail);
      } else if (r.pass && wall <= kCiWallSeconds) {
        rep.pass(name, detail);
      } else {
        rep.gap(name, detail);
      }
    } catch (const std::exception& e) {
      rep.fail(name, fmt("aborted: %s", e.what()));
    }
  }
}

// ==========================================================================
// Derivative correctness

Vec3 raw_field(const NdfWeights& w, const EmbedSpec& e, double x1, double x2, double tm) {
  Tape t;
  const PackedNet net = register_net(t, w);
  const auto u = eval_raw(t, net, e, x1, x2, tm, kMat);
  return {t.value(u[0].v), t.value(u[1].v), t.value(u[2].v)};
}

void derivative_criterion(Reporter& rep) {
  const std::string name = "derivative-correctness";
  if (!rep.wants(name)) return;

  // Jets of a 2x8 sine network over the richest embedding (periodic pair,
  // axial coordinate, time) against central finite differences.
  SurfaceSpec s = SurfaceSpec::cylinder(0.25, 1.0);
  EmbedSpec e = embed_for(s, true, 1.0);
  NdfWeights w = init_siren(tiny_net_config(e.width()));

  double max_d1 = 0.0, max_d2 = 0.0;
  SplitMix64 rng(2024);
  const double p1 = s.period(0), p2 = s.period(1), pt = 1.0;
  const double h1a = 1e-6 * p1, h2a = 1e-6 * p2, hta = 1e-6 * pt;
  const double h1b = 1e-4 * p1, h2b = 1e-4 * p2;

  for (int trial = 0; trial < 12; ++trial) {
    const double x1 = rng.uniform(s.lo[0] + 0.05 * p1, s.hi[0] - 0.05 * p1);
    const double x2 = rng.uniform(s.lo[1] + 0.05 * p2, s.hi[1] - 0.05 * p2);
    const double tm = rng.uniform(0.05, 0.95);

    Tape t;
    const PackedNet net = register_net(t, w);
    const auto u = eval_raw(t, net, e, x1, x2, tm, kMat);

    for (int c = 0; c < 3; ++c) {
      auto f = [&](double a, double b, double tt) { return raw_field(w, e, a, b, tt)[c]; };
      const double fd1[3] = {
          (f(x1 + h1a, x2, tm) - f(x1 - h1a, x2, tm)) / (2 * h1a),
          (f(x1, x2 + h2a, tm) - f(x1, x2 - h2a, tm)) / (2 * h2a),
          (f(x1, x2, tm + hta) - f(x1, x2, tm - hta)) / (2 * hta),
      };
      const double f0 = f(x1, x2, tm);
      // Second differences, Richardson-extrapolated to O(h^4) so the oracle
      // noise sits well below the comparison tolerance.
      auto d2_at = [&](double ha, double hb) {
        return std::array<double, 3>{
            (f(x1 + ha, x2, tm) - 2 * f0 + f(x1 - ha, x2, tm)) / (ha * ha),
            (f(x1 + ha, x2 + hb, tm) - f(x1 + ha, x2 - hb, tm) -
             f(x1 - ha, x2 + hb, tm) + f(x1 - ha, x2 - hb, tm)) /
                (4 * ha * hb),
            (f(x1, x2 + hb, tm) - 2 * f0 + f(x1, x2 - hb, tm)) / (hb * hb),
        };
      };
      const auto coarse = d2_at(h1b, h2b);
      const auto fine = d2_at(0.5 * h1b, 0.5 * h2b);
      double fd2[3];
      for (int k = 0; k < 3; ++k) fd2[k] = (4 * fine[std::size_t(k)] - coarse[std::size_t(k)]) / 3;
      double mag1 = 1e-6, mag2 = 1e-6;
      for (int k = 0; k < 3; ++k) mag1 = std::max(mag1, std::abs(fd1[k]));
      for (int k = 0; k < 3; ++k) mag2 = std::max(mag2, std::abs(fd2[k]));
      for (int k = 0; k < 3; ++k) {
        const double jv = t.value(u[std::size_t(c)].d1[k]);
        max_d1 = std::max(max_d1, std::abs(jv - fd1[k]) / std::max({std::abs(fd1[k]),
                                                                    std::abs(jv), 0.01 * mag1}));
      }
      for (int k = 0; k < 3; ++k) {
        const double jv = t.value(u[std::size_t(c)].d2[k]);
        max_d2 = std::max(max_d2, std::abs(jv - fd2[k]) / std::max({std::abs(fd2[k]),
                                                                    std::abs(jv), 0.01 * mag2}));
      }
    }
  }

  // Parameter gradients of the full loss (dynamic scenario with gravity,
  // prescribed corner motions and an initial rest state) against central
  // finite differences; repeated on the material-conditioned scenario.
  double max_grad = 0.0;
  for (const char* scen : {"napkin-corners-moving", "napkin-material"}) {
    ScenarioConfig sc = find_scenario(scen);
    const ShellProblem& p = sc.problem;
    NdfWeights nw = init_siren(tiny_net_config(p.embed.width(), 8, 2, 7));
    SamplingPlan plan;
    plan.n1 = 2;
    plan.n2 = 2;
    plan.nt = 2;
    plan.seed = 3;
    const auto batch = stratified_samples(plan, p.surface, p.embed.duration, true, 0);

    std::vector<double> grad(nw.theta.size());
    loss_and_gradient(p, nw, batch, p.material, 4, 1, grad);
    double gmax = 1e-12;
    for (const double g : grad) gmax = std::max(gmax, std::abs(g));

    SplitMix64 pick(55);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t k = pick.next() % nw.theta.size();
      const double h = 1e-6 * std::max(1.0, std::abs(nw.theta[k]));
      NdfWeights wp = nw, wm = nw;
      wp.theta[k] += h;
      wm.theta[k] -= h;
      std::vector<double> scratch(nw.theta.size());
      const double lp = loss_and_gradient(p, wp, batch, p.material, 4, 1, scratch);
      const double lm = loss_and_gradient(p, wm, batch, p.material, 4, 1, scratch);
      const double fd = (lp - lm) / (2 * h);
      max_grad = std::max(max_grad, std::abs(fd - grad[k]) /
                                        std::max({std::abs(fd), std::abs(grad[k]), 0.01 * gmax}));
    }
  }

  const bool ok = max_d1 <= kJetRelTol && max_d2 <= kJetRelTol && max_grad <= kGradRelTol;
  rep.check(name, ok,
            fmt("jets d1 %.2e / d2 %.2e (tol %.0e), loss grads %.2e (tol %.0e)", max_d1, max_d2,
                kJetRelTol, max_grad, kGradRelTol));
}

// ==========================================================================
// Strain oracle equivalence

struct TrigField {
  // u_c(xi) = sum_k amp[c][k] sin(w1[c][k] xi1 + w2[c][k] xi2 + ph[c][k])
  double amp[3][3], w1[3][3], w2[3][3], ph[3][3];

  static TrigField random(SplitMix64& rng, const SurfaceSpec& s, double slope) {
    TrigField f;
    const double k1 = 2 * kPi / s.period(0), k2 = 2 * kPi / s.period(1);
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < 3; ++k) {
        f.w1[c][k] = k1 * rng.uniform(0.3, 1.2);
        f.w2[c][k] = k2 * rng.uniform(0.3, 1.2);
        const double wmax = std::max(f.w1[c][k], f.w2[c][k]);
        f.amp[c][k] = rng.uniform(0.2, 1.0) * slope / (3.0 * wmax);
        f.ph[c][k] = rng.uniform(0.0, 2 * kPi);
      }
    }
    return f;
  }

  TrigField scaled(double factor) const {
    TrigField f = *this;
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) f.amp[c][k] *= factor;
    return f;
  }

  Vec3 value(double x1, double x2) const {
    Vec3 u{};
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k)
        u[c] += amp[c][k] * std::sin(w1[c][k] * x1 + w2[c][k] * x2 + ph[c][k]);
    return u;
  }

  std::array<DJet, 3> jets(double x1, double x2) const {
    std::array<DJet, 3> out{};
    for (int c = 0; c < 3; ++c) {
      DJet j;
      for (int k = 0; k < 3; ++k) {
        const double s = w1[c][k] * x1 + w2[c][k] * x2 + ph[c][k];
        const double sv = std::sin(s), cv = std::cos(s), a = amp[c][k];
        j.v += a * sv;
        j.d1[0] += a * w1[c][k] * cv;
        j.d1[1] += a * w2[c][k] * cv;
        j.d2[pair_index(0, 0)] += -a * w1[c][k] * w1[c][k] * sv;
        j.d2[pair_index(0, 1)] += -a * w1[c][k] * w2[c][k] * sv;
        j.d2[pair_index(1, 1)] += -a * w2[c][k] * w2[c][k] * sv;
      }
      out[std::size_t(c)] = j;
    }
    return out;
  }
};

void oracle_criterion(Reporter& rep) {
  const std::string name = "strain-oracle-equivalence";
  if (!rep.wants(name)) return;

  const SurfaceSpec charts[3] = {SurfaceSpec::plane(100.0), SurfaceSpec::cylinder(0.25, 1.0),
                                 SurfaceSpec::cone(0.2, 0.4, 0.7)};
  SplitMix64 rng(7177);
  double max_eps_diff = 0.0;
  double gap_full = 0.0, gap_half = 0.0;

  for (int fi = 0; fi < kOracleFields; ++fi) {
    const SurfaceSpec& s = charts[fi % 3];
    const TrigField base = TrigField::random(rng, s, kOracleSlope);
    const double x1 = rng.uniform(s.lo[0] + 0.05 * s.period(0), s.hi[0] - 0.05 * s.period(0));
    const double x2 = rng.uniform(s.lo[1] + 0.05 * s.period(1), s.hi[1] - 0.05 * s.period(1));

    for (const double scale : {1.0, 0.5}) {
      const TrigField f = base.scaled(scale);
      const StrainValues got = strains_of(s, x1, x2, f.jets(x1, x2), true);
      const OracleStrains ref = strain_oracle(
          s, [&](double a, double b) { return f.value(a, b); }, x1, x2, kOracleStep);
      const double re[4] = {ref.eps(0, 0), ref.eps(0, 1), ref.eps(1, 0), ref.eps(1, 1)};
      const double rk[4] = {ref.kappa(0, 0), ref.kappa(0, 1), ref.kappa(1, 0), ref.kappa(1, 1)};
      double keps = 0.0, kgap = 0.0;
      for (int k = 0; k < 4; ++k) {
        keps = std::max(keps, std::abs(got.eps[k] - re[k]));
        kgap = std::max(kgap, std::abs(got.kappa[k] - rk[k]));
      }
      max_eps_diff = std::max(max_eps_diff, keps);
      (scale == 1.0 ? gap_full : gap_half) = std::max(scale == 1.0 ? gap_full : gap_half, kgap);
    }
  }

  const double ratio = gap_full / std::max(gap_half, 1e-300);
  const bool ok = max_eps_diff <= kMembraneTol && gap_full <= kBendingGapCeil &&
                  gap_full > 1e-12 && ratio >= kCubicRatioMin;
  rep.check(name, ok,
            fmt("membrane |diff| %.2e (tol %.0e); bending gap %.2e -> %.2e, ratio %.2f (>= %.1f)",
                max_eps_diff, kMembraneTol, gap_full, gap_half, ratio, kCubicRatioMin));
}

// ==========================================================================
// Hard constraints

void constraint_criterion(Reporter& rep) {
  const std::string name = "hard-constraint-exactness";
  if (!rep.wants(name)) return;

  const ScenarioConfig rest = find_scenario("napkin-corner");
  const ScenarioConfig moving = find_scenario("napkin-corners-moving");
  const ScenarioConfig twist = find_scenario("sleeve-twist");
  const SurfaceSpec cyl = SurfaceSpec::cylinder(0.25, 1.0);
  const EmbedSpec cyl_embed = embed_for(cyl, false, 0.0);

  double worst = 0.0;
  int draws = 0;
  SplitMix64 rng(99);

  auto field_jet = [&](const ShellProblem& p, const NdfWeights& w, double x1, double x2,
                       double tm, Vec3* value, Vec3* velocity) {
    Tape t;
    const PackedNet net = register_net(t, w);
    const std::array<double, 4> mat{p.material.rho, p.material.h, p.material.E, p.material.nu};
    const DisplacementJet u = eval_ndf(t, net, p.embed, p.constraints, p.surface, x1, x2, tm, mat);
    for (int c = 0; c < 3; ++c) {
      (*value)[c] = t.value(u.u[std::size_t(c)].v);
      (*velocity)[c] = t.value(u.u[std::size_t(c)].d1[2]);
    }
  };

  while (draws < kConstraintDraws) {
    const std::uint64_t seed = rng.next();

    {  // Rest state: u = 0 and du/dt = 0 at t = 0, everywhere.
      const ShellProblem& p = rest.problem;
      NdfWeights w = init_siren(tiny_net_config(p.embed.width(), 8, 2, seed));
      Vec3 u, v;
      field_jet(p, w, rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), 0.0, &u, &v);
      worst = std::max({worst, norm(u), norm(v)});
      ++draws;
    }
    {  // Anchors follow the prescribed translation ramps at later times.
      const ShellProblem& p = moving.problem;
      NdfWeights w = init_siren(tiny_net_config(p.embed.width(), 8, 2, seed ^ 0x9e37));
      const double tm = rng.uniform(0.2, 2.0);
      Vec3 u, v;
      field_jet(p, w, 0.0, 1.0, tm, &u, &v);
      worst = std::max(worst, norm(u - Vec3{0.2 * tm, 0.0, 0.0}) / std::max(1.0, 0.2 * tm));
      field_jet(p, w, 1.0, 1.0, tm, &u, &v);
      worst = std::max(worst, norm(u - Vec3{-0.2 * tm, 0.0, 0.0}) / std::max(1.0, 0.2 * tm));
      // And the full field still starts from rest.
      field_jet(p, w, rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), 0.0, &u, &v);
      worst = std::max(worst, norm(u));
      ++draws;
    }
    {  // Rim rotation: the boundary arc is exact at the rim.
      const ShellProblem& p = twist.problem;
      NdfWeights w = init_siren(tiny_net_config(p.embed.width(), 8, 2, seed ^ 0x517c));
      const double x1 = rng.uniform(0.0, 2 * kPi);
      const double tm = rng.uniform(0.1, 1.0);
      Vec3 u, v;
      field_jet(p, w, x1, 0.0, tm, &u, &v);
      const PrescribedMotion& m = p.constraints.motions[0];
      const auto b = prescribed_motion(m, p.surface, x1, tm);
      const Vec3 expect = Vec3{b[0].v, b[1].v, b[2].v} * m.sign;
      worst = std::max(worst, norm(u - expect) / std::max(1.0, norm(expect)));
      ++draws;
    }
    {  // Periodic seam closure is bitwise.
      NdfWeights w = init_siren(tiny_net_config(cyl_embed.width(), 8, 2, seed ^ 0xabcd));
      const double x1 = rng.uniform(0.0, 2 * kPi);
      const double x2 = rng.uniform(0.0, 1.0);
      ConstraintSpec none;
      const Vec3 a = eval_values(w, cyl_embed, none, cyl, x1, x2, 0.0, kMat);
      const Vec3 b = eval_values(w, cyl_embed, none, cyl, x1 + 2 * kPi, x2, 0.0, kMat);
      worst = std::max(worst, norm(a - b));
      ++draws;
    }
  }

  rep.check(name, worst <= kConstraintTol,
            fmt("%d random weight draws, worst violation %.2e (tol %.0e)", draws, worst,
                kConstraintTol));
}

// ==========================================================================
// Rigid motion

void rigid_criterion(Reporter& rep) {
  const std::string name = "rigid-motion-exactness";
  if (!rep.wants(name)) return;

  const SurfaceSpec charts[4] = {SurfaceSpec::plane(100.0), SurfaceSpec::cylinder(0.25, 1.0),
                                 SurfaceSpec::roof_arc(25.0, 50.0, 80.0 * kPi / 180.0,
                                                       50.0 * kPi / 180.0),
                                 SurfaceSpec::cone(0.2, 0.4, 0.7)};
  SplitMix64 rng(4242);
  double worst_translation = 0.0;

  for (const SurfaceSpec& s : charts) {
    for (int k = 0; k < 5; ++k) {
      const double x1 = rng.uniform(s.lo[0], s.hi[0]);
      const double x2 = rng.uniform(s.lo[1], s.hi[1]);
      DJet c[3];
      c[0].v = 0.37;
      c[1].v = -1.25;
      c[2].v = 0.81;
      const StrainValues sv = strains_of(s, x1, x2, {c[0], c[1], c[2]}, true);
      for (int m = 0; m < 4; ++m)
        worst_translation = std::max({worst_translation, std::abs(sv.eps[m]),
                                      std::abs(sv.kappa[m])});
    }
  }

  // Small rigid rotation about a skew axis: exact strains stay zero, the
  // linear-mode membrane error shrinks by 4x when the angle halves.
  const SurfaceSpec roof = charts[2];
  auto rotation_jets = [&](double theta, double x1, double x2) {
    const Quat q = Quat::from_axis_angle({0.3, 1.0, 0.2}, theta);
    const ReferencePoint r = eval_reference(roof, x1, x2);
    std::array<DJet, 3> u{};
    for (int c = 0; c < 3; ++c) {
      u[std::size_t(c)].v = (q.rotate(r.x) - r.x)[c];
      for (int a = 0; a < 2; ++a)
        u[std::size_t(c)].d1[a] = (q.rotate(r.d1[std::size_t(a)]) - r.d1[std::size_t(a)])[c];
      for (int p = 0; p < 3; ++p)
        u[std::size_t(c)].d2[p] = (q.rotate(r.d2[std::size_t(p)]) - r.d2[std::size_t(p)])[c];
    }
    return u;
  };

  double worst_rotation = 0.0;
  double lin_full = 0.0, lin_half = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double x1 = rng.uniform(roof.lo[0], roof.hi[0]);
    const double x2 = rng.uniform(roof.lo[1], roof.hi[1]);
    for (const double theta : {0.02, 0.01}) {
      const auto uj = rotation_jets(theta, x1, x2);
      const StrainValues nl = strains_of(roof, x1, x2, uj, true);
      for (int m = 0; m < 4; ++m) worst_rotation = std::max(worst_rotation, std::abs(nl.eps[m]));
      const StrainValues ln = strains_of(roof, x1, x2, uj, false);
      double err = 0.0;
      for (int m = 0; m < 4; ++m) err = std::max(err, std::abs(ln.eps[m] - nl.eps[m]));
      (theta == 0.02 ? lin_full : lin_half) = std::max(theta == 0.02 ? lin_full : lin_half, err);
    }
  }
  const double ratio = lin_full / std::max(lin_half, 1e-300);

  const bool ok = worst_translation <= kRigidTol && worst_rotation <= kRigidTol &&
                  ratio >= kRotationRatioLo && ratio <= kRotationRatioHi;
  rep.check(name, ok,
            fmt("translation strains %.2e, rotation eps %.2e (tol %.0e); linear-mode error "
                "%.2e -> %.2e, ratio %.2f (expect ~4)",
                worst_translation, worst_rotation, kRigidTol, lin_full, lin_half, ratio));
}

// ==========================================================================
// Ablations

void strain_ablation_criterion(Reporter& rep) {
  const std::string name = "ablation-strain-nonlinearity";
  if (!rep.wants(name)) return;

  ScenarioConfig sc = find_scenario("napkin-corner");
  SamplingPlan plan;
  plan.n1 = 6;
  plan.n2 = 6;
  plan.nt = 4;
  plan.seed = 11;
  TrainConfig cfg;
  cfg.iterations = kNapkinAblationIters;
  cfg.adam.lr = 1e-3;
  cfg.chunk = 16;

  double mean_u[2] = {0.0, 0.0};
  for (int linear = 0; linear < 2; ++linear) {
    ShellProblem p = sc.problem;
    p.nonlinear = linear == 0;
    NdfWeights w = init_siren(tiny_net_config(p.embed.width(), 24, 2, 1));
    const TrainReport r = train(p, w, plan, cfg);
    mean_u[linear] = r.history.back().mean_abs_u;
  }
  const double diff = std::abs(mean_u[1] - mean_u[0]) / std::max(mean_u[0], 1e-12);
  rep.check(name, diff > kStrainAblationMinDiff,
            fmt("final mean |u|: nonlinear %.4g vs linear %.4g, rel diff %.1f%% (> %.0f%%)",
                mean_u[0], mean_u[1], 100.0 * diff, 100.0 * kStrainAblationMinDiff));
}

void activation_ablation_criterion(Reporter& rep) {
  const std::string name = "ablation-activation";
  if (!rep.wants(name)) return;

  ScenarioConfig sc = find_scenario("square-plate");
  SamplingPlan plan;
  plan.n1 = 10;
  plan.n2 = 10;
  plan.seed = 1;
  TrainConfig cfg;
  cfg.iterations = kActivationIters;
  cfg.adam.lr = 1e-3;
  cfg.chunk = 16;

  double err[2] = {0.0, 0.0};
  int idx = 0;
  for (const Activation act : {Activation::Sine, Activation::Gelu}) {
    NdfWeights w = init_siren(tiny_net_config(sc.problem.embed.width(), 32, 3, 1, act));
    train(sc.problem, w, plan, cfg);
    const double probe = probe_value(sc.expected->probe, sc.problem, w);
    err[idx++] = std::abs(probe - sc.expected->value) / sc.expected->value;
  }
  rep.check(name, err[0] < err[1],
            fmt("plate error at equal budget: sine %.2f%% vs gelu %.2f%%", 100.0 * err[0],
                100.0 * err[1]));
}

// ==========================================================================
// Export consistency and checkpoint memory

std::vector<Vec3> obj_vertices(const std::string& path) {
  std::ifstream f(path);
  std::vector<Vec3> v;
  std::string line;
  while (std::getline(f, line)) {
    if (line.rfind("v ", 0) != 0) continue;
    Vec3 p;
    std::sscanf(line.c_str(), "v %lf %lf %lf", &p.x, &p.y, &p.z);
    v.push_back(p);
  }
  return v;
}

void export_criterion(Reporter& rep) {
  const std::string name = "export-consistency-memory";
  if (!rep.wants(name)) return;

  const auto dir = std::filesystem::temp_directory_path() / "ns_acceptance_export";
  std::filesystem::remove_all(dir);

  // Two resolutions of the same trained-field export agree where the grids
  // share parameter points (the coarse grid is nested in the fine one).
  ScenarioConfig plate = find_scenario("square-plate");
  NdfWeights w = init_siren(tiny_net_config(plate.problem.embed.width(), 8, 2, 9));
  ExportOptions lo;
  lo.n1 = lo.n2 = 5;
  lo.out_dir = (dir / "lo").string();
  ExportOptions hi;
  hi.n1 = hi.n2 = 9;
  hi.out_dir = (dir / "hi").string();
  const auto plo = export_meshes(w, plate.problem, lo);
  const auto phi = export_meshes(w, plate.problem, hi);
  const auto vlo = obj_vertices(plo[0]);
  const auto vhi = obj_vertices(phi[0]);
  double worst = 0.0;
  bool shapes_ok = vlo.size() == 25 && vhi.size() == 81;
  if (shapes_ok) {
    for (int j = 0; j < 5; ++j) {
      for (int i = 0; i < 5; ++i) {
        const Vec3 d = vlo[std::size_t(j) * 5 + i] - vhi[std::size_t(2 * j) * 9 + 2 * i];
        worst = std::max(worst, norm(d));
      }
    }
  }

  // The checkpoint holds the field; its size must not react to export scale.
  ScenarioConfig napkin = find_scenario("napkin-corner");
  NdfWeights wd = init_siren(tiny_net_config(napkin.problem.embed.width(), 8, 2, 9));
  const std::string ckpt = (dir / "field.ndf").string();
  CheckpointMeta meta;
  save_checkpoint(ckpt, wd, meta);
  const auto size_before = std::filesystem::file_size(ckpt);

  ExportOptions small;
  small.n1 = small.n2 = 4;
  small.frames = 1;
  small.out_dir = (dir / "small").string();
  export_meshes(wd, napkin.problem, small);

  ExportOptions big;  // 100x the vertex-frame payload of `small`
  big.n1 = big.n2 = 40;
  big.frames = 10;
  big.out_dir = (dir / "big").string();
  export_meshes(wd, napkin.problem, big);

  save_checkpoint(ckpt, wd, meta);
  const auto size_after = std::filesystem::file_size(ckpt);

  const bool ok = shapes_ok && worst <= kExportTol && size_before == size_after;
  rep.check(name, ok,
            fmt("nested-grid agreement %.2e (tol %.0e); checkpoint %llu bytes before and "
                "%llu after 100x export growth",
                worst, kExportTol, static_cast<unsigned long long>(size_before),
                static_cast<unsigned long long>(size_after)));
  std::filesystem::remove_all(dir);
}

// ==========================================================================
// Editing

void editing_criterion(Reporter& rep) {
  const std::string name = "editing-reuse";
  if (!rep.wants(name)) return;

  ScenarioConfig sc = find_scenario("napkin-corner");
  SamplingPlan plan;
  plan.n1 = 5;
  plan.n2 = 5;
  plan.nt = 3;
  plan.seed = 13;
  TrainConfig cfg;
  cfg.adam.lr = 1e-3;
  cfg.chunk = 16;

  const Vec3 target_force{0.0, -9.8 * 1.3, 0.0};

  // Scratch: the target scene trained from a fresh initialization.
  ShellProblem target = sc.problem;
  target.load.constant = target_force;
  NdfWeights ws = init_siren(tiny_net_config(sc.problem.embed.width(), 24, 2, 1));
  cfg.iterations = kScratchIters;
  const TrainReport scratch = train(target, ws, plan, cfg);

  // Reuse: converge on the base scene, then fine-tune toward the target with
  // half the scratch budget while the force sweeps linearly.
  NdfWeights wb = init_siren(tiny_net_config(sc.problem.embed.width(), 24, 2, 1));
  train(sc.problem, wb, plan, cfg);
  EditTarget edit;
  edit.has_force = true;
  edit.force = target_force;
  cfg.iterations = kEditIters;
  const EditReport er = fine_tune_edit(sc.problem, wb, edit, kEditIters, plan, cfg);

  const double l_scratch = scratch.history.back().loss;
  const double l_edit = er.training.history.back().loss;
  rep.check(name, l_edit <= l_scratch,
            fmt("target-scene loss: %d-step edit %.6g vs %d-step scratch %.6g", kEditIters,
                l_edit, kScratchIters, l_scratch));
}

// ==========================================================================
// Sleeve twist smoke

void sleeve_criterion(Reporter& rep) {
  const std::string name = "sleeve-twist-smoke";
  if (!rep.wants(name)) return;

  ScenarioConfig sc = find_scenario("sleeve-twist");
  SamplingPlan plan;
  plan.n1 = 5;
  plan.n2 = 5;
  plan.nt = 4;
  plan.seed = 17;
  TrainConfig cfg;
  cfg.iterations = kSleeveIters;
  cfg.adam.lr = 1e-3;
  cfg.chunk = 16;

  NdfWeights w = init_siren(tiny_net_config(sc.problem.embed.width(), 16, 2, 1));
  try {
    const TrainReport r = train(sc.problem, w, plan, cfg);
    for (const auto& st : r.history) {
      if (!std::isfinite(st.loss)) throw std::runtime_error("non-finite loss in history");
    }

    // Wrinkle proxy: radial displacement along the mid-cylinder circle at the
    // final time must vary (a rigidly twisting tube would keep r = R).
    const ShellProblem& p = sc.problem;
    const std::array<double, 4> mat{p.material.rho, p.material.h, p.material.E, p.material.nu};
    const double R = 0.25;
    std::vector<double> dr;
    for (int k = 0; k < 64; ++k) {
      const double x1 = 2 * kPi * k / 64.0;
      const Vec3 x = eval_reference(p.surface, x1, 0.5).x;
      const Vec3 u = eval_values(w, p.embed, p.constraints, p.surface, x1, 0.5,
                                 p.embed.duration, mat);
      dr.push_back(std::hypot(x.x + u.x, x.z + u.z) - R);
    }
    double mean = 0.0;
    for (const double d : dr) mean += d;
    mean /= static_cast<double>(dr.size());
    double var = 0.0;
    for (const double d : dr) var += (d - mean) * (d - mean);
    var /= static_cast<double>(dr.size());

    rep.check(name, var > kSleeveVarianceFloor,
              fmt("%d iterations, final loss %.6g; mid-cylinder radial variance %.3e (> %.0e)",
                  r.iterations_run, r.history.back().loss, var, kSleeveVarianceFloor));
  } catch (const std::exception& e) {
    rep.fail(name, fmt("numeric abort: %s", e.what()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  Reporter rep;
  if (argc > 1) rep.filter = argv[1];

  benchmark_tier(rep, BudgetProfile::Paper);
  benchmark_tier(rep, BudgetProfile::Ci);
  derivative_criterion(rep);
  oracle_criterion(rep);
  constraint_criterion(rep);
  rigid_criterion(rep);
  strain_ablation_criterion(rep);
  activation_ablation_criterion(rep);
  export_criterion(rep);
  editing_criterion(rep);
  sleeve_criterion(rep);

  if (rep.failures > 0) {
    std::printf("acceptance: %d criterion(s) failed\n", rep.failures);
    return 1;
  }
  std::printf("acceptance: all executed criteria passed\n");
  return 0;
}
