#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "neuralshell/energy.hpp"
#include "neuralshell/kinematics.hpp"
#include "neuralshell/scenarios.hpp"

using namespace neuralshell;

namespace {

// All-zero weights with only the output bias set: the hidden sines all emit
// sin(0) = 0, so the raw field is the constant `bias` — a rigid translation
// with identically zero strain channels.  Perfect for closed-form loss checks.
NdfWeights constant_field_net(const EmbedSpec& e, const Vec3& bias) {
  SirenConfig c;
  c.in_width = e.width();
  c.hidden_layers = 2;
  c.hidden_width = 8;
  c.seed = 5;
  NdfWeights w = init_siren(c);
  std::fill(w.theta.begin(), w.theta.end(), 0.0);
  const auto last = layer_shapes(c).back();
  w.theta[std::size_t(last.b_off) + 0] = bias.x;
  w.theta[std::size_t(last.b_off) + 1] = bias.y;
  w.theta[std::size_t(last.b_off) + 2] = bias.z;
  return w;
}

ShellProblem unit_plane_problem(bool dynamic = false) {
  ShellProblem p;
  p.surface = SurfaceSpec::plane(1.0);
  p.embed = embed_for(p.surface, dynamic, dynamic ? 1.0 : 0.0);
  p.material = {1.0, 0.01, 1e4, 0.3};
  p.dynamic = dynamic;
  return p;
}

double loss_value(const ShellProblem& p, const NdfWeights& w,
                  std::span<const SamplePoint> samples, std::size_t total,
                  bool global = true) {
  Tape t;
  PackedNet net = register_net(t, w);
  Scalar s = total_loss(t, net, p, samples, total, global);
  return t.value(s);
}

}  // namespace

TEST_CASE("stiffness pairs match hand-computed values") {
  const auto [d1, b1] = stiffness({1.0, 1.0, 1e7, 0.0});
  CHECK(d1 == doctest::Approx(1e7).epsilon(1e-15));
  CHECK(b1 == doctest::Approx(1e7 / 12.0).epsilon(1e-15));

  const auto [d2, b2] = stiffness({0.144, 0.0012, 5000.0, 0.25});
  CHECK(d2 == doctest::Approx(6.4).epsilon(1e-12));
  CHECK(b2 == doctest::Approx(7.68e-7).epsilon(1e-12));
}

TEST_CASE("invalid material parameters are rejected") {
  CHECK_THROWS_AS((void)stiffness({1.0, 0.0, 1e7, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS((void)stiffness({1.0, -1.0, 1e7, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS((void)stiffness({1.0, 1.0, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS((void)stiffness({1.0, 1.0, 1e7, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS((void)stiffness({1.0, 1.0, 1e7, -0.1}), std::invalid_argument);
  CHECK_NOTHROW((void)stiffness({1.0, 1.0, 1e7, 0.499}));
}

TEST_CASE("energy density reproduces the uniaxial closed form") {
  Tape t;
  const ElasticityTensor H = elasticity_tensor(Sym2{1.0, 0.0, 1.0}, 0.0);
  std::array<Scalar, 4> eps{t.constant(0.105), t.zero(), t.zero(), t.zero()};
  std::array<Scalar, 4> kap{t.zero(), t.zero(), t.zero(), t.zero()};
  Scalar w = energy_density(t, H, 1.0, 9.0, eps, kap);
  CHECK(t.value(w) == doctest::Approx(0.0055125).epsilon(1e-14));

  // Poisson coupling: for the identity metric the 1111 entry stays 1 and the
  // 1122 entry is nu, so biaxial strains couple through the cross term.
  const ElasticityTensor Hnu = elasticity_tensor(Sym2{1.0, 0.0, 1.0}, 0.3);
  std::array<Scalar, 4> biax{t.constant(0.1), t.zero(), t.zero(), t.constant(0.2)};
  Scalar w2 = energy_density(t, Hnu, 2.0, 0.0, biax, kap);
  // eps.H.eps = e11^2 + e22^2 + 2 nu e11 e22 = 0.01 + 0.04 + 0.012
  CHECK(t.value(w2) == doctest::Approx(0.062).epsilon(1e-13));
}

TEST_CASE("distributed load work enters the loss with a positive sign for opposing motion") {
  // Constant upward displacement against a downward load: zero strain, so
  // the loss is exactly the (positive) negated external work.
  ShellProblem p = unit_plane_problem();
  p.load.kind = LoadSpec::Kind::Distributed;
  p.load.constant = {0.0, 0.0, -1.0};
  NdfWeights w = constant_field_net(p.embed, {0.0, 0.0, 2.0});

  std::vector<SamplePoint> samples{{0.5, 0.5, 0.0}};
  CHECK(loss_value(p, w, samples, 1) == doctest::Approx(2.0).epsilon(1e-13));

  // Aligned displacement flips the sign.
  NdfWeights wdown = constant_field_net(p.embed, {0.0, 0.0, -2.0});
  CHECK(loss_value(p, wdown, samples, 1) == doctest::Approx(-2.0).epsilon(1e-13));

  // Density scaling multiplies the constant part by rho.
  p.load.scale_by_density = true;
  p.material.rho = 3.0;
  CHECK(loss_value(p, w, samples, 1) == doctest::Approx(6.0).epsilon(1e-13));
}

TEST_CASE("sinusoidal load component follows its phase") {
  ShellProblem p = unit_plane_problem(true);
  p.load.kind = LoadSpec::Kind::Distributed;
  p.load.sin_dir = {0.0, 0.0, 1.0};
  p.load.sin_amp = 0.5;
  p.load.sin_omega = 2.0;
  p.load.sin_phase = 1.0;
  NdfWeights w = constant_field_net(p.embed, {0.0, 0.0, 1.0});

  const double tm = 0.37;
  std::vector<SamplePoint> samples{{0.25, 0.75, tm}};
  const double f = 0.5 * std::sin(2.0 * tm + 1.0);
  // Kinetic term is zero for the constant-in-time field.
  CHECK(loss_value(p, w, samples, 1) == doctest::Approx(-f).epsilon(1e-12));
}

TEST_CASE("point loads contribute their negated work once per loss") {
  ShellProblem p = unit_plane_problem();
  p.load.kind = LoadSpec::Kind::Points;
  p.load.points.push_back({0.3, 0.4, {0.0, 0.0, -3.0}});
  p.load.points.push_back({0.7, 0.2, {1.0, 0.0, 0.0}});
  NdfWeights w = constant_field_net(p.embed, {0.0, 0.0, 2.0});

  std::vector<SamplePoint> samples{{0.5, 0.5, 0.0}, {0.1, 0.9, 0.0}};
  // Elastic terms vanish; only -sum f.u = -(-3 * 2) - 0 remains.
  CHECK(loss_value(p, w, samples, 2) == doctest::Approx(6.0).epsilon(1e-13));

  // The point-load sum is a global term: it must appear exactly once no
  // matter how the batch is chunked.
  const double split = loss_value(p, w, std::span(samples).first(1), 2, true) +
                       loss_value(p, w, std::span(samples).last(1), 2, false);
  CHECK(split == doctest::Approx(6.0).epsilon(1e-13));
}

TEST_CASE("point loads reject dynamic problems and out-of-domain anchors") {
  ShellProblem p = unit_plane_problem();
  p.load.kind = LoadSpec::Kind::Points;
  p.load.points.push_back({1.5, 0.5, {0.0, 0.0, -1.0}});
  NdfWeights w = constant_field_net(p.embed, {0.0, 0.0, 1.0});
  std::vector<SamplePoint> samples{{0.5, 0.5, 0.0}};

  Tape t1;
  PackedNet n1 = register_net(t1, w);
  CHECK_THROWS_AS((void)total_loss(t1, n1, p, samples, 1), std::invalid_argument);

  p.load.points[0] = {0.5, 0.5, {0.0, 0.0, -1.0}};
  ShellProblem pdyn = p;
  pdyn.dynamic = true;
  pdyn.embed = embed_for(pdyn.surface, true, 1.0);
  NdfWeights wdyn = constant_field_net(pdyn.embed, {0.0, 0.0, 1.0});
  Tape t2;
  PackedNet n2 = register_net(t2, wdyn);
  CHECK_THROWS_AS((void)total_loss(t2, n2, pdyn, samples, 1), std::invalid_argument);
}

TEST_CASE("soft-constraint penalty matches its closed form for a constant field") {
  ShellProblem p = unit_plane_problem();
  p.load.kind = LoadSpec::Kind::Distributed;
  p.load.constant = {0.0, 0.0, -1.0};
  p.soft_constraints = true;
  p.soft_weight = 1e3;

  ConstraintFactor f;
  f.kind = ConstraintFactor::Kind::PolyEdges;
  f.poly_axes = {true, true};
  f.mask = {false, false, true};
  p.constraints.factors.push_back(f);

  NdfWeights w = constant_field_net(p.embed, {0.0, 0.0, 2.0});
  std::vector<SamplePoint> samples{{0.5, 0.5, 0.0}};
  // Anchor residual is the constant 2 on every boundary sample, so the mean
  // squared violation is exactly 4; external work adds +2 as before.
  CHECK(loss_value(p, w, samples, 1) == doctest::Approx(1e3 * 4.0 + 2.0).epsilon(1e-13));

  // The penalty is a global term too.
  CHECK(loss_value(p, w, samples, 1, false) == doctest::Approx(2.0).epsilon(1e-13));

  // Halving the weight halves the penalty.
  p.soft_weight = 500.0;
  CHECK(loss_value(p, w, samples, 1) == doctest::Approx(500.0 * 4.0 + 2.0).epsilon(1e-13));
}

TEST_CASE("kinetic density is half rho times the squared velocity") {
  Tape t;
  std::array<double, 1> x0{0.7};
  const std::int32_t base = t.add_parameters(x0);
  Jet u0;
  u0.v = t.constant(5.0);
  u0.d1 = {t.zero(), t.zero(), t.node(base)};
  u0.d2 = {t.zero(), t.zero(), t.zero()};
  Jet u1;
  u1.v = t.constant(-1.0);
  u1.d1 = {t.zero(), t.zero(), t.zero()};
  u1.d2 = {t.zero(), t.zero(), t.zero()};
  std::array<Jet, 3> u{u0, u1, u1};

  Scalar k = kinetic_energy_density(t, 2.0, u);
  CHECK(t.value(k) == doctest::Approx(0.7 * 0.7).epsilon(1e-15));
  t.backward(k);
  CHECK(t.adjoint(base) == doctest::Approx(2.0 * 0.7).epsilon(1e-14));

  // All-static jets collapse onto the shared zero node.
  std::array<Jet, 3> still{u1, u1, u1};
  CHECK(kinetic_energy_density(t, 2.0, still).i == t.zero().i);
}

TEST_CASE("dynamic loss of a constant field reduces to the external work") {
  ShellProblem p = unit_plane_problem(true);
  p.load.kind = LoadSpec::Kind::Distributed;
  p.load.constant = {0.0, 0.0, -1.0};
  NdfWeights w = constant_field_net(p.embed, {0.0, 0.0, 2.0});
  std::vector<SamplePoint> samples{{0.4, 0.6, 0.3}, {0.2, 0.8, 0.9}};
  // Strain and kinetic terms are numerically zero for the constant field.
  CHECK(loss_value(p, w, samples, 2) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("material draws must stay inside the conditioned range") {
  ScenarioConfig sc = find_scenario("napkin-material");
  const ShellProblem& p = sc.problem;
  REQUIRE(p.embed.material_dims == 4);

  SirenConfig c;
  c.in_width = p.embed.width();
  c.hidden_layers = 2;
  c.hidden_width = 8;
  NdfWeights w = init_siren(c);
  std::vector<SamplePoint> samples{{0.5, 0.5, 0.1}};

  MaterialParams inside = p.material;
  inside.h = 0.0015;
  Tape t1;
  PackedNet n1 = register_net(t1, w);
  CHECK_NOTHROW((void)material_conditioned_loss(t1, n1, p, samples, 1, inside));

  MaterialParams outside = p.material;
  outside.h = 0.01;  // above the embedded thickness range
  Tape t2;
  PackedNet n2 = register_net(t2, w);
  CHECK_THROWS_AS((void)material_conditioned_loss(t2, n2, p, samples, 1, outside),
                  std::invalid_argument);
}

TEST_CASE("zero total samples is rejected") {
  ShellProblem p = unit_plane_problem();
  NdfWeights w = constant_field_net(p.embed, {0.0, 0.0, 1.0});
  Tape t;
  PackedNet net = register_net(t, w);
  std::vector<SamplePoint> samples;
  CHECK_THROWS_AS((void)total_loss(t, net, p, samples, 0), std::invalid_argument);
}

TEST_CASE("chunked loss evaluation matches the single-batch value") {
  ScenarioConfig sc = find_scenario("napkin-corner");
  const ShellProblem& p = sc.problem;
  SirenConfig c;
  c.in_width = p.embed.width();
  c.hidden_layers = 2;
  c.hidden_width = 16;
  c.seed = 7;
  NdfWeights w = init_siren(c);

  std::vector<SamplePoint> samples{
      {0.1, 0.2, 0.3}, {0.9, 0.5, 1.7}, {0.4, 0.8, 0.05}, {0.6, 0.1, 1.99}};
  const double full = loss_value(p, w, samples, 4);
  const double split = loss_value(p, w, std::span(samples).first(2), 4, true) +
                       loss_value(p, w, std::span(samples).last(2), 4, false);
  CHECK(split == doctest::Approx(full).epsilon(1e-12));
}
