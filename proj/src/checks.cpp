#include "neuralshell/checks.hpp"

#include <algorithm>
#include <cmath>

namespace neuralshell {

namespace {

double value_at(const JetProgram& f, std::array<double, 3> x) {
  Tape t;
  return t.value(f(t, x).v);
}

}  // namespace

JetCheckReport check_jet_derivatives(const JetProgram& f, const std::array<double, 3>& x,
                                     double step1, double step2) {
  Tape t;
  const Jet j = f(t, x);
  const double v0 = t.value(j.v);
  std::array<double, 3> d1{}, d2{};
  for (int k = 0; k < 3; ++k) d1[k] = t.value(j.d1[k]);
  for (int p = 0; p < 3; ++p) d2[p] = t.value(j.d2[p]);

  JetCheckReport rep;
  for (int k = 0; k < 3; ++k) {
    const double h = step1 * std::max(1.0, std::abs(x[k]));
    auto xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const double fd = (value_at(f, xp) - value_at(f, xm)) / (2.0 * h);
    rep.d1_max = std::max(rep.d1_max, rel_error(fd, d1[k]));
  }
  for (int a = 0; a < 2; ++a) {
    const double h = step2 * std::max(1.0, std::abs(x[a]));
    auto xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    const double fd = (value_at(f, xp) - 2.0 * v0 + value_at(f, xm)) / (h * h);
    rep.d2_max = std::max(rep.d2_max, rel_error(fd, d2[pair_index(a, a)]));
  }
  {
    const double h1 = step2 * std::max(1.0, std::abs(x[0]));
    const double h2 = step2 * std::max(1.0, std::abs(x[1]));
    auto pp = x, pm = x, mp = x, mm = x;
    pp[0] += h1; pp[1] += h2;
    pm[0] += h1; pm[1] -= h2;
    mp[0] -= h1; mp[1] += h2;
    mm[0] -= h1; mm[1] -= h2;
    const double fd =
        (value_at(f, pp) - value_at(f, pm) - value_at(f, mp) + value_at(f, mm)) / (4.0 * h1 * h2);
    rep.d2_max = std::max(rep.d2_max, rel_error(fd, d2[pair_index(0, 1)]));
  }
  return rep;
}

double check_parameter_gradients(const ScalarProgram& f, std::span<double> theta, double step) {
  std::vector<double> grad(theta.size());
  {
    Tape t;
    const Scalar root = f(t, theta);
    t.backward(root);
    t.gradient(grad);
  }
  auto loss_at = [&]() {
    Tape t;
    return t.value(f(t, theta));
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(theta[i]));
    const double saved = theta[i];
    theta[i] = saved + h;
    const double lp = loss_at();
    theta[i] = saved - h;
    const double lm = loss_at();
    theta[i] = saved;
    worst = std::max(worst, rel_error((lp - lm) / (2.0 * h), grad[i]));
  }
  return worst;
}

}  // namespace neuralshell
