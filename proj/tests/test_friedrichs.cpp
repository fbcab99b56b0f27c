#include <doctest.h>

#include <cmath>

#include "lowreg/corpus.hpp"
#include "lowreg/error.hpp"
#include "lowreg/friedrichs.hpp"
#include "lowreg/mollify.hpp"
#include "lowreg/norms.hpp"

using namespace lowreg;

namespace {

ScalarField field(const GridSpec& g, ScalarFn fn) { return ScalarField::sample(g, std::move(fn)); }

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

CommutatorExperiment kink_experiment(double h) {
  const GridSpec g = GridSpec::cube(1, 1.0, h);
  CommutatorExperiment e;
  e.a = field(g, [](std::span<const double> x) { return std::abs(x[0]); });
  e.f = field(g, [](std::span<const double> x) { return sgn(x[0]); });
  e.p = e.q = 2.0;
  e.eps = {0.1, 0.05, 0.025, 0.0125};
  e.K = Box::cube(1, 0.5);
  return e;
}

}  // namespace

TEST_CASE("constant factor gives an exactly vanishing commutator") {
  const GridSpec g = GridSpec::cube(2, 0.5, 0.025);
  const MollifierKernel k(2);
  const auto one = ScalarField::constant(g, 1.0).with_constant_padding(1.0);
  const auto f = field(g, [](std::span<const double> x) { return sgn(x[0]) + x[1] * x[1]; });
  for (double eps : {0.2, 0.1}) {
    const auto c = product_commutator(one, f, k, eps);
    const auto c2 = product_commutator(f, one, k, eps);
    const auto d = product_commutator_derivative(one, f, k, eps, 1);
    for (std::size_t node = 0; node < g.size(); ++node) {
      CHECK(c[node] == 0.0);
      CHECK(c2[node] == 0.0);
      CHECK(d[node] == 0.0);
    }
  }
  CommutatorExperiment e;
  e.a = one;
  e.f = f;
  e.eps = {0.2, 0.1, 0.05};
  e.K = Box::cube(2, 0.2);
  const auto t = friedrichs_w1r(e, k);
  for (double v : t.w1r.values) CHECK(v == 0.0);
  for (double v : t.lr.values) CHECK(v == 0.0);
}

TEST_CASE("commutator symmetry and bilinearity") {
  const GridSpec g = GridSpec::cube(2, 0.5, 0.025);
  const MollifierKernel k(2);
  const auto a = field(g, [](std::span<const double> x) { return std::abs(x[0]) + std::sin(3 * x[1]); });
  const auto f = field(g, [](std::span<const double> x) { return sgn(x[1] - 0.1) * std::cos(x[0]); });
  const auto a3 = field(g, [](std::span<const double> x) {
    return 3.0 * (std::abs(x[0]) + std::sin(3 * x[1]));
  });
  const Box K = Box::cube(2, 0.25);
  const auto c = product_commutator(a, f, k, 0.1, K);
  const auto ct = product_commutator(f, a, k, 0.1, K);
  const auto c3 = product_commutator(a3, f, k, 0.1, K);
  const auto d = product_commutator_derivative(a, f, k, 0.1, 0, K);
  const auto dt = product_commutator_derivative(f, a, k, 0.1, 0, K);
  double scale = max_norm(c);
  CHECK(scale > 0.0);
  for (std::size_t node = 0; node < g.size(); ++node) {
    CHECK(c[node] == ct[node]);
    CHECK(d[node] == dt[node]);
    CHECK(std::abs(c3[node] - 3.0 * c[node]) <= 1e-13 * scale);
  }
}

TEST_CASE("commutator derivative matches differences of the commutator") {
  const MollifierKernel k(1);
  auto gap = [&](double h) {
    const GridSpec g = GridSpec::cube(1, 1.0, h);
    const auto a = field(g, [](std::span<const double> x) { return std::cos(3 * x[0]); });
    const auto f = field(g, [](std::span<const double> x) { return std::exp(x[0]); });
    const auto c = product_commutator(a, f, k, 0.2);
    const auto d = product_commutator_derivative(a, f, k, 0.2, 0);
    std::vector<double> fd(g.size());
    fd_derivative(g, c.values(), 0, fd);
    double e = 0.0;
    for (std::size_t node = 1; node + 1 < g.size(); ++node) e = std::max(e, std::abs(fd[node] - d[node]));
    return e / max_norm(d);
  };
  const double e1 = gap(0.01), e2 = gap(0.005);
  CHECK(e1 < 1e-3);
  CHECK(e2 / e1 < 0.3);
}

TEST_CASE("smooth commutator rate") {
  const GridSpec g = GridSpec::cube(1, 1.0, 0.0025);
  const MollifierKernel k(1);
  CommutatorExperiment e;
  e.a = field(g, [](std::span<const double> x) { return std::cos(x[0]); });
  e.f = e.a;
  e.eps = {0.2, 0.1, 0.05, 0.025};
  e.K = Box::cube(1, 0.5);
  const auto t = friedrichs_w1r(e, k);
  CHECK(t.lr.slope >= 0.9);
  CHECK(t.converges);
}

TEST_CASE("kink times step: rate and W^{1,1} convergence") {
  const MollifierKernel k(1);
  const auto e = kink_experiment(0.0125 / 4);
  CHECK(e.r() == doctest::Approx(1.0));
  const auto t = friedrichs_w1r(e, k);
  CHECK(t.lr.slope >= 0.9);
  CHECK(t.decreasing);
  CHECK(t.w1r.values.back() / t.w1r.values.front() <= 0.25);
  CHECK(t.converges);
  // Halving h moves the fitted slopes by less than 0.05 once eps_min spans 8 cells.
  const auto mid = friedrichs_w1r(kink_experiment(0.0125 / 8), k);
  const auto fine = friedrichs_w1r(kink_experiment(0.0125 / 16), k);
  CHECK(std::abs(fine.lr.slope - mid.lr.slope) < 0.05);
  CHECK(std::abs(fine.w1r.slope - mid.w1r.slope) < 0.05);
}

TEST_CASE("eps-weighted derivative decay") {
  const GridSpec g = GridSpec::cube(1, 1.0, 0.0025);
  const MollifierKernel k(1);
  const double eps[] = {0.1, 0.05, 0.025, 0.0125};
  const Box K = Box::cube(1, 0.5);
  const auto step = eps_derivative_decay(field(g, [](std::span<const double> x) { return sgn(x[0]); }),
                                         2.0, eps, K, k);
  CHECK(step.fit.slope == doctest::Approx(0.5).epsilon(0.1));
  CHECK(step.decays);
  const auto smooth = eps_derivative_decay(
      field(g, [](std::span<const double> x) { return std::cos(x[0]); }), 2.0, eps, K, k);
  CHECK(smooth.fit.slope == doctest::Approx(1.0).epsilon(0.05));
  const auto flat = eps_derivative_decay(ScalarField::constant(g, 2.0).with_constant_padding(2.0),
                                         2.0, eps, K, k);
  for (double v : flat.fit.values) CHECK(v == 0.0);
  const double two[] = {0.1, 0.05};
  CHECK_THROWS_WITH_AS(eps_derivative_decay(ScalarField::constant(g, 2.0).with_constant_padding(2.0),
                                            2.0, two, K, k),
                       doctest::Contains("fit"), Error);
}

TEST_CASE("experiment validation") {
  auto e = kink_experiment(0.0125 / 4);
  e.q = 1.5;
  CHECK_THROWS_WITH_AS(e.validate(), doctest::Contains("p'"), Error);
  e = kink_experiment(0.0125 / 4);
  e.eps = {0.1, 0.1, 0.05};
  CHECK_THROWS_AS(e.validate(), Error);
  e = kink_experiment(0.01);
  CHECK_THROWS_WITH_AS(e.validate(), doctest::Contains("resolution"), Error);
  e = kink_experiment(0.0125 / 4);
  e.K = Box::cube(1, 2.0);
  CHECK_THROWS_WITH_AS(e.validate(), doctest::Contains("domain"), Error);
}

TEST_CASE("generalized nets") {
  const MollifierKernel k(1);
  const auto e = kink_experiment(0.0125 / 4);
  const auto plain = friedrichs_w1r(e, k);

  std::vector<ScalarField> mollified, shifted;
  for (double eps : e.eps) {
    mollified.push_back(convolve(e.a, k, eps));
    std::vector<double> v(e.a.values().begin(), e.a.values().end());
    for (double& x : v) x += eps * eps;
    shifted.emplace_back(e.a.grid(), v);
  }
  const auto same = generalized_net_commutator(mollified, e, k);
  REQUIRE(same.commutator.values.size() == plain.w1r.values.size());
  for (std::size_t i = 0; i < plain.w1r.values.size(); ++i) {
    CHECK(same.commutator.values[i] == doctest::Approx(plain.w1r.values[i]).epsilon(1e-12));
    CHECK(same.friedrichs[i] == doctest::Approx(plain.w1r.values[i]).epsilon(1e-12));
  }
  CHECK(same.tracking_gap < 1e-12);
  CHECK(same.decreasing);

  const auto rep = generalized_net_commutator(shifted, e, k);
  CHECK(rep.hypothesis.slope == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_FALSE(rep.hypothesis_warning);
  CHECK(rep.decreasing);
  // (a - a * rho_eps)(f * rho_eps) is of the same order as the commutator
  // near the kink, so the shifted net does not track the plain one closely.
  CHECK(rep.tracking_gap > 0.02);
  for (std::size_t i = 0; i < rep.friedrichs.size(); ++i) {
    CHECK(rep.commutator.values[i] <= 2.0 * rep.friedrichs[i] + 2.0 * e.eps[i] * e.eps[i]);
  }

  std::vector<ScalarField> too_few(mollified.begin(), mollified.begin() + 2);
  CHECK_THROWS_AS(generalized_net_commutator(too_few, e, k), Error);
}

TEST_CASE("inverse metric components as a net") {
  const auto corner = make_miao_corner(3, 1.0);
  const GridSpec g({1.0, 0.0, 0.0}, {0.35, 0.35, 0.35}, {0.025, 0.025, 0.025}, true);
  const auto m = corner.sample(g);
  const MollifierKernel k(3);
  const MetricFn gv = corner.analytic.value;
  CommutatorExperiment e;
  e.a = ScalarField::sample(g, [gv](std::span<const double> x) { return 1.0 / gv(x)(0, 0); });
  e.f = ScalarField::sample(g, [](std::span<const double> x) { return std::cos(2.0 * x[1]) + x[0]; });
  e.eps = {0.2, 0.1, 0.05};
  e.K = Box{{0.95, -0.05, -0.05}, {1.05, 0.05, 0.05}};
  std::vector<ScalarField> net;
  for (double eps : e.eps) {
    const auto inv = metric_inverse(mollify_metric(m, k, eps));
    const auto comp = inv.component(0, 0);
    net.emplace_back(g, std::vector<double>(comp.begin(), comp.end()));
  }
  const auto rep = generalized_net_commutator(net, e, k);
  CHECK(rep.hypothesis.slope >= 0.9);
  CHECK_FALSE(rep.hypothesis_warning);
  CHECK(rep.decreasing);
}
