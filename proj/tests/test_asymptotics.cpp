#include <doctest.h>

#include <cmath>

#include "lowreg/asymptotics.hpp"
#include "lowreg/corpus.hpp"
#include "lowreg/error.hpp"
#include "lowreg/kernel.hpp"
#include "lowreg/mollify.hpp"

using namespace lowreg;

namespace {

// Flat-space integrand of isotropic Schwarzschild (m = 1) at (8, 0, 0).
constexpr double kSchwarzschildIntegrand = 0.0749664306640625;

MetricAnalytic radial_trace(double a, double b) {
  MetricAnalytic g;
  g.value = [a, b](std::span<const double> x) -> Mat {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    return Mat::Identity(3, 3) * (1.0 + a / r + b / (r * r));
  };
  g.valid_beyond = 0.5;
  return g;
}

AsymptoticModel model(std::vector<double> radii) {
  AsymptoticModel m;
  m.n = 3;
  m.tau = 1.0;
  m.inner_radius = 1.0;
  m.radii = std::move(radii);
  return m;
}

}  // namespace

TEST_CASE("sphere quadrature") {
  for (int n : {2, 3, 4, 5}) {
    const SphereRule s = sphere_rule(n, 8);
    double area = 0.0, x2 = 0.0, x4 = 0.0, odd = 0.0;
    for (std::size_t q = 0; q < s.points.size(); ++q) {
      const auto& p = s.points[q];
      area += s.weights[q];
      x2 += s.weights[q] * p[n - 1] * p[n - 1];
      x4 += s.weights[q] * p[0] * p[0] * p[0] * p[0];
      odd += s.weights[q] * p[0] * p[n - 1] * p[n - 1];
      double r2 = 0.0;
      for (double c : p) r2 += c * c;
      CHECK(r2 == doctest::Approx(1.0).epsilon(1e-14));
    }
    const double omega = unit_sphere_area(n);
    CHECK(area == doctest::Approx(omega).epsilon(1e-13));
    CHECK(x2 == doctest::Approx(omega / n).epsilon(1e-13));
    CHECK(x4 == doctest::Approx(3.0 * omega / (n * (n + 2.0))).epsilon(1e-13));
    CHECK(std::abs(odd) < 1e-14);
  }
  CHECK(unit_sphere_area(3) == doctest::Approx(4.0 * M_PI).epsilon(1e-15));
  CHECK(unit_sphere_area(4) == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-15));
}

TEST_CASE("mass integrand oracles") {
  const auto s = make_schwarzschild(3, 1.0);
  const double x[3] = {8.0, 0.0, 0.0};
  CHECK(adm_integrand(s.analytic, x) == doctest::Approx(kSchwarzschildIntegrand).epsilon(1e-13));
  // (1 + a/r) delta with a = 1/2: the integrand is 2a / r^2 = 1 / r^2.
  const double y[3] = {0.0, 0.0, 2.0};
  CHECK(adm_integrand(radial_trace(0.5, 0.0), y) == doctest::Approx(0.25).epsilon(1e-7));
  const double inside[3] = {0.5, 0.0, 0.0};
  CHECK_THROWS_WITH_AS(adm_integrand(make_miao_corner(3, 1.0).analytic, inside),
                       doctest::Contains("domain"), Error);
}

TEST_CASE("ADM mass of the corpus") {
  const auto est = adm_mass(make_schwarzschild(3, 1.0).analytic, model({10, 20, 40, 80, 160}));
  CHECK(std::abs(est.m_inf - 1.0) <= 1e-3);
  CHECK_FALSE(est.tail_warning);
  CHECK(est.omega == doctest::Approx(4.0 * M_PI));
  const auto flat = adm_mass(make_euclidean(3).analytic, model({10, 20, 40}));
  CHECK(std::abs(flat.m_inf) <= 1e-10);
  for (double v : flat.m_of_r) CHECK(v == 0.0);
  const auto corner = adm_mass(make_miao_corner(3, 2.0).analytic, model({10, 20, 40, 80, 160}));
  CHECK(std::abs(corner.m_inf - 2.0) <= 1e-3);
  const auto s4 = make_schwarzschild(4, 1.0);
  AsymptoticModel m4 = model({10, 20, 40, 80});
  m4.n = 4;
  m4.tau = 2.0;
  CHECK(std::abs(adm_mass(s4.analytic, m4).m_inf - 1.0) <= 1e-3);
}

TEST_CASE("tail fit recovers the limit") {
  // g = (1 + a/r + b/r^2) delta: m(r) = a/2 + b/r exactly.
  const auto est = adm_mass(radial_trace(2.0, 0.5), model({2, 4, 8, 16}));
  CHECK(est.m_of_r.front() == doctest::Approx(1.0 + 0.25).epsilon(1e-7));
  CHECK(est.m_inf == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(est.terms == 2);
  CHECK(est.residual < 1e-7);
  const auto half = adm_mass(radial_trace(1.0, 0.5), model({2, 4, 8, 16}));
  const auto twice = adm_mass(radial_trace(2.0, 1.0), model({2, 4, 8, 16}));
  CHECK(twice.m_inf == doctest::Approx(2.0 * half.m_inf).epsilon(1e-7));
  const auto one = adm_mass(radial_trace(2.0, 0.5), model({4}));
  CHECK(one.terms == 0);
  CHECK(one.m_inf == doctest::Approx(1.125).epsilon(1e-7));
}

TEST_CASE("asymptotic model validation") {
  auto bad_tau = model({2, 4});
  bad_tau.tau = 0.5;
  CHECK_THROWS_WITH_AS(bad_tau.validate(), doctest::Contains("tau"), Error);
  CHECK_THROWS_AS(model({4, 2}).validate(), Error);
  CHECK_THROWS_AS(model({0.5, 2}).validate(), Error);
  CHECK_THROWS_AS(model({}).validate(), Error);
  auto explicit_s = model({2, 4});
  explicit_s.tail_exponent = 3.0;
  CHECK(explicit_s.exponent() == 3.0);
  CHECK(model({2}).exponent() == 1.0);
}

TEST_CASE("Sobolev quotient invariances") {
  const GridSpec g = GridSpec::cube(3, 1.0, 0.05);
  const auto flat = MetricField::euclidean(g);
  const auto phi = make_bump(g, {0.1, 0.0, -0.1}, 0.6);
  const double q = sobolev_quotient(phi, flat);
  CHECK(q > 0.0);
  std::vector<double> scaled(phi.values().begin(), phi.values().end());
  for (double& v : scaled) v *= 3.5;
  CHECK(sobolev_quotient(ScalarField(g, scaled), flat) == doctest::Approx(q).epsilon(1e-12));
  MetricAnalytic c;
  c.value = [](std::span<const double>) -> Mat { return Mat::Identity(3, 3) * 4.0; };
  CHECK(sobolev_quotient(phi, MetricField::sample(g, c, Regularity::smooth())) ==
        doctest::Approx(q).epsilon(1e-12));
  const auto zero = ScalarField::constant(g, 0.0);
  CHECK_THROWS_WITH_AS(sobolev_quotient(zero, flat), doctest::Contains("degenerate"), Error);
  CHECK_THROWS_WITH_AS(sobolev_quotient(make_bump(g, {0.8, 0.0, 0.0}, 0.6), flat),
                       doctest::Contains("domain"), Error);
}

TEST_CASE("Sobolev sandwich under metric equivalence") {
  const GridSpec g = GridSpec::cube(3, 1.0, 0.05);
  const auto corner = make_miao_corner(3, 1.0);
  const GridSpec gc = GridSpec::cube(3, 1.6, 0.05);
  const auto m = corner.sample(gc);
  const MollifierKernel k(3);
  const auto me = mollify_metric(m, k, 0.2);
  const auto rho = metric_equivalence_factor(m, me);
  CHECK(rho.rho_eps >= 1.0);
  const auto battery = bump_battery(gc, Box::cube(3, 0.8), 12, 0.3, 0.6, 7);
  const auto rep = sobolev_sandwich_check(m, me, rho, battery);
  CHECK(rep.functions == 12);
  CHECK(rep.violations == 0);
  CHECK(rep.worst_margin >= -1e-10);

  const auto flat = MetricField::euclidean(g);
  const auto same = sobolev_sandwich_check(flat, flat, {1.0, 0}, bump_battery(g, Box::cube(3, 0.2), 3, 0.3, 0.5, 1));
  CHECK(same.worst_margin == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(sobolev_sandwich_check(flat, flat, {1.0, 0}, {}), Error);
}

TEST_CASE("existence condition") {
  const GridSpec g = GridSpec::cube(3, 0.5, 0.1);
  const auto flat = MetricField::euclidean(g);
  const auto none = existence_condition(flat, ScalarField::constant(g, 0.0), 10.0);
  CHECK(none.product == 0.0);
  CHECK(none.pass);
  // |R_-| = 1 on the unit cube: (int 1)^{2/3} = 1, so the product equals C.
  const auto unit = existence_condition(flat, ScalarField::constant(g, 1.0), 0.5);
  CHECK(unit.product == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(unit.pass);
  CHECK_FALSE(existence_condition(flat, ScalarField::constant(g, 1.0), 2.0).pass);
}

TEST_CASE("bump battery") {
  const GridSpec g = GridSpec::cube(3, 1.0, 0.1);
  const auto a = bump_battery(g, Box::cube(3, 0.2), 4, 0.2, 0.4, 42);
  const auto b = bump_battery(g, Box::cube(3, 0.2), 4, 0.2, 0.4, 42);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t node = 0; node < g.size(); ++node) CHECK(a[i][node] == b[i][node]);
  }
  CHECK_THROWS_WITH_AS(bump_battery(g, Box::cube(3, 0.6), 4, 0.2, 0.4, 1),
                       doctest::Contains("domain"), Error);
  const GridSpec v({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {0.1, 0.1, 0.1}, false);
  const auto peak = make_bump(v, {0.0, 0.0, 0.0}, 0.5);
  double mx = 0.0;
  for (std::size_t node = 0; node < v.size(); ++node) mx = std::max(mx, peak[node]);
  CHECK(mx == 1.0);
}
