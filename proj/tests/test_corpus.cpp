#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "lowreg/corpus.hpp"
#include "lowreg/error.hpp"

using namespace lowreg;

namespace {

double conformal_u(const Mat& g, int n) { return std::pow(g(0, 0), 0.25 * (n - 2)); }

Mat at_radius(const CorpusEntry& e, double r) {
  Point x(e.n, 0.0);
  x[0] = r;
  return e.analytic.value(x);
}

}  // namespace

TEST_CASE("euclidean entry samples the identity") {
  const auto e = make_euclidean(3);
  const GridSpec g = GridSpec::cube(3, 1.0, 0.25);
  const auto m = e.sample(g);
  for (std::size_t node = 0; node < g.size(); ++node) {
    CHECK((m.at(node) - Mat::Identity(3, 3)).norm() == 0.0);
  }
  CHECK(e.known_mass.value() == 0.0);
  CHECK(e.regularity.is_smooth());
}

TEST_CASE("Schwarzschild cap coefficients") {
  const auto c = schwarzschild_cap(3, 1.0, 0.5);
  CHECK(c[0] == doctest::Approx(2.875).epsilon(1e-14));
  CHECK(c[1] == doctest::Approx(-5.0).epsilon(1e-14));
  CHECK(c[2] == doctest::Approx(6.0).epsilon(1e-14));

  for (int n : {3, 4, 5}) {
    const double m = 0.7, rc = 0.6;
    const auto e = make_schwarzschild(n, m, rc);
    const auto u = [&](double r) { return conformal_u(at_radius(e, r), n); };
    const double d = 1e-7;
    // Continuity of u and its first derivative across the cap radius.
    CHECK(u(rc - d) == doctest::Approx(u(rc + d)).epsilon(1e-6));
    const double dl = (u(rc - d) - u(rc - 3 * d)) / (2 * d);
    const double dr = (u(rc + 3 * d) - u(rc + d)) / (2 * d);
    CHECK(dl == doctest::Approx(dr).epsilon(1e-5));
    CHECK(u(1.3) == doctest::Approx(1.0 + m / (2.0 * std::pow(1.3, n - 2))).epsilon(1e-14));
    CHECK(e.known_mass.value() == m);
  }
  CHECK_THROWS_WITH_AS(make_schwarzschild(3, 1.0, 0.0), doctest::Contains("parameter"), Error);
  CHECK_THROWS_WITH_AS(make_schwarzschild(3, -1.0), doctest::Contains("parameter"), Error);
}

TEST_CASE("closed-form derivatives agree with differences") {
  const auto check = [](const CorpusEntry& e, const Point& x) {
    REQUIRE(e.analytic.derivative);
    const MatGrad dg = e.analytic.derivative(x);
    const double h = 1e-6;
    for (int k = 0; k < e.n; ++k) {
      Point xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const Mat fd = (e.analytic.value(xp) - e.analytic.value(xm)) / (2 * h);
      CHECK((fd - dg[k]).norm() < 1e-7);
    }
  };
  check(make_schwarzschild(3, 1.0), {0.2, -0.1, 0.3});
  check(make_schwarzschild(3, 1.0), {0.7, -0.4, 0.9});
  check(make_schwarzschild(4, 1.0), {0.7, -0.4, 0.9, 0.1});
  check(make_miao_corner(3, 1.0), {1.2, 0.3, -0.4});
  check(make_miao_corner(3, 1.0), {0.3, 0.3, -0.4});
  check(make_w1n_singular(3, 0.5, 0.3), {0.2, 0.1, -0.1});
  check(make_w1n_singular(3, 0.5, 0.3), {0.5, 0.3, 0.2});
}

TEST_CASE("corner metric is continuous with a derivative jump") {
  for (int n : {3, 4}) {
    const double m = 1.0;
    const auto e = make_miao_corner(n, m);
    CHECK_FALSE(e.regularity.is_smooth());
    CHECK(e.analytic.smooth_beyond == 1.0);
    const auto u = [&](double r) { return conformal_u(at_radius(e, r), n); };
    const double d = 1e-6;
    CHECK(u(1.0 - d) == doctest::Approx(u(1.0 + d)).epsilon(1e-5));
    CHECK(u(0.4) == doctest::Approx(1.0 + 0.5 * m).epsilon(1e-14));
    const double outer = (u(1.0 + 2 * d) - u(1.0 + d)) / d;
    CHECK(outer == doctest::Approx(-m * (n - 2) / 2.0).epsilon(1e-4));
    CHECK((u(1.0 - d) - u(1.0 - 2 * d)) / d == doctest::Approx(0.0).epsilon(1e-12));
  }
  const double u0 = 1.5;
  CHECK(miao_corner_density(3, 1.0) == doctest::Approx(4.0 / std::pow(u0, 5)));
  CHECK(miao_mean_curvature_jump(3, 1.0) == doctest::Approx(4.0 / std::pow(u0, 3)));
}

TEST_CASE("W^{1,n} singular entry") {
  CHECK(w1n_cutoff(0.3) == 1.0);
  CHECK(w1n_cutoff(0.5) == 1.0);
  CHECK(w1n_cutoff(1.0) == 0.0);
  CHECK(w1n_cutoff(1.4) == 0.0);
  double prev = 1.0;
  for (double r = 0.5; r <= 1.0; r += 0.01) {
    CHECK(w1n_cutoff(r) <= prev);
    prev = w1n_cutoff(r);
    const double d = 1e-6;
    if (r > 0.5 + d && r < 1.0 - d) {
      CHECK(w1n_cutoff_derivative(r) ==
            doctest::Approx((w1n_cutoff(r + d) - w1n_cutoff(r - d)) / (2 * d)).epsilon(1e-5));
    }
  }
  const auto e = make_w1n_singular(3, 0.5, 0.3);
  CHECK_FALSE(e.regularity.is_smooth());
  CHECK(at_radius(e, 0.25)(0, 0) == doctest::Approx(1.0 + 0.3 * std::sqrt(0.25)));
  CHECK(at_radius(e, 1.5)(0, 0) == 1.0);
  CHECK_THROWS_WITH_AS(make_w1n_singular(3, 1.0, 0.3), doctest::Contains("parameter"), Error);
  CHECK_THROWS_WITH_AS(make_w1n_singular(3, 0.0, 0.3), doctest::Contains("parameter"), Error);
  CHECK_THROWS_WITH_AS(make_w1n_singular(3, 0.5, -1.0), doctest::Contains("parameter"), Error);
}

TEST_CASE("manifest lists every entry with its oracles") {
  const auto entries = default_corpus();
  REQUIRE(entries.size() >= 4);
  const auto j = nlohmann::json::parse(corpus_manifest(entries));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(j[i]["name"] == entries[i].name);
    CHECK(j[i]["n"] == entries[i].n);
    CHECK(j[i].contains("parameters"));
    CHECK(j[i].contains("regularity"));
  }
  CHECK(make_schwarzschild(3, 2.0).parameter("m") == 2.0);
  CHECK_THROWS_AS(make_schwarzschild(3, 2.0).parameter("zeta"), Error);
}
