#include <doctest.h>

#include <cmath>

#include "lowreg/asymptotics.hpp"
#include "lowreg/corpus.hpp"
#include "lowreg/curvature.hpp"
#include "lowreg/error.hpp"
#include "lowreg/mollify.hpp"

using namespace lowreg;

namespace {

// Gamma^k_ij of isotropic Schwarzschild (m = 1) at (0.7, -0.4, 0.9), sympy.
struct GammaValue {
  int k, i, j;
  double v;
};
constexpr GammaValue kSchwarzschildGamma[] = {
    {0, 0, 0, -0.28065958233421263714}, {0, 0, 1, 0.16037690419097864980},
    {0, 0, 2, -0.36084803442970196204}, {0, 1, 1, 0.28065958233421263714},
    {0, 1, 2, 0.0},                      {0, 2, 2, 0.28065958233421263714},
    {1, 0, 0, -0.16037690419097864980}, {1, 0, 1, -0.28065958233421263714},
    {1, 0, 2, 0.0},                      {1, 1, 1, 0.16037690419097864980},
    {1, 1, 2, -0.36084803442970196204}, {1, 2, 2, -0.16037690419097864980},
    {2, 0, 0, 0.36084803442970196204},  {2, 0, 1, 0.0},
    {2, 0, 2, -0.28065958233421263714}, {2, 1, 1, 0.36084803442970196204},
    {2, 1, 2, 0.16037690419097864980},  {2, 2, 2, -0.36084803442970196204},
};
// ||R_-||_{L^{3/2}} of w^4 delta, w = 1 + 0.1 exp(-|x|^2/0.05), mpmath.
constexpr double kBumpNegativeNorm = 2.1189722586343674568;

MetricAnalytic scalar_metric(std::function<double(std::span<const double>)> phi,
                             int n = 3) {
  MetricAnalytic a;
  a.value = [phi, n](std::span<const double> x) -> Mat {
    return Mat::Identity(n, n) * phi(x);
  };
  return a;
}

double r2(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return s;
}

double max_interior_error(const ScalarField& f, double exact, std::size_t layers = 2) {
  double e = 0.0;
  for (std::size_t node = 0; node < f.size(); ++node) {
    if (f.grid().near_boundary(node, layers)) continue;
    e = std::max(e, std::abs(f[node] - exact));
  }
  return e;
}

}  // namespace

TEST_CASE("flat metric has no curvature") {
  const GridSpec g = GridSpec::cube(3, 0.5, 0.1);
  const auto delta = MetricField::euclidean(g);
  const auto G = christoffel(delta);
  for (std::size_t node = 0; node < g.size(); ++node) {
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(G(node, k, i, j) == 0.0);
  }
  const auto d = scalar_v_f(delta);
  CHECK(max_norm(d.F) == 0.0);
  for (const auto& v : d.V) CHECK(max_norm(v) == 0.0);
  CHECK(max_norm(scalar_pointwise(delta)) == 0.0);
  const auto mu = DensityTest(make_bump(g, {0.0, 0.05, 0.0}, 0.2), true);
  CHECK(pair_distributional_scalar(delta, mu) == 0.0);
}

TEST_CASE("conformal Christoffel symbols") {
  // g = e^{2 phi} delta with phi = 0.1 x_1.
  auto run = [](double h) {
    const GridSpec g = GridSpec::cube(3, 0.4, h);
    const auto m = MetricField::sample(
        g, scalar_metric([](std::span<const double> x) { return std::exp(0.2 * x[0]); }),
        Regularity::smooth());
    const auto G = christoffel(m);
    const double dphi[3] = {0.1, 0.0, 0.0};
    double err = 0.0;
    for (std::size_t node = 0; node < g.size(); ++node) {
      for (int k = 0; k < 3; ++k) {
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) {
            const double exact = (k == i) * dphi[j] + (k == j) * dphi[i] - (i == j) * dphi[k];
            err = std::max(err, std::abs(G(node, k, i, j) - exact));
            CHECK(G(node, k, i, j) == G(node, k, j, i));
          }
        }
      }
    }
    return err;
  };
  const double e1 = run(0.1), e2 = run(0.05);
  CHECK(e1 < 1e-3);
  CHECK(e2 / e1 == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("Schwarzschild Christoffel symbols match the symbolic oracle") {
  const auto entry = make_schwarzschild(3, 1.0);
  for (double h : {0.02, 0.01}) {
    // Seven cells per axis centered at the probe point; node 171 is the center.
    const GridSpec g({0.7, -0.4, 0.9}, {3.5 * h, 3.5 * h, 3.5 * h}, {h, h, h}, true);
    const auto m = entry.sample(g);
    const std::size_t center = 3 + 7 * 3 + 49 * 3;
    CHECK(g.position(center)[0] == doctest::Approx(0.7));
    const PointGeometry fd = point_geometry(m, center);
    const PointGeometry an = point_geometry(m, center, DerivativeSource::Analytic);
    for (const auto& gv : kSchwarzschildGamma) {
      CHECK(std::abs(an.gamma[gv.k](gv.i, gv.j) - gv.v) < 1e-12);
      CHECK(std::abs(fd.gamma[gv.k](gv.i, gv.j) - gv.v) < 5.0 * h * h);
    }
  }
}

TEST_CASE("quadratic part is independent of index labelling") {
  const auto entry = make_schwarzschild(3, 1.0);
  const GridSpec g = GridSpec::cube(3, 1.2, 0.2);
  const auto m = entry.sample(g);
  for (std::size_t node = 0; node < g.size(); node += 7) {
    const PointGeometry p = point_geometry(m, node);
    const double a = quadratic_part(p), b = quadratic_part_relabelled(p);
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("round-sphere analogue has R = 24") {
  auto err = [](double h) {
    const GridSpec g = GridSpec::cube(3, 0.5, h);
    const auto m = MetricField::sample(
        g, scalar_metric([](std::span<const double> x) { return std::pow(1.0 + r2(x), -2.0); }),
        Regularity::smooth());
    return max_interior_error(scalar_pointwise(m), 24.0);
  };
  const double e1 = err(0.1), e2 = err(0.05);
  CHECK(e1 < 0.5);
  CHECK(e2 / e1 < 0.4);
}

TEST_CASE("Schwarzschild is scalar flat outside the cap") {
  const auto entry = make_schwarzschild(3, 1.0);
  auto annulus_max = [&](double h) {
    const GridSpec g = GridSpec::cube(3, 1.6, h);
    const auto R = scalar_pointwise(entry.sample(g));
    double e = 0.0;
    for (std::size_t node = 0; node < g.size(); ++node) {
      const double r = std::sqrt(r2(g.position(node)));
      if (r > 0.8 && r < 1.4) e = std::max(e, std::abs(R[node]));
    }
    return e;
  };
  const double e1 = annulus_max(0.1), e2 = annulus_max(0.05);
  CHECK(e1 < 0.2);
  CHECK(e2 / e1 == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("contract error for rough metrics") {
  const GridSpec g = GridSpec::cube(3, 1.2, 0.1);
  const auto m = make_miao_corner(3, 1.0).sample(g);
  CHECK_THROWS_WITH_AS(scalar_pointwise(m), doctest::Contains("contract"), Error);
}

TEST_CASE("discrete integration by parts") {
  const auto entry = make_schwarzschild(3, 1.0);
  const GridSpec g = GridSpec::cube(3, 1.0, 0.05);
  const auto m = entry.sample(g);
  const auto f = make_bump(g, {0.2, 0.1, -0.3}, 0.6);
  const double pair = pair_distributional_scalar(m, DensityTest(f, true));
  const auto R = scalar_pointwise(m);
  double direct = 0.0;
  for (std::size_t node = 0; node < g.size(); ++node) direct += R[node] * f[node];
  direct *= g.cell_volume();
  CHECK(std::abs(pair - direct) < 1e-10 * std::max(1.0, std::abs(direct)));
}

TEST_CASE("corner pairing matches the mean-curvature-jump oracle") {
  const auto entry = make_miao_corner(3, 1.0);
  const Point c = {1.0, 0.0, 0.0};
  const double radius = 0.3;
  const SphereRule sph = sphere_rule(3, 96);
  double surface = 0.0;
  for (std::size_t q = 0; q < sph.points.size(); ++q) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double d = (sph.points[q][k] - c[k]) / radius;
      s += d * d;
    }
    if (s < 1.0) surface += sph.weights[q] * std::exp(1.0 - 1.0 / (1.0 - s));
  }
  const double oracle = miao_corner_density(3, 1.0) * surface;
  const GridSpec g({1.0, 0.0, 0.0}, {0.4, 0.4, 0.4}, {0.02, 0.02, 0.02}, true);
  const double pair =
      pair_distributional_scalar(entry.sample(g), DensityTest(make_bump(g, c, radius), true));
  CHECK(pair > 0.0);
  CHECK(std::abs(pair - oracle) / oracle < 0.05);
  // Density against g-area: 2(H_- - H_+) = 4 m u0^{-3} for n = 3.
  CHECK(miao_mean_curvature_jump(3, 1.0) == doctest::Approx(4.0 / std::pow(1.5, 3)));

  // Translating metric and density by one cell leaves the pairing unchanged.
  const double h = 0.02;
  const double shift[3] = {h, 0.0, 0.0};
  const GridSpec gt = g.translated(shift);
  MetricAnalytic moved = entry.analytic;
  moved.value = [a = entry.analytic.value, h](std::span<const double> x) {
    const double y[3] = {x[0] - h, x[1], x[2]};
    return a(y);
  };
  const auto mt = MetricField::sample(gt, moved, entry.regularity);
  const double pt = pair_distributional_scalar(
      mt, DensityTest(make_bump(gt, {1.0 + h, 0.0, 0.0}, radius), true));
  CHECK(std::abs(pt - pair) < 1e-12 * std::abs(pair));
}

TEST_CASE("density support must stay inside the grid") {
  const GridSpec g = GridSpec::cube(3, 0.5, 0.1);
  CHECK_THROWS_WITH_AS(DensityTest(make_bump(g, {0.45, 0.0, 0.0}, 0.3), true),
                       doctest::Contains("domain"), Error);
}

TEST_CASE("negative part norm") {
  const GridSpec g0 = GridSpec::cube(3, 0.5, 0.1);
  const auto sphere = MetricField::sample(
      g0, scalar_metric([](std::span<const double> x) { return std::pow(1.0 + r2(x), -2.0); }),
      Regularity::smooth());
  CHECK(negative_part_norm(sphere, 3.0, std::nullopt, &sphere) == 0.0);

  auto bump_norm = [](double h) {
    const GridSpec g = GridSpec::cube(3, 1.0, h);
    const auto m = MetricField::sample(
        g, scalar_metric([](std::span<const double> x) {
          return std::pow(1.0 + 0.1 * std::exp(-r2(x) / 0.05), 4.0);
        }),
        Regularity::smooth());
    const auto flat = MetricField::euclidean(g);
    return negative_part_norm(m, 3.0, std::nullopt, &flat);
  };
  const double e1 = std::abs(bump_norm(0.05) - kBumpNegativeNorm);
  const double e2 = std::abs(bump_norm(0.025) - kBumpNegativeNorm);
  CHECK(e2 / kBumpNegativeNorm < 2e-2);
  CHECK(e2 / e1 < 0.35);
}

TEST_CASE("mollified scalar curvature, two evaluation paths") {
  const MollifierKernel k(3);
  const MetricAnalytic smooth =
      scalar_metric([](std::span<const double> x) { return 1.0 + 0.5 * std::exp(-2.0 * r2(x)); });
  auto gap = [&](double h) {
    const GridSpec g = GridSpec::cube(3, 0.4, h);
    const auto m = MetricField::sample(g, smooth, Regularity::smooth());
    const Box inner = Box::cube(3, 0.4 - 0.2 - 2 * h);
    const auto a = mollified_scalar(m, k, 0.2, inner);
    const auto R = scalar_pointwise(m);
    const auto pts = nodes_in(g, inner);
    const DiscreteKernel& dk = k.discrete(0.2, g.spacing());
    double e = 0.0;
    for (std::size_t node : pts) {
      // Direct convolution of R at this node.
      std::size_t idx[3];
      g.multi_index(node, idx);
      double s = 0.0;
      for (const auto& row : dk.rows) {
        for (long k0 = -dk.reach[0]; k0 <= dk.reach[0]; ++k0) {
          const double w = row.weight[static_cast<std::size_t>(k0 + dk.reach[0])];
          if (w == 0.0) continue;
          const std::size_t j[3] = {idx[0] - k0, idx[1] - row.offset[0], idx[2] - row.offset[1]};
          s += w * R[g.linear_index(j)];
        }
      }
      e = std::max(e, std::abs(a[node] - s));
    }
    return e;
  };
  const double e1 = gap(0.025), e2 = gap(0.0125);
  CHECK(e1 < 1e-2);
  CHECK(e2 / e1 < 0.35);
}

TEST_CASE("scalar commutator: flat and smooth metrics") {
  const MollifierKernel k(3);
  const GridSpec g = GridSpec::cube(3, 0.4, 0.0125);
  const Box K = Box::cube(3, 0.1);
  const double eps[] = {0.2, 0.1, 0.05};
  const auto flat = scalar_commutator_norm(MetricField::euclidean(g).with_analytic(
                                               make_euclidean(3).analytic),
                                           k, eps, 3.0, K);
  for (double v : flat.norms) CHECK(v == 0.0);
  const auto m = MetricField::sample(
      g, scalar_metric([](std::span<const double> x) { return 1.0 + 0.5 * std::exp(-2.0 * r2(x)); }),
      Regularity::smooth());
  const auto t = scalar_commutator_norm(m, k, eps, 3.0, K);
  CHECK(t.decreasing);
  CHECK(t.fit.slope >= 0.9);
}

TEST_CASE("conformal scalar curvature") {
  const GridSpec g = GridSpec::cube(3, 0.5, 0.05);
  const auto sphere = MetricField::sample(
      g, scalar_metric([](std::span<const double> x) { return std::pow(1.0 + r2(x), -2.0); }),
      Regularity::smooth());
  const auto one = ScalarField::constant(g, 1.0);
  const auto R = scalar_pointwise(sphere);
  const auto Rt = conformal_scalar(sphere, one);
  for (std::size_t node = 0; node < g.size(); ++node) CHECK(Rt[node] == R[node]);

  // Flat g, u = 1 + 0.2 exp(-4|x|^2): R~ = -8 u^{-5} Lap u.
  auto err = [](double h) {
    const GridSpec gg = GridSpec::cube(3, 0.5, h);
    const auto u = ScalarField::sample(
        gg, [](std::span<const double> x) { return 1.0 + 0.2 * std::exp(-4.0 * r2(x)); });
    const auto Rt = conformal_scalar(MetricField::euclidean(gg), u);
    double e = 0.0;
    for (std::size_t node = 0; node < gg.size(); ++node) {
      const double s = r2(gg.position(node));
      const double uu = 1.0 + 0.2 * std::exp(-4.0 * s);
      const double lap = 0.2 * std::exp(-4.0 * s) * (64.0 * s - 24.0);
      e = std::max(e, std::abs(Rt[node] + 8.0 * std::pow(uu, -5.0) * lap));
    }
    return e;
  };
  const double e1 = err(0.05), e2 = err(0.025);
  CHECK(e2 / e1 == doctest::Approx(0.25).epsilon(0.15));
  std::vector<double> bad(g.size(), 1.0);
  bad[10] = 0.0;
  CHECK_THROWS_WITH_AS(conformal_scalar(sphere, ScalarField(g, bad)), doctest::Contains("domain"),
                       Error);
}
