#include "lowreg/asymptotics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "lowreg/error.hpp"
#include "lowreg/kernel.hpp"
#include "lowreg/norms.hpp"
#include "lowreg/quadrature.hpp"

namespace lowreg {

SphereRule sphere_rule(int n, int order) {
  require(n >= 1, ErrorKind::Argument, "sphere rule needs n >= 1");
  require(order >= 1, ErrorKind::Argument, "sphere rule order must be >= 1");
  SphereRule rule;
  rule.n = n;
  if (n == 1) {
    rule.points = {{1.0}, {-1.0}};
    rule.weights = {1.0, 1.0};
    return rule;
  }
  if (n == 2) {
    const int m = 2 * order;
    for (int k = 0; k < m; ++k) {
      const double t = 2.0 * M_PI * (k + 0.5) / m;
      rule.points.push_back({std::cos(t), std::sin(t)});
      rule.weights.push_back(2.0 * M_PI / m);
    }
    return rule;
  }
  const QuadratureRule polar = gauss_symmetric_jacobi(order, 0.5 * (n - 3));
  const SphereRule sub = sphere_rule(n - 1, order);
  for (std::size_t a = 0; a < polar.nodes.size(); ++a) {
    const double t = polar.nodes[a];
    const double s = std::sqrt(1.0 - t * t);
    for (std::size_t b = 0; b < sub.points.size(); ++b) {
      Point p(n);
      p[0] = t;
      for (int k = 1; k < n; ++k) p[k] = s * sub.points[b][k - 1];
      rule.points.push_back(std::move(p));
      rule.weights.push_back(polar.weights[a] * sub.weights[b]);
    }
  }
  return rule;
}

double AsymptoticModel::exponent() const {
  return tail_exponent ? *tail_exponent : 2.0 * tau - (n - 2.0);
}

void AsymptoticModel::validate() const {
  require(n >= 3, ErrorKind::Argument, "ADM mass needs n >= 3");
  require(tau > 0.5 * (n - 2.0), ErrorKind::Argument,
          "decay rate tau must exceed (n-2)/2");
  require(!radii.empty(), ErrorKind::Argument, "no evaluation radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] > inner_radius, ErrorKind::Argument,
            "evaluation radii must lie beyond the chart inner radius");
    if (i > 0) {
      require(radii[i] > radii[i - 1], ErrorKind::Argument,
              "evaluation radii must be strictly increasing");
    }
  }
  require(quadrature_order >= 1, ErrorKind::Argument, "quadrature order must be >= 1");
  require(tail_terms >= 1, ErrorKind::Argument, "tail fit needs >= 1 term");
  require(exponent() > 0.0, ErrorKind::Argument, "tail exponent must be positive");
}

double adm_integrand(const MetricAnalytic& g, std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  const double r = std::sqrt(r2);
  require(r > g.smooth_beyond, ErrorKind::Domain,
          "mass integrand evaluated inside the non-smooth region");
  const bool valid = g.valid_at ? g.valid_at(x) : r >= g.valid_beyond;
  require(valid, ErrorKind::Domain, "mass integrand evaluated where the closed form is invalid");
  MatGrad dg;
  if (g.derivative) {
    dg = g.derivative(x);
  } else {
    const double step = 1e-4 * r;
    Point xp(x.begin(), x.end()), xm(x.begin(), x.end());
    for (int k = 0; k < n; ++k) {
      xp[k] = x[k] + step;
      xm[k] = x[k] - step;
      dg[k] = (g.value(xp) - g.value(xm)) / (2.0 * step);
      xp[k] = xm[k] = x[k];
    }
  }
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += dg[i](i, j) - dg[j](i, i);
    s += t * x[j] / r;
  }
  return s;
}

double adm_sphere_mass(const MetricAnalytic& g, int n, double r, const SphereRule& rule) {
  require(rule.n == n, ErrorKind::Argument, "sphere rule dimension mismatch");
  Point x(n);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    for (int k = 0; k < n; ++k) x[k] = r * rule.points[q][k];
    sum += rule.weights[q] * adm_integrand(g, x);
  }
  return sum * std::pow(r, n - 1) / (2.0 * (n - 1) * unit_sphere_area(n));
}

MassEstimate adm_mass(const MetricAnalytic& g, const AsymptoticModel& model) {
  model.validate();
  const int n = model.n;
  const SphereRule rule = sphere_rule(n, model.quadrature_order);
  MassEstimate est;
  est.omega = unit_sphere_area(n);
  est.s = model.exponent();
  est.radii = model.radii;
  for (double r : model.radii) est.m_of_r.push_back(adm_sphere_mass(g, n, r, rule));
  const int rows = static_cast<int>(model.radii.size());
  est.terms = std::min(model.tail_terms, rows - 1);
  if (est.terms == 0) {
    est.m_inf = est.m_of_r.back();
    return est;
  }
  Eigen::MatrixXd M(rows, est.terms + 1);
  Eigen::VectorXd b(rows);
  for (int i = 0; i < rows; ++i) {
    M(i, 0) = 1.0;
    for (int k = 0; k < est.terms; ++k) M(i, k + 1) = std::pow(model.radii[i], -(est.s + k));
    b(i) = est.m_of_r[i];
  }
  const Eigen::VectorXd c = M.colPivHouseholderQr().solve(b);
  est.m_inf = c(0);
  est.residual = std::sqrt((M * c - b).squaredNorm() / rows);
  for (int i = 1; i < rows; ++i) {
    if (std::abs(est.m_of_r[i] - est.m_inf) > std::abs(est.m_of_r[i - 1] - est.m_inf)) {
      est.tail_warning = true;
    }
  }
  return est;
}

MassEstimate adm_mass(const MetricField& g, const AsymptoticModel& model) {
  require(g.has_analytic(), ErrorKind::Contract,
          "ADM evaluation needs a metric with a closed-form tail");
  require(g.dim() == model.n, ErrorKind::Argument, "model dimension mismatch");
  return adm_mass(g.analytic(), model);
}

namespace {

void require_compact_support(const ScalarField& phi) {
  const GridSpec& grid = phi.grid();
  for (std::size_t node = 0; node < grid.size(); ++node) {
    if (phi[node] != 0.0 && grid.near_boundary(node, 2)) {
      fail(ErrorKind::Domain, "test function support touches the grid boundary");
    }
  }
}

}  // namespace

double sobolev_quotient(const ScalarField& phi, const MetricField& g) {
  const GridSpec& grid = phi.grid();
  require(grid.same_as(g.grid()), ErrorKind::Argument,
          "test function and metric live on different grids");
  require_compact_support(phi);
  const int n = grid.dim();
  const double nstar = sobolev_exponent(n);
  std::vector<std::vector<double>> d(n, std::vector<double>(grid.size()));
  for (int k = 0; k < n; ++k) fd_derivative(grid, phi.values(), k, d[k]);
  CompensatedSum num, den;
  const bool diag = g.is_diagonal();
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double v = phi[node];
    bool grad_zero = true;
    for (int k = 0; k < n; ++k) grad_zero = grad_zero && d[k][node] == 0.0;
    if (v == 0.0 && grad_zero) continue;
    double vol, grad2 = 0.0;
    if (diag) {
      double det = 1.0;
      for (int i = 0; i < n; ++i) {
        const double gii = g.components().component(i, i)[node];
        det *= gii;
        grad2 += d[i][node] * d[i][node] / gii;
      }
      vol = std::sqrt(det);
    } else {
      const Mat m = g.at(node);
      vol = std::sqrt(determinant(m));
      const Mat inv = cofactor_inverse(m);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) grad2 += inv(i, j) * d[i][node] * d[j][node];
      }
    }
    if (v != 0.0) num.add(std::pow(std::abs(v), nstar) * vol);
    den.add(grad2 * vol);
  }
  const double cell = grid.cell_volume();
  const double denom = den.value() * cell;
  require(denom > 0.0, ErrorKind::Degeneracy,
          "degenerate Sobolev quotient: the gradient vanishes");
  return std::pow(num.value() * cell, 2.0 / nstar) / denom;
}

SandwichReport sobolev_sandwich_check(const MetricField& g, const MetricField& g_eps,
                                      const EquivalenceFactor& rho,
                                      const std::vector<ScalarField>& battery,
                                      double slack) {
  require(!battery.empty(), ErrorKind::Argument, "Sobolev sandwich needs a test battery");
  require(g.grid().same_as(g_eps.grid()), ErrorKind::Argument,
          "metrics live on different grids");
  const double factor = std::pow(rho.rho_eps, g.dim());
  SandwichReport rep;
  rep.worst_margin = INFINITY;
  for (const auto& phi : battery) {
    const double qg = sobolev_quotient(phi, g);
    const double qe = sobolev_quotient(phi, g_eps);
    rep.q_g.push_back(qg);
    rep.q_g_eps.push_back(qe);
    const double m1 = (factor * qg - qe) / (factor * qg);
    const double m2 = (factor * qe - qg) / (factor * qe);
    rep.worst_margin = std::min({rep.worst_margin, m1, m2});
    if (m1 < -slack || m2 < -slack) ++rep.violations;
    ++rep.functions;
  }
  return rep;
}

ExistenceCheck existence_condition(const MetricField& g_eps, const ScalarField& r_neg,
                                   double c_estimate) {
  const int n = g_eps.dim();
  const double integral =
      std::pow(lp_norm(r_neg, NormSpec::lp(0.5 * n, std::nullopt, &g_eps)), 0.5 * n);
  ExistenceCheck out;
  out.product = c_estimate * std::pow(integral, 2.0 / n);
  out.pass = out.product <= 1.0;
  return out;
}

ScalarField make_bump(const GridSpec& grid, const Point& center, double radius) {
  require(radius > 0.0, ErrorKind::Argument, "bump radius must be positive");
  return ScalarField::sample(grid, [center, radius](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = (x[k] - center[k]) / radius;
      s += d * d;
    }
    return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
  });
}

std::vector<ScalarField> bump_battery(const GridSpec& grid, const Box& region,
                                      int count, double rmin, double rmax,
                                      unsigned long long seed) {
  require(count >= 1, ErrorKind::Argument, "battery needs at least one function");
  require(rmin > 0.0 && rmax >= rmin, ErrorKind::Argument, "invalid bump radii");
  Box inner = grid.box();
  for (int k = 0; k < grid.dim(); ++k) {
    inner.lo[k] += 3.0 * grid.spacing()[k];
    inner.hi[k] -= 3.0 * grid.spacing()[k];
  }
  require(inner.contains(region.grown(rmax)), ErrorKind::Domain,
          "bump battery region plus radius leaves the grid interior");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ScalarField> out;
  for (int i = 0; i < count; ++i) {
    Point c(grid.dim());
    for (int k = 0; k < grid.dim(); ++k) {
      c[k] = region.lo[k] + (region.hi[k] - region.lo[k]) * unit(rng);
    }
    const double r = rmin + (rmax - rmin) * unit(rng);
    out.push_back(make_bump(grid, c, r));
  }
  return out;
}

}  // namespace lowreg
