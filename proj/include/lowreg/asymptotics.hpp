#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lowreg/field.hpp"
#include "lowreg/mollify.hpp"

namespace lowreg {

/// Quadrature on the unit sphere S^{n-1} in R^n: Gauss-Jacobi in the first
/// polar cosine, recursively, down to the trapezoid rule on S^1. Exact for
/// polynomials of degree <= 2 order - 1.
struct SphereRule {
  int n = 0;
  std::vector<Point> points;
  std::vector<double> weights;
};

SphereRule sphere_rule(int n, int order);

/// Decay and quadrature settings for ADM mass evaluation.
struct AsymptoticModel {
  int n = 3;
  double tau = 1.0;
  double inner_radius = 1.0;
  std::vector<double> radii;
  int quadrature_order = 16;
  int tail_terms = 2;
  std::optional<double> tail_exponent;  // default 2 tau - (n - 2)

  double exponent() const;
  void validate() const;
};

struct MassEstimate {
  std::vector<double> radii;
  std::vector<double> m_of_r;
  double m_inf = 0.0;
  double s = 0.0;
  int terms = 0;
  double residual = 0.0;
  bool tail_warning = false;  // |m(r) - m_inf| not decreasing in r
  double omega = 0.0;         // area of the unit (n-1)-sphere
};

/// sum_{ij} (d_i g_ij - d_j g_ii) nu_j at x with nu = x/|x|. Uses the closed
/// derivative when present, else central differences of the closed form
/// with step 1e-4 |x|. Domain error inside the non-smooth region.
double adm_integrand(const MetricAnalytic& g, std::span<const double> x);

/// m(r) = (2 (n-1) omega)^{-1} int_{S_r} integrand dS.
double adm_sphere_mass(const MetricAnalytic& g, int n, double r, const SphereRule& rule);

/// m(r) per radius and the tail fit m(r) = m_inf + sum_k c_k r^{-(s+k)}.
MassEstimate adm_mass(const MetricAnalytic& g, const AsymptoticModel& model);
MassEstimate adm_mass(const MetricField& g, const AsymptoticModel& model);

/// ||phi||^2_{L^{n*}(g)} / ||grad_g phi||^2_{L^2(g)}.
double sobolev_quotient(const ScalarField& phi, const MetricField& g);

struct SandwichReport {
  std::size_t functions = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;  // min relative margin over both inequalities
  std::vector<double> q_g;
  std::vector<double> q_g_eps;
};

/// Per-function check of Q_{g_eps} <= rho^n Q_g and Q_g <= rho^n Q_{g_eps}
/// with relative slack `slack`.
SandwichReport sobolev_sandwich_check(const MetricField& g, const MetricField& g_eps,
                                      const EquivalenceFactor& rho,
                                      const std::vector<ScalarField>& battery,
                                      double slack = 1e-10);

struct ExistenceCheck {
  double product = 0.0;
  bool pass = true;
};

/// C (int |R_-|^{n/2} dmu_{g_eps})^{2/n} and the verdict product <= 1.
ExistenceCheck existence_condition(const MetricField& g_eps, const ScalarField& r_neg,
                                   double c_estimate);

/// Smooth bump exp(1 - 1/(1 - |x - c|^2 / R^2)) (peak value 1).
ScalarField make_bump(const GridSpec& grid, const Point& center, double radius);

/// `count` bumps with centers in `region` and radii in [rmin, rmax],
/// drawn from a fixed-seed generator; every bump fits inside the grid.
std::vector<ScalarField> bump_battery(const GridSpec& grid, const Box& region,
                                      int count, double rmin, double rmax,
                                      unsigned long long seed);

}  // namespace lowreg
