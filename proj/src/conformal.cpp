#include "lowreg/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lowreg/curvature.hpp"
#include "lowreg/elliptic.hpp"
#include "lowreg/error.hpp"
#include "lowreg/mollify.hpp"
#include "lowreg/norms.hpp"

namespace lowreg {

namespace {

double radius_from_center(const GridSpec& grid, std::size_t node) {
  const Point x = grid.position(node);
  double s = 0.0;
  for (int k = 0; k < grid.dim(); ++k) {
    const double d = x[k] - grid.center()[k];
    s += d * d;
  }
  return std::sqrt(s);
}

double max_spacing(const GridSpec& grid) {
  return *std::max_element(grid.spacing().begin(), grid.spacing().end());
}

// |grad u|_g^2 sqrt(det g) per node, gradients by finite differences.
std::vector<double> gradient_energy_density(const ScalarField& u, const MetricField& g) {
  const GridSpec& grid = u.grid();
  const int n = grid.dim();
  std::vector<std::vector<double>> d(n, std::vector<double>(grid.size()));
  for (int k = 0; k < n; ++k) fd_derivative(grid, u.values(), k, d[k]);
  std::vector<double> e(grid.size(), 0.0);
  const bool diag = g.is_diagonal();
  for (std::size_t node = 0; node < grid.size(); ++node) {
    bool zero = true;
    for (int k = 0; k < n; ++k) zero = zero && d[k][node] == 0.0;
    if (zero) continue;
    double vol, s = 0.0;
    if (diag) {
      double det = 1.0;
      for (int i = 0; i < n; ++i) {
        const double gii = g.components().component(i, i)[node];
        det *= gii;
        s += d[i][node] * d[i][node] / gii;
      }
      vol = std::sqrt(det);
    } else {
      const Mat m = g.at(node);
      vol = std::sqrt(determinant(m));
      const Mat inv = cofactor_inverse(m);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) s += inv(i, j) * d[i][node] * d[j][node];
      }
    }
    e[node] = s * vol;
  }
  return e;
}

}  // namespace

ConformalSolution solve_conformal_factor(const MetricField& g_eps, const ScalarField& r_neg,
                                         const ConformalOptions& options) {
  const GridSpec& grid = g_eps.grid();
  const int n = grid.dim();
  require(n >= 3, ErrorKind::Argument, "conformal factor needs n >= 3");
  require(grid.same_as(r_neg.grid()), ErrorKind::Argument,
          "metric and negative part live on different grids");
  double rmax = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double v = r_neg[node];
    require(std::isfinite(v) && v >= 0.0, ErrorKind::Argument,
            "negative part must be finite and nonnegative");
    rmax = std::max(rmax, v);
  }
  ConformalSolution sol;
  sol.c_n = conformal_constant(n);
  if (rmax == 0.0) {
    sol.u = ScalarField::constant(grid, 1.0);
    return sol;
  }

  DivergenceOperator D(g_eps);
  const auto density = D.density();
  std::vector<double> q(grid.size());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    q[node] = density[node] * r_neg[node] / sol.c_n;
  }
  std::vector<double> scale(grid.size());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    scale[node] = sol.c_n / (density[node] * rmax);
  }
  const ScreenedOperator K(std::move(D), q);
  CgOptions cg;
  cg.tol = options.tol;
  cg.max_iter = options.max_iter;
  cg.preconditioner = options.preconditioner;
  cg.measure = [&scale](std::span<const double> r) {
    double m = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) m = std::max(m, std::abs(r[i]) * scale[i]);
    return m;
  };
  std::vector<double> w(grid.size(), 0.0);
  const CgResult res = solve_spd(K, q, w, cg);
  if (!res.converged) {
    std::ostringstream os;
    os << "conformal solve stopped after " << res.iterations
       << " iterations with residual " << res.residual;
    fail(ErrorKind::Convergence, os.str());
  }
  sol.iterations = res.iterations;
  sol.residual = res.residual;
  sol.u_min = INFINITY;
  sol.u_max = -INFINITY;
  for (double& v : w) {
    v += 1.0;
    sol.u_min = std::min(sol.u_min, v);
    sol.u_max = std::max(sol.u_max, v);
  }
  if (!(sol.u_min > 0.0)) {
    std::ostringstream os;
    os << "conformal factor reached " << sol.u_min << " (grid too coarse?)";
    fail(ErrorKind::MaximumPrinciple, os.str());
  }
  sol.max_principle = sol.u_max <= 1.0 + 1e-10;
  sol.u = ScalarField(grid, std::move(w));
  if (!options.estimate_A) return sol;
  const AEstimates a = extract_A(sol.u, g_eps, r_neg, options);
  sol.A_farfield = a.A_farfield;
  sol.A_integral = a.A_integral;
  sol.fit_residual = a.fit_residual;
  return sol;
}

AEstimates extract_A(const ScalarField& u, const MetricField& g_eps, const ScalarField& r_neg,
                     const ConformalOptions& options) {
  const GridSpec& grid = u.grid();
  const int n = grid.dim();
  require(grid.same_as(g_eps.grid()) && grid.same_as(r_neg.grid()), ErrorKind::Argument,
          "fields live on different grids");
  const double h = max_spacing(grid);
  const double half = *std::min_element(grid.half_width().begin(), grid.half_width().end());
  const double r_out = half - options.boundary_layers * h;
  const double r_in = (1.0 - options.shell_fraction) * half;
  require(r_out - r_in >= 3.0 * h, ErrorKind::Domain,
          "far-field fit window is thinner than 3 nodes");

  AEstimates est;
  bool any = false;
  for (std::size_t node = 0; node < grid.size() && !any; ++node) any = r_neg[node] != 0.0;
  std::vector<std::size_t> window;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double r = radius_from_center(grid, node);
    if (r >= r_in && r <= r_out) window.push_back(node);
  }
  est.window_nodes = window.size();
  if (!any) return est;

  const double omega = unit_sphere_area(n);
  const int c_n_dim = n;
  const double c_n = conformal_constant(c_n_dim);

  // Green profile.
  const double rs = std::max(0.5 * r_in, 3.0 * h);
  require(rs < r_in, ErrorKind::Domain, "source bump for the Green profile is under-resolved");
  std::vector<double> s(grid.size(), 0.0);
  CompensatedSum mass;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double t = radius_from_center(grid, node) / rs;
    if (t < 1.0) {
      s[node] = std::exp(1.0 - 1.0 / (1.0 - t * t));
      mass.add(s[node]);
    }
  }
  const double norm = (n - 2.0) * omega / (mass.value() * grid.cell_volume());
  for (double& v : s) v *= norm;
  const ScreenedOperator L(DivergenceOperator(g_eps), std::vector<double>(grid.size(), 0.0));
  CgOptions cg;
  cg.tol = 1e-12;
  cg.preconditioner = options.preconditioner;
  std::vector<double> psi(grid.size(), 0.0);
  const CgResult res = solve_spd(L, s, psi, cg);
  require(res.converged, ErrorKind::Convergence, "Green profile solve did not converge");

  CompensatedSum num, den;
  double vmax = 0.0;
  for (std::size_t node : window) {
    num.add(psi[node] * (u[node] - 1.0));
    den.add(psi[node] * psi[node]);
    vmax = std::max(vmax, std::abs(u[node] - 1.0));
  }
  est.A_farfield = num.value() / den.value();
  CompensatedSum mis;
  for (std::size_t node : window) {
    const double d = u[node] - 1.0 - est.A_farfield * psi[node];
    mis.add(d * d);
  }
  est.fit_residual =
      vmax > 0.0 ? std::sqrt(mis.value() / static_cast<double>(window.size())) / vmax : 0.0;

  const auto energy = gradient_energy_density(u, g_eps);
  const auto density = volume_density(g_eps);
  CompensatedSum total;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double v = energy[node] - r_neg[node] * u[node] * u[node] * density[node] / c_n;
    if (v != 0.0) total.add(v);
  }
  est.A_integral = total.value() * grid.cell_volume() / ((2.0 - n) * omega);
  return est;
}

MetricField conformal_metric(const MetricField& g_eps, const ConformalSolution& sol) {
  const GridSpec& grid = g_eps.grid();
  const int n = grid.dim();
  require(n >= 3, ErrorKind::Argument, "conformal metric needs n >= 3");
  require(grid.same_as(sol.u.grid()), ErrorKind::Argument,
          "metric and conformal factor live on different grids");
  const double power = 4.0 / (n - 2.0);
  SymmetricTensorField comps = g_eps.components();
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double u = sol.u[node];
    require(u > 0.0, ErrorKind::Domain, "conformal factor must be positive");
    const double f = std::pow(u, power);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) comps.component(i, j)[node] *= f;
    }
  }
  std::optional<MetricAnalytic> tail;
  if (g_eps.has_analytic()) {
    const MetricAnalytic base = g_eps.analytic();
    const double A = sol.A_farfield;
    const Point c = grid.center();
    const Box box = grid.box();
    auto factor = [A, n, power, c](std::span<const double> x, double* dfac, Point* grad) {
      double r2 = 0.0;
      for (int k = 0; k < n; ++k) r2 += (x[k] - c[k]) * (x[k] - c[k]);
      const double r = std::sqrt(r2);
      const double v = 1.0 + A * std::pow(r, 2.0 - n);
      if (dfac && grad) {
        const double dv = A * (2.0 - n) * std::pow(r, 1.0 - n);
        *dfac = power * std::pow(v, power - 1.0) * dv / r;
        grad->resize(n);
        for (int k = 0; k < n; ++k) (*grad)[k] = *dfac * (x[k] - c[k]);
      }
      return std::pow(v, power);
    };
    MetricAnalytic a;
    a.value = [base, factor](std::span<const double> x) -> Mat {
      return base.value(x) * factor(x, nullptr, nullptr);
    };
    if (base.derivative) {
      a.derivative = [base, factor, n](std::span<const double> x) -> MatGrad {
        double d = 0.0;
        Point grad;
        const double f = factor(x, &d, &grad);
        const Mat g = base.value(x);
        MatGrad dg = base.derivative(x);
        for (int k = 0; k < n; ++k) dg[k] = dg[k] * f + g * grad[k];
        return dg;
      };
    }
    a.smooth_beyond = base.smooth_beyond;
    a.valid_beyond = base.valid_beyond;
    a.valid_at = [base, box](std::span<const double> x) {
      double r2 = 0.0;
      for (double v : x) r2 += v * v;
      const bool valid = base.valid_at ? base.valid_at(x) : std::sqrt(r2) >= base.valid_beyond;
      return valid && !box.contains(x);
    };
    tail = std::move(a);
  }
  return MetricField(std::move(comps), g_eps.regularity(), std::move(tail));
}

UNorms u_norms(const ScalarField& u, const MetricField& g_eps) {
  const GridSpec& grid = u.grid();
  require(grid.same_as(g_eps.grid()), ErrorKind::Argument,
          "metric and conformal factor live on different grids");
  std::vector<double> d(grid.size());
  for (std::size_t node = 0; node < grid.size(); ++node) d[node] = u[node] - 1.0;
  UNorms out;
  out.u_minus_one =
      lp_norm(grid, d, NormSpec::lp(sobolev_exponent(grid.dim()), std::nullopt, &g_eps));
  CompensatedSum e;
  for (double v : gradient_energy_density(u, g_eps)) {
    if (v != 0.0) e.add(v);
  }
  out.grad_u = std::sqrt(e.value() * grid.cell_volume());
  return out;
}

UConvergenceTable u_convergence_norms(std::span<const UNorms> per_scale) {
  require(per_scale.size() >= 3, ErrorKind::Fit, "convergence table needs at least 3 scales");
  UConvergenceTable t;
  t.rows.assign(per_scale.begin(), per_scale.end());
  std::vector<double> a, b;
  for (const auto& r : per_scale) {
    a.push_back(r.u_minus_one);
    b.push_back(r.grad_u);
  }
  const auto zero = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  };
  t.decreasing = (zero(a) && zero(b)) || (strictly_decreasing(a) && strictly_decreasing(b));
  return t;
}

SolveGridData transfer_to_solve_grid(const MetricField& g_eps, const ScalarField& r_neg,
                                     const GridSpec& solve_grid) {
  const GridSpec& fine = g_eps.grid();
  const int n = fine.dim();
  require(fine.same_as(r_neg.grid()), ErrorKind::Argument,
          "metric and negative part live on different grids");
  require(solve_grid.dim() == n && fine.cell_centered() && solve_grid.cell_centered(),
          ErrorKind::Contract, "solve grid must be cell-centered of the same dimension");
  require(g_eps.has_analytic(), ErrorKind::Contract,
          "solve grid transfer needs the closed form of g_eps outside the fine box");
  std::vector<std::size_t> ratio(n);
  std::vector<std::size_t> offset(n);
  const Box fb = fine.box(), cb = solve_grid.box();
  const auto whole = [](double v) { return std::abs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::abs(v)); };
  for (int k = 0; k < n; ++k) {
    const double r = solve_grid.spacing()[k] / fine.spacing()[k];
    const double o = (fb.lo[k] - cb.lo[k]) / solve_grid.spacing()[k];
    const double e = (cb.hi[k] - fb.hi[k]) / solve_grid.spacing()[k];
    require(whole(r) && r >= 1.0 && whole(o) && o >= -1e-9 && whole(e) && e >= -1e-9,
            ErrorKind::Contract, "solve grid does not nest the fine grid");
    ratio[k] = static_cast<std::size_t>(std::round(r));
    offset[k] = static_cast<std::size_t>(std::round(o));
  }
  for (std::size_t node = 0; node < fine.size(); ++node) {
    require(r_neg[node] == 0.0 || !fine.near_boundary(node, 1), ErrorKind::Domain,
            "negative part reaches the edge of the fine grid");
  }
  std::size_t children = 1;
  for (int k = 0; k < n; ++k) children *= ratio[k];

  const int ncomp = n * (n + 1) / 2;
  std::vector<std::vector<double>> sum(ncomp, std::vector<double>(solve_grid.size(), 0.0));
  std::vector<double> source(solve_grid.size(), 0.0);
  std::vector<std::size_t> count(solve_grid.size(), 0);
  const auto density = volume_density(g_eps);
  std::vector<std::size_t> fi(n), ci(n);
  for (std::size_t node = 0; node < fine.size(); ++node) {
    fine.multi_index(node, fi);
    for (int k = 0; k < n; ++k) ci[k] = offset[k] + fi[k] / ratio[k];
    const std::size_t c = solve_grid.linear_index(ci);
    int m = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) sum[m++][c] += g_eps.components().component(i, j)[node];
    }
    source[c] += r_neg[node] * density[node];
    ++count[c];
  }
  SymmetricTensorField comps(solve_grid);
  const MetricAnalytic& closed = g_eps.analytic();
  Point x(n);
  for (std::size_t c = 0; c < solve_grid.size(); ++c) {
    if (count[c] == children) {
      int m = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j, ++m) comps.component(i, j)[c] = sum[m][c] / children;
      }
    } else {
      solve_grid.position(c, x);
      const Mat v = closed.value(x);
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) comps.component(i, j)[c] = v(i, j);
      }
    }
  }
  SolveGridData out{MetricField(std::move(comps), g_eps.regularity(), closed),
                    ScalarField::constant(solve_grid, 0.0)};
  const auto coarse_density = volume_density(out.g);
  std::vector<double> r(solve_grid.size(), 0.0);
  for (std::size_t c = 0; c < solve_grid.size(); ++c) {
    if (count[c] == children && source[c] != 0.0) {
      r[c] = source[c] / (children * coarse_density[c]);
    }
  }
  out.r_neg = ScalarField(solve_grid, std::move(r));
  return out;
}

std::vector<MassChainRow> mass_chain(const MassChainConfig& config,
                                     const MollifierKernel& kernel) {
  const int n = config.entry.n;
  require(config.model.n == n, ErrorKind::Argument, "asymptotic model dimension mismatch");
  require(!config.eps.empty(), ErrorKind::Argument, "mass chain needs at least one scale");
  require(config.h_over_eps > 0.0 && config.solve_spacing > 0.0 && config.half_width > 0.0,
          ErrorKind::Argument, "mass chain spacings and box must be positive");
  std::vector<MassChainRow> rows;
  for (double eps : config.eps) {
    MassChainRow row;
    row.eps = eps;
    row.h = config.h_over_eps * eps;
    const double ratio = std::max(1.0, std::round(config.solve_spacing / row.h));
    row.h_solve = ratio * row.h;
    row.fine_half_width = smoothing_box_half_width(config.K, eps, row.h, row.h_solve);
    require(row.fine_half_width <= config.half_width, ErrorKind::Domain,
            "solve box does not contain the mollification grid");
    const GridSpec fine = GridSpec::cube(n, row.fine_half_width, row.h);
    const GridSpec solve = GridSpec::cube(n, config.half_width, row.h_solve);
    SolveGridData data;
    {
      const MetricField g = config.entry.sample(fine);
      const SmoothingPlan plan = SmoothingPlan::make(fine, config.K, eps, kernel);
      const MetricField g_eps = build_g_eps(g, plan, kernel);
      const ScalarField r_neg = negative_part(scalar_pointwise(g_eps, plan.K_eps));
      row.negative_part = lp_norm(r_neg, NormSpec::lp(0.5 * n, plan.K_eps, &g_eps));
      row.m_geps = adm_mass(g_eps, config.model).m_inf;
      const auto battery =
          bump_battery(fine, Box::cube(n, config.battery_region), config.battery_count,
                       config.battery_rmin, config.battery_rmax, config.battery_seed);
      for (const auto& phi : battery) {
        row.sobolev_estimate = std::max(row.sobolev_estimate, sobolev_quotient(phi, g_eps));
      }
      const ExistenceCheck ex = existence_condition(g_eps, r_neg, row.sobolev_estimate);
      row.existence_product = ex.product;
      if (!ex.pass) {
        std::ostringstream os;
        os << "existence condition fails at eps = " << eps << " (product " << ex.product
           << " > 1); conformal solve refused";
        fail(ErrorKind::Contract, os.str());
      }
      data = transfer_to_solve_grid(g_eps, r_neg, solve);
    }
    const ConformalSolution sol = solve_conformal_factor(data.g, data.r_neg, config.solver);
    row.A_farfield = sol.A_farfield;
    row.A_integral = sol.A_integral;
    row.residual = sol.residual;
    row.iterations = sol.iterations;
    row.u_min = sol.u_min;
    row.u_max = sol.u_max;
    row.max_principle = sol.max_principle;
    row.norms = u_norms(sol.u, data.g);
    row.m_tilde_formula = row.m_geps + 2.0 * sol.A_integral;
    const MetricField tilde = conformal_metric(data.g, sol);
    row.m_tilde_direct = adm_mass(tilde, config.model).m_inf;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lowreg
