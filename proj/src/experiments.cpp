#include "lowreg/experiments.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "lowreg/asymptotics.hpp"
#include "lowreg/conformal.hpp"
#include "lowreg/corpus.hpp"
#include "lowreg/curvature.hpp"
#include "lowreg/error.hpp"
#include "lowreg/friedrichs.hpp"
#include "lowreg/mollify.hpp"
#include "lowreg/norms.hpp"
#include "lowreg/rate_fit.hpp"

namespace lowreg {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
    fail(ErrorKind::Config, key + ": expected a finite number, got '" + text + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(key, item));
  require(!out.empty(), ErrorKind::Config, key + ": expected a comma-separated list");
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_number(v[i]);
  }
  return s;
}

std::string bare_message(const Error& e) {
  const std::string w = e.what();
  const auto pos = w.find(" error: ");
  return pos == std::string::npos ? w : w.substr(pos + 8);
}

template <class F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), name + ": " + bare_message(e));
  }
}

Check at_most(std::string name, double v, double t) { return {std::move(name), v, "<=", t, 0.0, v <= t}; }
Check at_least(std::string name, double v, double t) { return {std::move(name), v, ">=", t, 0.0, v >= t}; }
Check holds(std::string name, bool b) { return {std::move(name), b ? 1.0 : 0.0, "==", 1.0, 0.0, b}; }
Check within(std::string name, double v, double lo, double hi) {
  return {std::move(name), v, "in", lo, hi, v >= lo && v <= hi};
}

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

CorpusEntry corpus_entry(ExperimentConfig& c) {
  const std::string name = c.text("corpus.entry");
  const int n = c.integer("corpus.n", 3);
  try {
    if (name == "euclidean") return make_euclidean(n);
    if (name == "schwarzschild") {
      const double m = c.number("corpus.m", 1.0);
      return make_schwarzschild(n, m, c.number("corpus.cap_radius", 0.5));
    }
    if (name == "miao_corner") return make_miao_corner(n, c.number("corpus.m", 1.0));
    if (name == "w1n_singular") {
      const double beta = c.number("corpus.beta", 0.5);
      return make_w1n_singular(n, beta, c.number("corpus.a", 0.1));
    }
    if (name == "conformal_tail") return make_conformal_tail(n, c.number("corpus.A", 0.5));
  } catch (const Error& e) {
    fail(ErrorKind::Config, "corpus: " + bare_message(e));
  }
  fail(ErrorKind::Config,
       "corpus.entry: unknown entry '" + name +
           "' (euclidean, schwarzschild, miao_corner, w1n_singular, conformal_tail)");
}

void require_positive(const std::string& key, double v) {
  require(v > 0.0, ErrorKind::Config, key + " must be positive");
}

void require_scales(const std::string& key, const std::vector<double>& eps, std::size_t min) {
  require(eps.size() >= min, ErrorKind::Config,
          key + " needs at least " + std::to_string(min) + " scales");
  for (double e : eps) require_positive(key, e);
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t i) {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r[i]);
  return out;
}

Curve curve(std::string name, const std::vector<double>& x, const std::vector<double>& y) {
  Curve c{std::move(name), {}};
  for (std::size_t i = 0; i < x.size(); ++i) c.points.emplace_back(x[i], y[i]);
  return c;
}

struct Smoothed {
  GridSpec grid;
  MetricField g;
  SmoothingPlan plan;
  MetricField g_eps;
};

Smoothed smooth_entry(const CorpusEntry& entry, const Box& K, double eps, double h,
                      const MollifierKernel& kernel) {
  Smoothed s;
  s.grid = GridSpec::cube(entry.n, smoothing_box_half_width(K, eps, h, h), h);
  s.g = stage("sample", [&] { return entry.sample(s.grid); });
  s.plan = stage("smoothing plan", [&] { return SmoothingPlan::make(s.grid, K, eps, kernel); });
  s.g_eps = stage("build_g_eps", [&] { return build_g_eps(s.g, s.plan, kernel); });
  return s;
}

// mollify-convergence ------------------------------------------------------

ExperimentResult mollify_convergence(ExperimentConfig& c) {
  const CorpusEntry entry = corpus_entry(c);
  const int n = entry.n;
  const Box K = Box::cube(n, c.number("region.K_half_width", 1.05));
  const auto eps = c.numbers("scales.eps", {0.2, 0.1, 0.05});
  const double ratio = c.number("grid.h_over_eps", 0.25);
  const double p = c.number("norms.p", n);
  const double outside_max = c.number("thresholds.outside_max", 0.0);
  c.finish();
  require_scales("scales.eps", eps, 2);
  require_positive("grid.h_over_eps", ratio);

  const MollifierKernel kernel(n);
  ExperimentResult r;
  r.columns = {"eps", "h", "sup_K", "w1p_K", "inverse_lp_K", "outside_K_eps_max"};
  for (double e : eps) {
    const Smoothed s = smooth_entry(entry, K, e, ratio * e, kernel);
    const auto diff = frobenius_difference(s.g_eps.components(), s.g.components());
    double outside = 0.0;
    for (std::size_t node = 0; node < s.grid.size(); ++node) {
      if (!s.plan.in_K_eps(s.grid.position(node))) outside = std::max(outside, diff[node]);
    }
    const double sup = max_norm(diff, K);
    const double w1p = stage("norms", [&] {
      return tensor_difference_norm(s.g_eps.components(), s.g.components(), NormSpec::w1p(p, K));
    });
    const double inv = stage("norms", [&] {
      return tensor_difference_norm(metric_inverse(s.g_eps), metric_inverse(s.g),
                                    NormSpec::lp(p, K));
    });
    r.rows.push_back({e, ratio * e, sup, w1p, inv, outside});
  }
  const auto sup = column(r.rows, 2), w1p = column(r.rows, 3), inv = column(r.rows, 4);
  r.curves = {curve("sup_K", eps, sup), curve("w1p_K", eps, w1p), curve("inverse_lp_K", eps, inv)};
  r.summary = {{"sup_K_slope", fit_loglog(eps, sup).slope},
               {"w1p_K_slope", fit_loglog(eps, w1p).slope},
               {"inverse_lp_K_slope", fit_loglog(eps, inv).slope}};
  const auto outside = column(r.rows, 5);
  r.checks = {holds("sup_K_decreasing", strictly_decreasing(sup)),
              holds("w1p_K_decreasing", strictly_decreasing(w1p)),
              at_most("outside_K_eps_max", *std::max_element(outside.begin(), outside.end()),
                      outside_max)};
  return r;
}

// friedrichs-rate ----------------------------------------------------------

ScalarFn profile(const std::string& key, const std::string& name) {
  if (name == "abs") return [](std::span<const double> x) { return std::abs(x[0]); };
  if (name == "sign") {
    return [](std::span<const double> x) { return x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0); };
  }
  if (name == "one") return [](std::span<const double>) { return 1.0; };
  if (name == "linear") return [](std::span<const double> x) { return x[0]; };
  if (name == "sine") return [](std::span<const double> x) { return std::sin(M_PI * x[0]); };
  fail(ErrorKind::Config, key + ": unknown profile '" + name + "' (abs, sign, one, linear, sine)");
}

ExperimentResult friedrichs_rate(ExperimentConfig& c) {
  const int dim = c.integer("grid.dim", 1);
  const double L = c.number("grid.half_width", 1.0);
  const auto eps = c.numbers("scales.eps", {0.1, 0.05, 0.025, 0.0125});
  require_scales("scales.eps", eps, 3);
  const double h = c.number("grid.h", 0.25 * *std::min_element(eps.begin(), eps.end()));
  const ScalarFn a = profile("functions.a", c.text("functions.a", "abs"));
  const ScalarFn f = profile("functions.f", c.text("functions.f", "sign"));
  const double p = c.number("exponents.p", 2.0);
  const double q = c.number("exponents.q", 2.0);
  const double decay_p = c.number("exponents.decay_p", 2.0);
  const Box K = Box::cube(dim, c.number("region.K_half_width", 0.5));
  const double lr_slope_min = c.number("thresholds.lr_slope_min", 0.9);
  const double w1r_ratio_max = c.number("thresholds.w1r_last_over_first_max", 0.25);
  const double decay_lo = c.number("thresholds.decay_slope_min", 0.4);
  const double decay_hi = c.number("thresholds.decay_slope_max", 0.6);
  c.finish();
  require(dim >= 1, ErrorKind::Config, "grid.dim must be >= 1");
  require_positive("grid.h", h);

  const GridSpec grid = stage("grid", [&] { return GridSpec::cube(dim, L, h); });
  const MollifierKernel kernel(dim);
  CommutatorExperiment exp;
  exp.a = ScalarField::sample(grid, a);
  exp.f = ScalarField::sample(grid, f);
  exp.p = p;
  exp.q = q;
  exp.eps = eps;
  exp.K = K;
  const FriedrichsTable t = stage("friedrichs_w1r", [&] { return friedrichs_w1r(exp, kernel); });
  const DecayTable d = stage("eps_derivative_decay", [&] {
    return eps_derivative_decay(exp.f, decay_p, eps, K, kernel);
  });

  ExperimentResult r;
  r.columns = {"eps", "lr_norm", "w1r_norm", "eps_derivative_norm"};
  for (std::size_t i = 0; i < eps.size(); ++i) {
    r.rows.push_back({eps[i], t.lr.values[i], t.w1r.values[i], d.fit.values[i]});
  }
  r.curves = {curve("lr_norm", eps, t.lr.values), curve("w1r_norm", eps, t.w1r.values),
              curve("eps_derivative_norm", eps, d.fit.values)};
  r.summary = {{"r", exp.r()},
               {"h", h},
               {"lr_slope", t.lr.slope},
               {"lr_residual", t.lr.residual},
               {"w1r_slope", t.w1r.slope},
               {"eps_derivative_slope", d.fit.slope}};
  if (all_zero(t.lr.values)) {
    r.checks.push_back(holds("lr_identically_zero", true));
  } else {
    r.checks.push_back(at_least("lr_slope", t.lr.slope, lr_slope_min));
  }
  if (all_zero(t.w1r.values)) {
    r.checks.push_back(holds("w1r_identically_zero", true));
  } else {
    r.checks.push_back(holds("w1r_decreasing", t.decreasing));
    r.checks.push_back(at_most("w1r_last_over_first", t.w1r.values.back() / t.w1r.values.front(),
                               w1r_ratio_max));
  }
  if (all_zero(d.fit.values)) {
    r.checks.push_back(holds("eps_derivative_identically_zero", true));
  } else {
    r.checks.push_back(within("eps_derivative_slope", d.fit.slope, decay_lo, decay_hi));
  }
  return r;
}

// scalar-negpart -----------------------------------------------------------

ExperimentResult scalar_negpart(ExperimentConfig& c) {
  const CorpusEntry entry = corpus_entry(c);
  const int n = entry.n;
  const Box K = Box::cube(n, c.number("region.K_half_width", 1.05));
  const auto eps = c.numbers("scales.eps", {0.2, 0.1, 0.05});
  const double ratio = c.number("grid.h_over_eps", 0.25);
  const double p = c.number("norms.p", n);
  const std::string reference = c.text("norms.reference", "g");
  const double ratio_max = c.number("thresholds.last_over_first_max", 0.5);
  const int count = c.integer("pairing.count", 20);
  const double pl = c.number("pairing.half_width", 1.6);
  const double ph = c.number("pairing.spacing", 0.05);
  const double pregion = c.number("pairing.region_half_width", 0.9);
  const double prmin = c.number("pairing.rmin", 0.3);
  const double prmax = c.number("pairing.rmax", 0.5);
  const int pseed = c.integer("pairing.seed", 11);
  const double pmin = c.number("thresholds.pairing_min", -1e-8);
  c.finish();
  require_scales("scales.eps", eps, 2);
  require(reference == "g" || reference == "g_eps", ErrorKind::Config,
          "norms.reference must be g or g_eps");

  const MollifierKernel kernel(n);
  ExperimentResult r;
  r.columns = {"eps", "h", "norm_K_eps", "norm_K"};
  for (double e : eps) {
    const Smoothed s = smooth_entry(entry, K, e, ratio * e, kernel);
    const MetricField* ref = reference == "g" ? &s.g : &s.g_eps;
    const double on_keps = stage("negative_part_norm", [&] {
      return negative_part_norm(s.g_eps, p, s.plan.K_eps, ref);
    });
    const double on_k =
        stage("negative_part_norm", [&] { return negative_part_norm(s.g_eps, p, K, ref); });
    r.rows.push_back({e, ratio * e, on_keps, on_k});
  }
  const auto on_keps = column(r.rows, 2), on_k = column(r.rows, 3);
  r.curves = {curve("norm_K_eps", eps, on_keps), curve("norm_K", eps, on_k)};
  r.summary = {{"slope_K", fit_loglog(eps, on_k).slope},
               {"slope_K_eps", fit_loglog(eps, on_keps).slope}};
  r.checks = {holds("norm_K_decreasing", strictly_decreasing(on_k)),
              at_most("norm_K_last_over_first", on_k.back() / on_k.front(), ratio_max),
              holds("norm_K_eps_decreasing", strictly_decreasing(on_keps)),
              at_most("norm_K_eps_last_over_first", on_keps.back() / on_keps.front(), ratio_max)};

  if (count > 0) {
    const GridSpec pg = stage("grid", [&] { return GridSpec::cube(n, pl, ph); });
    const MetricField g = stage("sample", [&] { return entry.sample(pg); });
    const auto battery = stage("bump_battery", [&] {
      return bump_battery(pg, Box::cube(n, pregion), count, prmin, prmax,
                          static_cast<unsigned long long>(pseed));
    });
    Curve pc{"pairing", {}};
    double lo = INFINITY;
    for (std::size_t i = 0; i < battery.size(); ++i) {
      const double v = stage("pair_distributional_scalar", [&] {
        return pair_distributional_scalar(g, DensityTest(battery[i], true));
      });
      pc.points.emplace_back(static_cast<double>(i), v);
      lo = std::min(lo, v);
    }
    r.curves.push_back(pc);
    r.summary.emplace_back("pairing_min", lo);
    r.checks.push_back(at_least("pairing_min", lo, pmin));
  }
  return r;
}

// scalar-commutator --------------------------------------------------------

ExperimentResult scalar_commutator(ExperimentConfig& c) {
  const CorpusEntry entry = corpus_entry(c);
  const int n = entry.n;
  const Box K = Box::cube(n, c.number("region.K_half_width", 0.2));
  const auto eps = c.numbers("scales.eps", {0.2, 0.1, 0.05, 0.025});
  const double ratio = c.number("grid.h_over_eps", 0.25);
  const double p = c.number("norms.p", n);
  c.finish();
  require_scales("scales.eps", eps, 2);
  require_positive("grid.h_over_eps", ratio);

  const MollifierKernel kernel(n);
  ExperimentResult r;
  r.columns = {"eps", "h", "norm"};
  for (double e : eps) {
    const double h = ratio * e;
    const GridSpec grid = GridSpec::cube(n, smoothing_box_half_width(K, e, h, h), h);
    const MetricField g = stage("sample", [&] { return entry.sample(grid); });
    const double v =
        stage("scalar_commutator", [&] { return scalar_commutator_at(g, kernel, e, p, K); });
    r.rows.push_back({e, h, v});
  }
  const auto norms = column(r.rows, 2);
  r.curves = {curve("norm", eps, norms)};
  r.summary = {{"slope", fit_loglog(eps, norms).slope}};
  r.checks = {holds("norm_decreasing", strictly_decreasing(norms))};
  return r;
}

// adm-mass -----------------------------------------------------------------

AsymptoticModel read_model(ExperimentConfig& c, int n, const std::vector<double>& radii) {
  AsymptoticModel m;
  m.n = n;
  m.tau = c.number("asymptotics.tau", n - 2.0);
  m.inner_radius = c.number("asymptotics.inner_radius", 1.0);
  m.radii = c.numbers("asymptotics.radii", radii);
  m.quadrature_order = c.integer("asymptotics.quadrature_order", 16);
  m.tail_terms = c.integer("asymptotics.tail_terms", 2);
  try {
    m.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Config, "asymptotics: " + bare_message(e));
  }
  return m;
}

ExperimentResult adm_mass_experiment(ExperimentConfig& c) {
  const CorpusEntry entry = corpus_entry(c);
  const AsymptoticModel model = read_model(c, entry.n, {8, 16, 32});
  double expected;
  if (entry.known_mass) {
    expected = c.number("thresholds.expected", *entry.known_mass);
  } else {
    expected = c.number("thresholds.expected");
  }
  const double tol = c.number("thresholds.tolerance", 1e-3);
  c.finish();

  const MassEstimate est = stage("adm_mass", [&] { return adm_mass(entry.analytic, model); });
  ExperimentResult r;
  r.columns = {"r", "m_of_r"};
  for (std::size_t i = 0; i < est.radii.size(); ++i) r.rows.push_back({est.radii[i], est.m_of_r[i]});
  r.curves = {curve("m_of_r", est.radii, est.m_of_r)};
  r.summary = {{"m_inf", est.m_inf},
               {"s", est.s},
               {"residual", est.residual},
               {"terms", static_cast<double>(est.terms)},
               {"tail_warning", est.tail_warning ? 1.0 : 0.0},
               {"omega", est.omega}};
  r.checks = {at_most("mass_error", std::abs(est.m_inf - expected), tol)};
  return r;
}

// conformal-mass -----------------------------------------------------------

struct MmsResult {
  std::vector<double> h;
  std::vector<double> error;
  double order = 0.0;
  double residual = 0.0;
};

MmsResult manufactured_solve(int n, double L, double amp, const std::vector<double>& spacings,
                             const ConformalOptions& base) {
  const double k = M_PI / (2.0 * L);
  const double cn = conformal_constant(n);
  auto ustar = [=](std::span<const double> x) {
    double v = amp;
    for (int i = 0; i < n; ++i) v *= std::cos(k * x[i]);
    return 1.0 + v;
  };
  ConformalOptions opt = base;
  opt.estimate_A = false;
  MmsResult out;
  for (double h : spacings) {
    const GridSpec g = GridSpec::cube(n, L, h);
    const auto rn = ScalarField::sample(g, [&](std::span<const double> x) {
      const double u = ustar(x);
      return cn * n * k * k * (u - 1.0) / u;
    });
    const auto sol = solve_conformal_factor(MetricField::euclidean(g), rn, opt);
    double e = 0.0;
    for (std::size_t node = 0; node < g.size(); ++node) {
      e = std::max(e, std::abs(sol.u[node] - ustar(g.position(node))));
    }
    out.h.push_back(h);
    out.error.push_back(e);
    out.residual = std::max(out.residual, sol.residual);
  }
  if (out.h.size() == 2) {
    out.order = std::log(out.error[0] / out.error[1]) / std::log(out.h[0] / out.h[1]);
  } else {
    out.order = fit_loglog(out.h, out.error).slope;
  }
  return out;
}

Preconditioner read_preconditioner(ExperimentConfig& c) {
  const std::string p = c.text("solve.preconditioner", "multigrid");
  if (p == "multigrid") return Preconditioner::Multigrid;
  if (p == "jacobi") return Preconditioner::Jacobi;
  fail(ErrorKind::Config, "solve.preconditioner must be multigrid or jacobi");
}

ExperimentResult conformal_mass(ExperimentConfig& c) {
  MassChainConfig cfg;
  cfg.entry = corpus_entry(c);
  const int n = cfg.entry.n;
  cfg.K = Box::cube(n, c.number("region.K_half_width", 1.05));
  cfg.eps = c.numbers("scales.eps", {0.2, 0.1, 0.05});
  cfg.h_over_eps = c.number("grid.h_over_eps", 0.25);
  cfg.half_width = c.number("solve.half_width", 3.0);
  cfg.solve_spacing = c.number("solve.spacing", 0.05);
  cfg.solver.tol = c.number("solve.tol", 1e-9);
  cfg.solver.max_iter = c.integer("solve.max_iter", 0);
  cfg.solver.preconditioner = read_preconditioner(c);
  cfg.solver.shell_fraction = c.number("solve.shell_fraction", 0.2);
  cfg.solver.boundary_layers = c.integer("solve.boundary_layers", 2);
  cfg.model = read_model(c, n, {10, 20, 40, 80, 160});
  cfg.battery_count = c.integer("existence.count", 10);
  cfg.battery_region = c.number("existence.region_half_width", 0.6);
  cfg.battery_rmin = c.number("existence.rmin", 0.2);
  cfg.battery_rmax = c.number("existence.rmax", 0.5);
  cfg.battery_seed = static_cast<unsigned long long>(c.integer("existence.seed", 5));
  const double mms_amp = c.number("mms.amplitude", 0.5);
  const double mms_L = c.number("mms.half_width", 1.0);
  const auto mms_h = c.numbers("mms.spacings", {0.1, 0.05});
  double m_ref;
  if (cfg.entry.known_mass) {
    m_ref = c.number("thresholds.reference_mass", *cfg.entry.known_mass);
  } else {
    m_ref = c.number("thresholds.reference_mass");
  }
  const double residual_max = c.number("thresholds.residual_max", 1e-9);
  const double slack = c.number("thresholds.u_upper_slack", 1e-10);
  const double a_agree = c.number("thresholds.A_agreement", 0.05);
  const double m_agree = c.number("thresholds.mass_agreement", 0.05);
  const double order_min = c.number("thresholds.mms_order_min", 1.7);
  c.finish();
  require_scales("scales.eps", cfg.eps, 3);
  require(mms_h.size() >= 2, ErrorKind::Config, "mms.spacings needs at least 2 values");

  const MollifierKernel kernel(n);
  const auto rows = stage("mass_chain", [&] { return mass_chain(cfg, kernel); });
  const MmsResult mms =
      stage("manufactured solution", [&] { return manufactured_solve(n, mms_L, mms_amp, mms_h, cfg.solver); });

  ExperimentResult r;
  r.columns = {"eps", "m_geps", "A_farfield", "A_integral", "m_tilde_formula", "m_tilde_direct",
               "res", "iters", "h", "h_solve", "u_min", "u_max", "negative_part",
               "existence_product", "u_minus_one_norm", "grad_u_norm"};
  double res = 0.0, umax = -INFINITY, umin = INFINITY, a_gap = 0.0, m_gap = 0.0;
  std::vector<double> err, err_direct, nu, ng;
  for (const auto& row : rows) {
    r.rows.push_back({row.eps, row.m_geps, row.A_farfield, row.A_integral, row.m_tilde_formula,
                      row.m_tilde_direct, row.residual, static_cast<double>(row.iterations), row.h,
                      row.h_solve, row.u_min, row.u_max, row.negative_part,
                      row.existence_product, row.norms.u_minus_one, row.norms.grad_u});
    res = std::max(res, row.residual);
    umax = std::max(umax, row.u_max);
    umin = std::min(umin, row.u_min);
    const double a_scale = std::max(std::abs(row.A_farfield), 1e-12);
    a_gap = std::max(a_gap, std::abs(row.A_farfield - row.A_integral) / a_scale);
    m_gap = std::max(m_gap, std::abs(row.m_tilde_formula - row.m_tilde_direct) /
                                std::max(std::abs(row.m_tilde_formula), 1e-12));
    err.push_back(std::abs(row.m_tilde_formula - m_ref));
    err_direct.push_back(std::abs(row.m_tilde_direct - m_ref));
    nu.push_back(row.norms.u_minus_one);
    ng.push_back(row.norms.grad_u);
  }
  const std::vector<UNorms> norms = [&] {
    std::vector<UNorms> v;
    for (const auto& row : rows) v.push_back(row.norms);
    return v;
  }();
  const UConvergenceTable ut = u_convergence_norms(norms);
  r.curves = {curve("mass_error_formula", cfg.eps, err), curve("mass_error_direct", cfg.eps, err_direct),
              curve("A_farfield", cfg.eps, column(r.rows, 2)),
              curve("A_integral", cfg.eps, column(r.rows, 3)), curve("u_minus_one_norm", cfg.eps, nu),
              curve("grad_u_norm", cfg.eps, ng), curve("mms_error", mms.h, mms.error)};
  r.summary = {{"mms_order", mms.order},
               {"mms_residual", mms.residual},
               {"u_min", umin},
               {"u_max", umax},
               {"A_relative_gap", a_gap},
               {"mass_relative_gap", m_gap},
               {"mass_error_slope", fit_loglog(cfg.eps, err).slope}};
  r.checks = {at_most("residual", std::max(res, mms.residual), residual_max),
              at_least("u_min", umin, 0.0),
              at_most("u_max_minus_one", umax - 1.0, slack),
              at_most("A_relative_gap", a_gap, a_agree),
              at_most("mass_relative_gap", m_gap, m_agree),
              holds("mass_error_decreasing", strictly_decreasing(err)),
              holds("u_norms_decreasing", ut.decreasing),
              at_least("mms_order", mms.order, order_min)};
  return r;
}

// sobolev-sandwich ---------------------------------------------------------

ExperimentResult sobolev_sandwich(ExperimentConfig& c) {
  const CorpusEntry entry = corpus_entry(c);
  const int n = entry.n;
  const Box K = Box::cube(n, c.number("region.K_half_width", 1.05));
  const auto eps = c.numbers("scales.eps", {0.2, 0.1, 0.05});
  const double ratio = c.number("grid.h_over_eps", 0.25);
  const int count = c.integer("battery.count", 10);
  const double region = c.number("battery.region_half_width", 0.6);
  const double rmin = c.number("battery.rmin", 0.2);
  const double rmax = c.number("battery.rmax", 0.5);
  const int seed = c.integer("battery.seed", 7);
  const double slack = c.number("thresholds.slack", 1e-10);
  c.finish();
  require_scales("scales.eps", eps, 2);
  require(count > 0, ErrorKind::Config, "battery.count must be positive");

  const MollifierKernel kernel(n);
  ExperimentResult r;
  r.columns = {"eps", "h", "rho", "functions", "violations", "worst_margin", "C_g", "C_geps"};
  double violations = 0.0, rho_min = INFINITY;
  for (double e : eps) {
    const Smoothed s = smooth_entry(entry, K, e, ratio * e, kernel);
    const EquivalenceFactor rho =
        stage("metric_equivalence_factor", [&] { return metric_equivalence_factor(s.g, s.g_eps); });
    const auto battery = stage("bump_battery", [&] {
      return bump_battery(s.grid, Box::cube(n, region), count, rmin, rmax,
                          static_cast<unsigned long long>(seed));
    });
    const SandwichReport rep = stage("sobolev_sandwich_check", [&] {
      return sobolev_sandwich_check(s.g, s.g_eps, rho, battery, slack);
    });
    const double cg = *std::max_element(rep.q_g.begin(), rep.q_g.end());
    const double ce = *std::max_element(rep.q_g_eps.begin(), rep.q_g_eps.end());
    r.rows.push_back({e, ratio * e, rho.rho_eps, static_cast<double>(rep.functions),
                      static_cast<double>(rep.violations), rep.worst_margin, cg, ce});
    violations += static_cast<double>(rep.violations);
    rho_min = std::min(rho_min, rho.rho_eps);
  }
  const auto rho = column(r.rows, 2);
  std::vector<double> excess;
  for (double v : rho) excess.push_back(v - 1.0);
  r.curves = {curve("rho_minus_one", eps, excess), curve("worst_margin", eps, column(r.rows, 5))};
  r.summary = {{"rho_minus_one_slope", fit_loglog(eps, excess).slope}};
  r.checks = {holds("rho_decreasing", strictly_decreasing(rho)),
              at_least("rho_min", rho_min, 1.0),
              at_most("violations", violations, 0.0)};
  return r;
}

using Runner = std::function<ExperimentResult(ExperimentConfig&)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> m = {
      {"mollify-convergence", mollify_convergence}, {"friedrichs-rate", friedrichs_rate},
      {"scalar-negpart", scalar_negpart},           {"scalar-commutator", scalar_commutator},
      {"adm-mass", adm_mass_experiment},            {"conformal-mass", conformal_mass},
      {"sobolev-sandwich", sobolev_sandwich}};
  return m;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + tmp.string());
    out << content;
    out.flush();
    require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorKind::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

// ExperimentConfig ---------------------------------------------------------

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Config, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorKind::Config, std::string("malformed config: ") + e.what());
  }
  ExperimentConfig c;
  for (const auto& [section, sub] : tree) {
    if (sub.empty()) {
      fail(ErrorKind::Config, "key '" + section + "' must live in a [section]");
    }
    for (const auto& [key, value] : sub) c.values_[section + "." + key] = trim(value.data());
  }
  const auto name = c.values_.find("experiment.name");
  require(name != c.values_.end() && !name->second.empty(), ErrorKind::Config,
          "missing experiment.name");
  c.name_ = name->second;
  c.values_.erase(name);
  c.record("experiment.name", c.name_);
  const auto out = c.values_.find("output.dir");
  if (out != c.values_.end()) {
    c.output_dir_ = out->second;
    c.values_.erase(out);
  }
  require(runners().count(c.name_) == 1, ErrorKind::Config,
          "unknown experiment '" + c.name_ + "' (see `list`)");
  return c;
}

std::optional<std::string> ExperimentConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void ExperimentConfig::record(const std::string& key, std::string value) {
  resolved_[key] = std::move(value);
}

double ExperimentConfig::number(const std::string& key) {
  const auto v = raw(key);
  require(v.has_value(), ErrorKind::Config, "missing required key " + key);
  const double x = parse_number(key, *v);
  record(key, format_number(x));
  return x;
}

double ExperimentConfig::number(const std::string& key, double fallback) {
  const auto v = raw(key);
  const double x = v ? parse_number(key, *v) : fallback;
  record(key, format_number(x));
  return x;
}

int ExperimentConfig::integer(const std::string& key, int fallback) {
  const auto v = raw(key);
  int x = fallback;
  if (v) {
    const std::string t = trim(*v);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    require(ec == std::errc() && ptr == t.data() + t.size() && !t.empty(), ErrorKind::Config,
            key + ": expected an integer, got '" + *v + "'");
  }
  record(key, std::to_string(x));
  return x;
}

std::string ExperimentConfig::text(const std::string& key) {
  const auto v = raw(key);
  require(v.has_value() && !v->empty(), ErrorKind::Config, "missing required key " + key);
  record(key, *v);
  return *v;
}

std::string ExperimentConfig::text(const std::string& key, const std::string& fallback) {
  const auto v = raw(key);
  const std::string x = v ? *v : fallback;
  record(key, x);
  return x;
}

std::vector<double> ExperimentConfig::numbers(const std::string& key) {
  const auto v = raw(key);
  require(v.has_value(), ErrorKind::Config, "missing required key " + key);
  auto x = parse_list(key, *v);
  record(key, join(x));
  return x;
}

std::vector<double> ExperimentConfig::numbers(const std::string& key,
                                              const std::vector<double>& fallback) {
  const auto v = raw(key);
  auto x = v ? parse_list(key, *v) : fallback;
  record(key, join(x));
  return x;
}

void ExperimentConfig::finish() const {
  for (const auto& [key, value] : values_) {
    require(resolved_.count(key) == 1, ErrorKind::Config,
            "unknown key " + key + " for experiment " + name_);
  }
}

std::string ExperimentConfig::resolved() const {
  std::string out;
  std::string section;
  for (const auto& [key, value] : resolved_) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      if (!out.empty()) out += "\n";
      out += "[" + s + "]\n";
      section = s;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : resolved()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

// Results ------------------------------------------------------------------

bool ExperimentResult::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> info = {
      {"mollify-convergence",
       "g_eps -> g uniformly and in W^{1,p} on K; g_eps = g outside K_eps",
       {"corpus.entry", "region.K_half_width", "scales.eps", "grid.h_over_eps", "norms.p",
        "thresholds.outside_max"}},
      {"friedrichs-rate",
       "||(af)*rho_eps - a (f*rho_eps)||_{L^r(K)} = O(eps) and -> 0 in W^{1,r}(K); "
       "eps ||d(f*rho_eps)||_{L^p(K)} -> 0",
       {"grid.dim", "grid.half_width", "grid.h", "scales.eps", "functions.a", "functions.f",
        "exponents.p", "exponents.q", "exponents.decay_p", "region.K_half_width",
        "thresholds.lr_slope_min", "thresholds.w1r_last_over_first_max",
        "thresholds.decay_slope_min", "thresholds.decay_slope_max"}},
      {"scalar-negpart",
       "||R[g_eps]_-||_{L^{p/2}} -> 0; the distributional R[g] is nonnegative on "
       "nonnegative test densities",
       {"corpus.entry", "region.K_half_width", "scales.eps", "grid.h_over_eps", "norms.p",
        "norms.reference", "thresholds.last_over_first_max", "pairing.count",
        "pairing.half_width", "pairing.spacing", "pairing.region_half_width", "pairing.rmin",
        "pairing.rmax", "pairing.seed", "thresholds.pairing_min"}},
      {"scalar-commutator",
       "R[g]*rho_eps - R[g*rho_eps] -> 0 in L^{p/2}(K) for g in C^0 and W^{1,p}",
       {"corpus.entry", "region.K_half_width", "scales.eps", "grid.h_over_eps", "norms.p"}},
      {"adm-mass",
       "ADM mass as the limit of coordinate-sphere flux integrals",
       {"corpus.entry", "asymptotics.tau", "asymptotics.inner_radius", "asymptotics.radii",
        "asymptotics.quadrature_order", "asymptotics.tail_terms", "thresholds.expected",
        "thresholds.tolerance"}},
      {"conformal-mass",
       "c_n Lap u + R_- u = 0 with u -> 1 removes R_-; m(g~_eps) = m(g_eps) + 2A_eps -> m(g)",
       {"corpus.entry", "region.K_half_width", "scales.eps", "grid.h_over_eps",
        "solve.half_width", "solve.spacing", "solve.tol", "solve.max_iter",
        "solve.preconditioner", "solve.shell_fraction", "solve.boundary_layers",
        "asymptotics.radii", "existence.count", "existence.region_half_width", "existence.rmin",
        "existence.rmax", "existence.seed", "mms.amplitude", "mms.half_width", "mms.spacings",
        "thresholds.reference_mass", "thresholds.residual_max", "thresholds.u_upper_slack",
        "thresholds.A_agreement", "thresholds.mass_agreement", "thresholds.mms_order_min"}},
      {"sobolev-sandwich",
       "g / rho <= g_eps <= rho g with rho(eps) -> 1; rho^{-n} Q_g <= Q_{g_eps} <= rho^n Q_g "
       "per test function",
       {"corpus.entry", "region.K_half_width", "scales.eps", "grid.h_over_eps", "battery.count",
        "battery.region_half_width", "battery.rmin", "battery.rmax", "battery.seed",
        "thresholds.slack"}},
  };
  return info;
}

ExperimentResult run_experiment(ExperimentConfig& config) {
  const auto it = runners().find(config.experiment());
  require(it != runners().end(), ErrorKind::Config,
          "unknown experiment '" + config.experiment() + "'");
  ExperimentResult r = it->second(config);
  r.experiment = config.experiment();
  return r;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string results_csv(const ExperimentResult& r) {
  std::string out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) out += (i ? "," : "") + r.columns[i];
  out += "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
    out += "\n";
  }
  return out;
}

std::string summary_csv(const ExperimentResult& r) {
  std::string out = "key,value\n";
  for (const auto& [k, v] : r.summary) out += k + "," + format_number(v) + "\n";
  return out;
}

std::string checks_csv(const ExperimentResult& r) {
  std::string out = "check,value,op,threshold,upper,pass\n";
  for (const auto& c : r.checks) {
    out += c.name + "," + format_number(c.value) + "," + c.op + "," + format_number(c.threshold) +
           "," + (c.op == "in" ? format_number(c.upper) : std::string()) + "," +
           (c.pass ? "1" : "0") + "\n";
  }
  return out;
}

std::string curve_dat(const Curve& c) {
  std::string out = "# " + c.name + "\n";
  for (const auto& [x, y] : c.points) out += format_number(x) + " " + format_number(y) + "\n";
  return out;
}

std::vector<std::filesystem::path> write_outputs(const ExperimentResult& r,
                                                 const ExperimentConfig& config,
                                                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& content) {
    write_atomic(dir / name, content);
    written.push_back(dir / name);
  };
  put("results.csv", results_csv(r));
  put("summary.csv", summary_csv(r));
  put("checks.csv", checks_csv(r));
  std::ostringstream hash;
  hash << std::hex << config.hash();
  put("resolved_config.ini", "# hash " + hash.str() + "\n" + config.resolved());
  for (const auto& c : r.curves) put(c.name + ".dat", curve_dat(c));
  return written;
}

}  // namespace lowreg
