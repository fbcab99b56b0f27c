#include "lowreg/corpus.hpp"

#include <cmath>
#include <json.hpp>

#include "lowreg/error.hpp"

namespace lowreg {

MetricField CorpusEntry::sample(const GridSpec& grid) const {
  require(grid.dim() == n, ErrorKind::Argument,
          name + ": grid dimension does not match the entry");
  return MetricField::sample(grid, analytic, regularity);
}

double CorpusEntry::parameter(const std::string& key) const {
  for (const auto& [k, v] : parameters) {
    if (k == key) return v;
  }
  fail(ErrorKind::Argument, name + " has no parameter " + key);
}

MetricAnalytic conformally_flat(int n, RadialProfile profile) {
  const double p = 4.0 / (n - 2.0);
  MetricAnalytic a;
  a.value = [n, p, u = profile.u](std::span<const double> x) -> Mat {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return Mat::Identity(n, n) * std::pow(u(std::sqrt(r2)), p);
  };
  a.derivative = [n, p, u = profile.u, du = profile.du](std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    const double r = std::sqrt(r2);
    const double uv = u(r);
    const double radial = r > 0.0 ? p * std::pow(uv, p - 1.0) * du(r) / r : 0.0;
    MatGrad d;
    for (int k = 0; k < n; ++k) d[k] = Mat::Identity(n, n) * (radial * x[k]);
    return d;
  };
  return a;
}

CorpusEntry make_euclidean(int n) {
  require(n >= 3, ErrorKind::Parameter, "euclidean: n must be >= 3");
  CorpusEntry e;
  e.name = "euclidean";
  e.n = n;
  e.parameters = {{"n", static_cast<double>(n)}};
  e.regularity = Regularity::smooth();
  e.known_mass = 0.0;
  e.mass_oracle = "flat metric: the mass integrand vanishes identically";
  e.curvature_facts = "R = 0 everywhere";
  e.curvature_oracle = "all Christoffel symbols vanish";
  e.nonsmooth_locus = "none";
  e.analytic.value = [n](std::span<const double>) -> Mat { return Mat::Identity(n, n); };
  e.analytic.derivative = [n](std::span<const double>) {
    MatGrad d;
    for (int k = 0; k < n; ++k) d[k] = Mat::Zero(n, n);
    return d;
  };
  return e;
}

std::array<double, 3> schwarzschild_cap(int n, double m, double rc) {
  const double k = 2.0 - n;
  const double u = 1.0 + 0.5 * m * std::pow(rc, k);
  const double du = 0.5 * m * k * std::pow(rc, k - 1.0);
  const double d2u = 0.5 * m * k * (k - 1.0) * std::pow(rc, k - 2.0);
  // u' = 2 b r + 4 c r^3, u'' = 2 b + 12 c r^2.
  const double c = (d2u - du / rc) / (8.0 * rc * rc);
  const double b = (du - 4.0 * c * rc * rc * rc) / (2.0 * rc);
  const double a = u - b * rc * rc - c * rc * rc * rc * rc;
  return {a, b, c};
}

CorpusEntry make_schwarzschild(int n, double m, double rc) {
  require(n >= 3, ErrorKind::Parameter, "schwarzschild: n must be >= 3");
  require(m > 0.0, ErrorKind::Parameter, "schwarzschild: mass must be positive");
  require(rc > 0.0, ErrorKind::Parameter, "schwarzschild: cap radius must be positive");
  const auto [a, b, c] = schwarzschild_cap(n, m, rc);
  // Minimum of the cap on [0, rc]: endpoints or the interior critical point.
  double umin = std::min(a, a + b * rc * rc + c * std::pow(rc, 4));
  if (c != 0.0) {
    const double t = -b / (2.0 * c);  // r^2 at the critical point
    if (t > 0.0 && t < rc * rc) umin = std::min(umin, a + b * t + c * t * t);
  }
  require(umin > 0.0, ErrorKind::Parameter,
          "schwarzschild: the interior cap is not positive for these parameters");
  const double k = 2.0 - n;
  RadialProfile prof;
  prof.u = [=](double r) {
    return r >= rc ? 1.0 + 0.5 * m * std::pow(r, k) : a + b * r * r + c * r * r * r * r;
  };
  prof.du = [=](double r) {
    return r >= rc ? 0.5 * m * k * std::pow(r, k - 1.0)
                   : 2.0 * b * r + 4.0 * c * r * r * r;
  };
  CorpusEntry e;
  e.name = "schwarzschild";
  e.n = n;
  e.parameters = {{"n", static_cast<double>(n)}, {"m", m}, {"cap_radius", rc}};
  e.regularity = Regularity::smooth();
  e.known_mass = m;
  e.mass_oracle =
      "isotropic (1 + m/(2 r^(n-2)))^(4/(n-2)) delta; for n = 3 the sphere "
      "integral at radius r equals m (1 + m/(2r))^3 and tends to m";
  e.curvature_facts = "R = 0 for r > cap_radius; C^2 quartic cap inside";
  e.curvature_oracle = "harmonic conformal factor: R = -c_n u^{-(n+2)/(n-2)} Lap u = 0";
  e.nonsmooth_locus = "C^2 junction on the sphere r = cap_radius";
  e.analytic = conformally_flat(n, prof);
  e.analytic.smooth_beyond = rc;
  return e;
}

double miao_corner_density(int n, double m) {
  const double u0 = 1.0 + 0.5 * m;
  return 2.0 * (n - 1.0) * m * std::pow(u0, -(n + 2.0) / (n - 2.0));
}

double miao_mean_curvature_jump(int n, double m) {
  const double u0 = 1.0 + 0.5 * m;
  return 2.0 * (n - 1.0) * m * std::pow(u0, -static_cast<double>(n) / (n - 2.0));
}

CorpusEntry make_miao_corner(int n, double m) {
  require(n >= 3, ErrorKind::Parameter, "miao_corner: n must be >= 3");
  require(m > 0.0, ErrorKind::Parameter, "miao_corner: mass must be positive");
  const double k = 2.0 - n;
  RadialProfile prof;
  prof.u = [=](double r) { return r <= 1.0 ? 1.0 + 0.5 * m : 1.0 + 0.5 * m * std::pow(r, k); };
  prof.du = [=](double r) { return r <= 1.0 ? 0.0 : 0.5 * m * k * std::pow(r, k - 1.0); };
  CorpusEntry e;
  e.name = "miao_corner";
  e.n = n;
  e.parameters = {{"n", static_cast<double>(n)}, {"m", m}};
  e.regularity = Regularity::rough(n);
  e.known_mass = m;
  e.mass_oracle = "exterior is isotropic Schwarzschild of mass m";
  e.curvature_facts =
      "R = 0 off the unit sphere; distributional R >= 0 with surface density "
      "2(H_- - H_+) = 2(n-1) m u0^{-n/(n-2)} against g-area, u0 = 1 + m/2";
  e.curvature_oracle =
      "<R, f dx> = 2(n-1) m u0^{-(n+2)/(n-2)} int_{S_1} f dA_flat "
      "(jump of u' across r = 1 is -m(n-2)/2)";
  e.nonsmooth_locus = "unit sphere r = 1 (Lipschitz corner)";
  e.analytic = conformally_flat(n, prof);
  e.analytic.smooth_beyond = 1.0;
  return e;
}

namespace {

double smooth_psi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double smooth_psi_derivative(double t) {
  return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0;
}

}  // namespace

double w1n_cutoff(double r) {
  const double t = (r - 0.5) / 0.5;
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double a = smooth_psi(t), b = smooth_psi(1.0 - t);
  return 1.0 - a / (a + b);
}

double w1n_cutoff_derivative(double r) {
  const double t = (r - 0.5) / 0.5;
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = smooth_psi(t), b = smooth_psi(1.0 - t);
  const double da = smooth_psi_derivative(t), db = -smooth_psi_derivative(1.0 - t);
  const double ds = (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
  return -ds / 0.5;
}

CorpusEntry make_w1n_singular(int n, double beta, double a) {
  require(n >= 3, ErrorKind::Parameter, "w1n_singular: n must be >= 3");
  require(beta > 0.0 && beta < 1.0, ErrorKind::Parameter,
          "w1n_singular: beta must lie in (0, 1)");
  // eta r^beta <= 1 on the support, so 1 + a eta r^beta >= 1 - |a| for a < 0.
  require(a > -1.0, ErrorKind::Parameter,
          "w1n_singular: 1 + a eta r^beta must stay positive (need a > -1)");
  CorpusEntry e;
  e.name = "w1n_singular";
  e.n = n;
  e.parameters = {{"n", static_cast<double>(n)}, {"beta", beta}, {"a", a}};
  e.regularity = Regularity::rough(n);
  e.known_mass = 0.0;
  e.mass_oracle = "g = delta exactly for r >= 1";
  e.curvature_facts = "R ~ r^{beta-2} near the origin, R in L^{n/2}; smooth off 0";
  e.curvature_oracle = "radial integral of r^{(beta-2) p/2 + n - 1} converges";
  e.nonsmooth_locus = "origin (not Lipschitz there)";
  e.analytic.value = [n, beta, a](std::span<const double> x) -> Mat {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    const double r = std::sqrt(r2);
    return Mat::Identity(n, n) * (1.0 + a * w1n_cutoff(r) * std::pow(r, beta));
  };
  e.analytic.derivative = [n, beta, a](std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    const double r = std::sqrt(r2);
    const double radial =
        r > 0.0 ? a * (w1n_cutoff_derivative(r) * std::pow(r, beta) +
                       w1n_cutoff(r) * beta * std::pow(r, beta - 1.0)) / r
                : 0.0;
    MatGrad d;
    for (int k = 0; k < n; ++k) d[k] = Mat::Identity(n, n) * (radial * x[k]);
    return d;
  };
  return e;
}

CorpusEntry make_conformal_tail(int n, double A) {
  require(n >= 3, ErrorKind::Parameter, "conformal_tail: n must be >= 3");
  require(A > -1.0, ErrorKind::Parameter, "conformal_tail: 1 + A must stay positive (need A > -1)");
  const double k = 2.0 - n;
  RadialProfile prof;
  prof.u = [=](double r) { return 1.0 + A * std::pow(r, k); };
  prof.du = [=](double r) { return A * k * std::pow(r, k - 1.0); };
  CorpusEntry e;
  e.name = "conformal_tail";
  e.n = n;
  e.parameters = {{"n", static_cast<double>(n)}, {"A", A}};
  e.regularity = Regularity::smooth();
  e.known_mass = 2.0 * A;
  e.mass_oracle = "u = 1 + A/r^(n-2) applied as u^(4/(n-2)) delta has ADM mass 2A";
  e.curvature_facts = "R = 0 for r > 0 (harmonic conformal factor)";
  e.curvature_oracle = "R = -c_n u^{-(n+2)/(n-2)} Lap u = 0";
  e.nonsmooth_locus = "origin (excluded: valid for r >= 1)";
  e.analytic = conformally_flat(n, prof);
  e.analytic.valid_beyond = 1.0;
  return e;
}

std::string corpus_manifest(const std::vector<CorpusEntry>& entries) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["name"] = e.name;
    j["n"] = e.n;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : e.parameters) params[k] = v;
    j["parameters"] = params;
    j["regularity"] = e.regularity.describe();
    if (e.known_mass) {
      j["known_mass"] = *e.known_mass;
      j["mass_oracle"] = e.mass_oracle;
    }
    j["curvature"] = e.curvature_facts;
    j["curvature_oracle"] = e.curvature_oracle;
    j["nonsmooth_locus"] = e.nonsmooth_locus;
    out.push_back(j);
  }
  return out.dump(2) + "\n";
}

std::vector<CorpusEntry> default_corpus() {
  return {make_euclidean(3), make_schwarzschild(3, 1.0), make_miao_corner(3, 1.0),
          make_w1n_singular(3, 0.5, 0.1)};
}

}  // namespace lowreg
