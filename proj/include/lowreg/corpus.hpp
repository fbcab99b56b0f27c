#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lowreg/field.hpp"

namespace lowreg {

/// Analytic test metric with its regularity class and documented oracles.
struct CorpusEntry {
  std::string name;
  int n = 3;
  std::vector<std::pair<std::string, double>> parameters;
  Regularity regularity;
  std::optional<double> known_mass;
  std::string mass_oracle;
  std::string curvature_facts;
  std::string curvature_oracle;
  std::string nonsmooth_locus;
  MetricAnalytic analytic;

  MetricField sample(const GridSpec& grid) const;
  double parameter(const std::string& key) const;
};

/// Radial conformal factor u(r) with its first derivative.
struct RadialProfile {
  std::function<double(double)> u;
  std::function<double(double)> du;
};

/// Closed form of g = u(|x|)^{4/(n-2)} delta and its first derivatives.
MetricAnalytic conformally_flat(int n, RadialProfile profile);

CorpusEntry make_euclidean(int n);

/// u = 1 + m / (2 r^{n-2}) for r >= cap_radius; inside, the even quartic
/// a + b r^2 + c r^4 matching u, u', u'' at cap_radius.
CorpusEntry make_schwarzschild(int n, double m, double cap_radius = 0.5);

/// Quartic cap coefficients (a, b, c) of make_schwarzschild.
std::array<double, 3> schwarzschild_cap(int n, double m, double cap_radius);

/// u = 1 + m/2 for r <= 1, u = 1 + m / (2 r^{n-2}) for r > 1.
CorpusEntry make_miao_corner(int n, double m);

/// Density of the distributional scalar curvature of the corner metric on
/// the unit sphere, against flat area: <R, f dx> = coefficient * int_{S_1} f dA.
/// Equals 2(n-1) m u0^{-(n+2)/(n-2)} with u0 = 1 + m/2; the mean-curvature
/// jump 2(H_- - H_+) = 2(n-1) m u0^{-n/(n-2)} is its density against g-area
/// after converting the density f dx to f / sqrt(det g) dmu_g.
double miao_corner_density(int n, double m);
double miao_mean_curvature_jump(int n, double m);

/// g = (1 + a eta(r) r^beta) delta with a smooth cutoff eta = 1 on r <= 1/2,
/// eta = 0 on r >= 1.
CorpusEntry make_w1n_singular(int n, double beta, double a);

/// Smooth step used by make_w1n_singular, with its derivative.
double w1n_cutoff(double r);
double w1n_cutoff_derivative(double r);

/// JSON manifest listing entries, parameters and oracles.
std::string corpus_manifest(const std::vector<CorpusEntry>& entries);

/// u^{4/(n-2)} delta with u = 1 + A |x|^{2-n}, valid for |x| >= 1; mass 2A.
CorpusEntry make_conformal_tail(int n, double A);

/// Default corpus used by `corpus` listing.
std::vector<CorpusEntry> default_corpus();

}  // namespace lowreg
