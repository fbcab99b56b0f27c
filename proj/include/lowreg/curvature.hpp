#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lowreg/field.hpp"
#include "lowreg/kernel.hpp"
#include "lowreg/norms.hpp"
#include "lowreg/rate_fit.hpp"

namespace lowreg {

/// Metric data at one node: g, g^{-1}, first derivatives of both, and the
/// Christoffel symbols gamma[k](i, j) = Gamma^k_ij.
struct PointGeometry {
  int n = 0;
  Mat g;
  Mat ginv;
  MatGrad dg;
  MatGrad dginv;
  MatGrad gamma;
};

/// Geometry at `node` with first derivatives of g from finite differences
/// on the grid, or from the closed form when `source` is Analytic.
PointGeometry point_geometry(const MetricField& g, std::size_t node,
                             DerivativeSource source = DerivativeSource::FiniteDifference);
/// Geometry from explicit g and dg (e.g. evaluated off the grid).
PointGeometry point_geometry(const Mat& g, const MatGrad& dg);

/// Flux part V^k = g^{ij} Gamma^k_ij - g^{ik} Gamma^j_ij.
Vec flux_part(const PointGeometry& p);
/// Quadratic part
///   F = -(d_m g^{ij}) Gamma^m_ij + (d_j g^{ij}) Gamma^m_im
///       + g^{ij} Gamma^m_ij Gamma^k_km - g^{ij} Gamma^m_ik Gamma^k_jm.
double quadratic_part(const PointGeometry& p);
/// The same quantity assembled with the dummy indices renamed and the
/// contractions taken in a different order.
double quadratic_part_relabelled(const PointGeometry& p);

/// Gamma^k_ij at every node, packed as [node][k * packed + sym_index(i, j)].
class ChristoffelField {
 public:
  ChristoffelField(GridSpec grid, std::vector<double> data);
  const GridSpec& grid() const { return grid_; }
  double operator()(std::size_t node, int k, int i, int j) const;

 private:
  GridSpec grid_;
  std::vector<double> data_;
};

ChristoffelField christoffel(const MetricField& g,
                             DerivativeSource source = DerivativeSource::FiniteDifference);

struct CurvatureDecomposition {
  std::vector<ScalarField> V;
  ScalarField F;
  std::optional<ScalarField> scalar;  // div V + F, smooth metrics only
};

/// V and F at every node (or only at `nodes`, zero elsewhere).
CurvatureDecomposition scalar_v_f(
    const MetricField& g, std::span<const std::size_t> nodes = {},
    DerivativeSource source = DerivativeSource::FiniteDifference);

/// R = div V + F with central differences on V. Contract error for rough
/// metrics (use pair_distributional_scalar instead). With `region`, only
/// nodes inside it are evaluated and the rest are zero.
ScalarField scalar_pointwise(const MetricField& g, std::optional<Box> region = std::nullopt);

/// Density coefficient f of a test density f dx, supported away from the
/// grid boundary.
class DensityTest {
 public:
  DensityTest(ScalarField f, bool nonnegative);
  const ScalarField& f() const { return f_; }
  bool nonnegative() const { return nonnegative_; }

 private:
  ScalarField f_;
  bool nonnegative_;
};

/// <R, mu> = int -V^k d_k f + F f dx by the midpoint rule, with d_k f by
/// central differences.
double pair_distributional_scalar(const MetricField& g, const DensityTest& mu);

/// max(-R, 0) node-wise.
ScalarField negative_part(const ScalarField& R);

/// ||R[g_eps]_-||_{L^{p/2}(region)} measured with `reference`.
double negative_part_norm(const MetricField& g_eps, double p,
                          std::optional<Box> region,
                          const MetricField* reference);

/// R[g] * rho_eps = V^k * d_k rho_eps + F * rho_eps. V and F are computed
/// on an extended grid sampled from the closed form of g, so only first
/// derivatives of g are ever taken. With `region`, only nodes inside it are
/// evaluated and the rest are zero.
ScalarField mollified_scalar(const MetricField& g, const MollifierKernel& kernel,
                             double eps, std::optional<Box> region = std::nullopt);

/// ||R[g] * rho_eps - R[g * rho_eps]||_{L^{p/2}(K)} for one eps.
double scalar_commutator_at(const MetricField& g, const MollifierKernel& kernel,
                            double eps, double p, const Box& K);

struct ScalarCommutatorTable {
  std::vector<double> eps;
  std::vector<double> norms;
  bool decreasing = false;
  RateFit fit;
};

ScalarCommutatorTable scalar_commutator_norm(const MetricField& g,
                                             const MollifierKernel& kernel,
                                             std::span<const double> eps_list,
                                             double p, const Box& K);

/// R[u^{4/(n-2)} g] = u^{-(n+2)/(n-2)} (-c_n Lap_g u + R[g] u).
ScalarField conformal_scalar(const MetricField& g, const ScalarField& u);

/// c_n = 4(n-1)/(n-2).
double conformal_constant(int n);

}  // namespace lowreg
