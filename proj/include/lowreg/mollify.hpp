#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lowreg/field.hpp"
#include "lowreg/kernel.hpp"
#include "lowreg/rate_fit.hpp"

namespace lowreg {

/// Layout of a grid extended by `layers[k]` nodes on both sides of axis k.
struct PaddedLayout {
  std::vector<long> layers;
  std::vector<std::size_t> counts;
  std::vector<std::size_t> strides;
  std::size_t size = 0;

  PaddedLayout() = default;
  PaddedLayout(const GridSpec& grid, std::vector<long> layers);

  /// Padded index of a grid node.
  std::size_t index_of(const GridSpec& grid, std::size_t node) const;
};

/// Fills `out` with the k component values at an off-grid point x.
using OffGridFill =
    std::function<void(std::span<const double> x, std::span<double> out)>;

/// Copies grid values into padded arrays (one per component) and fills the
/// extra layers from `fill`.
std::vector<std::vector<double>> pad_components(
    const GridSpec& grid, const std::vector<std::span<const double>>& comps,
    const PaddedLayout& layout, const OffGridFill& fill);

/// Padded copy of a scalar field using its analytic form or pad constant
/// (domain error when neither exists).
std::vector<double> pad_scalar(const ScalarField& f, const PaddedLayout& layout);

/// Discrete convolution of padded data with rho_eps (axis < 0) or with
/// d_axis rho_eps, evaluated at `nodes` (all nodes when empty). Results are
/// written into out[node]. Uses the differenced form
///   f(x) + sum_y w(y) (f(x - y) - f(x)),
/// so constants are reproduced exactly and differentiated constants vanish.
void convolve_padded(const GridSpec& grid, const PaddedLayout& layout,
                     std::span<const double> padded, const DiscreteKernel& dk,
                     int axis, std::span<const std::size_t> nodes,
                     std::span<double> out);

/// Product commutator (a * rho_eps)(f * rho_eps) - (af) * rho_eps (axis < 0)
/// or its derivative along `axis`, from padded a and f, in the covariance
/// form -sum_y w(y) (a(x - y) - A)(f(x - y) - F) with A, F the mollified
/// values. Symmetric in (a, f) and exactly zero when either is constant.
void product_commutator_padded(const GridSpec& grid, const PaddedLayout& layout,
                               std::span<const double> pa, std::span<const double> pf,
                               const DiscreteKernel& dk, int axis,
                               std::span<const std::size_t> nodes, std::span<double> out);

/// f * rho_eps on the grid of f. Resolution error when eps < 2h; domain
/// error when f has no padding.
ScalarField convolve(const ScalarField& f, const MollifierKernel& kernel,
                     double eps);
/// f * d_axis rho_eps, i.e. d_axis (f * rho_eps).
ScalarField convolve_derivative(const ScalarField& f,
                                const MollifierKernel& kernel, double eps,
                                int axis);

/// Componentwise g * rho_eps. With `region`, only nodes inside it are
/// convolved and the rest keep g. Degeneracy error names node and eps.
MetricField mollify_metric(const MetricField& g, const MollifierKernel& kernel,
                           double eps, std::optional<Box> region = std::nullopt);

/// Localization data for g_eps: the non-smooth box K, the scale, and the
/// cutoff chi (1 on K, 0 outside the closed eps-neighbourhood of K).
struct SmoothingPlan {
  Box K;
  double eps = 0.0;
  Box K_eps;  // bounding box of the eps-neighbourhood
  ScalarField chi;

  /// chi is the indicator of the (eps/2)-neighbourhood of K mollified at
  /// scale eps/2; needs h <= eps/4 (resolution error otherwise).
  static SmoothingPlan make(const GridSpec& grid, const Box& K, double eps,
                            const MollifierKernel& kernel);

  /// Closed eps-neighbourhood membership.
  bool in_K_eps(std::span<const double> x) const;
};

/// Half-width of the smallest origin-centred cube, a multiple of `step`,
/// holding K grown by 2 eps + 3h: room for K_eps and the kernel reach
/// beyond it.
double smoothing_box_half_width(const Box& K, double eps, double h, double step);

/// g_eps = (1 - chi) g + chi (g * rho_eps); equals g bit-for-bit wherever
/// chi vanishes. The closed form of g is kept outside K_eps.
MetricField build_g_eps(const MetricField& g, const SmoothingPlan& plan,
                        const MollifierKernel& kernel);

struct EquivalenceFactor {
  double rho_eps = 1.0;
  std::size_t argmax_node = 0;
};

/// Smallest rho with g2 / rho <= g <= rho g2 at every node.
EquivalenceFactor metric_equivalence_factor(const MetricField& g,
                                            const MetricField& g2);

struct InverseRateTable {
  std::vector<double> eps;
  std::vector<double> norms;
  RateFit fit;
};

/// ||g^{-1} - (g * rho_eps)^{-1}||_{L^p(K)} per eps with a log-log fit.
InverseRateTable inverse_commutator_rate(const MetricField& g,
                                         const MollifierKernel& kernel,
                                         std::span<const double> eps_list,
                                         double p, const Box& K);

}  // namespace lowreg
