#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lowreg/field.hpp"
#include "lowreg/kernel.hpp"
#include "lowreg/rate_fit.hpp"

namespace lowreg {

/// Inputs of a commutator experiment: a in W^{1,p}, f in L^q, decreasing
/// scales and the evaluation box K. Both fields need padding (closed form
/// or pad constant).
struct CommutatorExperiment {
  ScalarField a;
  ScalarField f;
  double p = 2.0;
  double q = 2.0;
  std::vector<double> eps;
  Box K;

  /// 1/r = 1/p + 1/q.
  double r() const;
  /// q >= p', strictly decreasing scales, min eps >= 2h, K inside the grid.
  void validate() const;
};

struct DecayTable {
  RateFit fit;
  bool decays = false;  // every successive ratio below one
};

/// eps * sum_j ||d_j (f * rho_eps)||_{L^p(K)} per scale.
DecayTable eps_derivative_decay(const ScalarField& f, double p,
                                std::span<const double> eps_list, const Box& K,
                                const MollifierKernel& kernel);

/// (a * rho_eps)(f * rho_eps) - (af) * rho_eps on the grid (zero outside
/// `region` when given).
ScalarField product_commutator(const ScalarField& a, const ScalarField& f,
                               const MollifierKernel& kernel, double eps,
                               std::optional<Box> region = std::nullopt);
/// d_axis of the product commutator, from the differentiated kernel.
ScalarField product_commutator_derivative(const ScalarField& a, const ScalarField& f,
                                          const MollifierKernel& kernel, double eps,
                                          int axis,
                                          std::optional<Box> region = std::nullopt);

struct FriedrichsTable {
  RateFit lr;    // ||C_eps||_{L^r(K)}
  RateFit w1r;   // ||C_eps||_{W^{1,r}(K)}
  bool decreasing = false;  // W^{1,r} values strictly decreasing
  bool converges = false;   // decreasing and last <= first / 4
};

FriedrichsTable friedrichs_w1r(const CommutatorExperiment& exp,
                               const MollifierKernel& kernel);

struct NetCommutatorReport {
  RateFit hypothesis;       // ||a - a_eps||_{L^p(K)}
  double c_K = 0.0;         // max over scales of ||a - a_eps|| / eps
  bool hypothesis_warning = false;  // hypothesis slope below 0.9
  RateFit commutator;       // ||a_eps (f * rho_eps) - (af) * rho_eps||_{W^{1,r}(K)}
  bool decreasing = false;
  std::vector<double> friedrichs;  // W^{1,r} norms of the plain commutator
  double tracking_gap = 0.0;       // max relative gap to the plain commutator
};

/// Commutator with a caller-supplied net a_eps (one field per scale, on the
/// grid of a) in place of a * rho_eps. Gradients of a_eps are taken by
/// finite differences.
NetCommutatorReport generalized_net_commutator(const std::vector<ScalarField>& a_net,
                                               const CommutatorExperiment& exp,
                                               const MollifierKernel& kernel);

}  // namespace lowreg
