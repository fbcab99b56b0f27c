#pragma once

#include <span>
#include <vector>

#include "lowreg/field.hpp"

namespace lowreg {

/// How values beyond the grid faces are supplied to the stencil.
enum class GhostRule {
  /// Quadratic extrapolation from the three nearest nodes (exact for
  /// quadratics); used when applying the operator to a given field.
  Extrapolate,
  /// Homogeneous Dirichlet data on the box surface: face ghosts mirror the
  /// node with opposite sign, diagonal ghosts are zero. Keeps the operator
  /// symmetric; used by the solver.
  DirichletZero,
};

/// Divergence-form operator D w = d_i(A^{ij} d_j w) with A = sqrt(det g) g^{ij},
/// face-averaged A on the axis terms and nodal central differences on the
/// mixed terms. The Laplace-Beltrami operator is D / sqrt(det g); D is
/// symmetric in the plain inner product away from the boundary and
/// everywhere under GhostRule::DirichletZero.
class DivergenceOperator {
 public:
  explicit DivergenceOperator(const MetricField& g);
  /// Operator from precomputed coefficients (used for coarse levels).
  DivergenceOperator(GridSpec grid, std::vector<std::vector<double>> coeff,
                     std::vector<double> density, bool diagonal);

  const GridSpec& grid() const { return grid_; }
  bool diagonal() const { return diagonal_; }
  /// sqrt(det g) per node.
  std::span<const double> density() const { return density_; }
  /// Packed A^{ij}; off-diagonal arrays are empty when diagonal().
  const std::vector<std::vector<double>>& coefficients() const { return coeff_; }

  void apply(std::span<const double> w, std::span<double> out, GhostRule rule) const;
  /// Diagonal entries of D under GhostRule::DirichletZero.
  std::vector<double> dirichlet_diagonal() const;

 private:
  GridSpec grid_;
  std::vector<std::vector<double>> coeff_;
  std::vector<double> density_;
  bool diagonal_ = true;
};

/// (1 / sqrt(det g)) d_i(sqrt(det g) g^{ij} d_j u) at every node, with
/// quadratic extrapolation beyond the faces.
ScalarField laplace_beltrami_apply(const MetricField& g, const ScalarField& u);

}  // namespace lowreg
