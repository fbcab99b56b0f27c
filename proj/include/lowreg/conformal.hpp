#pragma once

#include <span>
#include <vector>

#include "lowreg/asymptotics.hpp"
#include "lowreg/corpus.hpp"
#include "lowreg/field.hpp"
#include "lowreg/kernel.hpp"
#include "lowreg/multigrid.hpp"

namespace lowreg {

struct ConformalOptions {
  /// Stop when max |c_n Lap u + R_- u| / max R_- <= tol.
  double tol = 1e-9;
  int max_iter = 0;  // 0: 10 N^2
  Preconditioner preconditioner = Preconditioner::Multigrid;
  /// Far-field fit window: radii in the outer `shell_fraction` of the box,
  /// excluding `boundary_layers` node layers next to the faces.
  double shell_fraction = 0.2;
  int boundary_layers = 2;
  /// Run extract_A after the solve.
  bool estimate_A = true;
};

struct ConformalSolution {
  ScalarField u;
  double residual = 0.0;
  double A_farfield = 0.0;
  double A_integral = 0.0;
  double fit_residual = 0.0;  // RMS misfit of the far-field fit / max |u - 1| on the window
  double c_n = 0.0;
  int iterations = 0;
  double u_min = 1.0;
  double u_max = 1.0;
  bool max_principle = true;  // 0 < u <= 1 + 1e-10 at every node
};

/// Solves c_n Lap_{g_eps} u + R_- u = 0 with u = 1 on the box surface, by
/// conjugate gradients on the symmetric form -D w - q w = q, u = 1 + w,
/// q = sqrt(det g) R_- / c_n. Convergence error when the iteration cap is
/// reached or the operator is not positive; maximum-principle error when
/// u <= 0 somewhere. The upper bound u <= 1 is reported, not enforced.
ConformalSolution solve_conformal_factor(const MetricField& g_eps, const ScalarField& r_neg,
                                         const ConformalOptions& options = {});

struct AEstimates {
  double A_farfield = 0.0;
  double A_integral = 0.0;
  double fit_residual = 0.0;
  std::size_t window_nodes = 0;
};

/// A_farfield: least-squares coefficient of u - 1 against the discrete
/// Green profile psi (-D psi = s, psi = 0 on the box, s a bump at the
/// centre with flat mass (n-2) omega, so psi ~ |x|^{2-n} far out) over the
/// spherical shell r in [(1 - shell_fraction) L, L - boundary_layers h].
/// A_integral: (int |grad u|^2 - R_- u^2 / c_n dmu) / ((2-n) omega).
/// Domain error when the window is thinner than 3 nodes.
AEstimates extract_A(const ScalarField& u, const MetricField& g_eps, const ScalarField& r_neg,
                     const ConformalOptions& options = {});

/// u^{4/(n-2)} g node-wise. When g carries a closed form, the tail
/// (1 + A_farfield |x|^{2-n})^{4/(n-2)} g is attached, valid outside the box.
MetricField conformal_metric(const MetricField& g_eps, const ConformalSolution& sol);

struct UNorms {
  double u_minus_one = 0.0;  // ||u - 1||_{L^{n*}(g_eps)}
  double grad_u = 0.0;       // ||grad u||_{L^2(g_eps)}
};

UNorms u_norms(const ScalarField& u, const MetricField& g_eps);

struct UConvergenceTable {
  std::vector<UNorms> rows;
  bool decreasing = false;  // both sequences strictly decreasing, or both identically zero
};

UConvergenceTable u_convergence_norms(std::span<const UNorms> per_scale);

struct SolveGridData {
  MetricField g;
  ScalarField r_neg;
};

/// Carries g_eps and R_- from a fine grid to a coarser, wider solve grid
/// whose spacing is an integer multiple of the fine one and whose cell faces
/// align with the fine box. Coarse cells inside the fine box take the cell
/// average of g_eps and of sqrt(det g) R_- (so int R_- dmu is kept); cells
/// outside sample the closed form of g_eps and carry R_- = 0. Domain error
/// when R_- is nonzero on the outermost fine layer, Contract error when the
/// grids do not nest or g_eps has no closed form.
SolveGridData transfer_to_solve_grid(const MetricField& g_eps, const ScalarField& r_neg,
                                     const GridSpec& solve_grid);

struct MassChainConfig {
  CorpusEntry entry;
  Box K;
  std::vector<double> eps;
  /// Mollification grid: spacing h_over_eps * eps over the smallest cube
  /// holding K grown by 2 eps + 3h. The conformal solve runs on the cube of
  /// `half_width` with spacing the multiple of h nearest `solve_spacing`.
  double h_over_eps = 0.25;
  double half_width = 3.0;
  double solve_spacing = 0.05;
  AsymptoticModel model;
  ConformalOptions solver;
  /// Existence check before each solve: C(g_eps) is estimated by the largest
  /// Sobolev quotient over a bump battery centred in the cube of half-width
  /// `battery_region`; the solve is refused when the product exceeds 1.
  int battery_count = 10;
  double battery_region = 0.6;
  double battery_rmin = 0.2;
  double battery_rmax = 0.5;
  unsigned long long battery_seed = 5;
};

struct MassChainRow {
  double eps = 0.0;
  double h = 0.0;
  double h_solve = 0.0;
  double fine_half_width = 0.0;
  double m_geps = 0.0;
  double A_farfield = 0.0;
  double A_integral = 0.0;
  double m_tilde_formula = 0.0;  // m(g_eps) + 2 A_integral
  double m_tilde_direct = 0.0;   // adm_mass of the conformal tail
  double residual = 0.0;
  int iterations = 0;
  double u_min = 1.0;
  double u_max = 1.0;
  bool max_principle = true;
  double negative_part = 0.0;  // ||R_-||_{L^{n/2}(K_eps, g_eps)}
  double sobolev_estimate = 0.0;
  double existence_product = 0.0;
  UNorms norms;
};

/// Full pipeline per scale: sample, localize and mollify, R_-, transfer to
/// the solve grid, solve, extract A, ADM masses of g_eps and of the
/// conformal metric. u norms are taken on the solve grid.
std::vector<MassChainRow> mass_chain(const MassChainConfig& config,
                                     const MollifierKernel& kernel);

}  // namespace lowreg
