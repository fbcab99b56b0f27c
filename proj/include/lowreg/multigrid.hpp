#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "lowreg/elliptic.hpp"

namespace lowreg {

/// K w = -D w - q w with homogeneous Dirichlet data on the box surface.
/// Symmetric; positive definite when q is small enough (q >= 0 is allowed).
class ScreenedOperator {
 public:
  ScreenedOperator(DivergenceOperator D, std::vector<double> q);

  const GridSpec& grid() const { return D_.grid(); }
  const DivergenceOperator& divergence() const { return D_; }
  std::span<const double> shift() const { return q_; }
  std::span<const double> diagonal() const { return diag_; }
  void apply(std::span<const double> w, std::span<double> out) const;

 private:
  DivergenceOperator D_;
  std::vector<double> q_;
  std::vector<double> diag_;
};

/// Geometric V-cycle for a ScreenedOperator on a cell-centered grid:
/// damped Jacobi smoothing, trilinear prolongation with Dirichlet ghosts,
/// restriction by the scaled transpose, coarse operators rediscretized from
/// averaged coefficients, and a sparse Cholesky solve on the coarsest grid.
/// Each application is a fixed symmetric linear map.
class Multigrid {
 public:
  explicit Multigrid(const ScreenedOperator& fine, int sweeps = 2, double omega = 0.8);
  ~Multigrid();
  Multigrid(Multigrid&&) noexcept;
  Multigrid& operator=(Multigrid&&) noexcept;

  std::size_t levels() const;
  /// z = B r with B an approximation of K^{-1}.
  void apply(std::span<const double> r, std::span<double> z) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

enum class Preconditioner { Multigrid, Jacobi };

struct CgOptions {
  double tol = 1e-9;
  int max_iter = 0;  // 0: 10 N^2 with N the largest axis count
  Preconditioner preconditioner = Preconditioner::Multigrid;
  /// Residual measure compared against tol; defaults to ||r|| / ||b||.
  std::function<double(std::span<const double> r)> measure;
};

struct CgResult {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Preconditioned conjugate gradients for K x = b starting from x.
CgResult solve_spd(const ScreenedOperator& K, std::span<const double> b,
                   std::span<double> x, const CgOptions& options);

}  // namespace lowreg
