#pragma once

#include <vector>

namespace lowreg {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Jacobi rule on [-1, 1] for the symmetric weight (1 - t^2)^alpha,
/// computed by Golub-Welsch. alpha = 0 gives Gauss-Legendre. Exact for
/// polynomials of degree <= 2 points - 1.
QuadratureRule gauss_symmetric_jacobi(int points, double alpha);

inline QuadratureRule gauss_legendre(int points) {
  return gauss_symmetric_jacobi(points, 0.0);
}

}  // namespace lowreg
