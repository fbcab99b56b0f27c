#include "lowreg/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "lowreg/error.hpp"

namespace lowreg {

QuadratureRule gauss_symmetric_jacobi(int points, double alpha) {
  require(points >= 1, ErrorKind::Argument, "quadrature needs >= 1 point");
  require(alpha > -1.0, ErrorKind::Argument, "Jacobi exponent must exceed -1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double kk = k;
    const double s = 2.0 * kk + 2.0 * alpha;
    const double b = kk * (kk + 2.0 * alpha) / (s * s - 1.0);
    J(k, k - 1) = J(k - 1, k) = std::sqrt(b);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::sqrt(M_PI) * std::tgamma(alpha + 1.0) /
                     std::tgamma(alpha + 1.5);
  QuadratureRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  for (int i = 0; i < points; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v * v;
  }
  return rule;
}

}  // namespace lowreg
