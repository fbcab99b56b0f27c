#include "lowreg/small_matrix.hpp"

#include <Eigen/Eigenvalues>

namespace lowreg {
namespace {

Mat minor_of(const Mat& a, int row, int col) {
  const int n = static_cast<int>(a.rows());
  Mat m(n - 1, n - 1);
  for (int i = 0, r = 0; i < n; ++i) {
    if (i == row) continue;
    for (int j = 0, c = 0; j < n; ++j) {
      if (j == col) continue;
      m(r, c++) = a(i, j);
    }
    ++r;
  }
  return m;
}

}  // namespace

double determinant(const Mat& a) {
  switch (a.rows()) {
    case 1:
      return a(0, 0);
    case 2:
      return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    case 3:
      return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
             a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
             a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    default: {
      double det = 0.0;
      for (int j = 0; j < a.cols(); ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        det += sign * a(0, j) * determinant(minor_of(a, 0, j));
      }
      return det;
    }
  }
}

Mat cofactor_inverse(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  Mat inv(n, n);
  if (n == 1) {
    inv(0, 0) = 1.0 / a(0, 0);
    return inv;
  }
  if (n == 3) {
    // Written out so the hot curvature loops avoid the generic recursion.
    const double c00 = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    const double c01 = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
    const double c02 = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
    const double det = a(0, 0) * c00 + a(0, 1) * c01 + a(0, 2) * c02;
    const double s = 1.0 / det;
    inv(0, 0) = c00 * s;
    inv(1, 0) = c01 * s;
    inv(2, 0) = c02 * s;
    inv(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) * s;
    inv(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) * s;
    inv(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) * s;
    inv(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) * s;
    inv(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) * s;
    inv(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) * s;
    return inv;
  }
  const double det = determinant(a);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      inv(j, i) = sign * determinant(minor_of(a, i, j)) / det;
    }
  }
  return inv;
}

double min_eigenvalue(const Mat& a) {
  if (a.rows() == 1) return a(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace lowreg
