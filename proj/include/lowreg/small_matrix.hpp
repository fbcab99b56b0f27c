#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>

namespace lowreg {

/// Largest dimension supported for metric tensors.
inline constexpr int kMaxDim = 4;

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim,
                          kMaxDim>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
/// d[k] = derivative of a matrix field along axis k.
using MatGrad = std::array<Mat, kMaxDim>;

inline constexpr std::size_t packed_size(int n) {
  return static_cast<std::size_t>(n) * (n + 1) / 2;
}

/// Packed upper-triangular index of (i, j), symmetric in its arguments.
inline std::size_t sym_index(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  return static_cast<std::size_t>(i) * n - static_cast<std::size_t>(i) * (i - 1) / 2 +
         static_cast<std::size_t>(j - i);
}

/// Determinant by cofactor expansion (n <= 4).
double determinant(const Mat& a);

/// Inverse through the adjugate, A^{-1} = C(A)^T / det A.
Mat cofactor_inverse(const Mat& a);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Mat& a);

}  // namespace lowreg
