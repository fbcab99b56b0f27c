#include "lowreg/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "lowreg/error.hpp"
#include "lowreg/quadrature.hpp"
#include "lowreg/small_matrix.hpp"

namespace lowreg {

namespace {

double profile(double r2) {
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2));
}

}  // namespace

double unit_sphere_area(int n) {
  require(n >= 1, ErrorKind::Argument, "sphere dimension must be >= 1");
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

double bump_ball_integral(int n) {
  const QuadratureRule rule = gauss_legendre(16);
  const int panels = 64;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / panels;
    const double b = static_cast<double>(p + 1) / panels;
    double s = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double r = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
      s += rule.weights[q] * profile(r * r) * std::pow(r, n - 1);
    }
    total += 0.5 * (b - a) * s;
  }
  return unit_sphere_area(n) * total;
}

long DiscreteKernel::max_reach() const {
  return reach.empty() ? 0 : *std::max_element(reach.begin(), reach.end());
}

MollifierKernel::MollifierKernel(int n) : n_(n) {
  require(n >= 1 && n <= kMaxDim, ErrorKind::Argument,
          "kernel dimension out of range");
  c_ = 1.0 / bump_ball_integral(n);
}

double MollifierKernel::value(std::span<const double> x) const {
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  return c_ * profile(r2);
}

void MollifierKernel::gradient(std::span<const double> x,
                               std::span<double> out) const {
  double r2 = 0.0;
  for (double c : x) r2 += c * c;
  if (r2 >= 1.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double s = 1.0 - r2;
  const double factor = -2.0 * c_ * profile(r2) / (s * s);
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = factor * x[k];
}

double MollifierKernel::scaled_value(std::span<const double> y,
                                     double eps) const {
  double r2 = 0.0;
  for (double c : y) r2 += (c / eps) * (c / eps);
  return c_ * profile(r2) / std::pow(eps, n_);
}

const DiscreteKernel& MollifierKernel::discrete(double eps,
                                                const Point& h) const {
  require(eps > 0.0 && std::isfinite(eps), ErrorKind::Argument,
          "mollifier scale must be positive");
  require(static_cast<int>(h.size()) == n_, ErrorKind::Argument,
          "spacing dimension does not match kernel");
  const double hmax = *std::max_element(h.begin(), h.end());
  require(eps >= 2.0 * hmax * (1.0 - 1e-12), ErrorKind::Resolution,
          "kernel scale eps=" + std::to_string(eps) +
              " is below twice the grid spacing h=" + std::to_string(hmax));
  auto key = std::make_pair(eps, h);
  if (auto it = cache_.find(key); it != cache_.end()) return *it->second;

  auto dk = std::make_shared<DiscreteKernel>();
  dk->n = n_;
  dk->eps = eps;
  dk->spacing = h;
  dk->reach.resize(n_);
  for (int k = 0; k < n_; ++k) {
    dk->reach[k] = static_cast<long>(std::ceil(eps / h[k]));
  }
  double cell = 1.0;
  for (double hk : h) cell *= hk;

  const long r0 = dk->reach[0];
  const std::size_t width = static_cast<std::size_t>(2 * r0 + 1);
  std::vector<long> off(n_, 0);
  for (int k = 1; k < n_; ++k) off[k] = -dk->reach[k];
  Point y(n_), grad(n_), u(n_);
  // Unnormalized samples, row by row along axis 0.
  while (true) {
    DiscreteKernel::Row row;
    row.offset.assign(off.begin() + 1, off.end());
    row.weight.assign(width, 0.0);
    row.gradient.assign(n_, std::vector<double>(width, 0.0));
    bool any = false;
    for (long k0 = -r0; k0 <= r0; ++k0) {
      off[0] = k0;
      for (int k = 0; k < n_; ++k) {
        y[k] = static_cast<double>(off[k]) * h[k];
        u[k] = y[k] / eps;
      }
      const double w = value(u);
      if (w <= 0.0) continue;
      any = true;
      gradient(u, grad);
      const std::size_t idx = static_cast<std::size_t>(k0 + r0);
      row.weight[idx] = w * cell / std::pow(eps, n_);
      for (int k = 0; k < n_; ++k) {
        row.gradient[k][idx] = grad[k] * cell / std::pow(eps, n_ + 1);
      }
      ++dk->points;
    }
    off[0] = 0;
    if (any) dk->rows.push_back(std::move(row));
    int k = 1;
    for (; k < n_; ++k) {
      if (off[k] < dk->reach[k]) {
        ++off[k];
        break;
      }
      off[k] = -dk->reach[k];
    }
    if (k >= n_) break;
  }
  require(dk->points > 0, ErrorKind::Resolution, "kernel has no grid points");

  // Renormalize: unit mass, and -sum_y y_j d_j rho_eps(y) = 1 per axis.
  double mass = 0.0;
  std::vector<double> moment(n_, 0.0);
  for (const auto& row : dk->rows) {
    for (std::size_t i = 0; i < width; ++i) {
      mass += row.weight[i];
      for (int k = 0; k < n_; ++k) {
        const long ok = k == 0 ? static_cast<long>(i) - r0 : row.offset[k - 1];
        moment[k] -= static_cast<double>(ok) * h[k] * row.gradient[k][i];
      }
    }
  }
  dk->raw_mass = mass;
  double renorm = 0.0;
  for (auto& row : dk->rows) {
    for (std::size_t i = 0; i < width; ++i) {
      row.weight[i] /= mass;
      renorm += row.weight[i];
      for (int k = 0; k < n_; ++k) row.gradient[k][i] /= moment[k];
    }
  }
  dk->mass = renorm;
  auto [it, inserted] = cache_.emplace(std::move(key), std::move(dk));
  return *it->second;
}

}  // namespace lowreg
