#include "lowreg/norms.hpp"

#include <cmath>
#include <limits>

#include "lowreg/error.hpp"

namespace lowreg {

double conjugate_exponent(double p) {
  require(p >= 1.0, ErrorKind::Argument, "exponent must be >= 1");
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

double product_exponent(double p, double q) {
  require(p >= 1.0 && q >= 1.0, ErrorKind::Argument, "exponents must be >= 1");
  return 1.0 / (1.0 / p + 1.0 / q);
}

double sobolev_exponent(int n) {
  require(n >= 3, ErrorKind::Argument, "Sobolev exponent needs n >= 3");
  return 2.0 * n / (n - 2.0);
}

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    comp_ += (sum_ - t) + v;
  } else {
    comp_ += (v - t) + sum_;
  }
  sum_ = t;
}

namespace {

std::vector<std::size_t> region_nodes(const GridSpec& grid,
                                      const std::optional<Box>& region) {
  if (!region) {
    std::vector<std::size_t> all(grid.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  const Box box = grid.box();
  const double tol = 1e-9 * grid.spacing()[0];
  require(box.grown(tol).contains(*region), ErrorKind::Domain,
          "norm region extends outside the grid");
  return nodes_in(grid, *region);
}

double measure_weight(const NormSpec& spec, std::size_t node) {
  if (!spec.reference) return 1.0;
  return std::sqrt(determinant(spec.reference->at(node)));
}

}  // namespace

double lp_norm(const GridSpec& grid, std::span<const double> values,
               const NormSpec& spec) {
  require(spec.p >= 1.0 && std::isfinite(spec.p), ErrorKind::Argument,
          "norm exponent must lie in [1, inf)");
  require(values.size() == grid.size(), ErrorKind::Argument,
          "values do not match grid");
  if (spec.reference) {
    require(spec.reference->grid().same_as(grid), ErrorKind::Argument,
            "reference metric lives on a different grid");
  }
  const auto nodes = region_nodes(grid, spec.region);
  CompensatedSum sum;
  for (std::size_t node : nodes) {
    const double v = values[node];
    if (!std::isfinite(v)) {
      fail(ErrorKind::Data, "non-finite value at node " + std::to_string(node));
    }
    if (v == 0.0) continue;
    sum.add(std::pow(std::abs(v), spec.p) * measure_weight(spec, node));
  }
  return std::pow(sum.value() * grid.cell_volume(), 1.0 / spec.p);
}

double lp_norm(const ScalarField& f, const NormSpec& spec) {
  require(spec.order == 0, ErrorKind::Argument, "lp_norm called with order 1");
  return lp_norm(f.grid(), f.values(), spec);
}

double max_norm(const ScalarField& f, std::optional<Box> region) {
  const auto nodes = region_nodes(f.grid(), region);
  double m = 0.0;
  for (std::size_t node : nodes) m = std::max(m, std::abs(f[node]));
  return m;
}

void fd_derivative(const GridSpec& grid, std::span<const double> in, int axis,
                   std::span<double> out) {
  const std::size_t N = grid.count(axis);
  require(N >= 3, ErrorKind::Argument, "finite differences need >= 3 nodes");
  const std::size_t s = grid.stride(axis);
  const double inv2h = 1.0 / (2.0 * grid.spacing()[axis]);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const std::size_t i = (node / s) % N;
    if (i == 0) {
      out[node] = (-3.0 * in[node] + 4.0 * in[node + s] - in[node + 2 * s]) * inv2h;
    } else if (i == N - 1) {
      out[node] = (3.0 * in[node] - 4.0 * in[node - s] + in[node - 2 * s]) * inv2h;
    } else {
      out[node] = (in[node + s] - in[node - s]) * inv2h;
    }
  }
}

std::vector<ScalarField> finite_difference_gradient(const ScalarField& f,
                                                    DerivativeSource source) {
  const GridSpec& grid = f.grid();
  const int n = grid.dim();
  std::vector<std::vector<double>> d(n, std::vector<double>(grid.size()));
  if (source == DerivativeSource::Analytic && f.has_analytic() &&
      f.analytic().gradient) {
    Point x(n), gvec(n);
    for (std::size_t node = 0; node < grid.size(); ++node) {
      grid.position(node, x);
      f.analytic().gradient(x, gvec);
      for (int k = 0; k < n; ++k) d[k][node] = gvec[k];
    }
  } else {
    for (int k = 0; k < n; ++k) fd_derivative(grid, f.values(), k, d[k]);
  }
  std::vector<ScalarField> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) out.emplace_back(grid, std::move(d[k]));
  return out;
}

double w1p_norm(const ScalarField& f, const NormSpec& spec) {
  require(spec.order == 1, ErrorKind::Argument, "w1p_norm called with order 0");
  NormSpec l = spec;
  l.order = 0;
  double total = lp_norm(f.grid(), f.values(), l);
  for (const auto& dk : finite_difference_gradient(f)) {
    total += lp_norm(dk.grid(), dk.values(), l);
  }
  return total;
}

SymmetricTensorField metric_inverse(const MetricField& g) {
  SymmetricTensorField inv(g.grid());
  for (std::size_t node = 0; node < g.size(); ++node) {
    const Mat m = g.at(node);
    const double det = determinant(m);
    if (!(det > 0.0)) {
      fail(ErrorKind::Degeneracy,
           "metric_inverse: non-positive eigenvalue at node " + std::to_string(node));
    }
    inv.set(node, cofactor_inverse(m));
  }
  return inv;
}

ScalarField frobenius_difference(const SymmetricTensorField& a,
                                 const SymmetricTensorField& b) {
  require(a.grid().same_as(b.grid()), ErrorKind::Argument,
          "tensor fields on different grids");
  const int n = a.dim();
  std::vector<double> out(a.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double mult = (i == j) ? 1.0 : 2.0;
      const auto ca = a.component(i, j);
      const auto cb = b.component(i, j);
      for (std::size_t node = 0; node < out.size(); ++node) {
        const double d = ca[node] - cb[node];
        out[node] += mult * d * d;
      }
    }
  }
  for (double& v : out) v = std::sqrt(v);
  return ScalarField(a.grid(), std::move(out));
}

double tensor_difference_norm(const SymmetricTensorField& a,
                              const SymmetricTensorField& b,
                              const NormSpec& spec) {
  const ScalarField diff = frobenius_difference(a, b);
  NormSpec l = spec;
  l.order = 0;
  double total = lp_norm(diff, l);
  if (spec.order == 0) return total;
  const GridSpec& grid = a.grid();
  const int n = a.dim();
  std::vector<double> comp(grid.size()), deriv(grid.size());
  for (int k = 0; k < n; ++k) {
    std::vector<double> acc(grid.size(), 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double mult = (i == j) ? 1.0 : 2.0;
        const auto ca = a.component(i, j);
        const auto cb = b.component(i, j);
        for (std::size_t node = 0; node < comp.size(); ++node) {
          comp[node] = ca[node] - cb[node];
        }
        fd_derivative(grid, comp, k, deriv);
        for (std::size_t node = 0; node < comp.size(); ++node) {
          acc[node] += mult * deriv[node] * deriv[node];
        }
      }
    }
    for (double& v : acc) v = std::sqrt(v);
    total += lp_norm(grid, acc, l);
  }
  return total;
}

std::vector<double> volume_density(const MetricField& g) {
  std::vector<double> out(g.size());
  for (std::size_t node = 0; node < out.size(); ++node) {
    out[node] = std::sqrt(determinant(g.at(node)));
  }
  return out;
}

}  // namespace lowreg
