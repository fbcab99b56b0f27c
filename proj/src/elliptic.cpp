#include "lowreg/elliptic.hpp"

#include <cmath>

#include "lowreg/error.hpp"

namespace lowreg {

DivergenceOperator::DivergenceOperator(const MetricField& g)
    : grid_(g.grid()), diagonal_(g.is_diagonal()) {
  const int n = g.dim();
  const std::size_t size = g.size();
  coeff_.assign(packed_size(n), {});
  density_.resize(size);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (i == j || !diagonal_) coeff_[sym_index(i, j, n)].resize(size);
    }
  }
  if (diagonal_) {
    for (std::size_t node = 0; node < size; ++node) {
      double det = 1.0;
      for (int i = 0; i < n; ++i) det *= g.components().component(i, i)[node];
      if (!(det > 0.0)) {
        fail(ErrorKind::Degeneracy,
             "divergence operator: degenerate metric at node " + std::to_string(node));
      }
      const double s = std::sqrt(det);
      density_[node] = s;
      for (int i = 0; i < n; ++i) {
        coeff_[sym_index(i, i, n)][node] = s / g.components().component(i, i)[node];
      }
    }
    return;
  }
  for (std::size_t node = 0; node < size; ++node) {
    const Mat m = g.at(node);
    const double det = determinant(m);
    if (!(det > 0.0)) {
      fail(ErrorKind::Degeneracy,
           "divergence operator: degenerate metric at node " + std::to_string(node));
    }
    const double s = std::sqrt(det);
    const Mat inv = cofactor_inverse(m);
    density_[node] = s;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) coeff_[sym_index(i, j, n)][node] = s * inv(i, j);
    }
  }
}

DivergenceOperator::DivergenceOperator(GridSpec grid,
                                       std::vector<std::vector<double>> coeff,
                                       std::vector<double> density, bool diagonal)
    : grid_(std::move(grid)),
      coeff_(std::move(coeff)),
      density_(std::move(density)),
      diagonal_(diagonal) {}

namespace {

// Value of w at a multi-index that may lie one layer outside the grid,
// extrapolating quadratically along each offending axis.
double extrapolated(const GridSpec& grid, std::span<const double> w,
                    std::vector<long>& idx, int axis_from) {
  const int n = grid.dim();
  for (int a = axis_from; a < n; ++a) {
    const long N = static_cast<long>(grid.count(a));
    if (idx[a] < 0 || idx[a] >= N) {
      const long saved = idx[a];
      const long step = saved < 0 ? 1 : -1;
      const long base = saved < 0 ? 0 : N - 1;
      double v[3];
      for (int t = 0; t < 3; ++t) {
        idx[a] = base + step * t;
        v[t] = extrapolated(grid, w, idx, a + 1);
      }
      idx[a] = saved;
      return 3.0 * v[0] - 3.0 * v[1] + v[2];
    }
  }
  std::size_t node = 0;
  for (int a = 0; a < n; ++a) node += static_cast<std::size_t>(idx[a]) * grid.stride(a);
  return w[node];
}

}  // namespace

void DivergenceOperator::apply(std::span<const double> w, std::span<double> out,
                               GhostRule rule) const {
  const int n = grid_.dim();
  require(w.size() == grid_.size() && out.size() == grid_.size(),
          ErrorKind::Argument, "operator applied to a field on another grid");
  std::vector<std::size_t> idx(n, 0);
  std::vector<long> probe(n);
  std::vector<double> inv_h2(n);
  for (int i = 0; i < n; ++i) inv_h2[i] = 1.0 / (grid_.spacing()[i] * grid_.spacing()[i]);

  // Mixed-term neighbour offsets per ordered axis pair (i, j), i != j.
  std::vector<std::size_t> pair_i, pair_j;
  if (!diagonal_) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        pair_i.push_back(static_cast<std::size_t>(i));
        pair_j.push_back(static_cast<std::size_t>(j));
      }
    }
  }
  for (std::size_t node = 0; node < grid_.size(); ++node) {
    bool interior = true;
    for (int a = 0; a < n; ++a) {
      if (idx[a] == 0 || idx[a] + 1 >= grid_.count(a)) {
        interior = false;
        break;
      }
    }
    if (interior) {
      const double w0 = w[node];
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto& A = coeff_[sym_index(i, i, n)];
        const std::size_t s = grid_.stride(i);
        acc += (0.5 * (A[node] + A[node + s]) * (w[node + s] - w0) -
                0.5 * (A[node] + A[node - s]) * (w0 - w[node - s])) * inv_h2[i];
      }
      for (std::size_t c = 0; c < pair_i.size(); ++c) {
        const int i = static_cast<int>(pair_i[c]), j = static_cast<int>(pair_j[c]);
        const auto& A = coeff_[sym_index(i, j, n)];
        const std::size_t si = grid_.stride(i), sj = grid_.stride(j);
        const double up = A[node + si] * (w[node + si + sj] - w[node + si - sj]);
        const double down = A[node - si] * (w[node - si + sj] - w[node - si - sj]);
        acc += (up - down) * 0.25 / (grid_.spacing()[i] * grid_.spacing()[j]);
      }
      out[node] = acc;
      for (int a = 0; a < n; ++a) {
        if (++idx[a] < grid_.count(a)) break;
        idx[a] = 0;
      }
      continue;
    }
    const double w0 = w[node];
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto& A = coeff_[sym_index(i, i, n)];
      const std::size_t s = grid_.stride(i);
      const std::size_t N = grid_.count(i);
      const std::size_t k = idx[i];
      double flux = 0.0;
      if (k + 1 < N) {
        flux += 0.5 * (A[node] + A[node + s]) * (w[node + s] - w0);
      } else {
        if (rule == GhostRule::DirichletZero) {
          flux -= 2.0 * A[node] * w0;
        } else {
          const double ghost = 3.0 * w0 - 3.0 * w[node - s] + w[node - 2 * s];
          flux += 0.5 * (4.0 * A[node] - 3.0 * A[node - s] + A[node - 2 * s]) * (ghost - w0);
        }
      }
      if (k > 0) {
        flux -= 0.5 * (A[node] + A[node - s]) * (w0 - w[node - s]);
      } else {
        if (rule == GhostRule::DirichletZero) {
          flux -= 2.0 * A[node] * w0;
        } else {
          const double ghost = 3.0 * w0 - 3.0 * w[node + s] + w[node + 2 * s];
          flux -= 0.5 * (4.0 * A[node] - 3.0 * A[node + s] + A[node + 2 * s]) * (w0 - ghost);
        }
      }
      acc += flux * inv_h2[i];
    }
    if (!diagonal_) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          const auto& A = coeff_[sym_index(i, j, n)];
          const double scale = 0.25 / (grid_.spacing()[i] * grid_.spacing()[j]);
          double term = 0.0;
          for (int si : {1, -1}) {
            // Coefficient at node + si e_i: the node value under Dirichlet
            // data, quadratic extrapolation otherwise.
            const long ci = static_cast<long>(idx[i]) + si;
            const bool ci_in = ci >= 0 && ci < static_cast<long>(grid_.count(i));
            const std::size_t st = grid_.stride(i);
            double a;
            if (ci_in) {
              a = A[si > 0 ? node + st : node - st];
            } else if (rule == GhostRule::DirichletZero) {
              a = A[node];
            } else {
              const std::size_t n1 = si > 0 ? node - st : node + st;
              const std::size_t n2 = si > 0 ? node - 2 * st : node + 2 * st;
              a = 3.0 * A[node] - 3.0 * A[n1] + A[n2];
            }
            double diff = 0.0;
            for (int sj : {1, -1}) {
              for (int a2 = 0; a2 < n; ++a2) probe[a2] = static_cast<long>(idx[a2]);
              probe[i] += si;
              probe[j] += sj;
              const bool inside =
                  probe[i] >= 0 && probe[i] < static_cast<long>(grid_.count(i)) &&
                  probe[j] >= 0 && probe[j] < static_cast<long>(grid_.count(j));
              double v;
              if (inside) {
                std::size_t q = 0;
                for (int a2 = 0; a2 < n; ++a2) q += static_cast<std::size_t>(probe[a2]) * grid_.stride(a2);
                v = w[q];
              } else if (rule == GhostRule::DirichletZero) {
                v = 0.0;
              } else {
                v = extrapolated(grid_, w, probe, 0);
              }
              diff += sj * v;
            }
            term += si * a * diff;
          }
          acc += term * scale;
        }
      }
    }
    out[node] = acc;
    for (int a = 0; a < n; ++a) {
      if (++idx[a] < grid_.count(a)) break;
      idx[a] = 0;
    }
  }
}

std::vector<double> DivergenceOperator::dirichlet_diagonal() const {
  const int n = grid_.dim();
  std::vector<double> d(grid_.size(), 0.0);
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t node = 0; node < grid_.size(); ++node) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto& A = coeff_[sym_index(i, i, n)];
      const std::size_t s = grid_.stride(i);
      const double h2 = grid_.spacing()[i] * grid_.spacing()[i];
      const std::size_t k = idx[i];
      const double up = k + 1 < grid_.count(i) ? 0.5 * (A[node] + A[node + s]) : 2.0 * A[node];
      const double down = k > 0 ? 0.5 * (A[node] + A[node - s]) : 2.0 * A[node];
      acc -= (up + down) / h2;
    }
    d[node] = acc;
    for (int a = 0; a < n; ++a) {
      if (++idx[a] < grid_.count(a)) break;
      idx[a] = 0;
    }
  }
  return d;
}

ScalarField laplace_beltrami_apply(const MetricField& g, const ScalarField& u) {
  require(g.grid().same_as(u.grid()), ErrorKind::Argument,
          "metric and function live on different grids");
  for (int k = 0; k < g.dim(); ++k) {
    require(g.grid().count(k) >= 3, ErrorKind::Argument,
            "Laplace-Beltrami needs >= 3 nodes per axis");
  }
  const DivergenceOperator D(g);
  std::vector<double> out(g.size());
  D.apply(u.values(), out, GhostRule::Extrapolate);
  for (std::size_t node = 0; node < out.size(); ++node) out[node] /= D.density()[node];
  return ScalarField(g.grid(), std::move(out));
}

}  // namespace lowreg
