#include "lowreg/multigrid.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>

#include "lowreg/error.hpp"
#include "lowreg/norms.hpp"

namespace lowreg {

ScreenedOperator::ScreenedOperator(DivergenceOperator D, std::vector<double> q)
    : D_(std::move(D)), q_(std::move(q)) {
  require(q_.size() == D_.grid().size(), ErrorKind::Argument,
          "screening term does not match the grid");
  diag_ = D_.dirichlet_diagonal();
  for (std::size_t node = 0; node < diag_.size(); ++node) diag_[node] = -diag_[node] - q_[node];
}

void ScreenedOperator::apply(std::span<const double> w, std::span<double> out) const {
  D_.apply(w, out, GhostRule::DirichletZero);
  for (std::size_t node = 0; node < out.size(); ++node) out[node] = -out[node] - q_[node] * w[node];
}

namespace {

bool can_coarsen(const GridSpec& g) {
  if (!g.cell_centered()) return false;
  for (int k = 0; k < g.dim(); ++k) {
    if (g.count(k) % 2 != 0 || g.count(k) < 4) return false;
  }
  return true;
}

GridSpec coarse_grid(const GridSpec& g) {
  Point h = g.spacing();
  for (double& v : h) v *= 2.0;
  return GridSpec(g.center(), g.half_width(), h, true, true);
}

// Average of the 2^n children of each coarse cell.
std::vector<double> average_children(const GridSpec& fine, const GridSpec& coarse,
                                     std::span<const double> v) {
  const int n = fine.dim();
  std::vector<double> out(coarse.size(), 0.0);
  std::vector<std::size_t> idx(n), cidx(n);
  const double scale = 1.0 / static_cast<double>(1u << n);
  for (std::size_t node = 0; node < fine.size(); ++node) {
    fine.multi_index(node, idx);
    for (int k = 0; k < n; ++k) cidx[k] = idx[k] / 2;
    out[coarse.linear_index(cidx)] += scale * v[node];
  }
  return out;
}

ScreenedOperator coarsen(const ScreenedOperator& K) {
  const GridSpec& fine = K.grid();
  const GridSpec coarse = coarse_grid(fine);
  const DivergenceOperator& D = K.divergence();
  std::vector<std::vector<double>> coeff;
  for (const auto& c : D.coefficients()) {
    coeff.push_back(c.empty() ? std::vector<double>{} : average_children(fine, coarse, c));
  }
  auto density = average_children(fine, coarse, D.density());
  auto q = average_children(fine, coarse, K.shift());
  return ScreenedOperator(
      DivergenceOperator(coarse, std::move(coeff), std::move(density), D.diagonal()),
      std::move(q));
}

// Per-axis prolongation stencil of fine index i: coarse indices and weights,
// with Dirichlet ghosts folded in as negative weights on the boundary cell.
struct Stencil1d {
  std::size_t index[2];
  double weight[2];
};

Stencil1d stencil_1d(std::size_t i, std::size_t coarse_count) {
  const std::size_t I = i / 2;
  Stencil1d s{{I, I}, {0.75, 0.0}};
  if (i % 2 == 0) {
    if (I == 0) {
      s.weight[0] = 0.75 - 0.25;
    } else {
      s.index[1] = I - 1;
      s.weight[1] = 0.25;
    }
  } else {
    if (I + 1 == coarse_count) {
      s.weight[0] = 0.75 - 0.25;
    } else {
      s.index[1] = I + 1;
      s.weight[1] = 0.25;
    }
  }
  return s;
}

// out_fine += P c (prolong), or out_coarse += P^T f / 2^n (restrict).
void transfer(const GridSpec& fine, const GridSpec& coarse, std::span<const double> in,
              std::span<double> out, bool prolong) {
  const int n = fine.dim();
  std::vector<std::size_t> idx(n), cidx(n);
  std::vector<Stencil1d> st(n);
  const double scale = 1.0 / static_cast<double>(1u << n);
  const unsigned combos = 1u << n;
  for (std::size_t node = 0; node < fine.size(); ++node) {
    fine.multi_index(node, idx);
    for (int k = 0; k < n; ++k) st[k] = stencil_1d(idx[k], coarse.count(k));
    for (unsigned c = 0; c < combos; ++c) {
      double w = 1.0;
      for (int k = 0; k < n; ++k) {
        const int pick = (c >> k) & 1u;
        w *= st[k].weight[pick];
        cidx[k] = st[k].index[pick];
      }
      if (w == 0.0) continue;
      const std::size_t cn = coarse.linear_index(cidx);
      if (prolong) {
        out[node] += w * in[cn];
      } else {
        out[cn] += scale * w * in[node];
      }
    }
  }
}

constexpr std::size_t kDirectLimit = 40000;

}  // namespace

struct Multigrid::Impl {
  std::vector<ScreenedOperator> ops;
  int sweeps = 2;
  double omega = 0.8;
  bool direct = false;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol;
  // Work vectors per level.
  mutable std::vector<std::vector<double>> x, r, t;

  void smooth(std::size_t level, std::span<const double> b, std::span<double> xv) const {
    const auto& K = ops[level];
    auto& tmp = t[level];
    const auto d = K.diagonal();
    K.apply(xv, tmp);
    for (std::size_t i = 0; i < xv.size(); ++i) xv[i] += omega * (b[i] - tmp[i]) / d[i];
  }

  void cycle(std::size_t level, std::span<const double> b, std::span<double> xv) const {
    std::fill(xv.begin(), xv.end(), 0.0);
    if (level + 1 == ops.size()) {
      if (direct) {
        Eigen::Map<const Eigen::VectorXd> bb(b.data(), static_cast<long>(b.size()));
        Eigen::Map<Eigen::VectorXd>(xv.data(), static_cast<long>(xv.size())) = chol.solve(bb);
      } else {
        for (int s = 0; s < 40; ++s) smooth(level, b, xv);
      }
      return;
    }
    for (int s = 0; s < sweeps; ++s) smooth(level, b, xv);
    const auto& K = ops[level];
    auto& res = t[level];
    K.apply(xv, res);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] = b[i] - res[i];
    auto& rc = r[level + 1];
    std::fill(rc.begin(), rc.end(), 0.0);
    transfer(K.grid(), ops[level + 1].grid(), res, rc, false);
    auto& xc = x[level + 1];
    cycle(level + 1, rc, xc);
    transfer(K.grid(), ops[level + 1].grid(), xc, xv, true);
    for (int s = 0; s < sweeps; ++s) smooth(level, b, xv);
  }
};

Multigrid::Multigrid(const ScreenedOperator& fine, int sweeps, double omega)
    : impl_(std::make_unique<Impl>()) {
  impl_->sweeps = sweeps;
  impl_->omega = omega;
  impl_->ops.push_back(fine);
  while (can_coarsen(impl_->ops.back().grid()) && impl_->ops.back().grid().size() > 4096) {
    impl_->ops.push_back(coarsen(impl_->ops.back()));
  }
  for (const auto& K : impl_->ops) {
    impl_->x.emplace_back(K.grid().size());
    impl_->r.emplace_back(K.grid().size());
    impl_->t.emplace_back(K.grid().size());
  }
  const ScreenedOperator& coarsest = impl_->ops.back();
  const std::size_t m = coarsest.grid().size();
  if (m <= kDirectLimit) {
    // Probe with 3^n colour classes: the stencil couples nodes at most one
    // index apart per axis, so each column is recovered from one probe.
    const GridSpec& cg = coarsest.grid();
    const int n = cg.dim();
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> e(m), col(m);
    std::vector<std::size_t> idx(n), jdx(n);
    std::size_t colours = 1;
    for (int k = 0; k < n; ++k) colours *= 3;
    for (std::size_t colour = 0; colour < colours; ++colour) {
      std::vector<std::size_t> c(n);
      std::size_t rest = colour;
      for (int k = 0; k < n; ++k) {
        c[k] = rest % 3;
        rest /= 3;
      }
      for (std::size_t node = 0; node < m; ++node) {
        cg.multi_index(node, idx);
        bool hit = true;
        for (int k = 0; k < n; ++k) hit = hit && idx[k] % 3 == c[k];
        e[node] = hit ? 1.0 : 0.0;
      }
      coarsest.apply(e, col);
      for (std::size_t node = 0; node < m; ++node) {
        if (col[node] == 0.0) continue;
        cg.multi_index(node, idx);
        for (int k = 0; k < n; ++k) {
          const std::size_t r = idx[k] % 3;
          const long d = (static_cast<long>(c[k]) - static_cast<long>(r) + 4) % 3 - 1;
          jdx[k] = static_cast<std::size_t>(static_cast<long>(idx[k]) + d);
        }
        trip.emplace_back(static_cast<int>(node), static_cast<int>(cg.linear_index(jdx)),
                          col[node]);
      }
    }
    Eigen::SparseMatrix<double> A(static_cast<long>(m), static_cast<long>(m));
    A.setFromTriplets(trip.begin(), trip.end());
    impl_->chol.compute(A);
    impl_->direct = impl_->chol.info() == Eigen::Success;
  }
}

Multigrid::~Multigrid() = default;
Multigrid::Multigrid(Multigrid&&) noexcept = default;
Multigrid& Multigrid::operator=(Multigrid&&) noexcept = default;

std::size_t Multigrid::levels() const { return impl_->ops.size(); }

void Multigrid::apply(std::span<const double> r, std::span<double> z) const {
  impl_->cycle(0, r, z);
}

CgResult solve_spd(const ScreenedOperator& K, std::span<const double> b,
                   std::span<double> x, const CgOptions& options) {
  const GridSpec& grid = K.grid();
  const std::size_t m = grid.size();
  require(b.size() == m && x.size() == m, ErrorKind::Argument,
          "solver vectors do not match the grid");
  std::size_t nmax = 1;
  for (int k = 0; k < grid.dim(); ++k) nmax = std::max(nmax, grid.count(k));
  const int max_iter = options.max_iter > 0 ? options.max_iter
                                            : static_cast<int>(10 * nmax * nmax);
  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  auto measure = [&](std::span<const double> r) {
    if (options.measure) return options.measure(r);
    double s = 0.0;
    for (double v : r) s += v * v;
    return bnorm > 0.0 ? std::sqrt(s) / bnorm : std::sqrt(s);
  };

  std::unique_ptr<Multigrid> mg;
  if (options.preconditioner == Preconditioner::Multigrid) mg = std::make_unique<Multigrid>(K);
  const auto diag = K.diagonal();
  auto precondition = [&](std::span<const double> r, std::span<double> z) {
    if (mg) {
      mg->apply(r, z);
    } else {
      for (std::size_t i = 0; i < m; ++i) z[i] = r[i] / diag[i];
    }
  };

  std::vector<double> r(m), z(m), p(m), Kp(m);
  K.apply(x, Kp);
  for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - Kp[i];
  CgResult res;
  res.residual = measure(r);
  if (res.residual <= options.tol) {
    res.converged = true;
    return res;
  }
  precondition(r, z);
  p = z;
  double rz = 0.0;
  for (std::size_t i = 0; i < m; ++i) rz += r[i] * z[i];
  for (int it = 1; it <= max_iter; ++it) {
    K.apply(p, Kp);
    double pKp = 0.0;
    for (std::size_t i = 0; i < m; ++i) pKp += p[i] * Kp[i];
    if (!(pKp > 0.0)) {
      fail(ErrorKind::Convergence,
           "operator is not positive definite (existence condition violated?)");
    }
    const double alpha = rz / pKp;
    for (std::size_t i = 0; i < m; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Kp[i];
    }
    res.iterations = it;
    res.residual = measure(r);
    if (res.residual <= options.tol) {
      // Confirm with the true residual.
      K.apply(x, Kp);
      for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - Kp[i];
      res.residual = measure(r);
      if (res.residual <= options.tol) {
        res.converged = true;
        return res;
      }
    }
    precondition(r, z);
    double rz_new = 0.0;
    for (std::size_t i = 0; i < m; ++i) rz_new += r[i] * z[i];
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
  }
  return res;
}

}  // namespace lowreg
