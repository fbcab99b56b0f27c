#include "lowreg/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lowreg/error.hpp"
#include "lowreg/norms.hpp"

namespace lowreg {

PaddedLayout::PaddedLayout(const GridSpec& grid, std::vector<long> l)
    : layers(std::move(l)) {
  const int n = grid.dim();
  require(static_cast<int>(layers.size()) == n, ErrorKind::Argument,
          "padding layers do not match grid dimension");
  counts.resize(n);
  strides.resize(n);
  size = 1;
  for (int k = 0; k < n; ++k) {
    counts[k] = grid.count(k) + 2 * static_cast<std::size_t>(layers[k]);
    strides[k] = size;
    size *= counts[k];
  }
}

std::size_t PaddedLayout::index_of(const GridSpec& grid,
                                   std::size_t node) const {
  std::size_t p = 0;
  for (int k = 0; k < grid.dim(); ++k) {
    const std::size_t i = (node / grid.stride(k)) % grid.count(k);
    p += (i + static_cast<std::size_t>(layers[k])) * strides[k];
  }
  return p;
}

std::vector<std::vector<double>> pad_components(
    const GridSpec& grid, const std::vector<std::span<const double>>& comps,
    const PaddedLayout& layout, const OffGridFill& fill) {
  const int n = grid.dim();
  const std::size_t nc = comps.size();
  std::vector<std::vector<double>> out(nc, std::vector<double>(layout.size));
  std::vector<long> idx(n, 0);
  Point x(n);
  std::vector<double> buf(nc);
  for (std::size_t p = 0; p < layout.size; ++p) {
    bool inside = true;
    std::size_t node = 0;
    for (int k = 0; k < n; ++k) {
      const long i = static_cast<long>((p / layout.strides[k]) % layout.counts[k]) -
                     layout.layers[k];
      idx[k] = i;
      if (i < 0 || i >= static_cast<long>(grid.count(k))) {
        inside = false;
      } else {
        node += static_cast<std::size_t>(i) * grid.stride(k);
      }
    }
    if (inside) {
      for (std::size_t c = 0; c < nc; ++c) out[c][p] = comps[c][node];
      continue;
    }
    for (int k = 0; k < n; ++k) {
      x[k] = grid.coordinate(k, 0) + static_cast<double>(idx[k]) * grid.spacing()[k];
    }
    fill(x, buf);
    for (std::size_t c = 0; c < nc; ++c) {
      if (!std::isfinite(buf[c])) {
        fail(ErrorKind::Data, "non-finite padding value");
      }
      out[c][p] = buf[c];
    }
  }
  return out;
}

std::vector<double> pad_scalar(const ScalarField& f, const PaddedLayout& layout) {
  require(f.has_padding(), ErrorKind::Domain,
          "convolution needs off-grid values: attach an analytic form or a "
          "padding constant");
  auto padded = pad_components(
      f.grid(), {f.values()}, layout,
      [&f](std::span<const double> x, std::span<double> out) {
        out[0] = f.evaluate_off_grid(x);
      });
  return std::move(padded[0]);
}

namespace {

struct PreparedRow {
  long delta;      // padded offset of (x - y) relative to x, at the first tap
  std::vector<double> taps;  // kernel values in increasing memory order
};

std::vector<PreparedRow> prepare_rows(const DiscreteKernel& dk,
                                      const PaddedLayout& layout, int axis) {
  const long r0 = dk.reach[0];
  std::vector<PreparedRow> rows;
  rows.reserve(dk.rows.size());
  for (const auto& row : dk.rows) {
    const auto& w = axis < 0 ? row.weight : row.gradient[axis];
    // Tap at memory position t (t = 0 .. 2 r0) reads f(x - y) with y_0 = r0 - t.
    long first = -1, last = -1;
    for (long t = 0; t <= 2 * r0; ++t) {
      if (w[static_cast<std::size_t>(2 * r0 - t)] != 0.0) {
        if (first < 0) first = t;
        last = t;
      }
    }
    if (first < 0) continue;
    PreparedRow pr;
    long delta = first - r0;
    for (std::size_t k = 1; k < dk.reach.size(); ++k) {
      delta -= row.offset[k - 1] * static_cast<long>(layout.strides[k]);
    }
    pr.delta = delta;
    for (long t = first; t <= last; ++t) {
      pr.taps.push_back(w[static_cast<std::size_t>(2 * r0 - t)]);
    }
    rows.push_back(std::move(pr));
  }
  return rows;
}

}  // namespace

void convolve_padded(const GridSpec& grid, const PaddedLayout& layout,
                     std::span<const double> padded, const DiscreteKernel& dk,
                     int axis, std::span<const std::size_t> nodes,
                     std::span<double> out) {
  require(layout.layers.size() == dk.reach.size(), ErrorKind::Argument,
          "kernel and padding dimensions differ");
  for (std::size_t k = 0; k < dk.reach.size(); ++k) {
    require(layout.layers[k] >= dk.reach[k], ErrorKind::Argument,
            "padding thinner than the kernel reach");
  }
  const auto rows = prepare_rows(dk, layout, axis);
  const double* P = padded.data();
  auto at = [&](std::size_t node) {
    const std::size_t pc = layout.index_of(grid, node);
    const double fx = P[pc];
    double acc = 0.0;
    for (const auto& row : rows) {
      const double* src = P + static_cast<long>(pc) + row.delta;
      const double* w = row.taps.data();
      const std::size_t m = row.taps.size();
      double s = 0.0;
      for (std::size_t t = 0; t < m; ++t) s += w[t] * (src[t] - fx);
      acc += s;
    }
    out[node] = axis < 0 ? fx + acc : acc;
  };
  if (nodes.empty()) {
    for (std::size_t node = 0; node < grid.size(); ++node) at(node);
  } else {
    for (std::size_t node : nodes) at(node);
  }
}

void product_commutator_padded(const GridSpec& grid, const PaddedLayout& layout,
                               std::span<const double> pa, std::span<const double> pf,
                               const DiscreteKernel& dk, int axis,
                               std::span<const std::size_t> nodes, std::span<double> out) {
  require(pa.size() == layout.size && pf.size() == layout.size, ErrorKind::Argument,
          "padded arrays do not match the layout");
  for (std::size_t k = 0; k < dk.reach.size(); ++k) {
    require(layout.layers[k] >= dk.reach[k], ErrorKind::Argument,
            "padding thinner than the kernel reach");
  }
  const auto mean_rows = prepare_rows(dk, layout, -1);
  const auto rows = axis < 0 ? mean_rows : prepare_rows(dk, layout, axis);
  const double* A = pa.data();
  const double* F = pf.data();
  auto at = [&](std::size_t node) {
    const std::size_t pc = layout.index_of(grid, node);
    const double a0 = A[pc], f0 = F[pc];
    double ma = 0.0, mf = 0.0;
    for (const auto& row : mean_rows) {
      const std::size_t base = static_cast<std::size_t>(static_cast<long>(pc) + row.delta);
      for (std::size_t t = 0; t < row.taps.size(); ++t) {
        ma += row.taps[t] * (A[base + t] - a0);
        mf += row.taps[t] * (F[base + t] - f0);
      }
    }
    ma += a0;
    mf += f0;
    double acc = 0.0;
    for (const auto& row : rows) {
      const std::size_t base = static_cast<std::size_t>(static_cast<long>(pc) + row.delta);
      for (std::size_t t = 0; t < row.taps.size(); ++t) {
        acc += row.taps[t] * ((A[base + t] - ma) * (F[base + t] - mf));
      }
    }
    out[node] = -acc;
  };
  if (nodes.empty()) {
    for (std::size_t node = 0; node < grid.size(); ++node) at(node);
  } else {
    for (std::size_t node : nodes) at(node);
  }
}

ScalarField convolve(const ScalarField& f, const MollifierKernel& kernel,
                     double eps) {
  const GridSpec& grid = f.grid();
  const DiscreteKernel& dk = kernel.discrete(eps, grid.spacing());
  const PaddedLayout layout(grid, dk.reach);
  const auto padded = pad_scalar(f, layout);
  std::vector<double> out(grid.size());
  convolve_padded(grid, layout, padded, dk, -1, {}, out);
  return ScalarField(grid, std::move(out));
}

ScalarField convolve_derivative(const ScalarField& f,
                                const MollifierKernel& kernel, double eps,
                                int axis) {
  const GridSpec& grid = f.grid();
  require(axis >= 0 && axis < grid.dim(), ErrorKind::Argument,
          "derivative axis out of range");
  const DiscreteKernel& dk = kernel.discrete(eps, grid.spacing());
  const PaddedLayout layout(grid, dk.reach);
  const auto padded = pad_scalar(f, layout);
  std::vector<double> out(grid.size());
  convolve_padded(grid, layout, padded, dk, axis, {}, out);
  return ScalarField(grid, std::move(out));
}

namespace {

// Convolves every metric component at `nodes`, starting from a copy of g.
SymmetricTensorField convolve_metric_components(
    const MetricField& g, const MollifierKernel& kernel, double eps,
    std::span<const std::size_t> nodes) {
  const GridSpec& grid = g.grid();
  const int n = g.dim();
  require(g.has_analytic(), ErrorKind::Domain,
          "metric mollification needs an analytic form for padding");
  const DiscreteKernel& dk = kernel.discrete(eps, grid.spacing());
  const PaddedLayout layout(grid, dk.reach);

  // Components that vanish on the grid are padded only if the closed form
  // is nonzero somewhere in the padding.
  std::vector<std::pair<int, int>> active, idle;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      (g.components().component_is_zero(i, j) ? idle : active).emplace_back(i, j);
    }
  }
  bool idle_nonzero = false;
  auto run_fill = [&](const std::vector<std::pair<int, int>>& which) {
    std::vector<std::span<const double>> comps;
    for (auto [i, j] : which) comps.push_back(g.components().component(i, j));
    return pad_components(
        grid, comps, layout,
        [&](std::span<const double> x, std::span<double> out) {
          const Mat m = g.evaluate_off_grid(x);
          for (std::size_t c = 0; c < which.size(); ++c) {
            out[c] = m(which[c].first, which[c].second);
          }
          for (auto [i, j] : idle) {
            if (m(i, j) != 0.0) idle_nonzero = true;
          }
        });
  };
  auto padded = run_fill(active);
  if (idle_nonzero) {
    active.insert(active.end(), idle.begin(), idle.end());
    idle.clear();
    padded = run_fill(active);
  }

  SymmetricTensorField out = g.components();
  for (std::size_t c = 0; c < active.size(); ++c) {
    auto [i, j] = active[c];
    convolve_padded(grid, layout, padded[c], dk, -1, nodes, out.component(i, j));
    padded[c].clear();
    padded[c].shrink_to_fit();
  }
  return out;
}

MetricField checked_metric(SymmetricTensorField comps, Regularity reg,
                           std::optional<MetricAnalytic> analytic, double eps) {
  try {
    return MetricField(std::move(comps), reg, std::move(analytic));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degeneracy) throw;
    std::ostringstream os;
    os << "mollified " << std::string(e.what()).substr(std::string("degeneracy error: ").size())
       << " at eps = " << eps;
    fail(ErrorKind::Degeneracy, os.str());
  }
}

}  // namespace

MetricField mollify_metric(const MetricField& g, const MollifierKernel& kernel,
                           double eps, std::optional<Box> region) {
  std::vector<std::size_t> nodes;
  if (region) {
    require(g.grid().box().grown(1e-9 * g.grid().spacing()[0]).contains(*region),
            ErrorKind::Domain, "mollification region extends outside the grid");
    nodes = nodes_in(g.grid(), *region);
    if (nodes.empty()) return g.with_regularity(Regularity::smooth()).with_analytic(std::nullopt);
  }
  auto comps = convolve_metric_components(g, kernel, eps, nodes);
  return checked_metric(std::move(comps), Regularity::smooth(), std::nullopt, eps);
}

SmoothingPlan SmoothingPlan::make(const GridSpec& grid, const Box& K,
                                  double eps, const MollifierKernel& kernel) {
  require(K.dim() == grid.dim(), ErrorKind::Argument,
          "smoothing box dimension mismatch");
  require(eps > 0.0, ErrorKind::Argument, "smoothing scale must be positive");
  SmoothingPlan plan;
  plan.K = K;
  plan.eps = eps;
  plan.K_eps = K.grown(eps);
  require(grid.box().contains(plan.K_eps), ErrorKind::Domain,
          "eps-neighbourhood of K extends outside the grid");
  const double half = 0.5 * eps;
  const ScalarField indicator = ScalarField::sample(
      grid, [K, half](std::span<const double> x) {
        return K.distance(x) <= half ? 1.0 : 0.0;
      });
  const ScalarField smoothed = convolve(indicator, kernel, half);
  std::vector<double> chi(smoothed.values().begin(), smoothed.values().end());
  for (double& v : chi) v = std::clamp(v, 0.0, 1.0);
  plan.chi = ScalarField(grid, std::move(chi));
  return plan;
}

bool SmoothingPlan::in_K_eps(std::span<const double> x) const {
  return K.distance(x) <= eps;
}

double smoothing_box_half_width(const Box& K, double eps, double h, double step) {
  require(eps > 0.0 && h > 0.0 && step > 0.0, ErrorKind::Argument,
          "smoothing box needs positive eps, h and step");
  double kmax = 0.0;
  for (std::size_t k = 0; k < K.lo.size(); ++k) {
    kmax = std::max({kmax, std::abs(K.lo[k]), std::abs(K.hi[k])});
  }
  return std::ceil((kmax + 2.0 * eps + 3.0 * h) / step - 1e-9) * step;
}

MetricField build_g_eps(const MetricField& g, const SmoothingPlan& plan,
                        const MollifierKernel& kernel) {
  require(plan.chi.grid().same_as(g.grid()), ErrorKind::Argument,
          "smoothing plan built for a different grid");
  std::vector<std::size_t> nodes;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (plan.chi[node] > 0.0) nodes.push_back(node);
  }
  std::optional<MetricAnalytic> tail;
  if (g.has_analytic()) {
    MetricAnalytic a = g.analytic();
    const Box K = plan.K;
    const double eps = plan.eps;
    auto inner = a.valid_at;
    const double beyond = a.valid_beyond;
    a.valid_at = [K, eps, inner, beyond](std::span<const double> x) {
      if (K.distance(x) <= eps) return false;
      if (inner) return inner(x);
      double r2 = 0.0;
      for (double c : x) r2 += c * c;
      return std::sqrt(r2) >= beyond;
    };
    a.valid_beyond = std::max(beyond, K.circumradius() + eps);
    tail = std::move(a);
  }
  if (nodes.empty()) {
    return MetricField(g.components(), Regularity::smooth(), std::move(tail));
  }
  const SymmetricTensorField conv =
      convolve_metric_components(g, kernel, plan.eps, nodes);
  SymmetricTensorField out = g.components();
  const int n = g.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const auto gc = g.components().component(i, j);
      const auto cc = conv.component(i, j);
      auto oc = out.component(i, j);
      for (std::size_t node : nodes) {
        const double chi = plan.chi[node];
        oc[node] = (1.0 - chi) * gc[node] + chi * cc[node];
      }
    }
  }
  return checked_metric(std::move(out), Regularity::smooth(), std::move(tail),
                        plan.eps);
}

EquivalenceFactor metric_equivalence_factor(const MetricField& g,
                                            const MetricField& g2) {
  require(g.grid().same_as(g2.grid()), ErrorKind::Argument,
          "equivalence factor needs metrics on the same grid");
  const int n = g.dim();
  EquivalenceFactor best;
  best.rho_eps = 1.0;
  auto consider = [&](double lmin, double lmax, std::size_t node) {
    if (!(lmin > 0.0)) {
      fail(ErrorKind::Degeneracy,
           "equivalence factor: degenerate metric at node " + std::to_string(node));
    }
    const double r = std::max(lmax, 1.0 / lmin);
    if (r > best.rho_eps) {
      best.rho_eps = r;
      best.argmax_node = node;
    }
  };
  if (g.is_diagonal() && g2.is_diagonal()) {
    for (std::size_t node = 0; node < g.size(); ++node) {
      double lmin = INFINITY, lmax = 0.0;
      for (int i = 0; i < n; ++i) {
        const double a = g.components().component(i, i)[node];
        const double b = g2.components().component(i, i)[node];
        if (!(a > 0.0) || !(b > 0.0)) {
          fail(ErrorKind::Degeneracy,
               "equivalence factor: degenerate metric at node " + std::to_string(node));
        }
        const double l = a / b;
        lmin = std::min(lmin, l);
        lmax = std::max(lmax, l);
      }
      consider(lmin, lmax, node);
    }
    return best;
  }
  for (std::size_t node = 0; node < g.size(); ++node) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(g.at(node), g2.at(node));
    if (es.info() != Eigen::Success) {
      fail(ErrorKind::Degeneracy,
           "equivalence factor: degenerate metric at node " + std::to_string(node));
    }
    consider(es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff(), node);
  }
  return best;
}

InverseRateTable inverse_commutator_rate(const MetricField& g,
                                         const MollifierKernel& kernel,
                                         std::span<const double> eps_list,
                                         double p, const Box& K) {
  require(eps_list.size() >= 3, ErrorKind::Fit,
          "inverse rate needs at least 3 scales");
  InverseRateTable table;
  const SymmetricTensorField ginv = metric_inverse(g);
  for (double eps : eps_list) {
    const MetricField gm = mollify_metric(g, kernel, eps, K);
    const SymmetricTensorField gminv = metric_inverse(gm);
    table.eps.push_back(eps);
    table.norms.push_back(
        tensor_difference_norm(ginv, gminv, NormSpec::lp(p, K)));
  }
  table.fit = fit_loglog(table.eps, table.norms);
  return table;
}

}  // namespace lowreg
