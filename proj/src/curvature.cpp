#include "lowreg/curvature.hpp"

#include <cmath>

#include "lowreg/elliptic.hpp"
#include "lowreg/error.hpp"
#include "lowreg/mollify.hpp"

namespace lowreg {

double conformal_constant(int n) {
  require(n >= 3, ErrorKind::Argument, "conformal constant needs n >= 3");
  return 4.0 * (n - 1.0) / (n - 2.0);
}

namespace {

double fd_at(const GridSpec& grid, std::span<const double> c, int axis,
             std::size_t node) {
  const std::size_t N = grid.count(axis);
  const std::size_t s = grid.stride(axis);
  const std::size_t i = (node / s) % N;
  const double inv2h = 0.5 / grid.spacing()[axis];
  if (i == 0) return (-3.0 * c[node] + 4.0 * c[node + s] - c[node + 2 * s]) * inv2h;
  if (i == N - 1) return (3.0 * c[node] - 4.0 * c[node - s] + c[node - 2 * s]) * inv2h;
  return (c[node + s] - c[node - s]) * inv2h;
}

void fill_christoffel(PointGeometry& p) {
  const int n = p.n;
  for (int k = 0; k < n; ++k) {
    p.gamma[k] = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
          s += p.ginv(k, l) * (p.dg[i](j, l) + p.dg[j](i, l) - p.dg[l](i, j));
        }
        p.gamma[k](i, j) = p.gamma[k](j, i) = 0.5 * s;
      }
    }
  }
}

void fill_inverse_derivative(PointGeometry& p) {
  for (int k = 0; k < p.n; ++k) p.dginv[k] = -p.ginv * p.dg[k] * p.ginv;
}

}  // namespace

PointGeometry point_geometry(const Mat& g, const MatGrad& dg) {
  PointGeometry p;
  p.n = static_cast<int>(g.rows());
  p.g = g;
  const double det = determinant(g);
  if (!(det > 0.0)) fail(ErrorKind::Degeneracy, "Christoffel symbols of a degenerate metric");
  p.ginv = cofactor_inverse(g);
  for (int k = 0; k < p.n; ++k) p.dg[k] = dg[k];
  fill_inverse_derivative(p);
  fill_christoffel(p);
  return p;
}

PointGeometry point_geometry(const MetricField& g, std::size_t node,
                             DerivativeSource source) {
  const int n = g.dim();
  MatGrad dg;
  if (source == DerivativeSource::Analytic) {
    require(g.has_analytic() && static_cast<bool>(g.analytic().derivative),
            ErrorKind::Contract, "analytic derivatives requested but not provided");
    const Point x = g.grid().position(node);
    dg = g.analytic().derivative(x);
  } else {
    for (int k = 0; k < n; ++k) {
      dg[k] = Mat::Zero(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          dg[k](i, j) = dg[k](j, i) =
              fd_at(g.grid(), g.components().component(i, j), k, node);
        }
      }
    }
  }
  try {
    return point_geometry(g.at(node), dg);
  } catch (const Error&) {
    fail(ErrorKind::Degeneracy, "degenerate metric at node " + std::to_string(node));
  }
}

Vec flux_part(const PointGeometry& p) {
  const int n = p.n;
  Vec trace_gamma(n);  // Gamma^j_ij
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += p.gamma[j](i, j);
    trace_gamma(i) = s;
  }
  Vec V(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) s += p.ginv(i, j) * p.gamma[k](i, j);
      s -= p.ginv(i, k) * trace_gamma(i);
    }
    V(k) = s;
  }
  return V;
}

double quadratic_part(const PointGeometry& p) {
  const int n = p.n;
  double f = 0.0;
  Vec trace_gamma(n);  // Gamma^m_im
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int m = 0; m < n; ++m) s += p.gamma[m](i, m);
    trace_gamma(i) = s;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double contracted = 0.0;  // g^{ij} Gamma^m_ij Gamma^k_km
      double cross = 0.0;       // Gamma^m_ik Gamma^k_jm
      for (int m = 0; m < n; ++m) {
        f -= p.dginv[m](i, j) * p.gamma[m](i, j);
        contracted += p.gamma[m](i, j) * trace_gamma(m);
        for (int k = 0; k < n; ++k) cross += p.gamma[m](i, k) * p.gamma[k](j, m);
      }
      f += p.dginv[j](i, j) * trace_gamma(i);
      f += p.ginv(i, j) * (contracted - cross);
    }
  }
  return f;
}

double quadratic_part_relabelled(const PointGeometry& p) {
  // Indices renamed (i, j, m, k) -> (a, b, c, d) and sums nested differently.
  const int n = p.n;
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  for (int c = 0; c < n; ++c) {
    for (int b = 0; b < n; ++b) {
      for (int a = 0; a < n; ++a) t1 += p.gamma[c](b, a) * p.dginv[c](a, b);
    }
  }
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      double s = 0.0;
      for (int c = 0; c < n; ++c) s += p.gamma[c](c, a);
      t2 += p.dginv[b](b, a) * s;
    }
  }
  for (int c = 0; c < n; ++c) {
    double s = 0.0;
    for (int d = 0; d < n; ++d) s += p.gamma[d](c, d);
    double q = 0.0;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) q += p.ginv(b, a) * p.gamma[c](b, a);
    }
    t3 += q * s;
  }
  for (int d = 0; d < n; ++d) {
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) s += p.ginv(a, b) * p.gamma[c](a, d) * p.gamma[d](b, c);
      }
      t4 += s;
    }
  }
  return -t1 + t2 + t3 - t4;
}

ChristoffelField::ChristoffelField(GridSpec grid, std::vector<double> data)
    : grid_(std::move(grid)), data_(std::move(data)) {}

double ChristoffelField::operator()(std::size_t node, int k, int i, int j) const {
  const int n = grid_.dim();
  const std::size_t per = static_cast<std::size_t>(n) * packed_size(n);
  return data_[node * per + static_cast<std::size_t>(k) * packed_size(n) + sym_index(i, j, n)];
}

ChristoffelField christoffel(const MetricField& g, DerivativeSource source) {
  const int n = g.dim();
  const std::size_t per = static_cast<std::size_t>(n) * packed_size(n);
  std::vector<double> data(g.size() * per);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const PointGeometry p = point_geometry(g, node, source);
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          data[node * per + k * packed_size(n) + sym_index(i, j, n)] = p.gamma[k](i, j);
        }
      }
    }
  }
  return ChristoffelField(g.grid(), std::move(data));
}

CurvatureDecomposition scalar_v_f(const MetricField& g,
                                  std::span<const std::size_t> nodes,
                                  DerivativeSource source) {
  const int n = g.dim();
  const std::size_t size = g.size();
  std::vector<std::vector<double>> V(n, std::vector<double>(size, 0.0));
  std::vector<double> F(size, 0.0);
  auto at = [&](std::size_t node) {
    const PointGeometry p = point_geometry(g, node, source);
    const Vec v = flux_part(p);
    for (int k = 0; k < n; ++k) V[k][node] = v(k);
    F[node] = quadratic_part(p);
  };
  if (nodes.empty()) {
    for (std::size_t node = 0; node < size; ++node) at(node);
  } else {
    for (std::size_t node : nodes) at(node);
  }
  CurvatureDecomposition out;
  for (int k = 0; k < n; ++k) out.V.emplace_back(g.grid(), std::move(V[k]));
  out.F = ScalarField(g.grid(), std::move(F));
  return out;
}

namespace {

ScalarField divergence_plus(const CurvatureDecomposition& d) {
  const GridSpec& grid = d.F.grid();
  std::vector<double> R(d.F.values().begin(), d.F.values().end());
  std::vector<double> tmp(grid.size());
  for (int k = 0; k < grid.dim(); ++k) {
    fd_derivative(grid, d.V[k].values(), k, tmp);
    for (std::size_t node = 0; node < R.size(); ++node) R[node] += tmp[node];
  }
  return ScalarField(grid, std::move(R));
}

}  // namespace

ScalarField scalar_pointwise(const MetricField& g, std::optional<Box> region) {
  require(g.regularity().is_smooth(), ErrorKind::Contract,
          "pointwise scalar curvature needs a smooth metric; use "
          "pair_distributional_scalar for " + g.regularity().describe() + " metrics");
  if (!region) return divergence_plus(scalar_v_f(g));
  const GridSpec& grid = g.grid();
  const auto inside = nodes_in(grid, *region);
  if (inside.empty()) return ScalarField::constant(grid, 0.0);
  Box halo = *region;
  const Box outer = grid.box();
  for (int k = 0; k < grid.dim(); ++k) {
    halo.lo[k] = std::max(halo.lo[k] - 2.01 * grid.spacing()[k], outer.lo[k]);
    halo.hi[k] = std::min(halo.hi[k] + 2.01 * grid.spacing()[k], outer.hi[k]);
  }
  const auto R = divergence_plus(scalar_v_f(g, nodes_in(grid, halo)));
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t node : inside) out[node] = R[node];
  return ScalarField(grid, std::move(out));
}

DensityTest::DensityTest(ScalarField f, bool nonnegative)
    : f_(std::move(f)), nonnegative_(nonnegative) {
  const GridSpec& grid = f_.grid();
  for (std::size_t node = 0; node < grid.size(); ++node) {
    if (f_[node] != 0.0 && grid.near_boundary(node, 2)) {
      fail(ErrorKind::Domain, "test density support touches the grid boundary");
    }
    if (nonnegative_ && f_[node] < 0.0) {
      fail(ErrorKind::Argument, "density flagged nonnegative has a negative value");
    }
  }
}

double pair_distributional_scalar(const MetricField& g, const DensityTest& mu) {
  const GridSpec& grid = g.grid();
  require(grid.same_as(mu.f().grid()), ErrorKind::Argument,
          "metric and density live on different grids");
  const auto f = mu.f().values();
  const int n = grid.dim();
  // Nodes where f or its central difference can be nonzero.
  std::vector<std::size_t> nodes;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    bool hit = f[node] != 0.0;
    for (int k = 0; k < n && !hit; ++k) {
      const std::size_t s = grid.stride(k);
      const std::size_t i = (node / s) % grid.count(k);
      if (i > 0 && f[node - s] != 0.0) hit = true;
      if (i + 1 < grid.count(k) && f[node + s] != 0.0) hit = true;
    }
    if (hit) nodes.push_back(node);
  }
  if (nodes.empty()) return 0.0;
  const CurvatureDecomposition d = scalar_v_f(g, nodes);
  std::vector<std::vector<double>> df(n, std::vector<double>(grid.size()));
  for (int k = 0; k < n; ++k) fd_derivative(grid, f, k, df[k]);
  CompensatedSum sum;
  for (std::size_t node : nodes) {
    double v = d.F[node] * f[node];
    for (int k = 0; k < n; ++k) v -= d.V[k][node] * df[k][node];
    sum.add(v);
  }
  return sum.value() * grid.cell_volume();
}

ScalarField negative_part(const ScalarField& R) {
  std::vector<double> out(R.size());
  for (std::size_t node = 0; node < out.size(); ++node) out[node] = std::max(-R[node], 0.0);
  return ScalarField(R.grid(), std::move(out));
}

double negative_part_norm(const MetricField& g_eps, double p,
                          std::optional<Box> region,
                          const MetricField* reference) {
  require(p >= 2.0, ErrorKind::Argument, "negative part norm needs p >= 2");
  const ScalarField neg = negative_part(scalar_pointwise(g_eps, region));
  return lp_norm(neg, NormSpec::lp(0.5 * p, std::move(region), reference));
}

ScalarField mollified_scalar(const MetricField& g, const MollifierKernel& kernel,
                             double eps, std::optional<Box> region) {
  const GridSpec& grid = g.grid();
  require(g.has_analytic(), ErrorKind::Domain,
          "mollified scalar curvature needs the closed form of g beyond the grid");
  const MetricAnalytic& a = g.analytic();
  require(a.valid_beyond == 0.0 && !a.valid_at, ErrorKind::Domain,
          "mollified scalar curvature needs a closed form valid everywhere");
  const DiscreteKernel& dk = kernel.discrete(eps, grid.spacing());
  const int n = grid.dim();
  std::vector<long> layers(n);
  Point hw = grid.half_width();
  for (int k = 0; k < n; ++k) {
    layers[k] = dk.reach[k] + 1;
    hw[k] += static_cast<double>(layers[k]) * grid.spacing()[k];
  }
  const GridSpec ext(grid.center(), hw, grid.spacing(), grid.cell_centered());
  const MetricField ge = MetricField::sample(ext, a, g.regularity());
  const CurvatureDecomposition d = scalar_v_f(ge);
  const PaddedLayout layout(grid, layers);
  require(layout.size == ext.size(), ErrorKind::Argument, "padded layout mismatch");

  std::vector<std::size_t> nodes;
  if (region) {
    nodes = nodes_in(grid, *region);
    if (nodes.empty()) return ScalarField::constant(grid, 0.0);
  }
  std::vector<double> out(grid.size(), 0.0), tmp(grid.size(), 0.0);
  convolve_padded(grid, layout, d.F.values(), dk, -1, nodes, out);
  for (int k = 0; k < n; ++k) {
    convolve_padded(grid, layout, d.V[k].values(), dk, k, nodes, tmp);
    for (std::size_t node = 0; node < out.size(); ++node) out[node] += tmp[node];
  }
  return ScalarField(grid, std::move(out));
}

double scalar_commutator_at(const MetricField& g, const MollifierKernel& kernel,
                            double eps, double p, const Box& K) {
  require(p >= 2.0, ErrorKind::Argument, "scalar commutator needs p >= 2");
  const GridSpec& grid = g.grid();
  Box halo = K;
  for (int k = 0; k < grid.dim(); ++k) {
    halo.lo[k] = std::max(halo.lo[k] - 3.0 * grid.spacing()[k], grid.box().lo[k]);
    halo.hi[k] = std::min(halo.hi[k] + 3.0 * grid.spacing()[k], grid.box().hi[k]);
  }
  const ScalarField A = mollified_scalar(g, kernel, eps, K);
  const ScalarField B = scalar_pointwise(mollify_metric(g, kernel, eps, halo), K);
  std::vector<double> diff(A.size());
  for (std::size_t node = 0; node < diff.size(); ++node) diff[node] = A[node] - B[node];
  return lp_norm(g.grid(), diff, NormSpec::lp(0.5 * p, K));
}

ScalarCommutatorTable scalar_commutator_norm(const MetricField& g,
                                             const MollifierKernel& kernel,
                                             std::span<const double> eps_list,
                                             double p, const Box& K) {
  require(eps_list.size() >= 3, ErrorKind::Fit,
          "scalar commutator needs at least 3 scales");
  ScalarCommutatorTable t;
  for (double eps : eps_list) {
    t.eps.push_back(eps);
    t.norms.push_back(scalar_commutator_at(g, kernel, eps, p, K));
  }
  t.decreasing = strictly_decreasing(t.norms);
  t.fit = fit_loglog(t.eps, t.norms);
  return t;
}

ScalarField conformal_scalar(const MetricField& g, const ScalarField& u) {
  const int n = g.dim();
  for (std::size_t node = 0; node < u.size(); ++node) {
    if (!(u[node] > 0.0)) {
      fail(ErrorKind::Domain,
           "conformal factor is not positive at node " + std::to_string(node));
    }
  }
  const double cn = conformal_constant(n);
  const ScalarField R = scalar_pointwise(g);
  const ScalarField lap = laplace_beltrami_apply(g, u);
  const double power = -(n + 2.0) / (n - 2.0);
  std::vector<double> out(u.size());
  for (std::size_t node = 0; node < out.size(); ++node) {
    out[node] = std::pow(u[node], power) * (-cn * lap[node] + R[node] * u[node]);
  }
  return ScalarField(g.grid(), std::move(out));
}

}  // namespace lowreg
