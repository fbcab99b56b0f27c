#include "lowreg/friedrichs.hpp"

#include <algorithm>
#include <cmath>

#include "lowreg/error.hpp"
#include "lowreg/mollify.hpp"
#include "lowreg/norms.hpp"

namespace lowreg {

double CommutatorExperiment::r() const { return product_exponent(p, q); }

void CommutatorExperiment::validate() const {
  require(a.grid().same_as(f.grid()), ErrorKind::Argument,
          "commutator fields live on different grids");
  require(p >= 1.0 && q >= 1.0, ErrorKind::Argument, "exponents must be >= 1");
  require(q >= conjugate_exponent(p) * (1.0 - 1e-12), ErrorKind::Argument,
          "commutator experiment needs q >= p'");
  require(eps.size() >= 3, ErrorKind::Fit, "commutator experiment needs at least 3 scales");
  require(strictly_decreasing(eps), ErrorKind::Argument, "scales must be strictly decreasing");
  const double hmax = *std::max_element(a.grid().spacing().begin(), a.grid().spacing().end());
  require(eps.back() >= 2.0 * hmax * (1.0 - 1e-12), ErrorKind::Resolution,
          "smallest scale below 2h");
  require(K.dim() == a.grid().dim(), ErrorKind::Argument, "evaluation box dimension mismatch");
  require(a.grid().box().grown(1e-9 * hmax).contains(K), ErrorKind::Domain,
          "evaluation box leaves the grid");
  require(a.has_padding() && f.has_padding(), ErrorKind::Domain,
          "commutator fields need off-grid values");
}

namespace {

// Nodes of K plus one layer on each side, clipped to the grid.
std::vector<std::size_t> halo_nodes(const GridSpec& grid, const Box& K) {
  Box b = K;
  const Box outer = grid.box();
  for (int k = 0; k < grid.dim(); ++k) {
    b.lo[k] = std::max(b.lo[k] - 1.01 * grid.spacing()[k], outer.lo[k]);
    b.hi[k] = std::min(b.hi[k] + 1.01 * grid.spacing()[k], outer.hi[k]);
  }
  return nodes_in(grid, b);
}

struct PaddedPair {
  PaddedLayout layout;
  std::vector<double> a;
  std::vector<double> f;
};

PaddedPair pad_pair(const ScalarField& a, const ScalarField& f, const DiscreteKernel& dk) {
  PaddedPair pp;
  pp.layout = PaddedLayout(a.grid(), dk.reach);
  pp.a = pad_scalar(a, pp.layout);
  pp.f = pad_scalar(f, pp.layout);
  return pp;
}

ScalarField commutator_field(const ScalarField& a, const ScalarField& f,
                             const MollifierKernel& kernel, double eps, int axis,
                             const std::optional<Box>& region) {
  const GridSpec& grid = a.grid();
  require(grid.same_as(f.grid()), ErrorKind::Argument,
          "commutator fields live on different grids");
  const DiscreteKernel& dk = kernel.discrete(eps, grid.spacing());
  const PaddedPair pp = pad_pair(a, f, dk);
  std::vector<std::size_t> nodes;
  if (region) {
    nodes = nodes_in(grid, *region);
    if (nodes.empty()) return ScalarField::constant(grid, 0.0);
  }
  std::vector<double> out(grid.size(), 0.0);
  product_commutator_padded(grid, pp.layout, pp.a, pp.f, dk, axis, nodes, out);
  return ScalarField(grid, std::move(out));
}

// L^r and W^{1,r} norms over K of the plain commutator at one scale.
std::pair<double, double> commutator_norms(const ScalarField& a, const ScalarField& f,
                                           const MollifierKernel& kernel, double eps,
                                           double r, const Box& K) {
  const GridSpec& grid = a.grid();
  const DiscreteKernel& dk = kernel.discrete(eps, grid.spacing());
  const PaddedPair pp = pad_pair(a, f, dk);
  const auto nodes = nodes_in(grid, K);
  std::vector<double> c(grid.size(), 0.0);
  product_commutator_padded(grid, pp.layout, pp.a, pp.f, dk, -1, nodes, c);
  const NormSpec spec = NormSpec::lp(r, K);
  const double lr = lp_norm(grid, c, spec);
  double w1r = lr;
  for (int k = 0; k < grid.dim(); ++k) {
    product_commutator_padded(grid, pp.layout, pp.a, pp.f, dk, k, nodes, c);
    w1r += lp_norm(grid, c, spec);
  }
  return {lr, w1r};
}

}  // namespace

DecayTable eps_derivative_decay(const ScalarField& f, double p,
                                std::span<const double> eps_list, const Box& K,
                                const MollifierKernel& kernel) {
  require(eps_list.size() >= 3, ErrorKind::Fit, "derivative decay needs at least 3 scales");
  require(p >= 1.0, ErrorKind::Argument, "norm exponent must be >= 1");
  const GridSpec& grid = f.grid();
  const auto nodes = nodes_in(grid, K);
  std::vector<double> values, out(grid.size(), 0.0);
  for (double eps : eps_list) {
    const DiscreteKernel& dk = kernel.discrete(eps, grid.spacing());
    const PaddedLayout layout(grid, dk.reach);
    const auto padded = pad_scalar(f, layout);
    double total = 0.0;
    for (int k = 0; k < grid.dim(); ++k) {
      convolve_padded(grid, layout, padded, dk, k, nodes, out);
      total += lp_norm(grid, out, NormSpec::lp(p, K));
    }
    values.push_back(eps * total);
  }
  DecayTable t;
  t.fit = fit_loglog(eps_list, values);
  t.decays = ratios_below_one(values);
  return t;
}

ScalarField product_commutator(const ScalarField& a, const ScalarField& f,
                               const MollifierKernel& kernel, double eps,
                               std::optional<Box> region) {
  return commutator_field(a, f, kernel, eps, -1, region);
}

ScalarField product_commutator_derivative(const ScalarField& a, const ScalarField& f,
                                          const MollifierKernel& kernel, double eps,
                                          int axis, std::optional<Box> region) {
  require(axis >= 0 && axis < a.grid().dim(), ErrorKind::Argument,
          "derivative axis out of range");
  return commutator_field(a, f, kernel, eps, axis, region);
}

FriedrichsTable friedrichs_w1r(const CommutatorExperiment& exp,
                               const MollifierKernel& kernel) {
  exp.validate();
  std::vector<double> lr, w1r;
  for (double eps : exp.eps) {
    const auto [l, w] = commutator_norms(exp.a, exp.f, kernel, eps, exp.r(), exp.K);
    lr.push_back(l);
    w1r.push_back(w);
  }
  FriedrichsTable t;
  t.lr = fit_loglog(exp.eps, lr);
  t.w1r = fit_loglog(exp.eps, w1r);
  t.decreasing = strictly_decreasing(w1r);
  t.converges = t.decreasing && w1r.back() <= 0.25 * w1r.front();
  return t;
}

NetCommutatorReport generalized_net_commutator(const std::vector<ScalarField>& a_net,
                                               const CommutatorExperiment& exp,
                                               const MollifierKernel& kernel) {
  exp.validate();
  require(a_net.size() == exp.eps.size(), ErrorKind::Argument,
          "one net member per scale is required");
  const GridSpec& grid = exp.a.grid();
  const int n = grid.dim();
  const double r = exp.r();
  const NormSpec lp = NormSpec::lp(exp.p, exp.K);
  const NormSpec lr = NormSpec::lp(r, exp.K);
  const auto nodes = nodes_in(grid, exp.K);
  const auto halo = halo_nodes(grid, exp.K);

  NetCommutatorReport rep;
  std::vector<double> hyp, net;
  std::vector<double> diff(grid.size()), mean_a(grid.size(), 0.0), mean_f(grid.size(), 0.0);
  std::vector<double> gap(grid.size(), 0.0), dgap(grid.size()), df(grid.size(), 0.0);
  std::vector<double> c(grid.size(), 0.0), term(grid.size(), 0.0);
  for (std::size_t s = 0; s < exp.eps.size(); ++s) {
    const double eps = exp.eps[s];
    const ScalarField& ae = a_net[s];
    require(ae.grid().same_as(grid), ErrorKind::Argument, "net member on a different grid");
    for (std::size_t node = 0; node < grid.size(); ++node) diff[node] = exp.a[node] - ae[node];
    hyp.push_back(lp_norm(grid, diff, lp));

    const DiscreteKernel& dk = kernel.discrete(eps, grid.spacing());
    const PaddedPair pp = pad_pair(exp.a, exp.f, dk);
    convolve_padded(grid, pp.layout, pp.a, dk, -1, halo, mean_a);
    convolve_padded(grid, pp.layout, pp.f, dk, -1, halo, mean_f);
    // a_eps F - (af) * rho = (a_eps - A) F + C.
    std::fill(gap.begin(), gap.end(), 0.0);
    for (std::size_t node : halo) gap[node] = ae[node] - mean_a[node];

    product_commutator_padded(grid, pp.layout, pp.a, pp.f, dk, -1, nodes, c);
    for (std::size_t node : nodes) term[node] = c[node] + gap[node] * mean_f[node];
    double plain = lp_norm(grid, c, lr);
    double total = lp_norm(grid, term, lr);
    for (int k = 0; k < n; ++k) {
      product_commutator_padded(grid, pp.layout, pp.a, pp.f, dk, k, nodes, c);
      convolve_padded(grid, pp.layout, pp.f, dk, k, nodes, df);
      fd_derivative(grid, gap, k, dgap);
      for (std::size_t node : nodes) {
        term[node] = c[node] + dgap[node] * mean_f[node] + gap[node] * df[node];
      }
      plain += lp_norm(grid, c, lr);
      total += lp_norm(grid, term, lr);
    }
    net.push_back(total);
    rep.friedrichs.push_back(plain);
    const double denom = std::max(plain, 1e-300);
    rep.tracking_gap = std::max(rep.tracking_gap, std::abs(total - plain) / denom);
    rep.c_K = std::max(rep.c_K, hyp.back() / eps);
  }
  rep.hypothesis = fit_loglog(exp.eps, hyp);
  rep.hypothesis_warning = rep.hypothesis.degenerate ? false : rep.hypothesis.slope < 0.9;
  rep.commutator = fit_loglog(exp.eps, net);
  rep.decreasing = strictly_decreasing(net);
  return rep;
}

}  // namespace lowreg
