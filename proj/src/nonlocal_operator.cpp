#include "fplab/nonlocal_operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "fplab/reduce.hpp"

namespace fplab {

double j_beta(double t, double beta) {
  if (!(beta >= 1.0)) throw Error(fmt::format("J_beta requires beta >= 1 (got {})", beta));
  if (t == 0.0) return 0.0;
  return std::pow(std::abs(t), beta - 2.0) * t;
}

PowerMap::PowerMap(double p) : p_(p) {
  if (p == 2.0)
    mode_ = Mode::two;
  else if (p == 3.0)
    mode_ = Mode::three;
  else if (p == 4.0)
    mode_ = Mode::four;
  else
    mode_ = Mode::general;
}

double PowerMap::abs_pow_change(double a, double d) const {
  if (mode_ == Mode::two) return d * (2.0 * a + d);
  if (a == 0.0) return abs_pow(d);
  const double ratio = d / a;
  if (std::abs(ratio) <= 0.5) return abs_pow(a) * std::expm1(p_ * std::log1p(ratio));
  return abs_pow(a + d) - abs_pow(a);
}

KernelWeights::KernelWeights(GridPtr grid, const Params& params, int workers)
    : grid_(std::move(grid)), params_(params), power_(params.p()), workers_(workers < 1 ? 1 : workers) {
  if (!grid_) throw Error("kernel weights require a grid");
  if (grid_->dim() != params_.dim())
    throw Error(fmt::format("grid dimension {} does not match parameter dimension {}", grid_->dim(), params_.dim()));

  const Grid& g = *grid_;
  const int span = 2 * g.half_extent();
  if (g.dim() == 1) {
    for (int a = 1; a <= span; ++a) half_offsets_.push_back({{a, 0}, offset_weight({a, 0})});
  } else {
    for (int a = 0; a <= span; ++a)
      for (int b = -span; b <= span; ++b)
        if (a > 0 || b > 0) half_offsets_.push_back({{a, b}, offset_weight({a, b})});
  }

  const double sp = params_.sp();
  const double tail_const = 2.0 * g.dim() * unit_ball_measure(g.dim()) / sp;
  row_tail_.assign(g.size(), 0.0);
  for (std::size_t i : g.interior_nodes()) {
    const double rho = g.trunc_radius() - g.radius_of(i);
    if (!(rho > 0.0))
      throw Error(fmt::format("interior node {} lies outside the truncation ball; enlarge the grid", i));
    row_tail_[i] = tail_const * std::pow(rho, -sp);
  }

  row_sum_.assign(g.size(), 0.0);
  std::vector<double> terms(half_offsets_.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t k = 0; k < half_offsets_.size(); ++k) {
      const auto& o = half_offsets_[k];
      const int count = (g.shifted(i, o.k) ? 1 : 0) + (g.shifted(i, {-o.k[0], -o.k[1]}) ? 1 : 0);
      terms[k] = count * o.weight;
    }
    row_sum_[i] = 2.0 * pairwise_sum(terms) + row_tail_[i];
  }
  for (std::size_t i : g.interior_nodes()) max_row_sum_ = std::max(max_row_sum_, row_sum_[i]);
}

double KernelWeights::offset_weight(const LatticeIndex& k) const {
  if (k[0] == 0 && k[1] == 0) return 0.0;
  const Grid& g = *grid_;
  const double h = g.spacing();
  const double dist = h * std::sqrt(static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1]);
  return g.cell_volume() / std::pow(dist, g.dim() + params_.sp());
}

double KernelWeights::pair_weight(std::size_t i, std::size_t j) const {
  const auto& a = grid_->lattice(i);
  const auto& b = grid_->lattice(j);
  // |k| is symmetric in the sign of the offset, so w(i,j) == w(j,i) bitwise.
  return offset_weight({std::abs(b[0] - a[0]), std::abs(b[1] - a[1])});
}

namespace {

// Paired contribution sum_k w_k [f(u_i - u_{i+k}) + f(u_i - u_{i-k})] for one row.
template <class F>
double paired_row(const Grid& g, std::span<const WeightedOffset> offsets, const std::vector<double>& u, std::size_t i,
                  std::vector<double>& scratch, F&& f) {
  const double ui = u[i];
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const auto& o = offsets[k];
    double t = 0.0;
    if (auto jp = g.shifted(i, o.k)) t += f(ui - u[*jp], *jp);
    if (auto jm = g.shifted(i, {-o.k[0], -o.k[1]})) t += f(ui - u[*jm], *jm);
    scratch[k] = t * o.weight;
  }
  return pairwise_sum(std::span<const double>(scratch.data(), offsets.size()));
}

void check_field(const Field& u, const KernelWeights& w) {
  if (u.grid.get() != &w.grid() && (u.grid->size() != w.grid().size() || u.grid->spacing() != w.grid().spacing()))
    throw Error("field and kernel weights live on different grids");
}

}  // namespace

Field apply_operator(const Field& u, const KernelWeights& w, double farField) {
  check_field(u, w);
  const Grid& g = w.grid();
  const auto interior = g.interior_nodes();
  const auto offsets = w.half_offsets();
  const PowerMap& pm = w.power();
  std::vector<double> out(g.size(), 0.0);
  parallel_for(interior.size(), w.workers(), [&](std::size_t b, std::size_t e) {
    std::vector<double> scratch(offsets.size());
    for (std::size_t n = b; n < e; ++n) {
      const std::size_t i = interior[n];
      const double pairs = paired_row(g, offsets, u.values, i, scratch, [&](double d, std::size_t) { return pm.j(d); });
      out[i] = 2.0 * pairs + pm.j(u.values[i] - farField) * w.row_tail_coeff(i);
    }
  });
  return Field(u.grid, std::move(out), u.time);
}

double energy(const Field& u, const KernelWeights& w, double farField) {
  check_field(u, w);
  const Grid& g = w.grid();
  const auto offsets = w.half_offsets();
  const PowerMap& pm = w.power();
  std::vector<double> rows(g.size(), 0.0);
  parallel_for(g.size(), w.workers(), [&](std::size_t b, std::size_t e) {
    std::vector<double> scratch(offsets.size());
    for (std::size_t i = b; i < e; ++i) {
      double r = paired_row(g, offsets, u.values, i, scratch, [&](double d, std::size_t) { return pm.abs_pow(d); });
      if (g.interior(i)) r += pm.abs_pow(u.values[i] - farField) * w.row_tail_coeff(i);
      rows[i] = r;
    }
  });
  return pairwise_sum(rows) * g.cell_volume() / w.params().p();
}

double energy_change(const Field& u, std::span<const double> direction, double step, const KernelWeights& w,
                     double farField) {
  check_field(u, w);
  const Grid& g = w.grid();
  if (direction.size() != g.size()) throw Error("direction size does not match the grid");
  const auto interior = g.interior_nodes();
  const auto offsets = w.half_offsets();
  const PowerMap& pm = w.power();
  std::vector<double> rows(interior.size(), 0.0);
  parallel_for(interior.size(), w.workers(), [&](std::size_t b, std::size_t e) {
    std::vector<double> scratch(offsets.size());
    for (std::size_t n = b; n < e; ++n) {
      const std::size_t i = interior[n];
      const double di = step * direction[i];
      // Interior pairs appear in two interior rows; pairs with an exterior
      // node appear once here but twice in the energy.
      double r = paired_row(g, offsets, u.values, i, scratch, [&](double a, std::size_t j) {
        const double dj = g.interior(j) ? step * direction[j] : 0.0;
        return (g.interior(j) ? 1.0 : 2.0) * pm.abs_pow_change(a, di - dj);
      });
      r += pm.abs_pow_change(u.values[i] - farField, di) * w.row_tail_coeff(i);
      rows[n] = r;
    }
  });
  return pairwise_sum(rows) * g.cell_volume() / w.params().p();
}

TailQuery::TailQuery(double q_, double alpha_, Point x0_, double R_) : q(q_), alpha(alpha_), x0(x0_), R(R_) {
  if (!(q >= 1.0)) throw Error(fmt::format("tail exponent q must be >= 1 (got {})", q));
  if (!(alpha > 0.0)) throw Error(fmt::format("tail order alpha must be positive (got {})", alpha));
  if (!(R > 0.0)) throw Error(fmt::format("tail radius must be positive (got {})", R));
}

namespace {

// Exact integral of |y - x0|^(-1-alpha) over [a, b], an interval on one side of x0.
double radial_piece_1d(double a, double b, double x0, double alpha) {
  if (!(b > a)) return 0.0;
  if (a >= x0) return (std::pow(a - x0, -alpha) - std::pow(b - x0, -alpha)) / alpha;
  return (std::pow(x0 - b, -alpha) - std::pow(x0 - a, -alpha)) / alpha;
}

double tail_integral_1d(const Field& u, const TailQuery& tq, double farField) {
  const Grid& g = *u.grid;
  const double h = g.spacing();
  const double T = g.trunc_radius();
  const double x0 = tq.x0[0];
  const double cut_lo = x0 - tq.R;
  const double cut_hi = x0 + tq.R;
  std::vector<double> terms;
  terms.reserve(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double c = g.node(j)[0];
    const double lo = std::max(c - 0.5 * h, -T);
    const double hi = std::min(c + 0.5 * h, T);
    if (!(hi > lo)) continue;
    double m = 0.0;
    if (lo < cut_lo) m += radial_piece_1d(lo, std::min(hi, cut_lo), x0, tq.alpha);
    if (hi > cut_hi) m += radial_piece_1d(std::max(lo, cut_hi), hi, x0, tq.alpha);
    if (m > 0.0) terms.push_back(std::pow(std::abs(u.values[j]), tq.q) * m);
  }
  const double far = (std::pow(T - x0, -tq.alpha) + std::pow(T + x0, -tq.alpha)) / tq.alpha;
  terms.push_back(std::pow(std::abs(farField), tq.q) * far);
  return pairwise_sum(terms);
}

// Polar coordinates around x0: integral of r^(-1-alpha) Theta(r) over r > R,
// Theta(r) = integral over the circle of |u|^q. Radial panels are finer than the
// spacing and the circle is sampled at a quarter spacing of arc length, so cell
// edges, the ball and the truncation circle are all resolved by the sampling.
// Beyond T + |x0| every ray sees the far field and the rest is closed form.
double tail_integral_2d(const Field& u, const TailQuery& tq, double farField) {
  const Grid& g = *u.grid;
  const double h = g.spacing();
  const double T = g.trunc_radius();
  const int K = g.half_extent();
  const double far_q = std::pow(std::abs(farField), tq.q);
  const auto value_q = [&](double y0, double y1) {
    if (std::hypot(y0, y1) > T) return far_q;
    const int kx = std::clamp(static_cast<int>(std::lround(y0 / h)), -K, K);
    const int ky = std::clamp(static_cast<int>(std::lround(y1 / h)), -K, K);
    return std::pow(std::abs(u.values[*g.index_of({kx, ky})]), tq.q);
  };
  const auto circle = [&](double r) {
    const int n = std::max(64, static_cast<int>(std::ceil(2.0 * std::numbers::pi * r / (0.25 * h))));
    const double dth = 2.0 * std::numbers::pi / n;
    std::vector<double> vals(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double th = (k + 0.5) * dth;
      vals[static_cast<std::size_t>(k)] = value_q(tq.x0[0] + r * std::cos(th), tq.x0[1] + r * std::sin(th));
    }
    return pairwise_sum(vals) * dth;
  };

  using boost::math::quadrature::gauss;
  const double r_out = T + std::hypot(tq.x0[0], tq.x0[1]);
  const int panels = std::max(1, static_cast<int>(std::ceil((r_out - tq.R) / (0.5 * h))));
  const double width = (r_out - tq.R) / panels;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(panels) + 1);
  for (int k = 0; k < panels; ++k) {
    const double a = tq.R + k * width;
    terms.push_back(gauss<double, 4>::integrate(
        [&](double r) { return std::pow(r, -1.0 - tq.alpha) * circle(r); }, a, a + width));
  }
  terms.push_back(far_q * 2.0 * std::numbers::pi * std::pow(r_out, -tq.alpha) / tq.alpha);
  return pairwise_sum(terms);
}

}  // namespace

double tail(const Field& u, const TailQuery& tq, double farField) {
  const Grid& g = *u.grid;
  const double reach = std::hypot(tq.x0[0], tq.x0[1]) + tq.R;
  if (!(reach < g.trunc_radius()))
    throw Error(fmt::format("tail ball B_{}(x0) reaches the truncation radius {}", tq.R, g.trunc_radius()));
  const double integral = g.dim() == 1 ? tail_integral_1d(u, tq, farField) : tail_integral_2d(u, tq, farField);
  return std::pow(std::pow(tq.R, tq.alpha) * integral, 1.0 / tq.q);
}

}  // namespace fplab
