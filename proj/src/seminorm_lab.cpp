#include "fplab/seminorm_lab.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fplab/reduce.hpp"

namespace fplab {

namespace {

std::vector<std::size_t> region_nodes(const Field& u, const Ball& region) {
  std::vector<std::size_t> out;
  for (const auto& [i, v] : restrict(u, region)) out.push_back(i);
  return out;
}

double direction_length(const LatticeIndex& e) { return std::sqrt(double(e[0] * e[0] + e[1] * e[1])); }

std::size_t shifted_or_throw(const Grid& g, std::size_t i, const LatticeIndex& e, int m) {
  auto j = g.shifted(i, {m * e[0], m * e[1]});
  if (!j)
    throw Error(fmt::format("region shifted by offset ({}, {}) leaves the truncation ball", m * e[0] * g.spacing(),
                            m * e[1] * g.spacing()));
  return *j;
}

// First (order 1) or second (order 2) difference of u at node i along m*e.
double difference(const Field& u, std::size_t i, const LatticeIndex& e, int m, int order) {
  const Grid& g = *u.grid;
  if (order == 1) return u.values[shifted_or_throw(g, i, e, m)] - u.values[i];
  const std::size_t j2 = shifted_or_throw(g, i, e, 2 * m);
  const std::size_t j1 = shifted_or_throw(g, i, e, m);
  return u.values[j2] + u.values[i] - 2.0 * u.values[j1];
}

// sum_i |delta u(x_i) / |h|^beta|^q spacing^dim, i.e. the q-th power of the L^q norm.
double quotient_power(const Field& u, std::span<const std::size_t> nodes, const LatticeIndex& e, int m, int order,
                      double beta, double q) {
  const Grid& g = *u.grid;
  const double hlen = m * g.spacing() * direction_length(e);
  const double scale = std::pow(hlen, -beta);
  std::vector<double> terms(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k)
    terms[k] = std::pow(std::abs(difference(u, nodes[k], e, m, order)) * scale, q);
  return pairwise_sum(terms) * g.cell_volume();
}

double besov(const Field& u, const Ball& region, double beta, double q, const HLadder& ladder, int order) {
  if (ladder.empty()) throw Error("h-ladder is empty");
  if (!(q >= 1.0)) throw Error(fmt::format("integrability exponent must be at least 1 (got {})", q));
  const auto nodes = region_nodes(u, region);
  double best = 0.0;
  for (int m : ladder.multiples)
    for (const auto& e : lattice_directions(u.grid->dim()))
      best = std::max(best, std::pow(quotient_power(u, nodes, e, m, order, beta, q), 1.0 / q));
  return best;
}

// sup over the ladder below h0 of the Q-th power of the difference-quotient norm.
double sup_quotient_power(const Field& u, std::span<const std::size_t> nodes, double h0, int order, double beta,
                          double Q) {
  const Grid& g = *u.grid;
  double best = 0.0;
  bool any = false;
  for (const auto& e : lattice_directions(g.dim())) {
    const double len = g.spacing() * direction_length(e);
    for (int m = 1; m * len < h0; m *= 2) {
      any = true;
      best = std::max(best, quotient_power(u, nodes, e, m, order, beta, Q));
    }
  }
  if (!any) throw Error(fmt::format("h0 = {} must exceed the grid spacing {}", h0, g.spacing()));
  return best;
}

}  // namespace

HLadder HLadder::dyadic(double spacing, double hMax) {
  if (!(spacing > 0.0)) throw Error("ladder spacing must be positive");
  HLadder l{spacing, {}};
  for (int m = 1; m * spacing <= hMax * (1.0 + 1e-12); m *= 2) l.multiples.push_back(m);
  return l;
}

HLadder HLadder::dyadic_below(double spacing, double hMax) {
  if (!(spacing > 0.0)) throw Error("ladder spacing must be positive");
  HLadder l{spacing, {}};
  for (int m = 1; m * spacing < hMax; m *= 2) l.multiples.push_back(m);
  return l;
}

std::vector<double> HLadder::offsets() const {
  std::vector<double> out;
  for (int m : multiples) out.push_back(m * spacing);
  return out;
}

std::vector<LatticeIndex> lattice_directions(int dim) {
  if (dim == 1) return {{1, 0}, {-1, 0}};
  return {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
}

double default_fit_floor(double scale) { return 1e-9 * (1.0 + std::abs(scale)); }

ExponentFit fit_power_law(std::vector<FitPoint> points, double floor) {
  ExponentFit fit;
  std::vector<double> xs, ys;
  for (auto& pt : points) {
    pt.used = pt.s > floor && pt.x > 0.0;
    if (pt.used) {
      xs.push_back(std::log(pt.x));
      ys.push_back(std::log(pt.s));
    }
  }
  fit.points = std::move(points);
  fit.points_used = static_cast<int>(xs.size());
  if (xs.size() < 2) {
    fit.saturated = true;
    for (auto& pt : fit.points) pt.used = false;
    fit.points_used = 0;
    return fit;
  }
  const double n = static_cast<double>(xs.size());
  const double mx = pairwise_sum(xs) / n;
  const double my = pairwise_sum(ys) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  const double slope = sxy / sxx;
  fit.exponent = slope;
  fit.intercept = my - slope * mx;
  double ssr = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (fit.intercept + slope * xs[k]);
    ssr += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  return fit;
}

double sobolev_seminorm(const Field& u, const Ball& region, double s, double p) {
  const Grid& g = *u.grid;
  if (std::hypot(region.center[0], region.center[1]) + region.radius > g.trunc_radius() * (1.0 + 1e-12))
    throw Error("seminorm region must lie within the truncation ball");
  const auto nodes = region_nodes(u, region);
  if (nodes.size() < 2) return 0.0;
  const double expo = g.dim() + s * p;
  std::vector<double> rows(nodes.size());
  std::vector<double> terms(nodes.size());
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      if (a == b) {
        terms[b] = 0.0;
        continue;
      }
      const Point& y = g.node(nodes[b]);
      terms[b] = std::pow(std::abs(u.values[nodes[a]] - u.values[nodes[b]]), p) / std::pow(g.distance(nodes[a], y), expo);
    }
    rows[a] = pairwise_sum(terms);
  }
  const double h2d = g.cell_volume() * g.cell_volume();
  return std::pow(pairwise_sum(rows) * h2d, 1.0 / p);
}

double besov_second(const Field& u, const Ball& region, double beta, double q, const HLadder& ladder) {
  return besov(u, region, beta, q, ladder, 2);
}

double besov_first(const Field& u, const Ball& region, double beta, double q, const HLadder& ladder) {
  return besov(u, region, beta, q, ladder, 1);
}

ExponentFit holder_fit_space(const Field& u, const Ball& region, const HLadder& ladder, double floor) {
  if (ladder.empty()) throw Error("h-ladder is empty");
  const auto nodes = region_nodes(u, region);
  if (nodes.empty()) throw Error("fit region contains no nodes");
  std::vector<FitPoint> pts;
  for (int m : ladder.multiples) {
    double S = 0.0;
    for (const auto& e : lattice_directions(u.grid->dim()))
      for (std::size_t i : nodes) S = std::max(S, std::abs(difference(u, i, e, m, 1)));
    pts.push_back({m * ladder.spacing, S, false});
  }
  return fit_power_law(std::move(pts), floor);
}

ExponentFit holder_fit_time(const SpaceTimeField& traj, std::size_t node, double tMin, double tMax, double floor) {
  if (traj.empty() || node >= traj.grid()->size()) throw Error("time fit needs a trajectory and a valid node");
  const double eps = 1e-12 * std::max({1.0, std::abs(tMin), std::abs(tMax)});
  std::vector<double> vals, times;
  for (const auto& f : traj)
    if (f.time >= tMin - eps && f.time <= tMax + eps) {
      times.push_back(f.time);
      vals.push_back(f.values[node]);
    }
  if (times.size() < 4)
    throw Error(fmt::format("time fit needs at least 4 stored times in [{}, {}] (found {})", tMin, tMax, times.size()));
  const double dt = times[1] - times[0];
  for (std::size_t k = 1; k < times.size(); ++k)
    if (std::abs(times[k] - times[k - 1] - dt) > 1e-9 * dt) throw Error("time fit needs equally spaced stored times");

  std::vector<FitPoint> pts;
  for (std::size_t lag = 1; lag < times.size(); lag *= 2) {
    double S = 0.0;
    for (std::size_t n = 0; n + lag < vals.size(); ++n) S = std::max(S, std::abs(vals[n + lag] - vals[n]));
    pts.push_back({static_cast<double>(lag) * dt, S, false});
  }
  return fit_power_law(std::move(pts), floor);
}

double campanato_oscillation(const SpaceTimeField& traj, const Cylinder& cyl) {
  if (traj.empty()) throw Error("campanato oscillation needs a trajectory");
  const Grid& g = *traj.grid();
  std::vector<double> vals;
  for (const auto& f : traj) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (cyl.contains(g.node(i), f.time)) vals.push_back(f.values[i]);
  }
  if (vals.empty()) throw Error("cylinder contains no grid points");
  const double n = static_cast<double>(vals.size());
  const double mean = pairwise_sum(vals) / n;
  for (double& v : vals) v = std::abs(v - mean);
  return pairwise_sum(vals) / n;
}

double parabolic_distance(const SpaceTimePoint& a, const SpaceTimePoint& b, double s, double p, double delta) {
  const Params params(s, p, 1);
  if (!(delta > 0.0 && delta < 1.0)) throw Error(fmt::format("delta must lie in (0,1) (got {})", delta));
  const double dx = std::hypot(a.x[0] - b.x[0], a.x[1] - b.x[1]);
  const double dt = std::abs(a.t - b.t);
  const double e = s * p - delta * (p - 2.0);
  if (s >= params.s_threshold()) {
    if (!(e > 1.0)) throw Error(fmt::format("need s p - delta (p-2) > 1 (got {})", e));
    return dx + std::pow(dt, 1.0 / e);
  }
  if (!(e <= 1.0)) throw Error(fmt::format("need s p - (p-2) delta <= 1 (got {})", e));
  if (!(e > 0.0)) throw Error(fmt::format("need s p - (p-2) delta > 0 (got {})", e));
  return std::pow(dx, e) + dt;
}

PoincareSides poincare_check(const Field& u, const Ball& region, const Field& eta, double s, double p) {
  const Grid& g = *u.grid;
  if (!eta.grid || eta.size() != u.size()) throw Error("weight field does not match the grid");
  const Params params(s, p, g.dim());
  const auto nodes = region_nodes(u, region);
  if (nodes.empty()) throw Error("Poincare region contains no nodes");

  std::vector<char> inside(g.size(), 0);
  for (std::size_t i : nodes) inside[i] = 1;
  double eta_max = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (eta.values[i] < 0.0) throw Error("weight must be non-negative");
    if (!inside[i] && eta.values[i] != 0.0) throw Error("weight must be supported in the region");
    eta_max = std::max(eta_max, eta.values[i]);
  }

  const double n = static_cast<double>(nodes.size());
  std::vector<double> ev, uev;
  for (std::size_t i : nodes) {
    ev.push_back(eta.values[i]);
    uev.push_back(eta.values[i] * u.values[i]);
  }
  const double eta_mean = pairwise_sum(ev) / n;
  if (std::abs(eta_mean - 1.0) > 1e-10)
    throw Error(fmt::format("weight must have mean 1 over the region (got {})", eta_mean));
  const double ubar = pairwise_sum(uev) / n;

  std::vector<double> dev;
  for (std::size_t i : nodes) dev.push_back(std::pow(std::abs(u.values[i] - ubar), p));
  PoincareSides out;
  out.lhs = pairwise_sum(dev) * g.cell_volume();

  const double dim = g.dim();
  const double sem = sobolev_seminorm(u, region, s, p);
  const double dbl = std::pow(sem, p);
  out.rhs = std::pow(2.0, dim + s * p) / unit_ball_measure(g.dim()) * std::pow(eta_max, p) *
            std::pow(region.radius, s * p) * dbl;
  return out;
}

IterationRecord iteration_monitor(const SpaceTimeField& traj, const Params& params, const IterationMode& mode,
                                  double h0, double R, double T0, double T1, double mu) {
  if (traj.size() < 2) throw Error("iteration monitor needs at least two stored times");
  const Grid& g = *traj.grid();
  if (g.dim() != params.dim()) throw Error("trajectory and parameter dimensions differ");
  const double rho = g.domain_radius();
  if (!(h0 > 0.0 && h0 < rho / 10.0)) throw Error(fmt::format("need 0 < h0 < {} (got h0 = {})", rho / 10.0, h0));
  if (!(4.0 * h0 < R)) throw Error(fmt::format("need 4 h0 < R (got h0 = {}, R = {})", h0, R));
  if (!(R <= rho - 5.0 * h0)) throw Error(fmt::format("need R <= {} - 5 h0 (got h0 = {}, R = {})", rho, h0, R));
  if (!(T0 < T1)) throw Error("need T0 < T1");
  if (!(mu > 0.0 && mu < T1 - T0)) throw Error("need 0 < mu < T1 - T0");
  const double eps = 1e-12 * std::max({1.0, std::abs(T0), std::abs(T1)});
  if (T0 < traj.front().time - eps || T1 > traj.back().time + eps)
    throw Error("time window [T0, T1] must lie within the stored trajectory");

  const double s = params.s(), p = params.p();
  double aTime, qTime, aFinal, qFinal, aRhs, qRhs;
  if (mode.kind == IterationMode::Kind::integrability) {
    const double q = mode.q;
    if (!(q >= p)) throw Error(fmt::format("need q >= p (got q = {})", q));
    aTime = s, qTime = q + 1.0;
    aFinal = (q + 2.0 - p) * s / (q + 3.0 - p), qFinal = q + 3.0 - p;
    aRhs = s, qRhs = q;
  } else {
    const double b = mode.beta, th = mode.theta;
    if (!(b >= 2.0)) throw Error(fmt::format("need beta >= 2 (got {})", b));
    if (!(th < 1.0)) throw Error(fmt::format("need theta < 1 (got {})", th));
    if (!((1.0 + th * b) / b < 1.0)) throw Error("need (1 + theta beta)/beta < 1");
    aTime = (1.0 + s * p + th * b) / (b - 1.0 + p), qTime = b - 1.0 + p;
    aFinal = (1.0 + th * b) / (b + 1.0), qFinal = b + 1.0;
    aRhs = (1.0 + th * b) / b, qRhs = b;
  }

  const auto inner = region_nodes(traj.front(), Ball{{0.0, 0.0}, R - 4.0 * h0});
  const auto outer = region_nodes(traj.front(), Ball{{0.0, 0.0}, R + 4.0 * h0});

  IterationRecord rec;
  std::vector<double> timeTerms, rhsTerms;
  std::optional<std::size_t> finalIndex;
  for (std::size_t n = 1; n < traj.size(); ++n) {
    const double t = traj.time(n);
    if (t > T1 + eps) break;
    if (std::abs(t - T1) <= eps) finalIndex = n;
    if (t <= T0 + eps) continue;
    const double dt = t - traj.time(n - 1);
    rhsTerms.push_back(dt * sup_quotient_power(traj[n], outer, h0, 2, aRhs, qRhs));
    if (t > T0 + mu + eps) timeTerms.push_back(dt * sup_quotient_power(traj[n], inner, h0, 2, aTime, qTime));
  }
  if (!finalIndex) throw Error(fmt::format("T1 = {} is not a stored time", T1));
  rec.lhs_time = pairwise_sum(timeTerms);
  rec.rhs = pairwise_sum(rhsTerms);
  rec.lhs_final = sup_quotient_power(traj[*finalIndex], inner, h0, 1, aFinal, qFinal) / qFinal;
  return rec;
}

}  // namespace fplab
