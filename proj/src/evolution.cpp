#include "fplab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "fplab/reduce.hpp"

namespace fplab {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 80;
constexpr double kSafety = 0.9;

Field with_exterior(const Field& u, std::span<const double> gNext) {
  const Grid& g = *u.grid;
  if (gNext.size() != g.size())
    throw Error(fmt::format("exterior data has {} entries, grid has {} nodes", gNext.size(), g.size()));
  Field v = u;
  for (std::size_t i : g.exterior_nodes()) v.values[i] = gNext[i];
  return v;
}

// Gradient of Phi on the interior: v - u + dt A(v).
std::vector<double> phi_gradient(const Field& v, const Field& u, double dt, const KernelWeights& w, double farField) {
  const Field a = apply_operator(v, w, farField);
  std::vector<double> grad(v.size(), 0.0);
  for (std::size_t i : v.grid->interior_nodes()) grad[i] = (v.values[i] - u.values[i]) + dt * a.values[i];
  return grad;
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
  return pairwise_sum(prod);
}

// Newton direction -H^-1 grad with H = I + dt dA/dv on the interior block.
std::optional<std::vector<double>> newton_direction(const Field& v, double dt, const KernelWeights& w, double farField,
                                                    std::span<const double> grad) {
  const Grid& g = w.grid();
  const auto interior = g.interior_nodes();
  const auto n = static_cast<Eigen::Index>(interior.size());
  std::vector<Eigen::Index> pos(g.size(), -1);
  for (Eigen::Index k = 0; k < n; ++k) pos[interior[static_cast<std::size_t>(k)]] = k;

  const PowerMap& pm = w.power();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  const auto offsets = w.half_offsets();
  parallel_for(interior.size(), w.workers(), [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      const std::size_t i = interior[r];
      const auto row = static_cast<Eigen::Index>(r);
      double diag = pm.j_prime(v.values[i] - farField) * w.row_tail_coeff(i);
      for (const auto& o : offsets) {
        for (int sign : {1, -1}) {
          auto j = g.shifted(i, {sign * o.k[0], sign * o.k[1]});
          if (!j) continue;
          const double c = 2.0 * pm.j_prime(v.values[i] - v.values[*j]) * o.weight;
          diag += c;
          if (pos[*j] >= 0) H(row, pos[*j]) -= dt * c;
        }
      }
      H(row, row) += dt * diag;
    }
  });

  Eigen::VectorXd rhs(n);
  for (Eigen::Index k = 0; k < n; ++k) rhs(k) = -grad[interior[static_cast<std::size_t>(k)]];
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd d = llt.solve(rhs);
  std::vector<double> dir(g.size(), 0.0);
  for (Eigen::Index k = 0; k < n; ++k) dir[interior[static_cast<std::size_t>(k)]] = d(k);
  return dir;
}

}  // namespace

void IbvpSpec::validate() const {
  if (!grid) throw Error("IBVP needs a grid");
  if (grid->dim() != params.dim()) throw Error("IBVP grid and parameter dimensions differ");
  if (!u0.grid || u0.size() != grid->size()) throw Error("IBVP initial datum does not match the grid");
  if (!g) throw Error("IBVP needs exterior data");
  if (!(t0 < t1)) throw Error(fmt::format("IBVP time span must satisfy t0 < t1 (got {}, {})", t0, t1));
  if (dt && !(*dt > 0.0)) throw Error(fmt::format("IBVP time step must be positive (got {})", *dt));
  if (max_iterations < 1) throw Error("IBVP iteration cap must be positive");
}

double default_tolerance(double scale) { return 1e-10 * (1.0 + std::abs(scale)); }

std::vector<double> sample_exterior(const Grid& grid, const ExteriorData& g, double t) {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t i : grid.exterior_nodes()) {
    out[i] = g(grid.node(i), t);
    if (!std::isfinite(out[i])) throw Error(fmt::format("exterior data is not finite at node {}", i));
  }
  return out;
}

double stable_dt(const Field& u, const KernelWeights& w, double farField) {
  const double p = w.params().p();
  const double umax = std::max(u.max_abs(), std::abs(farField));
  const double amp = std::pow(std::max(2.0 * umax, 1.0), p - 2.0);
  const double rows = w.max_interior_row_sum();
  if (!(rows > 0.0)) return std::numeric_limits<double>::infinity();
  return kSafety / ((p - 1.0) * amp * rows);
}

Field explicit_step(const Field& u, double dt, const KernelWeights& w, std::span<const double> gNext,
                    double farField) {
  const double bound = stable_dt(u, w, farField);
  if (!(dt > 0.0)) throw Error(fmt::format("time step must be positive (got {})", dt));
  if (dt > bound)
    throw StabilityError(fmt::format("explicit step dt = {} exceeds the stability bound {}", dt, bound), bound);
  const Field a = apply_operator(u, w, farField);
  Field next = with_exterior(u, gNext);
  for (std::size_t i : u.grid->interior_nodes()) next.values[i] = u.values[i] - dt * a.values[i];
  next.time = u.time + dt;
  return next;
}

std::pair<Field, StepDiagnostics> implicit_step(const Field& u, double dt, const KernelWeights& w,
                                                std::span<const double> gNext, double tol, double farField,
                                                ImplicitMethod method, int maxIterations) {
  if (!(dt > 0.0)) throw Error(fmt::format("time step must be positive (got {})", dt));
  if (!(tol > 0.0)) throw Error(fmt::format("tolerance must be positive (got {})", tol));

  const Grid& g = *u.grid;
  const double scale = dt / g.cell_volume();
  Field v = with_exterior(u, gNext);
  v.time = u.time + dt;

  StepDiagnostics diag;
  diag.dt_used = dt;
  diag.energy_before = energy(v, w, farField);
  double energy_now = diag.energy_before;

  std::vector<double> trial(g.size(), 0.0);
  std::vector<double> shift(g.size(), 0.0);
  double step = 1.0;
  for (;;) {
    const std::vector<double> grad = phi_gradient(v, u, dt, w, farField);
    diag.residual_norm = max_abs(grad);
    if (diag.residual_norm <= tol) break;
    if (diag.iterations >= maxIterations)
      throw ConvergenceError(fmt::format("implicit step did not converge in {} iterations (residual {})",
                                         maxIterations, diag.residual_norm),
                             diag.residual_norm);
    ++diag.iterations;

    std::vector<double> dir;
    if (method == ImplicitMethod::newton) {
      if (auto d = newton_direction(v, dt, w, farField, grad)) dir = std::move(*d);
    }
    const bool newton = !dir.empty();
    if (!newton) {
      dir.resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) dir[i] = -grad[i];
    }
    for (std::size_t i : g.interior_nodes()) shift[i] = v.values[i] - u.values[i];
    const double slope = dot(grad, dir);
    const double lin = dot(shift, dir);
    const double quad = dot(dir, dir);

    double alpha = newton ? 1.0 : std::min(1.0, 2.0 * step);
    bool accepted = false;
    double dE = 0.0;
    for (int h = 0; h <= kMaxHalvings; ++h, alpha *= 0.5) {
      dE = energy_change(v, dir, alpha, w, farField);
      const double dPhi = alpha * lin + 0.5 * alpha * alpha * quad + scale * dE;
      if (dPhi <= kArmijo * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw ConvergenceError(
          fmt::format("implicit step line search stalled (residual {})", diag.residual_norm), diag.residual_norm);
    if (!newton) step = alpha;
    for (std::size_t i : g.interior_nodes()) v.values[i] += alpha * dir[i];
    energy_now += dE;
  }
  diag.energy_after = energy_now;
  return {std::move(v), diag};
}

std::vector<double> implicit_time_grid(double t0, double t1, double dt) {
  const double span = t1 - t0;
  const double ratio = span / dt;
  auto n = static_cast<long>(std::llround(ratio));
  if (n < 1 || std::abs(n * dt - span) > 1e-9 * span) n = static_cast<long>(std::ceil(ratio));
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(n) + 1);
  for (long k = 0; k < n; ++k) times.push_back(t0 + static_cast<double>(k) * dt);
  times.push_back(t1);
  return times;
}

SpaceTimeField solve_ibvp(const IbvpSpec& spec, double tol, std::vector<StepDiagnostics>* diagnostics) {
  spec.validate();
  KernelWeights w(spec.grid, spec.params, spec.workers);
  const Grid& g = *spec.grid;

  Field u(spec.grid, spec.u0.values, spec.t0);
  const auto g0 = sample_exterior(g, spec.g, spec.t0);
  for (std::size_t i : g.exterior_nodes()) u.values[i] = g0[i];

  SpaceTimeField traj(spec.grid);
  traj.push_back(u);

  if (spec.scheme == Scheme::implicit_euler) {
    const double dt = spec.dt.value_or((spec.t1 - spec.t0) / 64.0);
    const auto times = implicit_time_grid(spec.t0, spec.t1, dt);
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double t = times[k];
      const auto gNext = sample_exterior(g, spec.g, t);
      auto [next, diag] = implicit_step(u, t - times[k - 1], w, gNext, tol, spec.far_field_at(t), spec.method,
                                        spec.max_iterations);
      next.time = t;
      if (diagnostics) diagnostics->push_back(diag);
      u = std::move(next);
      traj.push_back(u);
    }
    return traj;
  }

  double t = spec.t0;
  while (t < spec.t1) {
    const double bound = stable_dt(u, w, spec.far_field_at(t));
    double dt = std::min(spec.dt.value_or(bound), bound);
    bool last = false;
    if (t + dt >= spec.t1 || spec.t1 - (t + dt) < 1e-12 * (spec.t1 - spec.t0)) {
      dt = spec.t1 - t;
      last = true;
    }
    const double tn = last ? spec.t1 : t + dt;
    const auto gNext = sample_exterior(g, spec.g, tn);
    Field next = explicit_step(u, dt, w, gNext, spec.far_field_at(t));
    next.time = tn;
    if (diagnostics) diagnostics->push_back({0, 0.0, 0.0, 0.0, dt});
    u = std::move(next);
    traj.push_back(u);
    t = tn;
  }
  return traj;
}

}  // namespace fplab
