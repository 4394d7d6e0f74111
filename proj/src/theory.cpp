#include "fplab/theory.hpp"

#include <cmath>

#include <fmt/format.h>

namespace fplab {

ExponentPair exponents(double s, double p) {
  const Params params(s, p, 1);
  if (s < params.s_threshold()) return {s * p / (p - 1.0), 1.0};
  return {1.0, 1.0 / (s * p - (p - 2.0))};
}

double gamma_of_delta(double delta, double s, double p) {
  const double theta = exponents(s, p).theta;
  if (!(delta > 0.0 && delta < theta))
    throw Error(fmt::format("delta must lie in (0, {}) (got {})", theta, delta));
  return 1.0 / (s * p / delta - (p - 2.0));
}

std::vector<LadderEntry> moser_ladder(double s, double p, int iMax) {
  const Params params(s, p, 1);
  if (iMax < 1) throw Error(fmt::format("ladder length must be at least 1 (got {})", iMax));
  const double sp = s * p;
  std::vector<LadderEntry> out;
  out.reserve(static_cast<std::size_t>(iMax) + 1);
  for (int i = 0; i <= iMax; ++i) {
    const double beta = p + i * (p - 1.0);
    const double theta = (s - 1.0 / p) * p / beta + sp * i / beta;
    out.push_back({i, beta, theta});
  }
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    const double next = (out[i].theta * out[i].beta + sp) / out[i + 1].beta;
    if (std::abs(next - out[i + 1].theta) > 1e-12)
      throw Error(fmt::format("internal error: ladder closed form and recursion disagree at i = {}", i + 1));
  }
  return out;
}

GridPtr scaled_grid(const Grid& grid, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(fmt::format("lambda must be positive (got {})", lambda));
  auto out = make_grid(grid.dim(), grid.domain_radius() / lambda, grid.trunc_radius() / lambda,
                       grid.spacing() / lambda);
  bool same = out->size() == grid.size() && out->half_extent() == grid.half_extent();
  for (std::size_t i = 0; same && i < grid.size(); ++i) same = out->interior(i) == grid.interior(i);
  if (!same) throw Error(fmt::format("lambda = {} does not map the lattice onto a lattice of the same layout", lambda));
  return out;
}

ScaledTrajectory scaling_transform(const SpaceTimeField& traj, const Params& params, double lambda, double mu) {
  if (traj.empty()) throw Error("scaling transform needs a trajectory");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(fmt::format("mu must be positive (got {})", mu));
  ScaledTrajectory out;
  out.grid = scaled_grid(*traj.grid(), lambda);
  out.lambda = lambda;
  out.mu = mu;
  out.time_factor = std::pow(mu, params.p() - 2.0) * std::pow(lambda, params.sp());
  out.trajectory = SpaceTimeField(out.grid);
  for (const auto& f : traj) {
    std::vector<double> v(f.values);
    for (double& x : v) x *= mu;
    out.trajectory.push_back(Field(out.grid, std::move(v), f.time / out.time_factor));
  }
  return out;
}

}  // namespace fplab
