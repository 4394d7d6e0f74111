#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fplab/core.hpp"

namespace fplab {

/// Dyadic offset magnitudes h_k = spacing * 2^k. Each offset is applied along
/// every lattice direction (both signs; axes and diagonals in dim 2).
struct HLadder {
  double spacing = 0.0;
  std::vector<int> multiples;  // 1, 2, 4, ...

  /// All h_k = spacing 2^k with h_k <= hMax.
  static HLadder dyadic(double spacing, double hMax);
  /// All h_k = spacing 2^k with h_k < hMax.
  static HLadder dyadic_below(double spacing, double hMax);

  std::vector<double> offsets() const;
  bool empty() const { return multiples.empty(); }
};

/// Lattice directions used to sample "all h": +-e1 in dim 1; axes and
/// diagonals (both signs) in dim 2.
std::vector<LatticeIndex> lattice_directions(int dim);

struct FitPoint {
  double x = 0.0;  // h or tau
  double s = 0.0;  // S(h) or S(tau)
  bool used = false;
};

struct ExponentFit {
  std::optional<double> exponent;  // empty when saturated
  double intercept = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
  bool saturated = false;
  std::vector<FitPoint> points;
};

/// 1e-9 (1 + max|u|), the level below which differences count as solver noise.
double default_fit_floor(double scale);

/// Least-squares fit of log S against log x over points with S > floor.
ExponentFit fit_power_law(std::vector<FitPoint> points, double floor);

/// (sum_{i != j in region} |u_i - u_j|^p / |x_i - x_j|^(dim+sp) spacing^(2 dim))^(1/p).
double sobolev_seminorm(const Field& u, const Ball& region, double s, double p);

/// max over ladder offsets and directions of
/// (sum_{i in region} |delta^2_h u(x_i)|^q spacing^dim)^(1/q) / |h|^beta,
/// delta^2_h u(x) = u(x + 2h) + u(x) - 2 u(x + h).
double besov_second(const Field& u, const Ball& region, double beta, double q, const HLadder& ladder);

/// As besov_second with first differences delta_h u = u(x + h) - u(x).
double besov_first(const Field& u, const Ball& region, double beta, double q, const HLadder& ladder);

/// S(h_k) = max over region nodes and directions of |delta_h u|, fitted in log-log.
ExponentFit holder_fit_space(const Field& u, const Ball& region, const HLadder& ladder, double floor);

/// Temporal analogue at one node: stored times in [tMin, tMax] must be equally
/// spaced; lags are 1, 2, 4, ... steps and S(tau) is the largest difference over
/// admissible pairs.
ExponentFit holder_fit_time(const SpaceTimeField& traj, std::size_t node, double tMin, double tMax, double floor);

/// Mean of |u - mean| over the nodes and stored times inside the cylinder,
/// with every (node, time) pair weighted equally.
double campanato_oscillation(const SpaceTimeField& traj, const Cylinder& cyl);

struct SpaceTimePoint {
  Point x{0.0, 0.0};
  double t = 0.0;
};

/// Anisotropic metric adapted to the exponents:
///   s >= (p-1)/p: |x - y| + |t - tau|^(1/(sp - delta(p-2))), needs sp - delta(p-2) > 1
///   s <  (p-1)/p: |x - y|^(sp - (p-2)delta) + |t - tau|,     needs sp - (p-2)delta <= 1
double parabolic_distance(const SpaceTimePoint& a, const SpaceTimePoint& b, double s, double p, double delta);

struct PoincareSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = sum_region |u - mean(u eta)|^p spacing^dim,
/// rhs = 2^(dim+sp)/w_dim |eta|_inf^p r^sp sum_{i != j} |u_i - u_j|^p / |x_i - x_j|^(dim+sp) spacing^(2 dim).
/// Means are counting averages over the region nodes.
PoincareSides poincare_check(const Field& u, const Ball& region, const Field& eta, double s, double p);

struct IterationMode {
  enum class Kind { integrability, ladder };
  Kind kind = Kind::integrability;
  double q = 2.0;      // integrability mode
  double beta = 2.0;   // ladder mode
  double theta = 0.0;  // ladder mode

  static IterationMode integrability(double q) { return {Kind::integrability, q, 2.0, 0.0}; }
  static IterationMode ladder(double beta, double theta) { return {Kind::ladder, 2.0, beta, theta}; }
};

struct IterationRecord {
  double lhs_time = 0.0;
  double lhs_final = 0.0;
  double rhs = 0.0;
};

/// The three quantities of the discrete-derivative iteration: a time-summed
/// second-difference norm on B_{R-4h0}, the final-time first-difference term,
/// and the time-summed right side on B_{R+4h0} (without the additive 1 and the
/// unknown constant). Offsets range over the dyadic ladder below h0, times over
/// stored steps (right-endpoint rule).
IterationRecord iteration_monitor(const SpaceTimeField& traj, const Params& params, const IterationMode& mode,
                                  double h0, double R, double T0, double T1, double mu);

}  // namespace fplab
