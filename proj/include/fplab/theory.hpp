#pragma once

#include <vector>

#include "fplab/core.hpp"

namespace fplab {

/// Spatial and temporal Holder thresholds Theta(s,p), Gamma(s,p).
struct ExponentPair {
  double theta = 0.0;
  double gamma = 0.0;
};

/// s <  (p-1)/p: Theta = sp/(p-1), Gamma = 1
/// s >= (p-1)/p: Theta = 1,        Gamma = 1/(sp - (p-2))
ExponentPair exponents(double s, double p);

/// 1 / (sp/delta - (p-2)) for 0 < delta < Theta(s,p).
double gamma_of_delta(double delta, double s, double p);

struct LadderEntry {
  int i = 0;
  double beta = 0.0;
  double theta = 0.0;
};

/// beta_i = p + i(p-1), theta_i = ((s - 1/p) p + s p i) / beta_i for i = 0..iMax.
/// The closed form is checked against theta_{i+1} = (theta_i beta_i + sp)/beta_{i+1}.
std::vector<LadderEntry> moser_ladder(double s, double p, int iMax);

/// Image of a trajectory under u -> mu u(lambda x, mu^(p-2) lambda^(sp) t):
/// the grid shrinks by lambda, times divide by the dilation factor, values
/// are multiplied by mu node for node.
struct ScaledTrajectory {
  GridPtr grid;
  SpaceTimeField trajectory;
  double lambda = 1.0;
  double mu = 1.0;
  double time_factor = 1.0;  // mu^(p-2) lambda^(sp); t' = t / time_factor

  double map_time(double t) const { return t / time_factor; }
};

/// Rescaled grid with the same lattice layout: spacing and radii divided by lambda.
GridPtr scaled_grid(const Grid& grid, double lambda);

ScaledTrajectory scaling_transform(const SpaceTimeField& traj, const Params& params, double lambda, double mu);

}  // namespace fplab
