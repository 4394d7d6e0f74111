#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fplab/core.hpp"

namespace fplab {

/// J_beta(t) = |t|^(beta-2) t, with J_beta(0) = 0.
double j_beta(double t, double beta);

/// Fast evaluation of t -> J_p(t), t -> |t|^p and t -> J_p'(t) = (p-1)|t|^(p-2),
/// with integer exponents special-cased.
class PowerMap {
 public:
  explicit PowerMap(double p);

  double j(double t) const {
    switch (mode_) {
      case Mode::two:
        return t;
      case Mode::three:
        return std::abs(t) * t;
      case Mode::four:
        return t * t * t;
      default:
        return t == 0.0 ? 0.0 : std::pow(std::abs(t), p_ - 2.0) * t;
    }
  }
  double abs_pow(double t) const {
    const double a = std::abs(t);
    switch (mode_) {
      case Mode::two:
        return a * a;
      case Mode::three:
        return a * a * a;
      case Mode::four:
        return (a * a) * (a * a);
      default:
        return std::pow(a, p_);
    }
  }
  double j_prime(double t) const {
    switch (mode_) {
      case Mode::two:
        return 1.0;
      case Mode::three:
        return 2.0 * std::abs(t);
      case Mode::four:
        return 3.0 * t * t;
      default:
        return t == 0.0 ? 0.0 : (p_ - 1.0) * std::pow(std::abs(t), p_ - 2.0);
    }
  }
  /// |a + d|^p - |a|^p without cancellation when |d| << |a|.
  double abs_pow_change(double a, double d) const;

  double p() const { return p_; }

 private:
  enum class Mode { two, three, four, general };
  double p_;
  Mode mode_;
};

/// Lattice offset k paired with its kernel weight h^dim / |k h|^(dim+sp).
struct WeightedOffset {
  LatticeIndex k;
  double weight;
};

/// Discretised kernel |h|^-(N+sp) on a grid. Weights depend only on the
/// lattice offset, so only one representative of each +k/-k pair is stored.
class KernelWeights {
 public:
  KernelWeights(GridPtr grid, const Params& params, int workers = 1);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Params& params() const { return params_; }
  const PowerMap& power() const { return power_; }

  int workers() const { return workers_; }
  void set_workers(int w) { workers_ = w < 1 ? 1 : w; }

  /// Offsets in a fixed half space (k > 0 lexicographically), in fixed order.
  std::span<const WeightedOffset> half_offsets() const { return half_offsets_; }

  /// spacing^dim / |x_i - x_j|^(dim+sp); zero on the diagonal.
  double pair_weight(std::size_t i, std::size_t j) const;
  double offset_weight(const LatticeIndex& k) const;

  /// 2 (dim w_dim / sp) rho_i^(-sp) with rho_i = truncRadius - |x_i|; the
  /// closed form of 2 * integral over |h| > rho_i of |h|^-(dim+sp). Zero on
  /// exterior nodes.
  double row_tail_coeff(std::size_t i) const { return row_tail_[i]; }

  /// 2 sum_{j != i} pairWeight(i,j) + rowTailCoeff(i).
  double row_sum(std::size_t i) const { return row_sum_[i]; }
  double max_interior_row_sum() const { return max_row_sum_; }

 private:
  GridPtr grid_;
  Params params_;
  PowerMap power_;
  int workers_;
  std::vector<WeightedOffset> half_offsets_;
  std::vector<double> row_tail_;
  std::vector<double> row_sum_;
  double max_row_sum_ = 0.0;
};

/// Discrete (-Delta_p)^s u at interior nodes (exterior entries are 0):
/// 2 sum_j J_p(u_i - u_j) w_ij + J_p(u_i - farField) rowTail_i, with the +k
/// and -k neighbours combined before accumulation and a pairwise reduction
/// over offsets.
Field apply_operator(const Field& u, const KernelWeights& w, double farField = 0.0);

/// Convex energy whose gradient with respect to interior values is
/// spacing^dim * apply_operator:
///   (1/p) sum_{i != j} |u_i - u_j|^p h^dim w_ij + (1/p) sum_{i int} |u_i - g|^p h^dim rowTail_i.
double energy(const Field& u, const KernelWeights& w, double farField = 0.0);

/// energy(u + step * direction) - energy(u) for a direction supported on
/// interior nodes, evaluated term by term so small changes are not lost to
/// cancellation.
double energy_change(const Field& u, std::span<const double> direction, double step, const KernelWeights& w,
                     double farField = 0.0);

struct TailQuery {
  double q = 1.0;
  double alpha = 1.0;
  Point x0{0.0, 0.0};
  double R = 1.0;

  TailQuery(double q, double alpha, Point x0, double R);
};

/// Tail_{q,alpha}(u; x0, R) = [R^alpha int_{|x-x0|>R} |u|^q / |x-x0|^(N+alpha)]^(1/q).
/// Lattice cells up to the truncation radius carry the nodal values; beyond
/// it u equals farField and the remainder is integrated in closed form (dim 1)
/// or by Gauss quadrature (dim 2).
double tail(const Field& u, const TailQuery& tq, double farField = 0.0);

}  // namespace fplab
