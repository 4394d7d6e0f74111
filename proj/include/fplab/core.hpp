#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fplab {

/// Raised for violated preconditions and invalid configurations.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Point = std::array<double, 2>;
using LatticeIndex = std::array<int, 2>;

/// Measure of the unit ball: 2 in dimension 1, pi in dimension 2.
double unit_ball_measure(int dim);

/// PDE parameters: fractional order s, integrability p, spatial dimension.
class Params {
 public:
  Params(double s, double p, int dim = 1);

  double s() const { return s_; }
  double p() const { return p_; }
  int dim() const { return dim_; }
  double sp() const { return s_ * p_; }
  /// (p-1)/p, the order at which the spatial exponent saturates at 1.
  double s_threshold() const { return (p_ - 1.0) / p_; }

 private:
  double s_;
  double p_;
  int dim_;
};

/// Origin-or-elsewhere centered open ball {x : |x - center| < radius}.
struct Ball {
  Point center{0.0, 0.0};
  double radius = 0.0;
};

/// Uniform lattice on [-truncRadius, truncRadius]^dim. Nodes with
/// |x| < domainRadius form the interior (the open ball Omega); the rest carry
/// exterior data.
class Grid {
 public:
  int dim() const { return dim_; }
  double domain_radius() const { return domain_radius_; }
  double trunc_radius() const { return trunc_radius_; }
  double spacing() const { return spacing_; }
  double cell_volume() const { return cell_volume_; }

  /// Lattice half-width K: indices run over [-K, K] on every axis.
  int half_extent() const { return half_extent_; }
  int extent() const { return 2 * half_extent_ + 1; }

  std::size_t size() const { return nodes_.size(); }
  const Point& node(std::size_t i) const { return nodes_[i]; }
  const LatticeIndex& lattice(std::size_t i) const { return lattice_[i]; }
  double radius_of(std::size_t i) const { return radii_[i]; }
  bool interior(std::size_t i) const { return interior_mask_[i] != 0; }
  std::span<const std::size_t> interior_nodes() const { return interior_nodes_; }
  std::span<const std::size_t> exterior_nodes() const { return exterior_nodes_; }

  /// Node at lattice index k, if it lies on the grid.
  std::optional<std::size_t> index_of(const LatticeIndex& k) const;
  /// Node reached from node i by the lattice offset `offset`, if present.
  std::optional<std::size_t> shifted(std::size_t i, const LatticeIndex& offset) const;
  /// Node whose coordinates are within half a spacing of x.
  std::optional<std::size_t> nearest(const Point& x) const;

  double distance(std::size_t i, const Point& x) const;

 private:
  friend std::shared_ptr<const Grid> make_grid(int, double, double, double);
  Grid() = default;

  int dim_ = 1;
  double domain_radius_ = 0.0;
  double trunc_radius_ = 0.0;
  double spacing_ = 0.0;
  double cell_volume_ = 0.0;
  int half_extent_ = 0;
  std::vector<Point> nodes_;
  std::vector<LatticeIndex> lattice_;
  std::vector<double> radii_;
  std::vector<char> interior_mask_;
  std::vector<std::size_t> interior_nodes_;
  std::vector<std::size_t> exterior_nodes_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds the lattice. Throws Error when truncRadius < 2 domainRadius or
/// spacing <= 0.
GridPtr make_grid(int dim, double domainRadius, double truncRadius, double spacing);

/// Nodal values of u at one time instant.
struct Field {
  GridPtr grid;
  std::vector<double> values;
  double time = 0.0;

  Field() = default;
  Field(GridPtr g, std::vector<double> v, double t = 0.0);
  static Field constant(GridPtr g, double c, double t = 0.0);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  double max_abs() const;
  double max_abs_interior() const;
};

/// Nodes strictly inside `region` paired with their values, in node order.
std::vector<std::pair<std::size_t, double>> restrict(const Field& field, const Ball& region);

/// Time-ordered trajectory sharing a single grid.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  explicit SpaceTimeField(GridPtr grid) : grid_(std::move(grid)) {}

  void push_back(Field f);

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return fields_.size(); }
  bool empty() const { return fields_.empty(); }
  const Field& operator[](std::size_t n) const { return fields_[n]; }
  const Field& front() const { return fields_.front(); }
  const Field& back() const { return fields_.back(); }
  double time(std::size_t n) const { return fields_[n].time; }
  auto begin() const { return fields_.begin(); }
  auto end() const { return fields_.end(); }

  /// Value of node i across all stored times.
  std::vector<double> node_history(std::size_t i) const;

 private:
  GridPtr grid_;
  std::vector<Field> fields_;
};

/// Q_{R,r}(x0,t0) = B_R(x0) x (t0 - r, t0].
struct Cylinder {
  Point center{0.0, 0.0};
  double t0 = 0.0;
  double space_radius = 0.0;
  double time_depth = 0.0;

  Cylinder(Point c, double t, double R, double r);
  bool contains(const Point& x, double t) const;
};

}  // namespace fplab
