#include "fplab/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace fplab {

double unit_ball_measure(int dim) {
  switch (dim) {
    case 1:
      return 2.0;
    case 2:
      return std::numbers::pi;
    default:
      throw Error(fmt::format("dim must be 1 or 2 (got {})", dim));
  }
}

Params::Params(double s, double p, int dim) : s_(s), p_(p), dim_(dim) {
  if (!(s > 0.0 && s < 1.0)) throw Error(fmt::format("s must lie in (0,1) (got {})", s));
  if (!(p >= 2.0) || !std::isfinite(p)) throw Error(fmt::format("p must lie in [2,inf) (got {})", p));
  if (dim != 1 && dim != 2) throw Error(fmt::format("dim must be 1 or 2 (got {})", dim));
}

GridPtr make_grid(int dim, double domainRadius, double truncRadius, double spacing) {
  if (dim != 1 && dim != 2) throw Error(fmt::format("dim must be 1 or 2 (got {})", dim));
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw Error(fmt::format("grid spacing must be positive (got {})", spacing));
  if (!(domainRadius > 0.0)) throw Error(fmt::format("domain radius must be positive (got {})", domainRadius));
  if (!(truncRadius >= 2.0 * domainRadius))
    throw Error(fmt::format("truncation radius {} must be at least twice the domain radius {}", truncRadius,
                            domainRadius));

  auto grid = std::shared_ptr<Grid>(new Grid());
  grid->dim_ = dim;
  grid->domain_radius_ = domainRadius;
  grid->trunc_radius_ = truncRadius;
  grid->spacing_ = spacing;
  grid->cell_volume_ = dim == 1 ? spacing : spacing * spacing;
  grid->half_extent_ = static_cast<int>(std::floor(truncRadius / spacing * (1.0 + 1e-12)));
  if (grid->half_extent_ < 1) throw Error("grid spacing exceeds the truncation radius");

  const int K = grid->half_extent_;
  const int ny = dim == 2 ? 2 * K + 1 : 1;
  const std::size_t count = static_cast<std::size_t>(2 * K + 1) * static_cast<std::size_t>(ny);
  grid->nodes_.reserve(count);
  grid->lattice_.reserve(count);
  const double r2 = domainRadius * domainRadius;
  // Row-major in (kx, ky); dim 1 has ky = 0.
  for (int kx = -K; kx <= K; ++kx) {
    for (int j = 0; j < ny; ++j) {
      const int ky = dim == 2 ? j - K : 0;
      const Point x{kx * spacing, ky * spacing};
      const double n2 = x[0] * x[0] + x[1] * x[1];
      const std::size_t idx = grid->nodes_.size();
      grid->nodes_.push_back(x);
      grid->lattice_.push_back({kx, ky});
      grid->radii_.push_back(std::sqrt(n2));
      const bool inside = n2 < r2;
      grid->interior_mask_.push_back(inside ? 1 : 0);
      (inside ? grid->interior_nodes_ : grid->exterior_nodes_).push_back(idx);
    }
  }
  return grid;
}

std::optional<std::size_t> Grid::index_of(const LatticeIndex& k) const {
  const int K = half_extent_;
  if (k[0] < -K || k[0] > K) return std::nullopt;
  if (dim_ == 1) {
    if (k[1] != 0) return std::nullopt;
    return static_cast<std::size_t>(k[0] + K);
  }
  if (k[1] < -K || k[1] > K) return std::nullopt;
  return static_cast<std::size_t>(k[0] + K) * static_cast<std::size_t>(2 * K + 1) +
         static_cast<std::size_t>(k[1] + K);
}

std::optional<std::size_t> Grid::shifted(std::size_t i, const LatticeIndex& offset) const {
  const auto& k = lattice_[i];
  return index_of({k[0] + offset[0], k[1] + offset[1]});
}

std::optional<std::size_t> Grid::nearest(const Point& x) const {
  const LatticeIndex k{static_cast<int>(std::lround(x[0] / spacing_)),
                       dim_ == 2 ? static_cast<int>(std::lround(x[1] / spacing_)) : 0};
  auto idx = index_of(k);
  if (!idx) return std::nullopt;
  const auto& y = nodes_[*idx];
  if (std::abs(y[0] - x[0]) > 0.5 * spacing_ || std::abs(y[1] - x[1]) > 0.5 * spacing_) return std::nullopt;
  return idx;
}

double Grid::distance(std::size_t i, const Point& x) const {
  const double dx = nodes_[i][0] - x[0];
  const double dy = nodes_[i][1] - x[1];
  return std::sqrt(dx * dx + dy * dy);
}

Field::Field(GridPtr g, std::vector<double> v, double t) : grid(std::move(g)), values(std::move(v)), time(t) {
  if (!grid) throw Error("field requires a grid");
  if (values.size() != grid->size())
    throw Error(fmt::format("field has {} values but the grid has {} nodes", values.size(), grid->size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i])) throw Error(fmt::format("field value at node {} is not finite", i));
  if (!std::isfinite(time)) throw Error("field time stamp is not finite");
}

Field Field::constant(GridPtr g, double c, double t) {
  const std::size_t n = g->size();
  return Field(std::move(g), std::vector<double>(n, c), t);
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double Field::max_abs_interior() const {
  double m = 0.0;
  for (std::size_t i : grid->interior_nodes()) m = std::max(m, std::abs(values[i]));
  return m;
}

std::vector<std::pair<std::size_t, double>> restrict(const Field& field, const Ball& region) {
  std::vector<std::pair<std::size_t, double>> out;
  if (!(region.radius > 0.0)) return out;
  const Grid& g = *field.grid;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.distance(i, region.center) < region.radius) out.emplace_back(i, field.values[i]);
  return out;
}

void SpaceTimeField::push_back(Field f) {
  if (!grid_) grid_ = f.grid;
  if (f.grid != grid_) throw Error("all fields of a trajectory must share one grid");
  if (!fields_.empty() && !(f.time > fields_.back().time))
    throw Error(fmt::format("trajectory times must increase strictly ({} after {})", f.time, fields_.back().time));
  fields_.push_back(std::move(f));
}

std::vector<double> SpaceTimeField::node_history(std::size_t i) const {
  std::vector<double> out;
  out.reserve(fields_.size());
  for (const auto& f : fields_) out.push_back(f.values[i]);
  return out;
}

Cylinder::Cylinder(Point c, double t, double R, double r) : center(c), t0(t), space_radius(R), time_depth(r) {
  if (!(R > 0.0)) throw Error(fmt::format("cylinder radius must be positive (got {})", R));
  if (!(r > 0.0)) throw Error(fmt::format("cylinder time depth must be positive (got {})", r));
}

bool Cylinder::contains(const Point& x, double t) const {
  const double dx = x[0] - center[0];
  const double dy = x[1] - center[1];
  return std::sqrt(dx * dx + dy * dy) < space_radius && t > t0 - time_depth && t <= t0;
}

}  // namespace fplab
