#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fplab/core.hpp"
#include "fplab/nonlocal_operator.hpp"

namespace fplab {

enum class Scheme { explicit_euler, implicit_euler };

/// Minimiser used inside an implicit step. Both use the same Armijo
/// backtracking (constant 1e-4, halving) on the same objective; `newton`
/// only changes the search direction.
enum class ImplicitMethod { gradient_descent, newton };

/// Exterior data g(x, t), sampled on exterior nodes.
using ExteriorData = std::function<double(const Point&, double)>;
/// Value of u beyond the truncation radius; spatially constant.
using FarField = std::function<double(double)>;

struct IbvpSpec {
  IbvpSpec(Params prm, GridPtr grd, Field initial, ExteriorData ext, FarField far = {})
      : params(prm), grid(std::move(grd)), u0(std::move(initial)), g(std::move(ext)), far_field(std::move(far)) {}

  Params params;
  GridPtr grid;
  Field u0;  // interior values used; exterior entries ignored
  ExteriorData g;
  FarField far_field;  // empty means 0
  double t0 = 0.0;
  double t1 = 1.0;
  Scheme scheme = Scheme::implicit_euler;
  std::optional<double> dt;  // nullopt: stable step (explicit) or (t1 - t0)/64 (implicit)
  ImplicitMethod method = ImplicitMethod::gradient_descent;
  int workers = 1;
  int max_iterations = 100000;

  void validate() const;
  double far_field_at(double t) const { return far_field ? far_field(t) : 0.0; }
};

struct StepDiagnostics {
  int iterations = 0;
  double residual_norm = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double dt_used = 0.0;
};

/// Explicit step refused because dt exceeds the stability bound.
class StabilityError : public Error {
 public:
  StabilityError(const std::string& what, double bound) : Error(what), bound_(bound) {}
  double bound() const { return bound_; }

 private:
  double bound_;
};

/// Implicit minimiser hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// 1e-10 (1 + scale), the default implicit-step tolerance.
double default_tolerance(double scale);

/// Full-length vector with g(x_i, t) on exterior nodes and 0 elsewhere.
std::vector<double> sample_exterior(const Grid& grid, const ExteriorData& g, double t);

/// 0.9 / [(p-1) max(2 max|u|, 1)^(p-2) max_i (2 sum_j w_ij + rowTail_i)].
/// max|u| also covers the far-field value.
double stable_dt(const Field& u, const KernelWeights& w, double farField = 0.0);

/// u' = u - dt A(u) on the interior, exterior overwritten with gNext.
Field explicit_step(const Field& u, double dt, const KernelWeights& w, std::span<const double> gNext,
                    double farField = 0.0);

/// Backward Euler step: the unique minimiser of
///   Phi(v) = |v - u|^2 / 2 + (dt / h^dim) E(v)
/// over interior values with the exterior fixed to gNext, whose gradient is
/// v - u + dt A(v). Stops when |grad Phi|_inf <= tol.
std::pair<Field, StepDiagnostics> implicit_step(const Field& u, double dt, const KernelWeights& w,
                                                std::span<const double> gNext, double tol, double farField = 0.0,
                                                ImplicitMethod method = ImplicitMethod::gradient_descent,
                                                int maxIterations = 100000);

/// Trajectory from t0 to t1. The first stored field is u0 with exterior g(t0);
/// every step to time t uses g(t) and the far field at t.
SpaceTimeField solve_ibvp(const IbvpSpec& spec, double tol, std::vector<StepDiagnostics>* diagnostics = nullptr);

/// Step times t0 + k dt for the implicit scheme, ending exactly at t1.
std::vector<double> implicit_time_grid(double t0, double t1, double dt);

}  // namespace fplab
