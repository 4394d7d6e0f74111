#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "fplab/evolution.hpp"
#include "fplab/rng.hpp"

using namespace fplab;

namespace {

// Dense p = 2 operator from coordinates: (A u)_i = sum_j L_ij u_j - far * tail_i.
struct Dense {
  Eigen::MatrixXd L;
  Eigen::VectorXd tail;
};

Dense dense(const Grid& g, double s) {
  const auto n = static_cast<Eigen::Index>(g.size());
  const int d = g.dim();
  Dense o{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (std::size_t i : g.interior_nodes()) {
    const auto I = static_cast<Eigen::Index>(i);
    o.tail(I) = 2.0 * d * unit_ball_measure(d) / (2.0 * s) *
                std::pow(g.trunc_radius() - std::hypot(g.node(i)[0], g.node(i)[1]), -2.0 * s);
    o.L(I, I) = o.tail(I);
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j == i) continue;
      const double r = std::hypot(g.node(i)[0] - g.node(j)[0], g.node(i)[1] - g.node(j)[1]);
      const double w = 2.0 * std::pow(g.spacing(), d) / std::pow(r, d + 2.0 * s);
      o.L(I, static_cast<Eigen::Index>(j)) = -w;
      o.L(I, I) += w;
    }
  }
  return o;
}

// Backward Euler by a dense solve over the interior block.
std::vector<double> dense_implicit(const Grid& g, const Dense& o, const std::vector<double>& u,
                                   const std::vector<double>& gNext, double dt, double far) {
  const auto in = g.interior_nodes();
  const auto m = static_cast<Eigen::Index>(in.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd b(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto I = static_cast<Eigen::Index>(in[static_cast<std::size_t>(a)]);
    b(a) = u[static_cast<std::size_t>(I)] + dt * far * o.tail(I);
    for (std::size_t j : g.exterior_nodes()) b(a) -= dt * o.L(I, static_cast<Eigen::Index>(j)) * gNext[j];
    for (Eigen::Index c = 0; c < m; ++c) M(a, c) += dt * o.L(I, static_cast<Eigen::Index>(in[static_cast<std::size_t>(c)]));
  }
  const Eigen::VectorXd x = M.partialPivLu().solve(b);
  std::vector<double> v = gNext;
  for (Eigen::Index a = 0; a < m; ++a) v[in[static_cast<std::size_t>(a)]] = x(a);
  return v;
}

std::vector<double> random_values(const Grid& g, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  CounterRng rng(seed);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.uniform(i, lo, hi);
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("constant states are stationary") {
  auto g = make_grid(1, 1.0, 2.0, 0.125);
  KernelWeights w(g, Params(0.5, 3.0, 1));
  const Field u = Field::constant(g, 0.8);
  const std::vector<double> ext(g->size(), 0.8);
  const Field e = explicit_step(u, 0.5 * stable_dt(u, w, 0.8), w, ext, 0.8);
  for (double v : e.values) CHECK(v == 0.8);
  for (auto method : {ImplicitMethod::gradient_descent, ImplicitMethod::newton}) {
    const auto [v, d] = implicit_step(u, 0.1, w, ext, 1e-10, 0.8, method);
    for (double x : v.values) CHECK(x == 0.8);
    CHECK(d.iterations <= 1);
    CHECK(v.time == doctest::Approx(0.1));
  }
}

TEST_CASE("explicit step matches the dense matrix for p = 2") {
  for (int dim : {1, 2}) {
    auto g = dim == 1 ? make_grid(1, 1.0, 2.0, 0.125) : make_grid(2, 1.0, 2.0, 0.25);
    const double s = 0.35, far = 0.4;
    KernelWeights w(g, Params(s, 2.0, dim));
    const auto o = dense(*g, s);
    const auto u0 = random_values(*g, 1);
    const auto ext = random_values(*g, 2);
    const double dt = 0.5 * stable_dt(Field(g, u0), w, far);
    const Field v = explicit_step(Field(g, u0), dt, w, ext, far);
    const Eigen::VectorXd uu = Eigen::Map<const Eigen::VectorXd>(u0.data(), static_cast<Eigen::Index>(u0.size()));
    const Eigen::VectorXd Lu = o.L * uu;
    for (std::size_t i : g->interior_nodes()) {
      const auto I = static_cast<Eigen::Index>(i);
      CHECK(std::abs(v[i] - (u0[i] - dt * (Lu(I) - far * o.tail(I)))) <= 1e-12);
    }
    for (std::size_t i : g->exterior_nodes()) CHECK(v[i] == ext[i]);
  }
}

TEST_CASE("explicit step refuses unstable dt") {
  auto g = make_grid(1, 1.0, 2.0, 0.125);
  KernelWeights w(g, Params(0.5, 2.0, 1));
  const Field u = Field::constant(g, 0.0);
  const double bound = stable_dt(u, w);
  try {
    (void)explicit_step(u, 2.0 * bound, w, std::vector<double>(g->size(), 0.0));
    FAIL("expected StabilityError");
  } catch (const StabilityError& e) {
    CHECK(e.bound() == bound);
  }
}

TEST_CASE("stable_dt scaling") {
  auto g = make_grid(1, 1.0, 2.0, 0.125);
  KernelWeights w2(g, Params(0.5, 2.0, 1));
  CHECK(stable_dt(Field::constant(g, 0.1), w2) == stable_dt(Field::constant(g, 30.0), w2));
  CHECK(stable_dt(Field::constant(g, 0.0), w2) == doctest::Approx(0.9 / w2.max_interior_row_sum()));

  KernelWeights w4(g, Params(0.5, 4.0, 1));
  const double a = stable_dt(Field::constant(g, 1.0), w4), b = stable_dt(Field::constant(g, 2.0), w4);
  CHECK(a / b == doctest::Approx(4.0));

  auto fine = make_grid(1, 1.0, 2.0, 0.0625);
  KernelWeights wf(fine, Params(0.5, 2.0, 1));
  const double ratio = stable_dt(Field::constant(g, 0.0), w2) / stable_dt(Field::constant(fine, 0.0), wf);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("implicit step matches a dense linear solve for p = 2") {
  for (int dim : {1, 2}) {
    auto g = dim == 1 ? make_grid(1, 1.0, 2.0, 0.125) : make_grid(2, 1.0, 2.0, 0.25);
    const double s = 0.6, far = -0.3, tol = 1e-11, dt = 0.05;
    KernelWeights w(g, Params(s, 2.0, dim));
    const auto o = dense(*g, s);
    const auto u0 = random_values(*g, 3);
    const auto ext = random_values(*g, 4);
    const auto ref = dense_implicit(*g, o, u0, ext, dt, far);
    for (auto method : {ImplicitMethod::gradient_descent, ImplicitMethod::newton}) {
      const auto [v, d] = implicit_step(Field(g, u0), dt, w, ext, tol, far, method);
      CHECK(max_diff(v.values, ref) <= 10.0 * tol);
      CHECK(d.residual_norm <= tol);
      CHECK(d.dt_used == dt);
    }
  }
}

TEST_CASE("implicit step solves the nonlinear optimality condition") {
  auto g = make_grid(1, 1.0, 2.0, 0.125);
  for (double p : {2.5, 3.0, 4.0}) {
    KernelWeights w(g, Params(0.4, p, 1));
    const double tol = 1e-10, dt = 0.02, far = 0.25;
    const auto ext = random_values(*g, 6);
    const Field u(g, random_values(*g, 5));
    for (auto method : {ImplicitMethod::gradient_descent, ImplicitMethod::newton}) {
      const auto [v, d] = implicit_step(u, dt, w, ext, tol, far, method);
      const Field a = apply_operator(v, w, far);
      double res = 0.0;
      for (std::size_t i : g->interior_nodes()) res = std::max(res, std::abs(v[i] - u[i] + dt * a[i]));
      CHECK(res <= tol);
      // energy dissipation with the exterior already at its new values
      Field start = u;
      for (std::size_t i : g->exterior_nodes()) start[i] = ext[i];
      double l1 = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) l1 += std::abs(v[i] - start[i]);
      CHECK(d.energy_after <= d.energy_before + tol * l1);
      CHECK(d.energy_before == doctest::Approx(energy(start, w, far)).epsilon(1e-12));
      CHECK(d.energy_after == doctest::Approx(energy(v, w, far)).epsilon(1e-9));
    }
  }
}

TEST_CASE("implicit step reports non-convergence") {
  auto g = make_grid(1, 1.0, 2.0, 0.125);
  KernelWeights w(g, Params(0.4, 3.0, 1));
  const Field u(g, random_values(*g, 8));
  try {
    (void)implicit_step(u, 0.5, w, random_values(*g, 9), 1e-14, 0.0, ImplicitMethod::gradient_descent, 2);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 1e-14);
  }
}

TEST_CASE("implicit time grid") {
  const auto a = implicit_time_grid(0.0, 1.0, 0.25);
  REQUIRE(a.size() == 5);
  CHECK(a.back() == 1.0);
  const auto b = implicit_time_grid(-1.0, 0.0, 0.3);
  CHECK(b.size() == 5);
  CHECK(b.back() == 0.0);
  const auto c = implicit_time_grid(0.0, 0.1, 0.01);
  CHECK(c.size() == 11);
  CHECK(c.back() == 0.1);
}

TEST_CASE("IBVP validation") {
  auto g = make_grid(1, 1.0, 2.0, 0.25);
  IbvpSpec spec(Params(0.5, 2.0, 1), g, Field::constant(g, 0.0), [](const Point&, double) { return 0.0; });
  CHECK_NOTHROW(spec.validate());
  spec.t1 = 0.0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.t1 = 1.0;
  spec.dt = -1.0;
  CHECK_THROWS_AS(spec.validate(), Error);
  IbvpSpec bad(Params(0.5, 2.0, 2), g, Field::constant(g, 0.0), [](const Point&, double) { return 0.0; });
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("constant data give a constant trajectory") {
  auto g = make_grid(2, 1.0, 2.0, 0.25);
  for (auto scheme : {Scheme::explicit_euler, Scheme::implicit_euler}) {
    IbvpSpec spec(Params(0.5, 3.0, 2), g, Field::constant(g, 1.5), [](const Point&, double) { return 1.5; },
                  [](double) { return 1.5; });
    spec.t1 = 0.05;
    spec.scheme = scheme;
    const auto traj = solve_ibvp(spec, 1e-10);
    CHECK(traj.size() >= 2);
    CHECK(traj.back().time == 0.05);
    for (const auto& f : traj)
      for (double v : f.values) CHECK(v == 1.5);
  }
}

TEST_CASE("implicit trajectory follows the dense backward Euler steps") {
  auto g = make_grid(1, 1.0, 2.0, 0.125);
  const double s = 0.45, tol = 1e-11;
  const auto o = dense(*g, s);
  const auto ext = [](const Point& x, double t) { return std::cos(3.0 * x[0]) * (1.0 + t); };
  const auto far = [](double t) { return 0.5 - t; };
  IbvpSpec spec(Params(s, 2.0, 1), g, Field(g, random_values(*g, 12)), ext, far);
  spec.t1 = 0.2;
  spec.dt = 0.05;
  std::vector<StepDiagnostics> diag;
  const auto traj = solve_ibvp(spec, tol, &diag);
  REQUIRE(traj.size() == 5);
  CHECK(diag.size() == 4);
  for (std::size_t i : g->exterior_nodes()) CHECK(traj[0][i] == ext(g->node(i), 0.0));
  for (std::size_t n = 1; n < traj.size(); ++n) {
    const double t = traj.time(n);
    const auto ref = dense_implicit(*g, o, traj[n - 1].values, sample_exterior(*g, ext, t), 0.05, far(t));
    CHECK(max_diff(traj[n].values, ref) <= 10.0 * tol);
  }
}

TEST_CASE("explicit trajectory respects the stability bound") {
  auto g = make_grid(1, 1.0, 2.0, 0.125);
  IbvpSpec spec(Params(0.5, 3.0, 1), g, Field(g, random_values(*g, 14)), [](const Point&, double) { return 0.3; });
  spec.scheme = Scheme::explicit_euler;
  spec.t1 = 0.02;
  spec.dt = 1.0;
  std::vector<StepDiagnostics> diag;
  const auto traj = solve_ibvp(spec, 1e-10, &diag);
  CHECK(traj.back().time == doctest::Approx(0.02));
  REQUIRE(!diag.empty());
  for (const auto& d : diag) CHECK(d.dt_used < 1.0);
}

TEST_CASE("ordering and global bound") {
  auto g = make_grid(1, 1.0, 2.0, 0.125);
  const double tol = 1e-10, M = 2.0;
  const auto lo = random_values(*g, 20, -M, M - 1.0);
  std::vector<double> hi(lo);
  CounterRng gap(21);
  for (std::size_t i = 0; i < hi.size(); ++i) hi[i] += gap.uniform(i);
  const auto mk = [&](const std::vector<double>& v, double shift) {
    IbvpSpec spec(Params(0.3, 3.0, 1), g, Field(g, v),
                  [v, g](const Point& x, double) { return v[*g->nearest(x)]; },
                  [shift](double) { return shift; });
    spec.t1 = 0.1;
    spec.dt = 0.02;
    spec.method = ImplicitMethod::newton;
    return solve_ibvp(spec, tol);
  };
  const auto a = mk(lo, -1.0), b = mk(hi, 0.5);
  for (std::size_t n = 0; n < a.size(); ++n)
    for (std::size_t i = 0; i < g->size(); ++i) {
      CHECK(a[n][i] <= b[n][i] + 10.0 * tol);
      CHECK(std::abs(b[n][i]) <= M + 10.0 * tol);
    }
}
