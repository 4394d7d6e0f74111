#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "fplab/rng.hpp"
#include "fplab/seminorm_lab.hpp"

using namespace fplab;

namespace {

Field sample(const GridPtr& g, const std::function<double(const Point&)>& f) {
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g->node(i));
  return Field(g, v);
}

SpaceTimeField history(const GridPtr& g, const std::vector<double>& times,
                       const std::function<double(const Point&, double)>& f) {
  SpaceTimeField traj(g);
  for (double t : times) {
    Field u = sample(g, [&](const Point& x) { return f(x, t); });
    u.time = t;
    traj.push_back(u);
  }
  return traj;
}

std::vector<double> uniform_times(double t0, double t1, int n) {
  std::vector<double> t;
  for (int k = 0; k <= n; ++k) t.push_back(t0 + (t1 - t0) * k / n);
  return t;
}

}  // namespace

TEST_CASE("ladders") {
  const auto a = HLadder::dyadic(0.125, 0.5);
  CHECK(a.multiples == std::vector<int>{1, 2, 4});
  CHECK(a.offsets() == std::vector<double>{0.125, 0.25, 0.5});
  CHECK(HLadder::dyadic_below(0.125, 0.5).multiples == std::vector<int>{1, 2});
  CHECK(HLadder::dyadic(0.125, 0.1).empty());
  CHECK(lattice_directions(1).size() == 2);
  CHECK(lattice_directions(2).size() == 8);
}

TEST_CASE("power-law fit") {
  std::vector<FitPoint> pts;
  for (double x : {0.1, 0.2, 0.4, 0.8}) pts.push_back({x, 3.0 * std::pow(x, 0.6), false});
  const auto f = fit_power_law(pts, 1e-9);
  REQUIRE(f.exponent);
  CHECK(*f.exponent == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.points_used == 4);

  pts[0].s = pts[1].s = pts[2].s = 0.0;
  const auto sat = fit_power_law(pts, 1e-9);
  CHECK(sat.saturated);
  CHECK_FALSE(sat.exponent);
  CHECK(sat.points_used == 0);
  for (const auto& pt : sat.points) CHECK_FALSE(pt.used);
}

TEST_CASE("sobolev seminorm") {
  auto g = make_grid(1, 1.0, 4.0, 1.0);
  CHECK(sobolev_seminorm(Field::constant(g, 2.0), Ball{{0.0, 0.0}, 3.0}, 0.5, 2.0) == 0.0);
  const Field u = sample(g, [](const Point& x) { return x[0] == 1.0 ? 1.0 : 0.0; });
  // nodes {0, 1}: (2 * 1 / 1)^(1/2)
  CHECK(sobolev_seminorm(u, Ball{{0.5, 0.0}, 0.6}, 0.5, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  auto g2 = make_grid(2, 1.0, 2.0, 0.125);
  const Field r = sample(g2, [](const Point& x) { return std::sin(4.0 * x[0]) * x[1]; });
  double prev = 0.0;
  for (double rad : {0.2, 0.4, 0.7, 1.0}) {
    const double v = sobolev_seminorm(r, Ball{{0.1, 0.0}, rad}, 0.4, 3.0);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("second-difference Besov quantity") {
  auto g = make_grid(1, 1.0, 2.0, 0.25);
  const HLadder one{0.25, {1}};
  const Field affine = sample(g, [](const Point& x) { return 3.0 * x[0] - 1.0; });
  CHECK(besov_second(affine, Ball{{0.0, 0.0}, 0.6}, 1.5, 2.0, HLadder::dyadic(0.25, 0.5)) == doctest::Approx(0.0));

  // |x| at the node -h: delta^2_h u = u(h) + u(-h) - 2 u(0) = 2h; the -h direction gives 0.
  const double h = 0.25, beta = 1.5, q = 2.0;
  const Field absx = sample(g, [](const Point& x) { return std::abs(x[0]); });
  const double got = besov_second(absx, Ball{{-h, 0.0}, 0.1}, beta, q, one);
  CHECK(got == doctest::Approx(2.0 * h * std::pow(h, 1.0 / q) / std::pow(h, beta)).epsilon(1e-14));

  const Field twice = sample(g, [](const Point& x) { return 2.0 * std::abs(x[0]); });
  CHECK(besov_second(twice, Ball{{-h, 0.0}, 0.1}, beta, q, one) == doctest::Approx(2.0 * got).epsilon(1e-14));

  CHECK_THROWS_AS(besov_second(absx, Ball{{0.0, 0.0}, 0.6}, beta, q, HLadder{0.25, {}}), Error);
  CHECK_THROWS_AS(besov_second(absx, Ball{{0.0, 0.0}, 1.8}, beta, q, HLadder{0.25, {1}}), Error);
}

TEST_CASE("first-difference Besov quantity") {
  auto g = make_grid(1, 1.0, 2.0, 0.125);
  const auto ladder = HLadder::dyadic(0.125, 0.5);
  CHECK(besov_first(Field::constant(g, 1.0), Ball{{0.0, 0.0}, 0.5}, 0.7, 2.0, ladder) == 0.0);
  const Field x = sample(g, [](const Point& p) { return p[0]; });
  const Ball region{{0.0, 0.0}, 0.3};  // nodes -0.25 .. 0.25: five nodes
  const double measure = 5 * 0.125;
  for (double q : {1.0, 2.0, 3.0})
    CHECK(besov_first(x, region, 1.0, q, ladder) == doctest::Approx(std::pow(measure, 1.0 / q)).epsilon(1e-13));
  const Field lip = sample(g, [](const Point& p) { return std::abs(std::sin(5.0 * p[0])); });
  CHECK(std::isfinite(besov_first(lip, region, 1.0, 2.0, ladder)));
}

TEST_CASE("spatial Holder fits") {
  auto g = make_grid(1, 1.0, 2.0, 1.0 / 1024.0);
  const double h = g->spacing();
  const auto ladder = HLadder::dyadic(h, 64.0 * h);
  const Ball region{{0.0, 0.0}, 1.5 * h};
  for (double a : {0.3, 0.5, 0.7, 1.0}) {
    const Field u = sample(g, [a](const Point& x) { return std::pow(std::abs(x[0]), a); });
    const auto f = holder_fit_space(u, region, ladder, 1e-9);
    REQUIRE(f.exponent);
    CHECK(std::abs(*f.exponent - a) <= 0.02);
  }
  const auto c = holder_fit_space(Field::constant(g, 4.0), region, ladder, 1e-9);
  CHECK(c.saturated);
  CHECK_FALSE(c.exponent);
  const Field affine = sample(g, [](const Point& x) { return -2.0 * x[0] + 0.3; });
  const auto f = holder_fit_space(affine, Ball{{0.1, 0.0}, 0.05}, ladder, 1e-9);
  REQUIRE(f.exponent);
  CHECK(std::abs(*f.exponent - 1.0) <= 0.01);
  CHECK(f.points.size() == ladder.multiples.size());
}

TEST_CASE("temporal Holder fits") {
  auto g = make_grid(1, 1.0, 2.0, 0.25);
  const auto times = uniform_times(0.0, 1.0, 256);
  const auto node = *g->index_of({0, 0});
  const auto flat = history(g, times, [](const Point&, double) { return 0.7; });
  CHECK(holder_fit_time(flat, node, 0.0, 1.0, 1e-9).saturated);
  const auto lin = history(g, times, [](const Point&, double t) { return t; });
  const auto fl = holder_fit_time(lin, node, 0.0, 1.0, 1e-9);
  REQUIRE(fl.exponent);
  CHECK(std::abs(*fl.exponent - 1.0) <= 0.01);
  const auto cusp = history(g, times, [](const Point&, double t) { return std::sqrt(std::abs(t - 0.5)); });
  const auto fc = holder_fit_time(cusp, node, 0.0, 1.0, 1e-9);
  REQUIRE(fc.exponent);
  CHECK(std::abs(*fc.exponent - 0.5) <= 0.03);
  CHECK_THROWS_AS(holder_fit_time(lin, node, 0.0, 2.0 / 256.0, 1e-9), Error);
}

TEST_CASE("Campanato oscillation") {
  auto g = make_grid(1, 1.0, 2.0, 0.25);
  const Cylinder cyl({0.0, 0.0}, 1.0, 0.6, 0.6);
  const auto flat = history(g, {0.0, 0.5, 1.0}, [](const Point&, double) { return 3.0; });
  CHECK(campanato_oscillation(flat, cyl) == 0.0);
  const auto two = history(g, {0.0, 0.5, 1.0}, [](const Point&, double t) { return t < 0.75 ? 0.0 : 1.0; });
  CHECK(campanato_oscillation(two, cyl) == doctest::Approx(0.5).epsilon(1e-15));
  const auto wave = history(g, {0.0, 0.5, 1.0}, [](const Point& x, double t) { return std::sin(x[0] + 3.0 * t); });
  const auto shifted = history(g, {0.0, 0.5, 1.0}, [](const Point& x, double t) { return std::sin(x[0] + 3.0 * t) + 5.0; });
  CHECK(campanato_oscillation(shifted, cyl) == doctest::Approx(campanato_oscillation(wave, cyl)).epsilon(1e-13));
  CHECK_THROWS_AS(campanato_oscillation(flat, Cylinder({0.0, 0.0}, 5.0, 0.6, 0.1)), Error);
}

TEST_CASE("parabolic distance") {
  const SpaceTimePoint a{{0.1, 0.0}, 0.2}, b{{0.4, 0.0}, 0.7};
  CHECK(parabolic_distance(a, a, 0.6, 2.0, 0.5) == 0.0);
  CHECK(parabolic_distance(a, b, 0.6, 2.0, 0.5) == doctest::Approx(0.3 + std::pow(0.5, 1.0 / 1.2)).epsilon(1e-15));
  CHECK(parabolic_distance(a, b, 0.6, 2.0, 0.5) == parabolic_distance(b, a, 0.6, 2.0, 0.5));
  // s < (p-1)/p: |x-y|^(sp - (p-2) delta) + |t - tau|
  CHECK(parabolic_distance(a, b, 0.25, 2.0, 0.3) == doctest::Approx(std::pow(0.3, 0.5) + 0.5).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(parabolic_distance(a, b, 0.5, 2.0, 0.5), doctest::Contains("s p - delta (p-2) > 1"), Error);
  CHECK_THROWS_AS(parabolic_distance(a, b, 0.6, 2.0, 1.5), Error);
}

TEST_CASE("Poincare inequality") {
  auto g = make_grid(1, 1.0, 2.0, 1.0 / 16.0);
  const Ball region{{0.0, 0.0}, 8.5 / 16.0};  // 17 nodes
  const Field eta = sample(g, [&](const Point& x) { return std::abs(x[0]) < region.radius ? 1.0 : 0.0; });
  const auto c = poincare_check(Field::constant(g, 1.3), region, eta, 0.5, 2.0);
  CHECK(c.lhs == 0.0);
  CHECK(c.rhs >= 0.0);

  CounterRng rng(77);
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const auto sub = rng.substream(trial);
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = sub.uniform(i, -1.0, 1.0);
    const double s = 0.2 + 0.6 * sub.uniform(9000), p = 2.0 + 2.0 * sub.uniform(9001);
    const auto sides = poincare_check(Field(g, v), region, eta, s, p);
    CHECK(sides.lhs <= sides.rhs);
    for (double& x : v) x += 0.75;
    const auto moved = poincare_check(Field(g, v), region, eta, s, p);
    CHECK(moved.lhs == doctest::Approx(sides.lhs).epsilon(1e-12));
  }
  const Field half = sample(g, [&](const Point& x) { return std::abs(x[0]) < region.radius ? 0.5 : 0.0; });
  CHECK_THROWS_AS(poincare_check(Field::constant(g, 1.0), region, half, 0.5, 2.0), Error);
}

TEST_CASE("iteration monitor") {
  auto g = make_grid(1, 1.0, 2.0, 1.0 / 32.0);
  const auto times = uniform_times(0.0, 1.0, 10);
  const Params prm(0.5, 3.0, 1);
  const double h0 = 0.09, R = 0.5, mu = 0.2;

  const auto flat = history(g, times, [](const Point&, double) { return 1.0; });
  const auto z = iteration_monitor(flat, prm, IterationMode::integrability(3.0), h0, R, 0.0, 1.0, mu);
  CHECK(z.lhs_time == 0.0);
  CHECK(z.lhs_final == 0.0);
  CHECK(z.rhs == 0.0);

  const auto affine = history(g, times, [](const Point& x, double) { return 2.0 * x[0] - 0.5; });
  const auto a = iteration_monitor(affine, prm, IterationMode::ladder(prm.p(), prm.s() - 1.0 / prm.p()), h0, R, 0.0,
                                   1.0, mu);
  CHECK(a.lhs_time == doctest::Approx(0.0));
  CHECK(a.rhs == doctest::Approx(0.0));
  CHECK(a.lhs_final > 0.0);

  const auto wave = [](const Point& x, double t) { return std::sin(5.0 * x[0]) * (1.0 + t) + std::abs(x[0]); };
  const auto u = history(g, times, wave);
  const auto u2 = history(g, times, [&](const Point& x, double t) { return 2.0 * wave(x, t); });
  const double q = 3.5, p = prm.p();
  const auto r1 = iteration_monitor(u, prm, IterationMode::integrability(q), h0, R, 0.0, 1.0, mu);
  const auto r2 = iteration_monitor(u2, prm, IterationMode::integrability(q), h0, R, 0.0, 1.0, mu);
  CHECK(r2.lhs_time == doctest::Approx(std::pow(2.0, q + 1.0) * r1.lhs_time).epsilon(1e-12));
  CHECK(r2.lhs_final == doctest::Approx(std::pow(2.0, q + 3.0 - p) * r1.lhs_final).epsilon(1e-12));
  CHECK(r2.rhs == doctest::Approx(std::pow(2.0, q) * r1.rhs).epsilon(1e-12));
  CHECK(r1.lhs_time > 0.0);

  CHECK_THROWS_AS(iteration_monitor(u, prm, IterationMode::integrability(q), 0.2, R, 0.0, 1.0, mu), Error);
  CHECK_THROWS_AS(iteration_monitor(u, prm, IterationMode::integrability(q), h0, 0.3, 0.0, 1.0, mu), Error);
  CHECK_THROWS_AS(iteration_monitor(u, prm, IterationMode::integrability(q), h0, 0.6, 0.0, 1.0, mu), Error);
  CHECK_THROWS_AS(iteration_monitor(u, prm, IterationMode::integrability(q), h0, R, 0.0, 0.95, mu), Error);
  CHECK_THROWS_AS(iteration_monitor(u, prm, IterationMode::integrability(2.0), h0, R, 0.0, 1.0, mu), Error);
}
