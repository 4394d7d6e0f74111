#include "fplab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>

#include <fmt/format.h>

#include "fplab/config.hpp"
#include "fplab/evolution.hpp"
#include "fplab/experiments.hpp"
#include "fplab/nonlocal_operator.hpp"
#include "fplab/reduce.hpp"
#include "fplab/rng.hpp"
#include "fplab/seminorm_lab.hpp"
#include "fplab/theory.hpp"

namespace fplab {

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Dense p = 2 operator assembled from node coordinates: (A u)_i = (L u)_i - farField * tail_i.
struct DenseOracle {
  std::vector<std::vector<double>> L;
  std::vector<double> tail;
};

DenseOracle dense_oracle(const Grid& g, double s) {
  const std::size_t n = g.size();
  const int d = g.dim();
  const double sp = 2.0 * s;
  DenseOracle o{std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.interior(i)) continue;
    const double rho = g.trunc_radius() - std::hypot(g.node(i)[0], g.node(i)[1]);
    o.tail[i] = 2.0 * d * unit_ball_measure(d) / sp * std::pow(rho, -sp);
    double diag = o.tail[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double r = std::hypot(g.node(i)[0] - g.node(j)[0], g.node(i)[1] - g.node(j)[1]);
      const double w = std::pow(g.spacing(), d) / std::pow(r, d + sp);
      o.L[i][j] = -2.0 * w;
      diag += 2.0 * w;
    }
    o.L[i][i] = diag;
  }
  return o;
}

Outcome c1_exponents() {
  Outcome out;
  auto a = exponents(0.25, 2.0), b = exponents(0.9, 4.0);
  double err = std::max({std::abs(a.theta - 0.5), std::abs(a.gamma - 1.0), std::abs(b.theta - 1.0),
                         std::abs(b.gamma - 0.625)});
  CounterRng rng(101);
  double cont = 0.0;
  int branch_bad = 0;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const double p = rng.uniform(2 * k, 2.0, 10.0);
    const double s = rng.uniform(2 * k + 1, 1e-6, 1.0 - 1e-6);
    const auto e = exponents(s, p);
    const bool upper = s >= (p - 1.0) / p;
    const bool ok = upper ? (e.theta == 1.0 && std::abs(e.gamma - 1.0 / (s * p - (p - 2.0))) < 1e-15)
                          : (e.theta < 1.0 && e.gamma == 1.0);
    if (!ok || e.gamma < 0.5 || e.gamma > 1.0) ++branch_bad;
    const double st = (p - 1.0) / p;
    const auto left = exponents(std::nextafter(st, 0.0), p), right = exponents(st, p);
    cont = std::max({cont, std::abs(left.theta - right.theta), std::abs(left.gamma - right.gamma)});
  }
  out.ok = err < 1e-15 && branch_bad == 0 && cont <= 1e-12;
  out.detail = fmt::format("closed-form error {:.3g}, branch violations {}, max jump at s=(p-1)/p {:.3g}", err,
                           branch_bad, cont);
  return out;
}

Outcome c2_ladder() {
  Outcome out;
  CounterRng rng(202);
  double rec = 0.0, lim = 0.0;
  int not_increasing = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const double p = rng.uniform(2 * k, 2.0, 8.0);
    const double s = rng.uniform(2 * k + 1, 0.01, 0.99);
    const auto L = moser_ladder(s, p, 500);
    for (std::size_t i = 0; i + 1 < L.size(); ++i) {
      rec = std::max(rec, std::abs((L[i].theta * L[i].beta + s * p) / L[i + 1].beta - L[i + 1].theta));
      if (!(L[i + 1].theta > L[i].theta)) ++not_increasing;
    }
    lim = std::max(lim, std::abs(L[200].theta - s * p / (p - 1.0)));
  }
  out.ok = rec <= 1e-12 && not_increasing == 0 && lim <= 0.02;
  out.detail = fmt::format("recursion error {:.3g}, non-increasing steps {}, |theta_200 - sp/(p-1)| <= {:.4f}", rec,
                           not_increasing, lim);
  return out;
}

Outcome c3_operator_oracle() {
  Outcome out;
  auto grid = make_grid(1, 1.0, 2.0, 0.125);  // 33 nodes
  double worst = 0.0;
  for (double s : {0.3, 0.5, 0.7}) {
    KernelWeights w(grid, Params(s, 2.0, 1));
    const auto o = dense_oracle(*grid, s);
    CounterRng rng(303 + static_cast<std::uint64_t>(s * 10));
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
      const auto sub = rng.substream(trial);
      std::vector<double> v(grid->size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = sub.uniform(i, -1.0, 1.0);
      const double far = sub.uniform(1000, -1.0, 1.0);
      const Field a = apply_operator(Field(grid, v), w, far);
      for (std::size_t i : grid->interior_nodes()) {
        double ref = -far * o.tail[i];
        for (std::size_t j = 0; j < v.size(); ++j) ref += o.L[i][j] * v[j];
        worst = std::max(worst, std::abs(ref - a.values[i]));
      }
    }
  }
  out.ok = worst <= 1e-12;
  out.detail = fmt::format("33 nodes, 3 x 50 fields, max |A u - L u| = {:.3g}", worst);
  return out;
}

Outcome c4_energy_gradient() {
  Outcome out;
  auto grid = make_grid(1, 1.0, 2.0, 1.0 / 7.0);  // 29 nodes
  double worst = 0.0;
  CounterRng rng(404);
  std::uint64_t stream = 0;
  for (double p : {2.0, 3.0, 4.0})
    for (double s : {0.3, 0.7}) {
      KernelWeights w(grid, Params(s, p, 1));
      const auto sub = rng.substream(stream++);
      std::vector<double> v(grid->size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = sub.uniform(i, -1.0, 1.0);
      const double far = sub.uniform(999, -1.0, 1.0);
      const Field u(grid, v);
      const Field a = apply_operator(u, w, far);
      double gmax = 0.0, emax = 0.0;
      const double eps = 1e-5;
      for (std::size_t i : grid->interior_nodes()) {
        Field up = u, dn = u;
        up.values[i] += eps;
        dn.values[i] -= eps;
        const double fd = (energy(up, w, far) - energy(dn, w, far)) / (2.0 * eps);
        const double exact = grid->cell_volume() * a.values[i];
        gmax = std::max(gmax, std::abs(exact));
        emax = std::max(emax, std::abs(fd - exact));
      }
      worst = std::max(worst, emax / gmax);
    }
  out.ok = worst <= 1e-6;
  out.detail = fmt::format("29 nodes, p in {{2,3,4}}, s in {{0.3,0.7}}: max relative error {:.3g}", worst);
  return out;
}

Outcome c5_scaling() {
  Outcome out;
  const GridSpec base{1, 1.0, 2.0, 1.0 / 16.0};
  double op_err = 0.0;
  CounterRng rng(505);
  std::uint64_t stream = 0;
  for (double p : {2.0, 3.0, 4.0})
    for (double s : {0.3, 0.7})
      for (double lambda : {0.5, 2.0, 3.0})
        for (double mu : {0.7, 1.0, 2.0}) {
          const Params prm(s, p, 1);
          auto g1 = base.make();
          auto g2 = make_grid(1, lambda * base.domain_radius, lambda * base.trunc_radius, lambda * base.spacing);
          if (g2->size() != g1->size()) throw Error("rescaled grid changed layout");
          const auto sub = rng.substream(stream++);
          std::vector<double> v(g1->size()), vs(g1->size());
          for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = sub.uniform(i, -1.0, 1.0);
            vs[i] = mu * v[i];
          }
          const double far = sub.uniform(777, -1.0, 1.0);
          const Field a1 = apply_operator(Field(g1, v), KernelWeights(g1, prm), far);
          const Field a2 = apply_operator(Field(g2, vs), KernelWeights(g2, prm), mu * far);
          const double factor = std::pow(mu, p - 1.0) * std::pow(lambda, -s * p);
          double amax = 0.0, diff = 0.0;
          for (std::size_t i : g1->interior_nodes()) {
            amax = std::max(amax, std::abs(factor * a1.values[i]));
            diff = std::max(diff, std::abs(a2.values[i] - factor * a1.values[i]));
          }
          op_err = std::max(op_err, diff / std::max(1.0, amax));
        }

  std::string traj;
  bool traj_ok = true;
  struct Case {
    double s, p, lambda, mu;
  };
  for (const Case c : {Case{0.5, 2.0, 2.0, 1.0}, Case{0.5, 3.0, 2.0, 2.0}, Case{0.7, 2.0, 0.5, 3.0}}) {
    const auto r = run_scaling(Params(c.s, c.p, 1), base, c.lambda, c.mu, 5);
    const bool ok = r.overall() == Verdict::pass;
    traj_ok = traj_ok && ok;
    traj += fmt::format("; (s={},p={},l={},m={}) discrepancy {:.3g} <= {:.3g}", c.s, c.p, c.lambda, c.mu,
                        r.measured.at("max_discrepancy"), r.theoretical.at("discrepancy_threshold"));
  }
  out.ok = op_err <= 1e-12 && traj_ok;
  out.detail = fmt::format("operator identity relative error {:.3g}{}", op_err, traj);
  return out;
}

Outcome c6_comparison() {
  Outcome out;
  const GridSpec grid{1, 1.0, 2.0, 1.0 / 16.0};
  int failures = 0, runs = 0;
  double worst_order = 1e300, worst_bound = -1e300;
  for (double s : {0.3, 0.7})
    for (double p : {2.0, 3.0})
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = run_comparison(Params(s, p, 1), grid, seed);
        ++runs;
        if (r.overall() != Verdict::pass) ++failures;
        worst_order = std::min(worst_order, r.measured.at("min_difference"));
        worst_bound = std::max(worst_bound, r.measured.at("max_u"));
      }
  out.ok = failures == 0;
  out.detail = fmt::format("{} runs, {} failing; min(u2 - u1) = {:.3g}, max u = {:.17g} (M = 2)", runs, failures,
                           worst_order, worst_bound);
  return out;
}

Outcome c7_poincare() {
  Outcome out;
  auto grid = make_grid(1, 1.0, 2.0, 1.0 / 16.0);
  const Ball region{{0.0, 0.0}, 8.5 / 16.0};  // 17 nodes
  const auto nodes = restrict(Field::constant(grid, 0.0), region);
  int violations = 0, trials = 0;
  double worst = 0.0;
  CounterRng rng(707);
  std::uint64_t stream = 0;
  for (double s : {0.2, 0.5, 0.8})
    for (double p : {2.0, 3.0, 4.0})
      for (int trial = 0; trial < 100; ++trial) {
        const auto sub = rng.substream(stream++);
        std::vector<double> v(grid->size()), eta(grid->size(), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = sub.uniform(i, -1.0, 1.0);
        // Alternate between the flat weight and a random one with mean 1.
        double total = 0.0;
        for (const auto& [i, x] : nodes) total += eta[i] = trial % 2 ? sub.uniform(10000 + i, 0.0, 1.0) : 1.0;
        for (const auto& [i, x] : nodes) eta[i] *= static_cast<double>(nodes.size()) / total;
        const auto sides = poincare_check(Field(grid, v), region, Field(grid, eta), s, p);
        ++trials;
        if (sides.lhs > sides.rhs) ++violations;
        worst = std::max(worst, sides.lhs / sides.rhs);
      }
  out.ok = violations == 0 && nodes.size() == 17;
  out.detail = fmt::format("{} trials on a {}-node region, {} violations, max lhs/rhs = {:.4f}", trials, nodes.size(),
                           violations, worst);
  return out;
}

Outcome c8_holder_calibration() {
  Outcome out;
  auto grid = make_grid(1, 1.0, 2.0, 1.0 / 1024.0);
  const auto ladder = HLadder::dyadic(grid->spacing(), 64.0 * grid->spacing());
  double worst = 0.0;
  for (double a : {0.3, 0.5, 0.7, 1.0}) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(std::abs(grid->node(i)[0]), a);
    const auto fit = holder_fit_space(Field(grid, v), Ball{{0.0, 0.0}, 4.0 * grid->spacing()}, ladder, 1e-12);
    worst = std::max(worst, fit.exponent ? std::abs(*fit.exponent - a) : 1.0);
  }
  auto small = make_grid(1, 1.0, 2.0, 0.5);
  SpaceTimeField traj(small);
  const double tstar = 0.5;
  for (int n = 0; n <= 256; ++n) {
    const double t = n / 256.0;
    traj.push_back(Field::constant(small, std::sqrt(std::abs(t - tstar)), t));
  }
  const auto tfit = holder_fit_time(traj, 0, 0.0, 1.0, 1e-12);
  const double terr = tfit.exponent ? std::abs(*tfit.exponent - 0.5) : 1.0;
  out.ok = worst <= 0.02 && terr <= 0.03;
  out.detail = fmt::format("space max error {:.3g} (a in 0.3, 0.5, 0.7, 1), time error {:.3g}", worst, terr);
  return out;
}

Outcome c9_survey() {
  Outcome out;
  const auto reports = run_exponent_survey(default_survey_params(1), SurveyGrid{}, SurveyDataSpec{});
  int bad = 0;
  std::string parts;
  for (const auto& r : reports) {
    const auto* fit = r.fit("space");
    const double theta = r.theoretical.at("Theta");
    const bool valid = fit && !fit->saturated && fit->r_squared >= 0.95;
    if (valid && *fit->exponent < theta - 0.1) ++bad;
    if (r.overall() == Verdict::fail) ++bad;
    parts += fmt::format("; ({},{}) delta_hat {} vs Theta {:.4g} [{}]", r.s, r.p,
                         fit && fit->exponent ? fmt::format("{:.3f} r2 {:.3f}", *fit->exponent, fit->r_squared)
                                              : std::string("saturated"),
                         theta, to_string(r.verdicts.at("delta_floor").verdict));
  }
  out.ok = bad == 0 && reports.size() == 4;
  out.detail = fmt::format("{} below floor{}", bad, parts);
  return out;
}

Outcome c10_counterexample() {
  Outcome out;
  const auto r = run_time_counterexample(Params(0.5, 2.0, 1), GridSpec{1, 1.0, 4.0, 1.0 / 64.0});
  bool ok = true;
  for (const char* k : {"C_quadrature", "subsolution", "quiescence", "difference_quotient"})
    ok = ok && r.verdicts.at(k).verdict == Verdict::pass;
  out.ok = ok;
  out.detail = fmt::format("C = {:.6f} (closed form {:.6f}), min(u - v) = {:.3g}, pre-jump max|u| = {:.3g}, "
                           "min ratio {:.4f} >= C/2 = {:.4f}",
                           r.measured.at("C"), r.theoretical.at("C_closed_form_centre"),
                           r.measured.at("min_u_minus_v"), r.measured.at("pre_jump_max_abs"),
                           r.measured.at("min_ratio"), r.theoretical.at("C_half"));
  return out;
}

Outcome c11_tail() {
  Outcome out;
  double worst = 0.0;
  struct Case {
    int dim;
    double h;
    Point x0;
    double R;
  };
  for (const Case c : {Case{1, 1.0 / 64.0, {0.0, 0.0}, 0.5}, Case{1, 1.0 / 64.0, {0.3, 0.0}, 0.25},
                       Case{2, 1.0 / 32.0, {0.0, 0.0}, 0.5}, Case{2, 1.0 / 32.0, {0.2, -0.1}, 0.3}}) {
    auto grid = make_grid(c.dim, 1.0, 2.0, c.h);
    for (double q : {1.0, 2.0})
      for (double alpha : {0.5, 1.2})
        for (double cval : {1.0, -2.5}) {
          const double got = tail(Field::constant(grid, cval), TailQuery(q, alpha, c.x0, c.R), cval);
          const double want = std::pow(c.dim * unit_ball_measure(c.dim) / alpha, 1.0 / q) * std::abs(cval);
          worst = std::max(worst, std::abs(got - want) / std::abs(want));
        }
  }
  out.ok = worst <= 1e-3;
  out.detail = fmt::format("dims 1 and 2, q in {{1,2}}, alpha in {{0.5,1.2}}: max relative error {:.3g}", worst);
  return out;
}

Outcome c12_determinism(int maxWorkers) {
  Outcome out;
  auto run_all = [](int workers) {
    ExperimentOptions opts;
    opts.workers = workers;
    std::vector<ExperimentReport> rs;
    rs.push_back(run_comparison(Params(0.3, 3.0, 1), GridSpec{1, 1.0, 2.0, 1.0 / 16.0}, 11, opts));
    rs.push_back(run_scaling(Params(0.5, 3.0, 1), GridSpec{1, 1.0, 2.0, 1.0 / 16.0}, 2.0, 2.0, 12, opts));
    rs.push_back(run_seminorm_bound(Params(0.6, 2.0, 1), GridSpec{1, 1.0, 2.0, 1.0 / 16.0}, 13, opts));
    rs.push_back(run_time_counterexample(Params(0.5, 2.0, 1), GridSpec{1, 1.0, 4.0, 1.0 / 64.0}, opts));
    for (auto& r : run_exponent_survey({Params(0.4, 3.0, 1)}, SurveyGrid{}, SurveyDataSpec{}, opts))
      rs.push_back(std::move(r));
    opts.method = ImplicitMethod::gradient_descent;
    rs.push_back(run_comparison(Params(0.7, 2.0, 1), GridSpec{1, 1.0, 2.0, 1.0 / 16.0}, 14, opts));
    return rs;
  };
  const auto a = run_all(1), b = run_all(maxWorkers);
  double worst = 0.0;
  std::size_t compared = 0;
  bool same_keys = a.size() == b.size();
  for (std::size_t k = 0; same_keys && k < a.size(); ++k) {
    same_keys = a[k].measured.size() == b[k].measured.size();
    for (const auto& [key, v] : a[k].measured) {
      auto it = b[k].measured.find(key);
      if (it == b[k].measured.end()) {
        same_keys = false;
        break;
      }
      ++compared;
      if (std::isnan(v) && std::isnan(it->second)) continue;
      worst = std::max(worst, std::abs(v - it->second));
    }
  }
  out.ok = same_keys && worst <= 1e-13;
  out.detail = fmt::format("{} experiments, {} measured values, workers 1 vs {}: max difference {:.3g}", a.size(),
                           compared, maxWorkers, worst);
  return out;
}

}  // namespace

std::string format_result(const CriterionResult& r) {
  return fmt::format("[{}] {:>2} {} ({:.2f} s / {:g} s): {}", r.passed ? "PASS" : "FAIL", r.id, r.name, r.seconds,
                     r.limit_seconds, r.detail);
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  const int maxWorkers = opts.max_workers > 0 ? opts.max_workers : std::max(2, hardware_workers());
  struct Item {
    int id;
    const char* name;
    double limit;
    std::function<Outcome()> run;
  };
  const std::vector<Item> items{
      {1, "exponent formulas", 1.0, c1_exponents},
      {2, "ladder consistency", 1.0, c2_ladder},
      {3, "operator oracle (p = 2)", 5.0, c3_operator_oracle},
      {4, "energy gradient", 30.0, c4_energy_gradient},
      {5, "exact scaling identity", 60.0, c5_scaling},
      {6, "comparison and L-infinity bound", 300.0, c6_comparison},
      {7, "Poincare inequality", 10.0, c7_poincare},
      {8, "Holder-fit calibration", 10.0, c8_holder_calibration},
      {9, "regularity floor survey", 1200.0, c9_survey},
      {10, "time counterexample", 600.0, c10_counterexample},
      {11, "tail closed form", 1.0, c11_tail},
      {12, "determinism across worker counts", 300.0, [maxWorkers] { return c12_determinism(maxWorkers); }},
  };
  std::vector<CriterionResult> results;
  for (const auto& item : items) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), item.id) == opts.only.end()) continue;
    CriterionResult r{item.id, item.name, false, {}, 0.0, item.limit};
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = item.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("error: {}", e.what())};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.passed = o.ok && r.seconds <= item.limit;
    r.detail = o.detail;
    if (o.ok && r.seconds > item.limit) r.detail += fmt::format(" [time limit {:g} s exceeded]", item.limit);
    if (opts.on_result) opts.on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace fplab
