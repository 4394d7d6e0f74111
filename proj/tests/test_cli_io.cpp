#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "fplab/config.hpp"
#include "fplab/report_io.hpp"

using namespace fplab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("fplab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentReport sample_report() {
  ExperimentReport r;
  r.name = "exponent_survey";
  r.s = 0.4;
  r.p = 3.0;
  r.dim = 1;
  r.grid = {{1, 1.0, 2.0, 1.0 / 64.0}, 257, 127};
  r.seed = 0xFFFFFFFFFFFFFFF1ULL;
  r.measured["delta_hat"] = 0.1 + 0.2;
  r.measured["gamma_hat"] = 1.0 / 3.0;
  r.measured["tiny"] = 4.9e-324;
  r.measured["nan"] = std::numeric_limits<double>::quiet_NaN();
  r.theoretical["Theta"] = 0.6000000000000001;
  r.theoretical["Gamma"] = 1.0;
  r.tolerances["tol"] = 1.2345678901234567e-10;
  r.add_check("delta_floor", Verdict::pass, {"delta_hat", "Theta"}, "note, with comma");
  r.add_check("gamma_record", Verdict::info, {"gamma_hat"});
  r.annotations = {"first", "second \"quoted\""};
  ExponentFit f;
  f.exponent = 0.9213;
  f.intercept = -0.25;
  f.r_squared = 0.997;
  f.points_used = 2;
  f.points = {{1.0 / 64.0, 0.012, true}, {1.0 / 32.0, 0.0231, true}, {1.0 / 16.0, 0.0, false}};
  r.fits.push_back({"space", f});
  ExponentFit t;
  t.saturated = true;
  t.points = {{0.01, 0.0, false}};
  r.fits.push_back({"time", t});
  r.probes.push_back({"centre", {0.0, 0.0}, {0.0, 0.5}, {0.0, 0.123456789}});
  return r;
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
  const auto cfg = parse_config("[run]\nexperiment = comparison\n[params]\ns = 0.5\np = 2\n");
  CHECK(cfg.experiment == "comparison");
  CHECK(cfg.params.s() == 0.5);
  CHECK(cfg.params.p() == 2.0);
  CHECK(cfg.params.dim() == 1);
  CHECK(cfg.grid.domain_radius == 1.0);
  CHECK(cfg.grid.trunc_radius == 2.0);
  CHECK(cfg.grid.spacing == 1.0 / 16.0);
  CHECK(cfg.seed == 0);
  CHECK_FALSE(cfg.tol);
  CHECK(cfg.method == ImplicitMethod::newton);
  CHECK(cfg.workers >= 1);
  CHECK(cfg.survey_params.empty());
}

TEST_CASE("experiment-specific grid defaults") {
  const auto ce = parse_config("[run]\nexperiment = time_counterexample\n");
  CHECK(ce.grid.trunc_radius == 4.0);
  CHECK(ce.grid.spacing == 1.0 / 64.0);
  const auto sv = parse_config("[run]\nexperiment = exponent_survey\n");
  CHECK(sv.grid.spacing == 1.0 / 64.0);
}

TEST_CASE("full config") {
  const auto cfg = parse_config(R"(
; comment
[run]
experiment = scaling
seed = 42
output_dir = out/dir
workers = 2
tol = 1e-9
method = gradient_descent
[params]
s = 0.4
p = 3
dim = 2
[grid]
spacing = 0.125
[scaling]
lambda = 0.5
mu = 2
[survey]
pairs = 0.25:2, 0.8:3 0.5:2
data = smooth
)");
  CHECK(cfg.seed == 42);
  CHECK(cfg.output_dir == fs::path("out/dir"));
  CHECK(cfg.workers == 2);
  REQUIRE(cfg.tol);
  CHECK(*cfg.tol == 1e-9);
  CHECK(cfg.method == ImplicitMethod::gradient_descent);
  CHECK(cfg.params.dim() == 2);
  CHECK(cfg.grid.dim == 2);
  CHECK(cfg.grid.spacing == 0.125);
  CHECK(cfg.lambda == 0.5);
  CHECK(cfg.mu == 2.0);
  REQUIRE(cfg.survey_params.size() == 3);
  CHECK(cfg.survey_params[1].s() == 0.8);
  CHECK(cfg.survey_params[1].p() == 3.0);
  CHECK(cfg.survey_data.kind == SurveyData::smooth);
  const auto opts = cfg.options();
  CHECK(opts.workers == 2);
}

TEST_CASE("config errors") {
  CHECK_THROWS_WITH_AS(parse_config("[run]\nexperiment = comparison\n[params]\ns = 1.2\n"),
                       doctest::Contains("s must lie in (0,1)"), Error);
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = comparison\nexperiment = scaling\n"), Error);
  CHECK_THROWS_WITH_AS(parse_config("[run]\nexperiment = comparison\ncolour = red\n[grid]\nsize = 3\n"),
                       doctest::Contains("run.colour"), Error);
  CHECK_THROWS_WITH_AS(parse_config("[run]\nexperiment = comparison\ncolour = red\n[grid]\nsize = 3\n"),
                       doctest::Contains("grid.size"), Error);
  CHECK_THROWS_AS(parse_config("[params]\ns = 0.5\n"), Error);
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = nothing\n"), Error);
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = comparison\n[params]\np = two\n"), Error);
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = comparison\nworkers = 0\n"), Error);
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = comparison\nmethod = magic\n"), Error);
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = comparison\n[survey]\npairs = 0.5-2\n"), Error);
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = comparison\n[grid]\nspacing = -1\n"), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/fplab.ini"), Error);
}

TEST_CASE("report stem and summary") {
  ExperimentReport r;
  r.name = "comparison";
  r.s = 0.5;
  r.p = 2.0;
  CHECK(report_stem(r) == "comparison_s0.5_p2_d1");
  const std::string line = summary_line(r);
  CHECK(line.rfind("comparison INFO", 0) == 0);
  CHECK(line.find("\xE2\x80\x94") != std::string::npos);
  const auto full = summary_line(sample_report());
  CHECK(full == "exponent_survey PASS 0.30000000000000004 0.60000000000000009 0.33333333333333331 1");
}

TEST_CASE("JSON round trip is bit-exact") {
  const auto r = sample_report();
  const auto text = report_to_json(r, "2026-01-01T00:00:00Z");
  CHECK(text.find("\"generated_at\"") != std::string::npos);
  const auto back = report_from_json(text);
  CHECK(back.name == r.name);
  CHECK(back.seed == r.seed);
  CHECK(back.grid.nodes == 257);
  CHECK(back.grid.spec.spacing == r.grid.spec.spacing);
  for (const auto& [k, v] : r.measured) {
    if (std::isnan(v))
      CHECK(std::isnan(back.measured.at(k)));
    else
      CHECK(same_bits(back.measured.at(k), v));
  }
  for (const auto& [k, v] : r.theoretical) CHECK(same_bits(back.theoretical.at(k), v));
  CHECK(same_bits(back.tolerances.at("tol"), r.tolerances.at("tol")));
  CHECK(back.verdicts.at("delta_floor").verdict == Verdict::pass);
  CHECK(back.verdicts.at("delta_floor").note == "note, with comma");
  CHECK(back.verdicts.at("delta_floor").refs == std::vector<std::string>{"delta_hat", "Theta"});
  CHECK(back.annotations == r.annotations);
  REQUIRE(back.fits.size() == 2);
  REQUIRE(back.fits[0].fit.exponent);
  CHECK(same_bits(*back.fits[0].fit.exponent, 0.9213));
  CHECK_FALSE(back.fits[1].fit.exponent);
  CHECK(back.fits[1].fit.saturated);
  CHECK(back.fits[0].fit.points[2].used == false);
  CHECK(same_bits(back.probes[0].values[1], 0.123456789));
  // re-serialising the parsed record reproduces it exactly
  CHECK(report_to_json(back, "2026-01-01T00:00:00Z") == text);
  CHECK_THROWS_AS(report_from_json("{\"schema\": \"other\"}"), Error);
  CHECK_THROWS_AS(report_from_json("not json"), Error);
}

TEST_CASE("written files") {
  const auto dir = scratch("files");
  std::ostringstream summary;
  const auto r = sample_report();
  const auto files = write_report(r, dir, &summary);
  CHECK(files.record == dir / "exponent_survey_s0.4_p3_d1.json");
  REQUIRE(files.tables.size() == 3);
  CHECK(summary.str() == summary_line(r) + "\n");

  const auto space = slurp(dir / "exponent_survey_s0.4_p3_d1.fit_space.csv");
  CHECK(space == "h,S,used\n0.015625,0.012,1\n0.03125,0.023099999999999999,1\n0.0625,0,0\n");
  CHECK(slurp(dir / "exponent_survey_s0.4_p3_d1.fit_time.csv").rfind("tau,S,used\n", 0) == 0);
  CHECK(slurp(dir / "exponent_survey_s0.4_p3_d1.probes.csv") ==
        "probe,x,y,t,u\ncentre,0,0,0,0\ncentre,0,0,0.5,0.123456789\n");

  const auto back = read_report(files.record);
  CHECK(same_bits(back.measured.at("delta_hat"), r.measured.at("delta_hat")));

  ExperimentReport bare;
  bare.name = "comparison";
  const auto plain = write_report(bare, dir);
  CHECK(plain.tables.empty());
  fs::remove_all(dir);
}

TEST_CASE("two runs give identical records apart from the time stamp") {
  const auto dir = scratch("repeat");
  const auto cfg = parse_config("[run]\nexperiment = comparison\nseed = 3\n[grid]\nspacing = 0.125\n");
  const auto a = run_config(cfg), b = run_config(cfg);
  REQUIRE(a.size() == 1);
  const auto fa = write_report(a[0], dir / "a"), fb = write_report(b[0], dir / "b");
  auto strip = [](std::string s) {
    const auto k = s.find("\"generated_at\"");
    const auto e = s.find('\n', k);
    return s.erase(k, e - k);
  };
  const auto ta = slurp(fa.record), tb = slurp(fb.record);
  CHECK(strip(ta) == strip(tb));
  CHECK(ta.find("\"generated_at\"") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("time stamp format") {
  const auto t = utc_timestamp();
  REQUIRE(t.size() == 20);
  CHECK(t[4] == '-');
  CHECK(t[10] == 'T');
  CHECK(t.back() == 'Z');
}

TEST_CASE("config names and survey defaults") {
  CHECK(experiment_names().size() == 5);
  const auto d = default_survey_params(1);
  REQUIRE(d.size() == 4);
  CHECK(d[2].s() == 0.4);
  CHECK(d[2].p() == 3.0);
}
