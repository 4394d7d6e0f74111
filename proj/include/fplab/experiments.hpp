#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fplab/core.hpp"
#include "fplab/evolution.hpp"
#include "fplab/seminorm_lab.hpp"

namespace fplab {

enum class Verdict { pass, fail, info };
const char* to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct Check {
  Verdict verdict = Verdict::info;
  std::vector<std::string> refs;  // keys of measured/theoretical entries
  std::string note;
};

struct GridSpec {
  int dim = 1;
  double domain_radius = 1.0;
  double trunc_radius = 2.0;
  double spacing = 1.0 / 16.0;

  GridPtr make() const { return make_grid(dim, domain_radius, trunc_radius, spacing); }
};

struct GridSummary {
  GridSpec spec;
  std::size_t nodes = 0;
  std::size_t interior = 0;
};

struct NamedFit {
  std::string name;
  ExponentFit fit;
};

/// Value history of one node, for plotting.
struct Probe {
  std::string name;
  Point x{0.0, 0.0};
  std::vector<double> times;
  std::vector<double> values;
};

struct ExperimentReport {
  std::string name;
  double s = 0.5;
  double p = 2.0;
  int dim = 1;
  GridSummary grid;
  std::map<std::string, double> measured;
  std::map<std::string, double> theoretical;
  std::map<std::string, Check> verdicts;
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;
  std::vector<std::string> annotations;
  std::vector<NamedFit> fits;
  std::vector<Probe> probes;

  /// Adds a verdict; every ref must name an existing measured or theoretical entry.
  void add_check(const std::string& key, Verdict v, std::vector<std::string> refs, std::string note = {});
  /// fail if any check fails, else pass if any passes, else info.
  Verdict overall() const;
  const ExponentFit* fit(const std::string& name) const;
};

struct ExperimentOptions {
  std::optional<double> tol;  // default: 1e-10 (1 + data bound)
  int workers = 1;
  ImplicitMethod method = ImplicitMethod::newton;
};

enum class GapKind { random, zero, unit };

struct ComparisonOptions {
  GapKind gap = GapKind::random;
  bool swap = false;  // exchange the roles of the two data sets
  double bound = 2.0;
  double t1 = 0.1;
  double dt = 0.01;
};

/// Two ordered seeded data sets (u0^1 <= u0^2, g^1 <= g^2, far field ordered),
/// all bounded by M; both solved implicitly.
ExperimentReport run_comparison(const Params& params, const GridSpec& grid, std::uint64_t seed,
                                const ExperimentOptions& opts = {}, const ComparisonOptions& cmp = {});

struct ScalingOptions {
  double t1 = 0.125;
  double dt = 1.0 / 64.0;
};

/// Solves a seeded problem, maps it through the (lambda, mu) rescaling and
/// compares with a native solve of the rescaled problem.
ExperimentReport run_scaling(const Params& params, const GridSpec& grid, double lambda, double mu, std::uint64_t seed,
                             const ExperimentOptions& opts = {}, const ScalingOptions& sc = {});

struct SurveyGrid {
  GridSpec grid{1, 1.0, 2.0, 1.0 / 64.0};
  double t1 = 1.0;
  double dt = 1.0 / 256.0;
  int ladder_max_multiple = 16;
};

enum class SurveyData { rough, smooth, constant };

struct SurveyDataSpec {
  SurveyData kind = SurveyData::rough;
  std::uint64_t seed = 0;
  double piece_width = 0.25;
  double amplitude = 1.0;
};

/// Per (s,p): solves with zero initial data and the chosen exterior data, then
/// fits the spatial exponent on B_{R/4} at the final time and the temporal
/// exponent at the centre over the last quarter of the run.
std::vector<ExperimentReport> run_exponent_survey(const std::vector<Params>& paramList, const SurveyGrid& grid,
                                                  const SurveyDataSpec& data, const ExperimentOptions& opts = {});

struct Counterexample {
  double C = 0.0;
  double jump_time = -0.5;
  IbvpSpec spec;
  /// The subsolution v(x, t) (0 before the jump).
  double subsolution(const Point& x, double t) const;
};

/// C = 2 min over interior nodes of the lattice sum of |x - y|^(-dim-sp) over
/// nodes with 2 <= |y| < 3; the returned problem has g = v outside, u0 = 0 and runs
/// over (-1, 0] with dt the largest power of 2 not above spacing^(sp)/8.
Counterexample build_time_counterexample(const Params& params, const GridSpec& grid, const ExperimentOptions& opts = {});

ExperimentReport run_time_counterexample(const Params& params, const GridSpec& grid,
                                         const ExperimentOptions& opts = {});

struct SeminormBoundOptions {
  int levels = 3;
  double t1 = 0.25;
  double dt = 1.0 / 64.0;
};

/// Ratio (R^-dim sum_n dt [u]^p_{W^{s,p}(B_{3R/4})})^(1/p) / (max|u| + 1) over
/// successive halvings of the spacing.
ExperimentReport run_seminorm_bound(const Params& params, const GridSpec& grid, std::uint64_t seed,
                                    const ExperimentOptions& opts = {}, const SeminormBoundOptions& sb = {});

/// Seeded piecewise-constant function of x[0] with pieces of the given width,
/// shifted so no piece edge falls on a lattice node of spacing `spacing`.
class PiecewiseData {
 public:
  PiecewiseData(std::uint64_t seed, double width, double amplitude, double spacing);
  double operator()(const Point& x) const;

 private:
  std::uint64_t seed_;
  double width_;
  double amplitude_;
  double shift_;
};

}  // namespace fplab
