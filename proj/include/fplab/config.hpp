#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fplab/experiments.hpp"

namespace fplab {

/// Experiments a config may name.
const std::vector<std::string>& experiment_names();

/// (0.25,2), (0.5,2), (0.4,3), (0.8,3).
std::vector<Params> default_survey_params(int dim);

struct RunConfig {
  std::string experiment;
  Params params{0.5, 2.0, 1};
  GridSpec grid;
  std::uint64_t seed = 0;
  std::optional<double> tol;  // unset: 1e-10 (1 + data bound)
  std::filesystem::path output_dir = "fplab_out";
  int workers = 1;
  ImplicitMethod method = ImplicitMethod::newton;

  double lambda = 2.0;
  double mu = 1.0;
  ScalingOptions scaling;
  ComparisonOptions comparison;
  SeminormBoundOptions seminorm;
  SurveyGrid survey_grid;
  SurveyDataSpec survey_data;
  std::vector<Params> survey_params;  // empty unless [survey] pairs is given

  ExperimentOptions options() const { return {tol, workers, method}; }
};

/// INI-style document:
///   [run]        experiment, seed, output_dir, workers, tol, method
///   [params]     s, p, dim
///   [grid]       domain_radius, trunc_radius, spacing
///   [scaling]    lambda, mu, t1, dt
///   [comparison] gap, bound, t1, dt
///   [seminorm]   levels, t1, dt
///   [survey]     pairs, t1, dt, ladder_max, data, piece_width, amplitude
/// Unknown keys and duplicate keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Runs the configured experiment (or the survey when asked) and returns its reports.
std::vector<ExperimentReport> run_config(const RunConfig& cfg, bool survey = false);

}  // namespace fplab
