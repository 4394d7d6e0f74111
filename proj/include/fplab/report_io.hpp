#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fplab/experiments.hpp"

namespace fplab {

struct WrittenFiles {
  std::filesystem::path record;
  std::vector<std::filesystem::path> tables;
};

/// File stem shared by a report's record and tables, e.g. "comparison_s0.5_p2_d1".
std::string report_stem(const ExperimentReport& r);

/// "name verdict delta_hat Theta gamma_hat Gamma"; missing values print as a dash.
std::string summary_line(const ExperimentReport& r);

/// JSON record. The only run-dependent field is "generated_at".
std::string report_to_json(const ExperimentReport& r, const std::string& generatedAt);
ExperimentReport report_from_json(const std::string& text);

/// Writes <stem>.json, one CSV per fit (<stem>.fit_<name>.csv) and
/// <stem>.probes.csv into dir, and the summary line to `summary` when given.
WrittenFiles write_report(const ExperimentReport& r, const std::filesystem::path& dir, std::ostream* summary = nullptr);

ExperimentReport read_report(const std::filesystem::path& path);

/// UTC time stamp in ISO 8601.
std::string utc_timestamp();

}  // namespace fplab
