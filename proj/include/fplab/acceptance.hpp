#pragma once

#include <functional>
#include <string>
#include <vector>

namespace fplab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0;
};

struct AcceptanceOptions {
  std::vector<int> only;  // empty: all twelve
  int max_workers = 0;    // 0: max(2, hardware threads)
  std::function<void(const CriterionResult&)> on_result;
};

/// Runs the acceptance suite. A criterion passes only if its checks hold and
/// it finishes within its time limit.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// "[PASS] 3 operator oracle (p = 2) 0.12 s / 5 s: detail"
std::string format_result(const CriterionResult& r);

}  // namespace fplab
