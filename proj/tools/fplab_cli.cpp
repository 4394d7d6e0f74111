// fplab command-line front end.
//   fplab run <config>        run the configured experiment
//   fplab survey <config>     run the exponent survey
//   fplab check               run the acceptance suite
//   fplab exponents <s> <p>   print Theta, Gamma and the first ladder entries
// Exit codes: 0 pass, 1 some check failed, 2 usage or configuration error.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fplab/acceptance.hpp"
#include "fplab/config.hpp"
#include "fplab/report_io.hpp"
#include "fplab/theory.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

int run_reports(const std::string& path, bool survey) {
  fplab::RunConfig cfg;
  try {
    cfg = fplab::load_config(path);
  } catch (const fplab::Error& e) {
    std::cerr << "fplab: " << e.what() << '\n';
    return kUsage;
  }
  const auto reports = fplab::run_config(cfg, survey);
  bool failed = false;
  for (const auto& r : reports) {
    const auto files = fplab::write_report(r, cfg.output_dir, &std::cout);
    std::cerr << "wrote " << files.record.string() << '\n';
    failed = failed || r.overall() == fplab::Verdict::fail;
  }
  return failed ? kFail : kPass;
}

int print_exponents(double s, double p) {
  const auto ex = fplab::exponents(s, p);
  fmt::print("Theta {:.17g}\nGamma {:.17g}\n", ex.theta, ex.gamma);
  fmt::print("i beta theta_i\n");
  for (const auto& e : fplab::moser_ladder(s, p, 9)) fmt::print("{} {:.17g} {:.17g}\n", e.i, e.beta, e.theta);
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for the fractional p-Laplacian evolution u_t + (-Delta_p)^s u = 0"};
  app.require_subcommand(1);

  std::string run_path, survey_path;
  auto* run = app.add_subcommand("run", "Run the experiment named in a config file");
  run->add_option("config", run_path, "INI config file")->required();
  auto* survey = app.add_subcommand("survey", "Run the exponent survey described by a config file");
  survey->add_option("config", survey_path, "INI config file")->required();
  auto* check = app.add_subcommand("check", "Run the acceptance suite");
  std::vector<int> only;
  check->add_option("--only", only, "Criterion ids to run (default: all)");
  double s = 0.0, p = 0.0;
  auto* expo = app.add_subcommand("exponents", "Print Theta, Gamma and the Moser ladder");
  expo->add_option("s", s, "fractional order in (0,1)")->required();
  expo->add_option("p", p, "integrability exponent >= 2")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*run) return run_reports(run_path, false);
    if (*survey) return run_reports(survey_path, true);
    if (*expo) return print_exponents(s, p);
    if (*check) {
      fplab::AcceptanceOptions opts;
      opts.only = only;
      opts.on_result = [](const fplab::CriterionResult& r) {
        std::cout << fplab::format_result(r) << std::endl;
      };
      bool ok = true;
      for (const auto& r : fplab::run_acceptance(opts)) ok = ok && r.passed;
      return ok ? kPass : kFail;
    }
  } catch (const fplab::Error& e) {
    std::cerr << "fplab: " << e.what() << '\n';
    return *expo ? kUsage : kFail;
  } catch (const std::exception& e) {
    std::cerr << "fplab: " << e.what() << '\n';
    return kFail;
  }
  return kUsage;
}
