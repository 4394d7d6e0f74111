#include "fplab/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "fplab/reduce.hpp"

namespace fplab {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run", {"experiment", "seed", "output_dir", "workers", "tol", "method"}},
      {"params", {"s", "p", "dim"}},
      {"grid", {"domain_radius", "trunc_radius", "spacing"}},
      {"scaling", {"lambda", "mu", "t1", "dt"}},
      {"comparison", {"gap", "bound", "t1", "dt"}},
      {"seminorm", {"levels", "t1", "dt"}},
      {"survey", {"pairs", "t1", "dt", "ladder_max", "data", "piece_width", "amplitude"}},
  };
  return keys;
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    throw Error(fmt::format("{}: expected a number, got '{}'", key, text));
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(fmt::format("{}: expected an integer, got '{}'", key, text));
  return v;
}

std::uint64_t parse_seed(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!text.empty() && text[0] != '-') v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw Error(fmt::format("run.seed: expected an unsigned 64-bit integer, got '{}'", text));
  return v;
}

// Pairs written as "s:p" separated by spaces or commas.
std::vector<Params> parse_pairs(const std::string& text, int dim) {
  std::string t = text;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<Params> out;
  std::string tok;
  while (in >> tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw Error(fmt::format("survey.pairs: expected s:p, got '{}'", tok));
    out.emplace_back(parse_double("survey.pairs", tok.substr(0, colon)),
                     parse_double("survey.pairs", tok.substr(colon + 1)), dim);
  }
  if (out.empty()) throw Error("survey.pairs: no (s, p) pairs given");
  return out;
}

class Doc {
 public:
  explicit Doc(const pt::ptree& tree) : tree_(tree) {}
  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    auto sec = tree_.get_child_optional(pt::ptree::path_type(section, '\x01'));
    if (!sec) return std::nullopt;
    auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\x01'));
    if (!v) return std::nullopt;
    return *v;
  }
  std::optional<double> num(const std::string& section, const std::string& key) const {
    auto v = get(section, key);
    if (!v) return std::nullopt;
    return parse_double(section + "." + key, *v);
  }

 private:
  const pt::ptree& tree_;
};

}  // namespace

std::vector<Params> default_survey_params(int dim) {
  return {Params(0.25, 2.0, dim), Params(0.5, 2.0, dim), Params(0.4, 3.0, dim), Params(0.8, 3.0, dim)};
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"comparison", "scaling", "exponent_survey", "time_counterexample",
                                              "seminorm_bound"};
  return names;
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(fmt::format("config: {} (line {})", e.message(), e.line()));
  }

  std::vector<std::string> unknown;
  for (const auto& [section, body] : tree) {
    auto it = allowed_keys().find(section);
    if (body.empty()) {
      unknown.push_back(section);
      continue;
    }
    for (const auto& [key, value] : body)
      if (it == allowed_keys().end() || !it->second.count(key)) unknown.push_back(section + "." + key);
  }
  if (!unknown.empty()) throw Error(fmt::format("config: unknown keys: {}", fmt::join(unknown, ", ")));

  const Doc doc(tree);
  RunConfig cfg;
  auto name = doc.get("run", "experiment");
  if (!name) throw Error("config: run.experiment is required");
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), *name) == names.end())
    throw Error(fmt::format("config: unknown experiment '{}' (known: {})", *name, fmt::join(names, ", ")));
  cfg.experiment = *name;

  const double s = doc.num("params", "s").value_or(0.5);
  const double p = doc.num("params", "p").value_or(2.0);
  int dim = 1;
  if (auto d = doc.get("params", "dim")) dim = static_cast<int>(parse_int("params.dim", *d));
  cfg.params = Params(s, p, dim);

  // Per-experiment grid defaults; the counterexample needs B_3 inside the grid.
  if (cfg.experiment == "time_counterexample") {
    cfg.grid = GridSpec{dim, 1.0, 4.0, 1.0 / 64.0};
  } else if (cfg.experiment == "exponent_survey") {
    cfg.grid = GridSpec{dim, 1.0, 2.0, 1.0 / 64.0};
  } else {
    cfg.grid = GridSpec{dim, 1.0, 2.0, 1.0 / 16.0};
  }
  cfg.grid.domain_radius = doc.num("grid", "domain_radius").value_or(cfg.grid.domain_radius);
  cfg.grid.trunc_radius = doc.num("grid", "trunc_radius").value_or(cfg.grid.trunc_radius);
  cfg.grid.spacing = doc.num("grid", "spacing").value_or(cfg.grid.spacing);
  (void)cfg.grid.make();  // validates the descriptor

  if (auto v = doc.get("run", "seed")) cfg.seed = parse_seed(*v);
  cfg.tol = doc.num("run", "tol");
  if (cfg.tol && !(*cfg.tol > 0.0)) throw Error(fmt::format("config: run.tol must be positive (got {})", *cfg.tol));
  if (auto v = doc.get("run", "output_dir")) cfg.output_dir = *v;
  cfg.workers = hardware_workers();
  if (auto v = doc.get("run", "workers")) {
    const auto w = parse_int("run.workers", *v);
    if (w < 1) throw Error(fmt::format("config: run.workers must be at least 1 (got {})", w));
    cfg.workers = static_cast<int>(w);
  }
  if (auto v = doc.get("run", "method")) {
    if (*v == "newton") {
      cfg.method = ImplicitMethod::newton;
    } else if (*v == "gradient_descent") {
      cfg.method = ImplicitMethod::gradient_descent;
    } else {
      throw Error(fmt::format("config: run.method must be newton or gradient_descent (got '{}')", *v));
    }
  }

  cfg.lambda = doc.num("scaling", "lambda").value_or(cfg.lambda);
  cfg.mu = doc.num("scaling", "mu").value_or(cfg.mu);
  if (!(cfg.lambda > 0.0) || !(cfg.mu > 0.0)) throw Error("config: scaling.lambda and scaling.mu must be positive");
  cfg.scaling.t1 = doc.num("scaling", "t1").value_or(cfg.scaling.t1);
  cfg.scaling.dt = doc.num("scaling", "dt").value_or(cfg.scaling.dt);

  if (auto v = doc.get("comparison", "gap")) {
    if (*v == "random") {
      cfg.comparison.gap = GapKind::random;
    } else if (*v == "zero") {
      cfg.comparison.gap = GapKind::zero;
    } else if (*v == "unit") {
      cfg.comparison.gap = GapKind::unit;
    } else {
      throw Error(fmt::format("config: comparison.gap must be random, zero or unit (got '{}')", *v));
    }
  }
  cfg.comparison.bound = doc.num("comparison", "bound").value_or(cfg.comparison.bound);
  cfg.comparison.t1 = doc.num("comparison", "t1").value_or(cfg.comparison.t1);
  cfg.comparison.dt = doc.num("comparison", "dt").value_or(cfg.comparison.dt);

  if (auto v = doc.get("seminorm", "levels")) cfg.seminorm.levels = static_cast<int>(parse_int("seminorm.levels", *v));
  cfg.seminorm.t1 = doc.num("seminorm", "t1").value_or(cfg.seminorm.t1);
  cfg.seminorm.dt = doc.num("seminorm", "dt").value_or(cfg.seminorm.dt);

  cfg.survey_grid.grid = cfg.experiment == "exponent_survey" ? cfg.grid : GridSpec{dim, 1.0, 2.0, 1.0 / 64.0};
  cfg.survey_grid.t1 = doc.num("survey", "t1").value_or(cfg.survey_grid.t1);
  cfg.survey_grid.dt = doc.num("survey", "dt").value_or(cfg.survey_grid.dt);
  if (auto v = doc.get("survey", "ladder_max"))
    cfg.survey_grid.ladder_max_multiple = static_cast<int>(parse_int("survey.ladder_max", *v));
  cfg.survey_data.seed = cfg.seed;
  if (auto v = doc.get("survey", "data")) {
    if (*v == "rough") {
      cfg.survey_data.kind = SurveyData::rough;
    } else if (*v == "smooth") {
      cfg.survey_data.kind = SurveyData::smooth;
    } else if (*v == "constant") {
      cfg.survey_data.kind = SurveyData::constant;
    } else {
      throw Error(fmt::format("config: survey.data must be rough, smooth or constant (got '{}')", *v));
    }
  }
  cfg.survey_data.piece_width = doc.num("survey", "piece_width").value_or(cfg.survey_data.piece_width);
  cfg.survey_data.amplitude = doc.num("survey", "amplitude").value_or(cfg.survey_data.amplitude);
  if (auto v = doc.get("survey", "pairs")) cfg.survey_params = parse_pairs(*v, dim);

  for (double t : {cfg.scaling.t1, cfg.scaling.dt, cfg.comparison.t1, cfg.comparison.dt, cfg.seminorm.t1,
                   cfg.seminorm.dt, cfg.survey_grid.t1, cfg.survey_grid.dt})
    if (!(t > 0.0)) throw Error("config: time spans and steps must be positive");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<ExperimentReport> run_config(const RunConfig& cfg, bool survey) {
  const auto opts = cfg.options();
  if (survey || cfg.experiment == "exponent_survey") {
    // Without explicit pairs: the default matrix for `survey`, the [params] pair for `run`.
    std::vector<Params> list = cfg.survey_params;
    if (list.empty() && survey) list = default_survey_params(cfg.params.dim());
    if (list.empty()) list = {cfg.params};
    return run_exponent_survey(list, cfg.survey_grid, cfg.survey_data, opts);
  }
  if (cfg.experiment == "comparison") return {run_comparison(cfg.params, cfg.grid, cfg.seed, opts, cfg.comparison)};
  if (cfg.experiment == "scaling")
    return {run_scaling(cfg.params, cfg.grid, cfg.lambda, cfg.mu, cfg.seed, opts, cfg.scaling)};
  if (cfg.experiment == "time_counterexample") return {run_time_counterexample(cfg.params, cfg.grid, opts)};
  if (cfg.experiment == "seminorm_bound")
    return {run_seminorm_bound(cfg.params, cfg.grid, cfg.seed, opts, cfg.seminorm)};
  throw Error(fmt::format("unknown experiment '{}'", cfg.experiment));
}

}  // namespace fplab
