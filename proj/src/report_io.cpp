#include "fplab/report_io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "fplab/theory.hpp"

namespace fplab {

namespace {

using nlohmann::json;

constexpr const char* kSchema = "fplab.report/1";
constexpr const char* kDash = "—";

// Non-finite doubles are stored as null and read back as NaN.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double get_num(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json num_map(const std::map<std::string, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = num(v);
  return j;
}

std::map<std::string, double> get_num_map(const json& j) {
  std::map<std::string, double> m;
  for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = get_num(it.value());
  return m;
}

std::string g17(double v) { return fmt::format("{:.17g}", v); }

std::string fit_table_name(const std::string& fitName) { return fmt::format("fit_{}", fitName); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  out.close();
  if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace

std::string report_stem(const ExperimentReport& r) {
  return fmt::format("{}_s{}_p{}_d{}", r.name, r.s, r.p, r.dim);
}

std::string summary_line(const ExperimentReport& r) {
  auto pick = [&](const std::map<std::string, double>& m, const char* key) -> std::string {
    auto it = m.find(key);
    return it == m.end() ? kDash : g17(it->second);
  };
  const auto ex = exponents(r.s, r.p);
  const std::string theta = r.theoretical.count("Theta") ? pick(r.theoretical, "Theta") : g17(ex.theta);
  const std::string gamma = r.theoretical.count("Gamma") ? pick(r.theoretical, "Gamma") : g17(ex.gamma);
  return fmt::format("{} {} {} {} {} {}", r.name, to_string(r.overall()), pick(r.measured, "delta_hat"), theta,
                     pick(r.measured, "gamma_hat"), gamma);
}

std::string report_to_json(const ExperimentReport& r, const std::string& generatedAt) {
  json j;
  j["schema"] = kSchema;
  j["generated_at"] = generatedAt;
  j["name"] = r.name;
  j["params"] = {{"s", r.s}, {"p", r.p}, {"dim", r.dim}};
  j["grid"] = {{"dim", r.grid.spec.dim},
               {"domain_radius", r.grid.spec.domain_radius},
               {"trunc_radius", r.grid.spec.trunc_radius},
               {"spacing", r.grid.spec.spacing},
               {"nodes", r.grid.nodes},
               {"interior", r.grid.interior}};
  j["seed"] = r.seed;
  j["tolerances"] = num_map(r.tolerances);
  j["measured"] = num_map(r.measured);
  j["theoretical"] = num_map(r.theoretical);
  json v = json::object();
  for (const auto& [k, c] : r.verdicts) v[k] = {{"verdict", to_string(c.verdict)}, {"refs", c.refs}, {"note", c.note}};
  j["verdicts"] = v;
  j["overall"] = to_string(r.overall());
  j["annotations"] = r.annotations;
  json fits = json::array();
  for (const auto& nf : r.fits) {
    const auto& f = nf.fit;
    json pts = json::array();
    for (const auto& pt : f.points) pts.push_back({num(pt.x), num(pt.s), pt.used});
    fits.push_back({{"name", nf.name},
                    {"exponent", f.exponent ? num(*f.exponent) : json(nullptr)},
                    {"intercept", num(f.intercept)},
                    {"r_squared", num(f.r_squared)},
                    {"points_used", f.points_used},
                    {"saturated", f.saturated},
                    {"points", pts}});
  }
  j["fits"] = fits;
  json probes = json::array();
  for (const auto& pr : r.probes) {
    json times = json::array(), values = json::array();
    for (double t : pr.times) times.push_back(num(t));
    for (double u : pr.values) values.push_back(num(u));
    probes.push_back({{"name", pr.name}, {"x", {pr.x[0], pr.x[1]}}, {"times", times}, {"values", values}});
  }
  j["probes"] = probes;
  return j.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(fmt::format("malformed report record: {}", e.what()));
  }
  try {
    if (j.at("schema").get<std::string>() != kSchema) throw Error("unsupported report schema");
    ExperimentReport r;
    r.name = j.at("name").get<std::string>();
    r.s = j.at("params").at("s").get<double>();
    r.p = j.at("params").at("p").get<double>();
    r.dim = j.at("params").at("dim").get<int>();
    const auto& g = j.at("grid");
    r.grid.spec = GridSpec{g.at("dim").get<int>(), g.at("domain_radius").get<double>(),
                           g.at("trunc_radius").get<double>(), g.at("spacing").get<double>()};
    r.grid.nodes = g.at("nodes").get<std::size_t>();
    r.grid.interior = g.at("interior").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.tolerances = get_num_map(j.at("tolerances"));
    r.measured = get_num_map(j.at("measured"));
    r.theoretical = get_num_map(j.at("theoretical"));
    const auto& v = j.at("verdicts");
    for (auto it = v.begin(); it != v.end(); ++it)
      r.verdicts[it.key()] = Check{verdict_from_string(it.value().at("verdict").get<std::string>()),
                                   it.value().at("refs").get<std::vector<std::string>>(),
                                   it.value().at("note").get<std::string>()};
    r.annotations = j.at("annotations").get<std::vector<std::string>>();
    for (const auto& jf : j.at("fits")) {
      NamedFit nf;
      nf.name = jf.at("name").get<std::string>();
      if (!jf.at("exponent").is_null()) nf.fit.exponent = jf.at("exponent").get<double>();
      nf.fit.intercept = get_num(jf.at("intercept"));
      nf.fit.r_squared = get_num(jf.at("r_squared"));
      nf.fit.points_used = jf.at("points_used").get<int>();
      nf.fit.saturated = jf.at("saturated").get<bool>();
      for (const auto& pt : jf.at("points")) nf.fit.points.push_back({get_num(pt.at(0)), get_num(pt.at(1)), pt.at(2).get<bool>()});
      r.fits.push_back(std::move(nf));
    }
    for (const auto& jp : j.at("probes")) {
      Probe pr;
      pr.name = jp.at("name").get<std::string>();
      pr.x = {jp.at("x").at(0).get<double>(), jp.at("x").at(1).get<double>()};
      for (const auto& t : jp.at("times")) pr.times.push_back(get_num(t));
      for (const auto& u : jp.at("values")) pr.values.push_back(get_num(u));
      r.probes.push_back(std::move(pr));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(fmt::format("report record is missing or mistypes a field: {}", e.what()));
  }
}

WrittenFiles write_report(const ExperimentReport& r, const std::filesystem::path& dir, std::ostream* summary) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));

  WrittenFiles out;
  const std::string stem = report_stem(r);
  out.record = dir / (stem + ".json");
  write_text(out.record, report_to_json(r, utc_timestamp()));

  for (const auto& nf : r.fits) {
    std::string text = nf.name == "time" ? "tau,S,used\n" : nf.name == "space" ? "h,S,used\n" : "x,S,used\n";
    for (const auto& pt : nf.fit.points) text += fmt::format("{},{},{}\n", g17(pt.x), g17(pt.s), pt.used ? 1 : 0);
    auto path = dir / fmt::format("{}.{}.csv", stem, fit_table_name(nf.name));
    write_text(path, text);
    out.tables.push_back(path);
  }
  if (!r.probes.empty()) {
    std::string text = "probe,x,y,t,u\n";
    for (const auto& pr : r.probes)
      for (std::size_t k = 0; k < pr.times.size(); ++k)
        text += fmt::format("{},{},{},{},{}\n", pr.name, g17(pr.x[0]), g17(pr.x[1]), g17(pr.times[k]),
                            g17(pr.values[k]));
    auto path = dir / (stem + ".probes.csv");
    write_text(path, text);
    out.tables.push_back(path);
  }
  if (summary) *summary << summary_line(r) << '\n';
  return out;
}

ExperimentReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                     tm.tm_min, tm.tm_sec);
}

}  // namespace fplab
