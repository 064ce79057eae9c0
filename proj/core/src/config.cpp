#include "lunarmap/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lunarmap/hash.hpp"

namespace lunarmap {

using nlohmann::json;

namespace {

double parse_number(const std::string& s, const std::string& whole) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number '" + whole + "'");
  }
  if (used != s.size()) throw ConfigError("cannot parse number '" + whole + "'");
  return v;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double scalar(const json& j, const std::string& name) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_scalar(j.get<std::string>());
  throw ConfigError(name + " must be a number or a pi expression");
}

template <class T>
void read_to(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

void read_scalar(const json& obj, const char* key, double& out, const std::string& where) {
  if (obj.contains(key)) out = scalar(obj.at(key), where + "." + key);
}

void read_axis(const json& obj, const char* key, GridAxis& axis) {
  if (!obj.contains(key)) return;
  const std::string where = std::string("grid.") + key;
  const json& a = obj.at(key);
  reject_unknown(a, {"min", "max", "step", "closed"}, where);
  read_scalar(a, "min", axis.min, where);
  read_scalar(a, "max", axis.max, where);
  read_scalar(a, "step", axis.step, where);
  read_to(a, "closed", axis.closed, where);
}

json axis_json(const GridAxis& a) {
  return {{"min", a.min}, {"max", a.max}, {"step", a.step}, {"closed", a.closed}};
}

}  // namespace

double parse_scalar(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(c));
  }
  if (s.empty()) throw ConfigError("empty numeric expression");
  const std::size_t at = s.find("pi");
  if (at == std::string::npos) return parse_number(s, text);

  std::string head = s.substr(0, at);
  const std::string tail = s.substr(at + 2);
  if (!head.empty() && head.back() == '*') head.pop_back();
  double coef = 1.0;
  if (head == "-") {
    coef = -1.0;
  } else if (!head.empty() && head != "+") {
    coef = parse_number(head, text);
  }
  double denom = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') throw ConfigError("cannot parse expression '" + text + "'");
    denom = parse_number(tail.substr(1), text);
    if (denom == 0.0) throw ConfigError("division by zero in '" + text + "'");
  }
  return coef * kPi / denom;
}

void RunConfig::validate() const {
  try {
    (void)SystemConstants(constants);
    (void)OrbitSpec::make(SystemConstants(constants), departure_altitude_km, arrival_altitude_km);
    correction.validate();
    (void)grid.size();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (workers == 0) throw ConfigError("workers must be positive");
  if (checkpoint_interval == 0) throw ConfigError("checkpoint_interval must be positive");
  if (!(gap_threshold_days > 0.0)) throw ConfigError("gap_threshold_days must be positive");
  if (!(dedup.beta > 0.0) || !(dedup.tof > 0.0)) {
    throw ConfigError("deduplication tolerances must be positive");
  }
  if (screen_threshold && !(*screen_threshold > 0.0)) {
    throw ConfigError("screen_threshold must be positive when set");
  }
  // The final closed-axis node may overshoot max by rounding; the corrector
  // clamps guesses into its box anyway.
  auto last = [](const GridAxis& a) { return std::min(a.value(a.count() - 1), a.max); };
  if (grid.beta.count() > 0 &&
      (grid.beta.min < correction.beta_lower || last(grid.beta) > correction.beta_upper)) {
    throw ConfigError("corrector beta bounds must contain the grid's beta range");
  }
  if (grid.tof.count() > 0 &&
      (grid.tof.min < correction.tof_lower || last(grid.tof) > correction.tof_upper)) {
    throw ConfigError("corrector tof bounds must contain the grid's tof range");
  }
}

std::uint64_t RunConfig::fingerprint() const {
  Fingerprint f;
  f.add("run/v1");
  f.add(SystemConstants(constants).fingerprint());
  f.add(departure_altitude_km).add(arrival_altitude_km);
  f.add(grid.fingerprint());
  const CorrectionSettings& c = correction;
  for (double v : {c.beta_lower, c.beta_upper, c.tof_lower, c.tof_upper, c.step_tolerance,
                   c.function_tolerance, c.constraint_tolerance, c.acceptance, c.initial_damping,
                   c.damping_increase, c.damping_decrease}) {
    f.add(v);
  }
  for (int v : {c.max_iterations, c.max_evaluations, c.max_consecutive_collisions}) {
    f.add(static_cast<std::uint64_t>(v));
  }
  f.add(std::uint64_t{screen_threshold.has_value()});
  f.add(screen_threshold.value_or(0.0));
  f.add(dedup.beta).add(dedup.tof);
  return f.value();
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  reject_unknown(j, {"constants", "orbit", "grid", "correction", "search", "output_dir", "analysis"},
                 "configuration");

  RunConfig cfg;
  if (j.contains("constants")) {
    const json& c = j["constants"];
    reject_unknown(c, {"mu", "length_unit_km", "period_days", "earth_radius_km", "moon_radius_km"},
                   "constants");
    read_scalar(c, "mu", cfg.constants.mu, "constants");
    read_scalar(c, "length_unit_km", cfg.constants.length_unit_km, "constants");
    read_scalar(c, "period_days", cfg.constants.period_days, "constants");
    read_scalar(c, "earth_radius_km", cfg.constants.earth_radius_km, "constants");
    read_scalar(c, "moon_radius_km", cfg.constants.moon_radius_km, "constants");
  }
  if (j.contains("orbit")) {
    const json& o = j["orbit"];
    reject_unknown(o, {"departure_altitude_km", "arrival_altitude_km"}, "orbit");
    read_scalar(o, "departure_altitude_km", cfg.departure_altitude_km, "orbit");
    read_scalar(o, "arrival_altitude_km", cfg.arrival_altitude_km, "orbit");
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    reject_unknown(g, {"alpha", "beta", "tof"}, "grid");
    read_axis(g, "alpha", cfg.grid.alpha);
    read_axis(g, "beta", cfg.grid.beta);
    read_axis(g, "tof", cfg.grid.tof);
  }
  if (j.contains("correction")) {
    const json& c = j["correction"];
    reject_unknown(c,
                   {"beta_lower", "beta_upper", "tof_lower", "tof_upper", "step_tolerance",
                    "function_tolerance", "constraint_tolerance", "max_iterations",
                    "max_evaluations", "acceptance", "initial_damping", "damping_increase",
                    "damping_decrease", "max_consecutive_collisions"},
                   "correction");
    CorrectionSettings& s = cfg.correction;
    read_scalar(c, "beta_lower", s.beta_lower, "correction");
    read_scalar(c, "beta_upper", s.beta_upper, "correction");
    read_scalar(c, "tof_lower", s.tof_lower, "correction");
    read_scalar(c, "tof_upper", s.tof_upper, "correction");
    read_scalar(c, "step_tolerance", s.step_tolerance, "correction");
    read_scalar(c, "function_tolerance", s.function_tolerance, "correction");
    read_scalar(c, "constraint_tolerance", s.constraint_tolerance, "correction");
    read_to(c, "max_iterations", s.max_iterations, "correction");
    read_to(c, "max_evaluations", s.max_evaluations, "correction");
    read_scalar(c, "acceptance", s.acceptance, "correction");
    read_scalar(c, "initial_damping", s.initial_damping, "correction");
    read_scalar(c, "damping_increase", s.damping_increase, "correction");
    read_scalar(c, "damping_decrease", s.damping_decrease, "correction");
    read_to(c, "max_consecutive_collisions", s.max_consecutive_collisions, "correction");
  }
  if (j.contains("search")) {
    const json& s = j["search"];
    reject_unknown(s, {"screen_threshold", "workers", "checkpoint_interval"}, "search");
    if (s.contains("screen_threshold") && !s["screen_threshold"].is_null()) {
      cfg.screen_threshold = scalar(s["screen_threshold"], "search.screen_threshold");
    }
    read_to(s, "workers", cfg.workers, "search");
    read_to(s, "checkpoint_interval", cfg.checkpoint_interval, "search");
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("output_dir must be a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("analysis")) {
    const json& a = j["analysis"];
    reject_unknown(a, {"dedup_beta", "dedup_tof", "gap_threshold_days"}, "analysis");
    read_scalar(a, "dedup_beta", cfg.dedup.beta, "analysis");
    read_scalar(a, "dedup_tof", cfg.dedup.tof, "analysis");
    read_scalar(a, "gap_threshold_days", cfg.gap_threshold_days, "analysis");
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const RunConfig& cfg) {
  const CorrectionSettings& s = cfg.correction;
  json j;
  j["constants"] = {{"mu", cfg.constants.mu},
                    {"length_unit_km", cfg.constants.length_unit_km},
                    {"period_days", cfg.constants.period_days},
                    {"earth_radius_km", cfg.constants.earth_radius_km},
                    {"moon_radius_km", cfg.constants.moon_radius_km}};
  j["orbit"] = {{"departure_altitude_km", cfg.departure_altitude_km},
                {"arrival_altitude_km", cfg.arrival_altitude_km}};
  j["grid"] = {{"alpha", axis_json(cfg.grid.alpha)},
               {"beta", axis_json(cfg.grid.beta)},
               {"tof", axis_json(cfg.grid.tof)}};
  j["correction"] = {{"beta_lower", s.beta_lower},
                     {"beta_upper", s.beta_upper},
                     {"tof_lower", s.tof_lower},
                     {"tof_upper", s.tof_upper},
                     {"step_tolerance", s.step_tolerance},
                     {"function_tolerance", s.function_tolerance},
                     {"constraint_tolerance", s.constraint_tolerance},
                     {"max_iterations", s.max_iterations},
                     {"max_evaluations", s.max_evaluations},
                     {"acceptance", s.acceptance},
                     {"initial_damping", s.initial_damping},
                     {"damping_increase", s.damping_increase},
                     {"damping_decrease", s.damping_decrease},
                     {"max_consecutive_collisions", s.max_consecutive_collisions}};
  j["search"] = {{"screen_threshold", cfg.screen_threshold ? json(*cfg.screen_threshold) : json()},
                 {"workers", cfg.workers},
                 {"checkpoint_interval", cfg.checkpoint_interval}};
  j["output_dir"] = cfg.output_dir.string();
  j["analysis"] = {{"dedup_beta", cfg.dedup.beta},
                   {"dedup_tof", cfg.dedup.tof},
                   {"gap_threshold_days", cfg.gap_threshold_days}};
  return j.dump(2);
}

}  // namespace lunarmap
