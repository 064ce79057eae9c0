#include "lunarmap/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "lunarmap/hash.hpp"

namespace lunarmap {

using nlohmann::json;

namespace {

constexpr const char* kCatalogFormat = "lunarmap-catalog";

json state_json(const PlanarState& s) { return json::array({s.x, s.y, s.u, s.v}); }

PlanarState state_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw CatalogError("state must be a 4-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

std::uint64_t parse_hash(const json& j) {
  return std::stoull(j.get<std::string>(), nullptr, 16);
}

}  // namespace

TransferSolution make_solution(std::uint64_t id, const CorrectionOutcome& outcome,
                               const TransferProblem& problem) {
  const ImpulseSummary imp = impulses(outcome.departure, outcome.arrival, problem.orbit());
  TransferSolution s;
  s.id = id;
  s.params = outcome.params;
  s.tof_days = problem.constants().dimensional_time(outcome.params.tof);
  s.departure = outcome.departure;
  s.arrival = outcome.arrival;
  s.dv_i_km_s = imp.dv_i_km_s;
  s.dv_f_km_s = imp.dv_f_km_s;
  s.dv_km_s = imp.dv_km_s;
  s.residual_norm = outcome.residual_norm;
  s.insertion_sense = moon_angular_momentum(outcome.arrival, problem.orbit()) >= 0.0 ? 1 : -1;
  s.iterations = outcome.iterations;
  return s;
}

std::string validate_solution(const TransferSolution& s, const CatalogHeader& header) {
  const double values[] = {s.params.alpha, s.params.beta, s.params.tof, s.tof_days,
                           s.departure.x,  s.departure.y, s.departure.u, s.departure.v,
                           s.arrival.x,    s.arrival.y,   s.arrival.u,   s.arrival.v,
                           s.dv_i_km_s,    s.dv_f_km_s,   s.dv_km_s,     s.residual_norm};
  for (double v : values) {
    if (!std::isfinite(v)) return "non-finite field";
  }
  if (!(s.residual_norm < header.acceptance)) return "residual norm not below acceptance threshold";
  if (s.dv_km_s != s.dv_i_km_s + s.dv_f_km_s) return "dv differs from dv_i + dv_f";
  const double tu_days = header.constants.period_days / kTwoPi;
  const double expected_days = s.params.tof * tu_days;
  if (std::abs(s.tof_days - expected_days) > 1e-12 * std::abs(expected_days)) {
    return "tof_days inconsistent with tof";
  }
  if (s.insertion_sense != 1 && s.insertion_sense != -1) return "insertion sense must be +1 or -1";
  return {};
}

void Catalog::record(const TransferSolution& solution) {
  if (const std::string why = validate_solution(solution, header_); !why.empty()) {
    throw CatalogError("rejected record " + std::to_string(solution.id) + ": " + why);
  }
  records_.push_back(solution);
  if (!header_.deduplicated) header_.source_count = records_.size();
}

std::vector<const TransferSolution*> Catalog::sorted_view() const {
  std::vector<const TransferSolution*> view;
  view.reserve(records_.size());
  for (const auto& r : records_) view.push_back(&r);
  std::sort(view.begin(), view.end(), [](const TransferSolution* a, const TransferSolution* b) {
    if (a->params.alpha != b->params.alpha) return a->params.alpha < b->params.alpha;
    if (a->params.tof != b->params.tof) return a->params.tof < b->params.tof;
    return a->id < b->id;
  });
  return view;
}

const TransferSolution* Catalog::find(std::uint64_t id) const {
  for (const auto& r : records_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::string encode_solution(const TransferSolution& s) {
  json j;
  j["id"] = s.id;
  j["alpha"] = s.params.alpha;
  j["beta"] = s.params.beta;
  j["tof"] = s.params.tof;
  j["tof_days"] = s.tof_days;
  j["departure"] = state_json(s.departure);
  j["arrival"] = state_json(s.arrival);
  j["dv_i_km_s"] = s.dv_i_km_s;
  j["dv_f_km_s"] = s.dv_f_km_s;
  j["dv_km_s"] = s.dv_km_s;
  j["residual"] = s.residual_norm;
  j["insertion_sense"] = s.insertion_sense;
  j["iterations"] = s.iterations;
  return j.dump();
}

TransferSolution decode_solution(const std::string& line) {
  try {
    const json j = json::parse(line);
    TransferSolution s;
    s.id = j.at("id").get<std::uint64_t>();
    s.params.alpha = j.at("alpha").get<double>();
    s.params.beta = j.at("beta").get<double>();
    s.params.tof = j.at("tof").get<double>();
    s.tof_days = j.at("tof_days").get<double>();
    s.departure = state_from(j.at("departure"));
    s.arrival = state_from(j.at("arrival"));
    s.dv_i_km_s = j.at("dv_i_km_s").get<double>();
    s.dv_f_km_s = j.at("dv_f_km_s").get<double>();
    s.dv_km_s = j.at("dv_km_s").get<double>();
    s.residual_norm = j.at("residual").get<double>();
    s.insertion_sense = j.at("insertion_sense").get<int>();
    s.iterations = j.at("iterations").get<int>();
    return s;
  } catch (const json::exception& e) {
    throw CatalogError(std::string("malformed solution record: ") + e.what());
  }
}

void Catalog::write(std::ostream& out) const {
  json h;
  h["format"] = kCatalogFormat;
  h["version"] = CatalogHeader::kVersion;
  h["constants"] = {{"mu", header_.constants.mu},
                    {"length_unit_km", header_.constants.length_unit_km},
                    {"period_days", header_.constants.period_days},
                    {"earth_radius_km", header_.constants.earth_radius_km},
                    {"moon_radius_km", header_.constants.moon_radius_km}};
  h["departure_altitude_km"] = header_.departure_altitude_km;
  h["arrival_altitude_km"] = header_.arrival_altitude_km;
  h["constants_hash"] = to_hex(header_.constants_hash);
  h["grid_hash"] = to_hex(header_.grid_hash);
  h["acceptance"] = header_.acceptance;
  h["source_count"] = header_.source_count;
  h["deduplicated"] = header_.deduplicated;
  h["count"] = records_.size();
  out << h.dump() << '\n';
  for (const auto& r : records_) out << encode_solution(r) << '\n';
}

void Catalog::save(const std::filesystem::path& path) const {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw CatalogError("cannot write catalog " + tmp.string());
    write(out);
    if (!out) throw CatalogError("failed writing catalog " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Catalog Catalog::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CatalogError("empty catalog file");
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception& e) {
    throw CatalogError(std::string("malformed catalog header: ") + e.what());
  }
  if (h.value("format", "") != kCatalogFormat) throw CatalogError("not a lunarmap catalog");
  if (h.value("version", 0) != CatalogHeader::kVersion) {
    throw CatalogError("unsupported catalog version");
  }

  CatalogHeader header;
  try {
    const json& c = h.at("constants");
    header.constants.mu = c.at("mu").get<double>();
    header.constants.length_unit_km = c.at("length_unit_km").get<double>();
    header.constants.period_days = c.at("period_days").get<double>();
    header.constants.earth_radius_km = c.at("earth_radius_km").get<double>();
    header.constants.moon_radius_km = c.at("moon_radius_km").get<double>();
    header.departure_altitude_km = h.at("departure_altitude_km").get<double>();
    header.arrival_altitude_km = h.at("arrival_altitude_km").get<double>();
    header.constants_hash = parse_hash(h.at("constants_hash"));
    header.grid_hash = parse_hash(h.at("grid_hash"));
    header.acceptance = h.at("acceptance").get<double>();
    header.source_count = h.at("source_count").get<std::uint64_t>();
    header.deduplicated = h.at("deduplicated").get<bool>();
  } catch (const std::exception& e) {
    throw CatalogError(std::string("incomplete catalog header: ") + e.what());
  }
  if (SystemConstants(header.constants).fingerprint() != header.constants_hash) {
    throw CatalogError("catalog header constants do not match their hash");
  }

  Catalog catalog(header);
  const std::uint64_t source_count = header.source_count;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    catalog.record(decode_solution(line));
  }
  catalog.header_.source_count = source_count;
  if (h.contains("count") && h["count"].get<std::size_t>() != catalog.size()) {
    throw CatalogError("catalog record count does not match header");
  }
  return catalog;
}

Catalog Catalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CatalogError("cannot open catalog " + path.string());
  return read(in);
}

}  // namespace lunarmap
