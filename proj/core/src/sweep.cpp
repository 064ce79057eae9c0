#include "lunarmap/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "json.hpp"
#include "lunarmap/hash.hpp"
#include "lunarmap/search.hpp"

namespace lunarmap {

using nlohmann::json;

namespace {

constexpr const char* kCheckpointFormat = "lunarmap-checkpoint";
constexpr int kCheckpointVersion = 1;

json counts_json(const SweepCounts& c) {
  return {{"candidates", c.candidates},
          {"feasible", c.feasible},
          {"collided", c.collided},
          {"integrator_failure", c.integrator_failure},
          {"screened_out", c.screened_out},
          {"converged", c.converged},
          {"stalled", c.stalled},
          {"bound_locked", c.bound_locked},
          {"collided_during_iteration", c.collided_during_iteration},
          {"budget_exhausted", c.budget_exhausted}};
}

SweepCounts counts_from(const json& j) {
  SweepCounts c;
  c.candidates = j.at("candidates").get<std::uint64_t>();
  c.feasible = j.at("feasible").get<std::uint64_t>();
  c.collided = j.at("collided").get<std::uint64_t>();
  c.integrator_failure = j.at("integrator_failure").get<std::uint64_t>();
  c.screened_out = j.at("screened_out").get<std::uint64_t>();
  c.converged = j.at("converged").get<std::uint64_t>();
  c.stalled = j.at("stalled").get<std::uint64_t>();
  c.bound_locked = j.at("bound_locked").get<std::uint64_t>();
  c.collided_during_iteration = j.at("collided_during_iteration").get<std::uint64_t>();
  c.budget_exhausted = j.at("budget_exhausted").get<std::uint64_t>();
  return c;
}

struct RayOutput {
  SweepCounts counts;
  std::vector<TransferSolution> solutions;
};

RayOutput process_ray(const TransferProblem& problem, const RunConfig& cfg,
                      const std::vector<double>& tofs, std::size_t ia, std::size_t ib) {
  RayOutput out;
  const double alpha = cfg.grid.alpha.value(ia);
  const double beta = cfg.grid.beta.value(ib);
  const std::vector<Candidate> candidates = evaluate_ray(problem, alpha, beta, tofs);
  for (std::size_t it = 0; it < candidates.size(); ++it) {
    const Candidate& c = candidates[it];
    ++out.counts.candidates;
    switch (c.status) {
      case CandidateStatus::collided:
        ++out.counts.collided;
        continue;
      case CandidateStatus::integrator_failure:
        ++out.counts.integrator_failure;
        continue;
      case CandidateStatus::feasible_guess:
        ++out.counts.feasible;
        break;
    }
    if (!screen(c, cfg.screen_threshold)) {
      ++out.counts.screened_out;
      continue;
    }
    const CorrectionOutcome o = correct(problem, c, cfg.correction);
    switch (o.status) {
      case CorrectionStatus::converged:
        ++out.counts.converged;
        out.solutions.push_back(make_solution(cfg.grid.index_of(ia, ib, it), o, problem));
        break;
      case CorrectionStatus::stalled:
        ++out.counts.stalled;
        break;
      case CorrectionStatus::bound_locked:
        ++out.counts.bound_locked;
        break;
      case CorrectionStatus::collided_during_iteration:
        ++out.counts.collided_during_iteration;
        break;
      case CorrectionStatus::budget_exhausted:
        ++out.counts.budget_exhausted;
        break;
    }
  }
  return out;
}

std::size_t total_rays(const GridSpec& g) {
  return g.tof.count() == 0 ? 0 : g.alpha.count() * g.beta.count();
}

struct Progress {
  std::size_t next_ray = 0;
  SweepCounts counts;
  std::vector<TransferSolution> records;
};

json checkpoint_header(const RunConfig& cfg) {
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"constants_hash", to_hex(SystemConstants(cfg.constants).fingerprint())},
          {"grid_hash", to_hex(cfg.grid.fingerprint())},
          {"config_hash", to_hex(cfg.fingerprint())},
          {"config", json::parse(dump_config(cfg))}};
}

RunConfig config_from_header(const std::string& line) {
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
  }
  if (!h.is_object() || h.value("format", "") != kCheckpointFormat) {
    throw CheckpointError("not a lunarmap checkpoint");
  }
  if (h.value("version", 0) != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version");
  }
  RunConfig cfg;
  try {
    cfg = parse_config(h.at("config").dump());
    if (h.at("constants_hash").get<std::string>() !=
            to_hex(SystemConstants(cfg.constants).fingerprint()) ||
        h.at("grid_hash").get<std::string>() != to_hex(cfg.grid.fingerprint()) ||
        h.at("config_hash").get<std::string>() != to_hex(cfg.fingerprint())) {
      throw CheckpointError("checkpoint header hashes do not match its configuration");
    }
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("invalid configuration in checkpoint: ") + e.what());
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("incomplete checkpoint header: ") + e.what());
  }
  return cfg;
}

void write_summary(const std::filesystem::path& path, const RunConfig& cfg,
                   const SweepCounts& counts, const Catalog& raw, const Catalog& dedup,
                   double wall_seconds) {
  json s;
  s["config_hash"] = to_hex(cfg.fingerprint());
  s["constants_hash"] = to_hex(SystemConstants(cfg.constants).fingerprint());
  s["grid_hash"] = to_hex(cfg.grid.fingerprint());
  s["counts"] = counts_json(counts);
  s["raw_solutions"] = raw.size();
  s["deduplicated_solutions"] = dedup.size();
  if (!raw.empty()) {
    double min_dv = std::numeric_limits<double>::infinity();
    double min_tof = min_dv;
    double max_dv = -min_dv;
    double max_tof = -min_dv;
    for (const auto& r : raw.records()) {
      min_dv = std::min(min_dv, r.dv_km_s);
      max_dv = std::max(max_dv, r.dv_km_s);
      min_tof = std::min(min_tof, r.tof_days);
      max_tof = std::max(max_tof, r.tof_days);
    }
    s["dv_km_s"] = {min_dv, max_dv};
    s["tof_days"] = {min_tof, max_tof};
  }
  s["wall_seconds"] = wall_seconds;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << s.dump(2) << '\n';
}

SweepResult finalize(const RunConfig& cfg, const RunFiles& files, const Progress& p,
                     double wall_seconds) {
  SweepResult result;
  result.complete = true;
  result.counts = p.counts;
  result.total_candidates = cfg.grid.size();
  result.raw = Catalog(catalog_header(cfg));
  for (const auto& r : p.records) result.raw.record(r);
  result.deduplicated = deduplicate(result.raw, cfg.dedup);
  result.raw.save(files.raw_catalog);
  result.deduplicated.save(files.catalog);
  result.wall_seconds = wall_seconds;
  write_summary(files.summary, cfg, p.counts, result.raw, result.deduplicated, wall_seconds);
  return result;
}

// Runs rays [p.next_ray, end) appending to `out`. Returns true when all rays
// are done.
bool execute(const RunConfig& cfg, unsigned workers, Progress& p, std::ofstream& out,
             const SweepControl& control) {
  const TransferProblem problem(SystemConstants(cfg.constants), cfg.departure_altitude_km,
                                cfg.arrival_altitude_km);
  const std::size_t nt = cfg.grid.tof.count();
  const std::size_t nb = cfg.grid.beta.count();
  const std::size_t rays = total_rays(cfg.grid);
  std::vector<double> tofs(nt);
  for (std::size_t k = 0; k < nt; ++k) tofs[k] = cfg.grid.tof.value(k);
  const std::size_t block = nt == 0 ? 1 : std::max<std::size_t>(1, (cfg.checkpoint_interval + nt - 1) / nt);
  const std::uint64_t total = cfg.grid.size();

  auto cancelled = [&] { return control.cancel && control.cancel->load(); };

  while (p.next_ray < rays) {
    if (cancelled()) return false;
    if (control.stop_after && p.counts.candidates >= *control.stop_after) return false;

    const std::size_t first = p.next_ray;
    const std::size_t count = std::min(block, rays - first);
    std::vector<RayOutput> outputs(count);
    std::vector<char> done(count, 0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= count || cancelled()) return;
        try {
          const std::size_t ray = first + k;
          outputs[k] = process_ray(problem, cfg, tofs, ray / nb, ray % nb);
          done[k] = 1;
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(threads);
      for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    if (std::find(done.begin(), done.end(), 0) != done.end()) return false;

    for (RayOutput& o : outputs) {
      p.counts += o.counts;
      for (TransferSolution& s : o.solutions) {
        out << encode_solution(s) << '\n';
        p.records.push_back(std::move(s));
      }
    }
    p.next_ray = first + count;
    out << json{{"progress", {{"next_ray", p.next_ray}, {"counts", counts_json(p.counts)}}}}.dump()
        << '\n';
    out.flush();
    if (!out) throw CheckpointError("failed writing checkpoint");
    if (control.progress) control.progress(p.counts.candidates, total);
  }
  return true;
}

}  // namespace

SweepCounts& SweepCounts::operator+=(const SweepCounts& o) {
  candidates += o.candidates;
  feasible += o.feasible;
  collided += o.collided;
  integrator_failure += o.integrator_failure;
  screened_out += o.screened_out;
  converged += o.converged;
  stalled += o.stalled;
  bound_locked += o.bound_locked;
  collided_during_iteration += o.collided_during_iteration;
  budget_exhausted += o.budget_exhausted;
  return *this;
}

RunFiles RunFiles::in(const std::filesystem::path& dir) {
  return {dir / "checkpoint.ndjson", dir / "catalog_raw.ndjson", dir / "catalog.ndjson",
          dir / "summary.json"};
}

CatalogHeader catalog_header(const RunConfig& cfg) {
  CatalogHeader h;
  h.constants = cfg.constants;
  h.departure_altitude_km = cfg.departure_altitude_km;
  h.arrival_altitude_km = cfg.arrival_altitude_km;
  h.constants_hash = SystemConstants(cfg.constants).fingerprint();
  h.grid_hash = cfg.grid.fingerprint();
  h.acceptance = cfg.correction.acceptance;
  return h;
}

SweepResult run_sweep(const RunConfig& cfg, const SweepControl& control) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const RunFiles files = RunFiles::in(cfg.output_dir);
  std::filesystem::create_directories(cfg.output_dir);
  for (const auto& f : {files.raw_catalog, files.catalog, files.summary}) {
    std::filesystem::remove(f);
  }

  std::ofstream out(files.checkpoint, std::ios::trunc);
  if (!out) throw CheckpointError("cannot create checkpoint " + files.checkpoint.string());
  out << checkpoint_header(cfg).dump() << '\n';
  out.flush();

  Progress p;
  const bool complete = execute(cfg, cfg.workers, p, out, control);
  out.close();
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (complete) return finalize(cfg, files, p, wall);

  SweepResult r;
  r.counts = p.counts;
  r.total_candidates = cfg.grid.size();
  r.wall_seconds = wall;
  return r;
}

RunConfig checkpoint_config(const std::filesystem::path& checkpoint) {
  std::ifstream in(checkpoint);
  if (!in) throw CheckpointError("cannot open checkpoint " + checkpoint.string());
  std::string line;
  if (!std::getline(in, line)) throw CheckpointError("empty checkpoint");
  return config_from_header(line);
}

SweepResult resume_sweep(const std::filesystem::path& dir, const std::optional<RunConfig>& expected,
                         const SweepControl& control, std::optional<unsigned> workers) {
  const auto start = std::chrono::steady_clock::now();
  const RunFiles files = RunFiles::in(dir);
  std::ifstream in(files.checkpoint, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + files.checkpoint.string());

  std::string line;
  if (!std::getline(in, line)) throw CheckpointError("empty checkpoint");
  RunConfig cfg = config_from_header(line);
  if (expected && expected->fingerprint() != cfg.fingerprint()) {
    throw CheckpointError("checkpoint was written for a different configuration");
  }
  cfg.output_dir = dir;
  const CatalogHeader header = catalog_header(cfg);

  Progress p;
  std::vector<TransferSolution> pending;
  std::streamoff committed = in.tellg();
  while (std::getline(in, line)) {
    if (in.eof()) break;  // no trailing newline: torn write
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      break;
    }
    if (j.contains("progress")) {
      try {
        p.next_ray = j["progress"].at("next_ray").get<std::size_t>();
        p.counts = counts_from(j["progress"].at("counts"));
      } catch (const json::exception& e) {
        throw CheckpointError(std::string("malformed progress marker: ") + e.what());
      }
      for (auto& s : pending) p.records.push_back(std::move(s));
      pending.clear();
      committed = in.tellg();
      continue;
    }
    TransferSolution s;
    try {
      s = decode_solution(line);
    } catch (const CatalogError& e) {
      throw CheckpointError(std::string("corrupt checkpoint record: ") + e.what());
    }
    if (const std::string why = validate_solution(s, header); !why.empty()) {
      throw CheckpointError("corrupt checkpoint record " + std::to_string(s.id) + ": " + why);
    }
    pending.push_back(std::move(s));
  }
  in.close();
  if (p.next_ray > total_rays(cfg.grid)) throw CheckpointError("progress beyond end of grid");

  const bool already_done = p.next_ray == total_rays(cfg.grid);
  if (already_done && std::filesystem::exists(files.catalog) &&
      std::filesystem::exists(files.raw_catalog)) {
    SweepResult r;
    r.complete = true;
    r.counts = p.counts;
    r.total_candidates = cfg.grid.size();
    r.raw = Catalog::load(files.raw_catalog);
    r.deduplicated = Catalog::load(files.catalog);
    return r;
  }

  std::filesystem::resize_file(files.checkpoint, static_cast<std::uintmax_t>(committed));
  std::ofstream out(files.checkpoint, std::ios::app);
  if (!out) throw CheckpointError("cannot append to checkpoint " + files.checkpoint.string());
  const bool complete = execute(cfg, workers.value_or(cfg.workers), p, out, control);
  out.close();
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (complete) return finalize(cfg, files, p, wall);

  SweepResult r;
  r.counts = p.counts;
  r.total_candidates = cfg.grid.size();
  r.wall_seconds = wall;
  return r;
}

}  // namespace lunarmap
