#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>

#include "lunarmap/catalog.hpp"
#include "lunarmap/config.hpp"

namespace lunarmap {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Candidate and correction tallies. Every candidate lands in exactly one of
/// collided / integrator_failure / screened_out / a correction status.
struct SweepCounts {
  std::uint64_t candidates = 0;
  std::uint64_t feasible = 0;
  std::uint64_t collided = 0;
  std::uint64_t integrator_failure = 0;
  std::uint64_t screened_out = 0;
  std::uint64_t converged = 0;
  std::uint64_t stalled = 0;
  std::uint64_t bound_locked = 0;
  std::uint64_t collided_during_iteration = 0;
  std::uint64_t budget_exhausted = 0;

  SweepCounts& operator+=(const SweepCounts& o);
  friend bool operator==(const SweepCounts&, const SweepCounts&) = default;
};

struct SweepControl {
  /// Polled between rays; setting it stops the sweep at the last flushed
  /// checkpoint.
  const std::atomic<bool>* cancel = nullptr;
  /// Stop once at least this many candidates are checkpointed.
  std::optional<std::uint64_t> stop_after;
  /// Called after each checkpoint flush with (done, total) candidates.
  std::function<void(std::uint64_t, std::uint64_t)> progress;
};

struct SweepResult {
  bool complete = false;
  SweepCounts counts;
  std::uint64_t total_candidates = 0;
  /// Set only when complete.
  Catalog raw;
  Catalog deduplicated;
  double wall_seconds = 0.0;
};

/// Files inside a run directory.
struct RunFiles {
  std::filesystem::path checkpoint;
  std::filesystem::path raw_catalog;
  std::filesystem::path catalog;
  std::filesystem::path summary;
  static RunFiles in(const std::filesystem::path& dir);
};

/// Runs the sweep described by `config` from scratch into config.output_dir,
/// replacing any previous checkpoint there.
///
/// Work is split into (alpha, beta) rays: one propagation samples every tof
/// of the ray, then each feasible guess is corrected. Rays run on
/// config.workers threads and are merged in grid-index order, so results do
/// not depend on the worker count. On completion the raw and deduplicated
/// catalogs and summary.json are written.
SweepResult run_sweep(const RunConfig& config, const SweepControl& control = {});

/// Continues the run in `dir` from its last checkpoint. When `expected` is
/// given its fingerprint must match the checkpoint's. Partial output past the
/// last progress marker is discarded. A finished run is left untouched.
/// Throws CheckpointError on a missing, corrupt or mismatched checkpoint.
SweepResult resume_sweep(const std::filesystem::path& dir,
                         const std::optional<RunConfig>& expected = std::nullopt,
                         const SweepControl& control = {}, std::optional<unsigned> workers = {});

/// Reads the configuration embedded in a checkpoint after checking its hashes.
RunConfig checkpoint_config(const std::filesystem::path& checkpoint);

/// Builds the header shared by catalogs of this configuration.
CatalogHeader catalog_header(const RunConfig& config);

}  // namespace lunarmap
