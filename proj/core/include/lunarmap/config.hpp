#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "lunarmap/analysis.hpp"
#include "lunarmap/constants.hpp"
#include "lunarmap/corrector.hpp"
#include "lunarmap/grid.hpp"

namespace lunarmap {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything needed to reproduce a sweep. Defaults are the full-resolution
/// study settings.
struct RunConfig {
  SystemConstants::Values constants;
  double departure_altitude_km = 167.0;
  double arrival_altitude_km = 100.0;
  GridSpec grid;
  CorrectionSettings correction;
  /// Correct only guesses with ||psi_f|| below this; unset corrects all.
  std::optional<double> screen_threshold;
  unsigned workers = 1;
  /// Candidates between checkpoint flushes (rounded up to whole rays).
  std::size_t checkpoint_interval = 25000;
  std::filesystem::path output_dir = "lunarmap-run";
  DedupTolerance dedup;
  double gap_threshold_days = 10.0;

  /// Throws ConfigError when the corrector box does not contain the grid's
  /// beta/tof range, workers is zero, or any block is invalid on its own.
  void validate() const;

  /// Hash over everything that affects results (not workers, interval or
  /// output location).
  std::uint64_t fingerprint() const;
};

/// Angles and times may be written as numbers or as simple expressions in pi
/// ("pi/36", "2*pi", "10pi", "0.5").
double parse_scalar(const std::string& text);

/// Parses a JSON document. Unknown keys are rejected. Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Pretty JSON with every field present; round-trips through parse_config.
std::string dump_config(const RunConfig& config);

}  // namespace lunarmap
