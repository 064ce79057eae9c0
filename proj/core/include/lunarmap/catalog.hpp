#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "lunarmap/constants.hpp"
#include "lunarmap/corrector.hpp"
#include "lunarmap/transfer.hpp"

namespace lunarmap {

/// A converged bi-impulsive transfer.
struct TransferSolution {
  /// Grid index of the originating guess; unique within a run.
  std::uint64_t id = 0;
  ConstructionParams params;
  double tof_days = 0.0;
  PlanarState departure;
  PlanarState arrival;
  double dv_i_km_s = 0.0;
  double dv_f_km_s = 0.0;
  double dv_km_s = 0.0;
  double residual_norm = 0.0;
  /// +1 prograde, -1 retrograde about the Moon at insertion.
  int insertion_sense = 1;
  int iterations = 0;

  friend bool operator==(const TransferSolution&, const TransferSolution&) = default;
};

/// Builds the record for a converged correction.
TransferSolution make_solution(std::uint64_t id, const CorrectionOutcome& outcome,
                               const TransferProblem& problem);

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CatalogHeader {
  static constexpr int kVersion = 1;
  SystemConstants::Values constants;
  double departure_altitude_km = 167.0;
  double arrival_altitude_km = 100.0;
  std::uint64_t constants_hash = 0;
  std::uint64_t grid_hash = 0;
  double acceptance = 1e-8;
  /// Number of records before deduplication (equals size() when raw).
  std::uint64_t source_count = 0;
  bool deduplicated = false;
};

/// Append-only collection of solutions from one configuration.
///
/// Persisted as newline-delimited JSON: a versioned header line followed by
/// one record per line. Doubles are written in shortest round-trip form, so
/// save/load is bit-exact.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(CatalogHeader header) : header_(header) {}

  const CatalogHeader& header() const { return header_; }
  CatalogHeader& header() { return header_; }
  const std::vector<TransferSolution>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Appends after checking the record invariants (residual below the
  /// acceptance threshold, dv = dv_i + dv_f exactly, tof_days consistent
  /// with tof, finite fields). Throws CatalogError on violation.
  void record(const TransferSolution& solution);

  /// Records ordered by (alpha, tof, id).
  std::vector<const TransferSolution*> sorted_view() const;

  /// Finds a record by id; nullptr when absent.
  const TransferSolution* find(std::uint64_t id) const;

  void save(const std::filesystem::path& path) const;
  void write(std::ostream& out) const;
  static Catalog load(const std::filesystem::path& path);
  static Catalog read(std::istream& in);

 private:
  CatalogHeader header_;
  std::vector<TransferSolution> records_;
};

/// One-line JSON encodings shared by the catalog and checkpoint files.
std::string encode_solution(const TransferSolution& s);
TransferSolution decode_solution(const std::string& line);

/// Checks the per-record invariants; returns an empty string when valid.
std::string validate_solution(const TransferSolution& s, const CatalogHeader& header);

}  // namespace lunarmap
