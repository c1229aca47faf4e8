#pragma once

#include <string>
#include <vector>

#include "optdes/bench.hpp"
#include "optdes/model.hpp"
#include "optdes/pso.hpp"

namespace optdes {

/// Shortest decimal form that still round-trips; at most 17 significant
/// digits. Used for every double in machine-readable output.
std::string format_g17(double value);

/// Writes to a temporary file in the target directory, then renames into
/// place, so readers never observe a partial file.
void write_text_atomic(const std::string& path, const std::string& content);

/// Design file: one point per line, K comma-separated decimals, no header.
/// Values outside [-1 - 1e-12, 1 + 1e-12] are rejected; values inside that
/// tolerance band are clamped to [-1, 1]. expected_factors < 1 infers K from
/// the first line.
DesignMatrix load_design_csv(const std::string& path, int expected_factors = -1);
std::string design_csv(const DesignMatrix& design);

/// One results line: scenario identity, seed, outcome, and the best design
/// flattened row-major. Criterion values carry 17 significant digits; a
/// singular best_value is written as null.
std::string run_record_json(const Scenario& scenario, const RunResult& result);

/// A parsed results line.
struct RunRecord {
  std::string fingerprint;
  int factors = 0;
  int points = 0;
  CriterionKind criterion = CriterionKind::D;
  Topology::Kind variant = Topology::Kind::random_local;
  int swarm_size = 0;
  std::uint64_t seed = 0;
  std::string rng;
  double best_value = 0.0;
  bool singular = false;
  std::int64_t iterations = 0;
  std::int64_t function_evaluations = 0;
  double wall_time_seconds = 0.0;
  std::string stop_reason;
  std::vector<double> best_design_row_major;
};

std::vector<RunRecord> read_results_jsonl(const std::string& path);

/// Catalog file: JSON object keyed "K-N-criterion", each entry carrying a
/// positive "value" and an optional "design" (array of K-length rows).
ReferenceCatalog load_catalog(const std::string& path);

std::string summary_csv_header();
std::string summary_csv_row(const ReplicateSummary& summary);

}  // namespace optdes
