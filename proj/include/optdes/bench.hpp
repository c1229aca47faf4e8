#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "optdes/criteria.hpp"
#include "optdes/pso.hpp"

namespace optdes {

/// One cell of the replicated study: a design problem plus the search
/// settings used on it.
struct Scenario {
  int factors = 1;
  int points = 3;
  CriterionKind criterion = CriterionKind::D;
  int swarm_size = 50;
  Topology::Kind variant = Topology::Kind::random_local;
  int replicates = 20;
  std::uint64_t root_seed = 0;
};

/// Stable identity string, e.g. "K2-N8-D-S50-local". Keyed into seed
/// derivation and result records.
std::string fingerprint(const Scenario& scenario);

std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);

/// Replicate seed = splitmix64(splitmix64(root ^ fnv1a64(fingerprint)) ^ r).
/// Depends only on (root seed, fingerprint, replicate), so extending a batch
/// never perturbs existing streams.
std::uint64_t replicate_seed(std::uint64_t root_seed, std::string_view fp,
                             int replicate);

/// The 21 (K, N) study cells: K=1 with N in 3..9, K=2 with N in 6..12,
/// K=3 with N in 10..16.
std::vector<std::pair<int, int>> paper_grid();

/// Engine settings for one replicate of a scenario (library defaults plus the
/// scenario's swarm size, topology, and derived seed).
PsoConfig scenario_config(const Scenario& scenario, std::uint64_t seed);

/// Runs the scenario's replicates sequentially; element r used seed
/// replicate_seed(root_seed, fingerprint, r).
std::vector<RunResult> run_replicates(const Scenario& scenario);

/// Runs every replicate of every scenario on up to `workers` threads.
/// Results land in fixed (scenario, replicate) slots, so the output is
/// independent of scheduling. workers < 1 means hardware concurrency.
std::vector<std::vector<RunResult>> run_batch(const std::vector<Scenario>& scenarios,
                                              int workers);

struct ReferenceEntry {
  double value = 0.0;
  std::optional<DesignMatrix> design;
};

/// Externally supplied best-known criterion values keyed by "K-N-criterion".
struct ReferenceCatalog {
  std::map<std::string, ReferenceEntry> entries;

  static std::string key(int factors, int points, CriterionKind criterion);
  const ReferenceEntry* find(int factors, int points,
                             CriterionKind criterion) const;
};

/// Fraction of runs at least as good as the reference: relative efficiency of
/// the run against the reference >= 100 - 1e-6 (the slack absorbs ties).
double success_probability(const std::vector<RunResult>& results,
                           double reference_value, CriterionKind kind, int params);

/// Fraction of runs with relative efficiency >= threshold_percent against the
/// reference.
double prop_highly_efficient(const std::vector<RunResult>& results,
                             double reference_value, CriterionKind kind,
                             int params, double threshold_percent = 95.0);

struct ReplicateSummary {
  Scenario scenario;
  double best_value = 0.0;
  double median_value = 0.0;
  double success_probability = 0.0;
  double prop_highly_efficient = 0.0;
  double median_function_evaluations = 0.0;
  double median_wall_time_seconds = 0.0;
  /// "catalog" when the reference came from the catalog, "batch-best" when it
  /// fell back to the best value across the replicate set, "none" when every
  /// run was singular.
  std::string reference_source = "none";
  double reference_value = 0.0;
};

/// Aggregates one scenario's replicates. Medians use the midpoint convention
/// for even counts.
ReplicateSummary summarize(const std::vector<RunResult>& results,
                           const Scenario& scenario,
                           const ReferenceCatalog& catalog);

/// Midpoint-convention median; rejects an empty input.
double median(std::vector<double> values);

}  // namespace optdes
