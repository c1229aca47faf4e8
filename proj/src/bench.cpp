#include "optdes/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace optdes {

std::string fingerprint(const Scenario& scenario) {
  return "K" + std::to_string(scenario.factors) + "-N" +
         std::to_string(scenario.points) + "-" + to_string(scenario.criterion) +
         "-S" + std::to_string(scenario.swarm_size) + "-" +
         to_string(scenario.variant);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t replicate_seed(std::uint64_t root_seed, std::string_view fp,
                             int replicate) {
  return splitmix64(splitmix64(root_seed ^ fnv1a64(fp)) ^
                    static_cast<std::uint64_t>(replicate));
}

std::vector<std::pair<int, int>> paper_grid() {
  std::vector<std::pair<int, int>> grid;
  grid.reserve(21);
  for (int n = 3; n <= 9; ++n) grid.emplace_back(1, n);
  for (int n = 6; n <= 12; ++n) grid.emplace_back(2, n);
  for (int n = 10; n <= 16; ++n) grid.emplace_back(3, n);
  return grid;
}

PsoConfig scenario_config(const Scenario& scenario, std::uint64_t seed) {
  PsoConfig config;
  config.swarm_size = scenario.swarm_size;
  config.topology.kind = scenario.variant;
  config.seed = seed;
  return config;
}

std::vector<RunResult> run_replicates(const Scenario& scenario) {
  if (scenario.replicates < 1) {
    throw std::invalid_argument("run_replicates: replicates must be >= 1");
  }
  const std::string fp = fingerprint(scenario);
  CriterionEvaluator evaluator(scenario.criterion,
                               SecondOrderModel(scenario.factors));
  std::vector<RunResult> results;
  results.reserve(static_cast<std::size_t>(scenario.replicates));
  for (int r = 0; r < scenario.replicates; ++r) {
    const PsoConfig config =
        scenario_config(scenario, replicate_seed(scenario.root_seed, fp, r));
    results.push_back(run_pso(evaluator, scenario.points, scenario.factors, config));
  }
  return results;
}

std::vector<std::vector<RunResult>> run_batch(
    const std::vector<Scenario>& scenarios, int workers) {
  std::vector<std::vector<RunResult>> results(scenarios.size());
  std::vector<std::pair<std::size_t, int>> tasks;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    if (scenarios[s].replicates < 1) {
      throw std::invalid_argument("run_batch: replicates must be >= 1");
    }
    results[s].resize(static_cast<std::size_t>(scenarios[s].replicates));
    for (int r = 0; r < scenarios[s].replicates; ++r) tasks.emplace_back(s, r);
  }
  if (workers < 1) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
  }
  workers = std::min<int>(workers, static_cast<int>(tasks.size()));
  if (workers < 1) return results;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const auto [s, r] = tasks[t];
      const Scenario& scenario = scenarios[s];
      const std::string fp = fingerprint(scenario);
      CriterionEvaluator evaluator(scenario.criterion,
                                   SecondOrderModel(scenario.factors));
      const PsoConfig config =
          scenario_config(scenario, replicate_seed(scenario.root_seed, fp, r));
      results[s][static_cast<std::size_t>(r)] =
          run_pso(std::move(evaluator), scenario.points, scenario.factors, config);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }
  return results;
}

std::string ReferenceCatalog::key(int factors, int points,
                                  CriterionKind criterion) {
  return std::to_string(factors) + "-" + std::to_string(points) + "-" +
         to_string(criterion);
}

const ReferenceEntry* ReferenceCatalog::find(int factors, int points,
                                             CriterionKind criterion) const {
  const auto it = entries.find(key(factors, points, criterion));
  return it == entries.end() ? nullptr : &it->second;
}

namespace {

double fraction_at_least(const std::vector<RunResult>& results,
                         double reference_value, CriterionKind kind, int params,
                         double threshold_percent) {
  if (results.empty()) {
    throw std::invalid_argument("efficacy statistics need at least one run");
  }
  if (!(reference_value > 0.0) || !std::isfinite(reference_value)) {
    throw std::invalid_argument(
        "invalid reference value; supply a catalog entry or use the "
        "batch-best fallback");
  }
  const CriterionValue reference{kind, reference_value, false};
  std::size_t hits = 0;
  for (const RunResult& run : results) {
    if (run.best_fitness.singular) continue;
    if (relative_efficiency(kind, run.best_fitness, reference, params) >=
        threshold_percent) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

}  // namespace

double success_probability(const std::vector<RunResult>& results,
                           double reference_value, CriterionKind kind,
                           int params) {
  return fraction_at_least(results, reference_value, kind, params, 100.0 - 1e-6);
}

double prop_highly_efficient(const std::vector<RunResult>& results,
                             double reference_value, CriterionKind kind,
                             int params, double threshold_percent) {
  return fraction_at_least(results, reference_value, kind, params,
                           threshold_percent);
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ReplicateSummary summarize(const std::vector<RunResult>& results,
                           const Scenario& scenario,
                           const ReferenceCatalog& catalog) {
  if (results.empty()) {
    throw std::invalid_argument("summarize: empty result list");
  }
  ReplicateSummary summary;
  summary.scenario = scenario;

  std::vector<double> values, evals, walls;
  values.reserve(results.size());
  evals.reserve(results.size());
  walls.reserve(results.size());
  double best = std::numeric_limits<double>::infinity();
  for (const RunResult& run : results) {
    values.push_back(run.best_fitness.value);
    evals.push_back(static_cast<double>(run.function_evaluations));
    walls.push_back(run.wall_time_seconds);
    best = std::min(best, run.best_fitness.value);
  }
  summary.best_value = best;
  summary.median_value = median(values);
  summary.median_function_evaluations = median(evals);
  summary.median_wall_time_seconds = median(walls);

  const int params = num_params(scenario.factors);
  if (const ReferenceEntry* entry =
          catalog.find(scenario.factors, scenario.points, scenario.criterion)) {
    summary.reference_source = "catalog";
    summary.reference_value = entry->value;
  } else if (std::isfinite(best)) {
    summary.reference_source = "batch-best";
    summary.reference_value = best;
  } else {
    // Every run was singular; no reference exists and no run can succeed.
    summary.reference_source = "none";
    summary.reference_value = std::numeric_limits<double>::quiet_NaN();
    summary.success_probability = 0.0;
    summary.prop_highly_efficient = 0.0;
    return summary;
  }
  summary.success_probability = success_probability(
      results, summary.reference_value, scenario.criterion, params);
  summary.prop_highly_efficient = prop_highly_efficient(
      results, summary.reference_value, scenario.criterion, params);
  return summary;
}

}  // namespace optdes
