#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "optdes/bench.hpp"
#include "optdes/io.hpp"

using optdes::CriterionKind;
using optdes::CriterionValue;
using optdes::RunResult;
using optdes::Scenario;
using optdes::Topology;

namespace {

RunResult fake_run(double value, bool singular = false, std::int64_t evals = 200) {
  RunResult run;
  run.best_design = optdes::DesignMatrix::Zero(3, 1);
  run.best_fitness =
      singular ? optdes::singular_value(CriterionKind::D)
               : CriterionValue{CriterionKind::D, value, false};
  run.iterations = evals / 10 - 1;
  run.function_evaluations = evals;
  run.wall_time_seconds = 0.001 * value;
  run.stop_reason = optdes::StopReason::stagnated;
  run.seed = 1;
  return run;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("the study grid holds exactly the 21 published cells") {
  const auto grid = optdes::paper_grid();
  CHECK(grid.size() == 21);
  const auto has = [&](int k, int n) {
    return std::find(grid.begin(), grid.end(), std::make_pair(k, n)) != grid.end();
  };
  CHECK(has(1, 3));
  CHECK(has(1, 9));
  CHECK(has(2, 6));
  CHECK(has(2, 12));
  CHECK(has(3, 10));
  CHECK(has(3, 16));
  CHECK_FALSE(has(3, 9));
  CHECK_FALSE(has(1, 10));
  // Full factorial with 3 swarm sizes, 2 variants, 2 criteria, 140 replicates.
  CHECK(static_cast<long>(grid.size()) * 3 * 2 * 2 * 140 == 35280);
}

TEST_CASE("scenario fingerprints and replicate seeds are stable") {
  Scenario scenario;
  scenario.factors = 2;
  scenario.points = 8;
  scenario.criterion = CriterionKind::D;
  scenario.swarm_size = 50;
  scenario.variant = Topology::Kind::random_local;
  CHECK(optdes::fingerprint(scenario) == "K2-N8-D-S50-local");
  scenario.variant = Topology::Kind::global;
  scenario.criterion = CriterionKind::I;
  CHECK(optdes::fingerprint(scenario) == "K2-N8-I-S50-global");

  const std::uint64_t a = optdes::replicate_seed(1, "K2-N8-D-S50-local", 0);
  const std::uint64_t b = optdes::replicate_seed(1, "K2-N8-D-S50-local", 1);
  const std::uint64_t c = optdes::replicate_seed(2, "K2-N8-D-S50-local", 0);
  const std::uint64_t d = optdes::replicate_seed(1, "K2-N8-I-S50-local", 0);
  CHECK(a != b);
  CHECK(a != c);
  CHECK(a != d);
  CHECK(a == optdes::replicate_seed(1, "K2-N8-D-S50-local", 0));
}

TEST_CASE("run_replicates is deterministic and honours the accounting identity") {
  Scenario scenario;
  scenario.factors = 1;
  scenario.points = 3;
  scenario.criterion = CriterionKind::D;
  scenario.swarm_size = 20;
  scenario.variant = Topology::Kind::random_local;
  scenario.replicates = 4;
  scenario.root_seed = 99;

  const auto first = optdes::run_replicates(scenario);
  const auto second = optdes::run_replicates(scenario);
  REQUIRE(first.size() == 4);
  REQUIRE(second.size() == 4);
  for (std::size_t r = 0; r < first.size(); ++r) {
    CHECK(first[r].function_evaluations ==
          scenario.swarm_size * (first[r].iterations + 1));
    CHECK(first[r].best_fitness.value == second[r].best_fitness.value);
    CHECK(first[r].iterations == second[r].iterations);
    CHECK(first[r].seed == second[r].seed);
    CHECK(first[r].best_design == second[r].best_design);
  }

  Scenario one = scenario;
  one.replicates = 1;
  CHECK(optdes::run_replicates(one).size() == 1);
  Scenario zero = scenario;
  zero.replicates = 0;
  CHECK_THROWS_AS(optdes::run_replicates(zero), std::invalid_argument);
}

TEST_CASE("run_batch output does not depend on the worker count") {
  Scenario scenario;
  scenario.factors = 1;
  scenario.points = 4;
  scenario.criterion = CriterionKind::I;
  scenario.swarm_size = 15;
  scenario.variant = Topology::Kind::global;
  scenario.replicates = 6;
  scenario.root_seed = 7;
  Scenario other = scenario;
  other.points = 5;

  const auto serial = optdes::run_batch({scenario, other}, 1);
  const auto parallel = optdes::run_batch({scenario, other}, 4);
  REQUIRE(serial.size() == 2);
  REQUIRE(parallel.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    REQUIRE(serial[s].size() == 6);
    for (std::size_t r = 0; r < 6; ++r) {
      CHECK(serial[s][r].best_fitness.value == parallel[s][r].best_fitness.value);
      CHECK(serial[s][r].iterations == parallel[s][r].iterations);
      CHECK(serial[s][r].best_design == parallel[s][r].best_design);
    }
  }
  // Replicates of the same scenario match the sequential reference too.
  const auto reference = optdes::run_replicates(scenario);
  for (std::size_t r = 0; r < 6; ++r) {
    CHECK(reference[r].best_fitness.value == serial[0][r].best_fitness.value);
  }
}

TEST_CASE("success probability counts runs at least as good as the reference") {
  std::vector<RunResult> results;
  for (int i = 0; i < 70; ++i) results.push_back(fake_run(1.0));
  for (int i = 0; i < 70; ++i) results.push_back(fake_run(2.0));
  CHECK(optdes::success_probability(results, 1.0, CriterionKind::D, 3) == 0.5);

  // Reference set to the best value among the runs: at least that run counts.
  CHECK(optdes::success_probability(results, 1.0, CriterionKind::D, 3) >=
        1.0 / static_cast<double>(results.size()));

  std::vector<RunResult> all_singular(5, fake_run(0.0, true));
  CHECK(optdes::success_probability(all_singular, 1.0, CriterionKind::D, 3) == 0.0);

  CHECK_THROWS_AS(optdes::success_probability(results, 0.0, CriterionKind::D, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      optdes::success_probability(results, std::numeric_limits<double>::infinity(),
                                  CriterionKind::D, 3),
      std::invalid_argument);
}

TEST_CASE("highly-efficient proportion brackets the success probability") {
  std::vector<RunResult> results;
  results.push_back(fake_run(1.0));
  results.push_back(fake_run(1.10));  // ~96.9% D-efficiency vs 1.0 at p=3
  results.push_back(fake_run(1.50));
  CHECK(optdes::prop_highly_efficient(results, 1.0, CriterionKind::D, 3, 0.0) == 1.0);
  CHECK(optdes::prop_highly_efficient(results, 1.0, CriterionKind::D, 3, 95.0) ==
        doctest::Approx(2.0 / 3.0));
  CHECK(optdes::prop_highly_efficient(results, 1.0, CriterionKind::D, 3, 100.0) ==
        optdes::success_probability(results, 1.0, CriterionKind::D, 3));
  CHECK(optdes::success_probability(results, 1.0, CriterionKind::D, 3) <=
        optdes::prop_highly_efficient(results, 1.0, CriterionKind::D, 3));
}

TEST_CASE("proportions are invariant under result reordering") {
  std::vector<RunResult> results;
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> value(1.0, 3.0);
  for (int i = 0; i < 21; ++i) results.push_back(fake_run(value(gen)));
  const double success = optdes::success_probability(results, 1.5, CriterionKind::D, 3);
  const double prop = optdes::prop_highly_efficient(results, 1.5, CriterionKind::D, 3);
  std::shuffle(results.begin(), results.end(), gen);
  CHECK(optdes::success_probability(results, 1.5, CriterionKind::D, 3) == success);
  CHECK(optdes::prop_highly_efficient(results, 1.5, CriterionKind::D, 3) == prop);
  CHECK(success <= prop);
}

TEST_CASE("median uses the midpoint convention") {
  CHECK(optdes::median({3.0}) == 3.0);
  CHECK(optdes::median({100.0, 200.0}) == 150.0);
  CHECK(optdes::median({5.0, 1.0, 3.0}) == 3.0);
  CHECK(optdes::median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK_THROWS_AS(optdes::median({}), std::invalid_argument);
}

TEST_CASE("summaries resolve references from the catalog, then the batch") {
  Scenario scenario;
  scenario.factors = 1;
  scenario.points = 3;
  scenario.criterion = CriterionKind::D;
  scenario.replicates = 2;
  std::vector<RunResult> results{fake_run(2.0, false, 100), fake_run(1.0, false, 200)};

  optdes::ReferenceCatalog empty;
  const auto fallback = optdes::summarize(results, scenario, empty);
  CHECK(fallback.reference_source == "batch-best");
  CHECK(fallback.reference_value == 1.0);
  CHECK(fallback.best_value == 1.0);
  CHECK(fallback.median_value == 1.5);
  CHECK(fallback.median_function_evaluations == 150.0);
  CHECK(fallback.best_value <= fallback.median_value);

  optdes::ReferenceCatalog catalog;
  catalog.entries[optdes::ReferenceCatalog::key(1, 3, CriterionKind::D)] = {0.9, {}};
  const auto from_catalog = optdes::summarize(results, scenario, catalog);
  CHECK(from_catalog.reference_source == "catalog");
  CHECK(from_catalog.reference_value == 0.9);

  std::vector<RunResult> all_singular(3, fake_run(0.0, true));
  const auto hopeless = optdes::summarize(all_singular, scenario, empty);
  CHECK(hopeless.reference_source == "none");
  CHECK(hopeless.success_probability == 0.0);
  CHECK(hopeless.prop_highly_efficient == 0.0);

  CHECK_THROWS_AS(optdes::summarize({}, scenario, empty), std::invalid_argument);
}

TEST_CASE("a full 140-replicate cell yields 140 well-formed records") {
  Scenario scenario;
  scenario.factors = 1;
  scenario.points = 3;
  scenario.criterion = CriterionKind::D;
  scenario.swarm_size = 20;
  scenario.variant = Topology::Kind::global;
  scenario.replicates = 140;
  scenario.root_seed = 140140;
  const auto results = optdes::run_replicates(scenario);
  REQUIRE(results.size() == 140);
  for (const auto& run : results) {
    CHECK(run.function_evaluations == 20 * (run.iterations + 1));
    CHECK(run.best_design.rows() == 3);
    CHECK(run.best_design.cols() == 1);
    CHECK(run.best_design.minCoeff() >= -1.0);
    CHECK(run.best_design.maxCoeff() <= 1.0);
    CHECK(run.wall_time_seconds >= 0.0);
  }
}

TEST_CASE("an easy scenario is highly efficient in nearly every run") {
  Scenario scenario;
  scenario.factors = 1;
  scenario.points = 3;
  scenario.criterion = CriterionKind::D;
  scenario.swarm_size = 50;
  scenario.variant = Topology::Kind::random_local;
  scenario.replicates = 50;
  scenario.root_seed = 2601;
  const auto results = optdes::run_replicates(scenario);
  // 6.75 is the exhaustive five-level grid optimum for this cell.
  const double prop =
      optdes::prop_highly_efficient(results, 6.75, CriterionKind::D, 3);
  CHECK(prop >= 0.9);
}

TEST_CASE("larger swarms cost more evaluations on a fixed cell") {
  Scenario small;
  small.factors = 1;
  small.points = 4;
  small.criterion = CriterionKind::D;
  small.swarm_size = 50;
  small.variant = Topology::Kind::random_local;
  small.replicates = 5;
  small.root_seed = 11;
  Scenario large = small;
  large.swarm_size = 150;

  std::vector<double> evals_small, evals_large;
  for (const auto& run : optdes::run_replicates(small)) {
    evals_small.push_back(static_cast<double>(run.function_evaluations));
  }
  for (const auto& run : optdes::run_replicates(large)) {
    evals_large.push_back(static_cast<double>(run.function_evaluations));
  }
  CHECK(optdes::median(evals_large) > optdes::median(evals_small));
}

TEST_CASE("result records survive a round trip through the results file") {
  Scenario scenario;
  scenario.factors = 2;
  scenario.points = 6;
  scenario.criterion = CriterionKind::I;
  scenario.swarm_size = 12;
  scenario.variant = Topology::Kind::global;
  scenario.replicates = 3;
  scenario.root_seed = 31;
  const auto results = optdes::run_replicates(scenario);

  std::string lines;
  for (const auto& run : results) {
    lines += optdes::run_record_json(scenario, run);
    lines += '\n';
  }
  const auto path = temp_file("optdes_roundtrip.jsonl");
  optdes::write_text_atomic(path.string(), lines);
  const auto records = optdes::read_results_jsonl(path.string());
  std::filesystem::remove(path);

  REQUIRE(records.size() == results.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& record = records[r];
    const auto& run = results[r];
    CHECK(record.fingerprint == optdes::fingerprint(scenario));
    CHECK(record.factors == 2);
    CHECK(record.points == 6);
    CHECK(record.criterion == CriterionKind::I);
    CHECK(record.variant == Topology::Kind::global);
    CHECK(record.swarm_size == 12);
    CHECK(record.seed == run.seed);
    CHECK(record.rng == optdes::Rng::name());
    CHECK(record.singular == run.best_fitness.singular);
    CHECK(record.best_value == run.best_fitness.value);
    CHECK(record.iterations == run.iterations);
    CHECK(record.function_evaluations == run.function_evaluations);
    CHECK(record.wall_time_seconds == run.wall_time_seconds);
    CHECK(record.stop_reason == optdes::to_string(run.stop_reason));
    REQUIRE(record.best_design_row_major.size() == 12);
    for (Eigen::Index i = 0; i < 6; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) {
        CHECK(record.best_design_row_major[static_cast<std::size_t>(i * 2 + j)] ==
              run.best_design(i, j));
      }
    }
  }
}

TEST_CASE("reference catalogs load from JSON") {
  const auto path = temp_file("optdes_catalog.json");
  {
    std::ofstream out(path);
    out << R"({"1-3-D": {"value": 6.75},
               "2-9-D": {"value": 0.5, "design": [[-1,-1],[0,0],[1,1]]}})";
  }
  const auto catalog = optdes::load_catalog(path.string());
  std::filesystem::remove(path);
  REQUIRE(catalog.entries.size() == 2);
  const auto* entry = catalog.find(1, 3, CriterionKind::D);
  REQUIRE(entry != nullptr);
  CHECK(entry->value == 6.75);
  CHECK_FALSE(entry->design.has_value());
  const auto* with_design = catalog.find(2, 9, CriterionKind::D);
  REQUIRE(with_design != nullptr);
  REQUIRE(with_design->design.has_value());
  CHECK(with_design->design->rows() == 3);
  CHECK(catalog.find(3, 10, CriterionKind::I) == nullptr);

  const auto bad = temp_file("optdes_catalog_bad.json");
  {
    std::ofstream out(bad);
    out << R"({"1-3-D": {"value": -1.0}})";
  }
  CHECK_THROWS(optdes::load_catalog(bad.string()));
  std::filesystem::remove(bad);
}

TEST_CASE("design files reject out-of-range values and clamp tolerable ones") {
  const auto path = temp_file("optdes_design.csv");
  {
    std::ofstream out(path);
    out << "-1.0000000000001,0.5\n1,0\n";  // first value within clamp tolerance
  }
  const auto design = optdes::load_design_csv(path.string(), 2);
  CHECK(design(0, 0) == -1.0);
  CHECK(design(0, 1) == 0.5);
  std::filesystem::remove(path);

  const auto bad = temp_file("optdes_design_bad.csv");
  {
    std::ofstream out(bad);
    out << "1.5,0\n";
  }
  CHECK_THROWS(optdes::load_design_csv(bad.string(), 2));
  std::filesystem::remove(bad);

  const auto ragged = temp_file("optdes_design_ragged.csv");
  {
    std::ofstream out(ragged);
    out << "0,0\n0\n";
  }
  CHECK_THROWS(optdes::load_design_csv(ragged.string(), 2));
  std::filesystem::remove(ragged);

  const auto text = temp_file("optdes_design_text.csv");
  {
    std::ofstream out(text);
    out << "0,zebra\n";
  }
  CHECK_THROWS(optdes::load_design_csv(text.string(), 2));
  std::filesystem::remove(text);
}

TEST_CASE("seventeen-digit formatting round-trips doubles") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double value = unit(gen);
    CHECK(std::strtod(optdes::format_g17(value).c_str(), nullptr) == value);
  }
  CHECK(optdes::format_g17(6.75) == "6.75");
}
