#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "optdes/bench.hpp"
#include "optdes/criteria.hpp"
#include "optdes/io.hpp"
#include "optdes/model.hpp"
#include "optdes/pso.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSingular = 2;

std::string format_g6(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

void print_design(const optdes::DesignMatrix& design) {
  std::cout << "best_design (N=" << design.rows() << ", K=" << design.cols()
            << "):\n"
            << optdes::design_csv(design);
}

struct RunOptions {
  std::string criterion;
  int factors = 0;
  int points = 0;
  int swarm_size = 50;
  std::string topology = "local";
  std::uint64_t seed = 0;
  std::int64_t max_iterations = 5000;
  std::string out;
};

int cmd_run(const RunOptions& options) {
  const optdes::CriterionKind kind = optdes::criterion_from_string(options.criterion);
  if (options.factors < 1) throw std::invalid_argument("--factors must be >= 1");
  if (options.points < 1) throw std::invalid_argument("--points must be >= 1");

  optdes::Scenario scenario;
  scenario.factors = options.factors;
  scenario.points = options.points;
  scenario.criterion = kind;
  scenario.swarm_size = options.swarm_size;
  scenario.variant = optdes::topology_from_string(options.topology);
  scenario.replicates = 1;
  scenario.root_seed = options.seed;

  optdes::PsoConfig config = optdes::scenario_config(scenario, options.seed);
  config.max_iterations = options.max_iterations;
  optdes::CriterionEvaluator evaluator(kind, optdes::SecondOrderModel(options.factors));
  const optdes::RunResult result =
      optdes::run_pso(evaluator, options.points, options.factors, config);

  std::cout << "fingerprint: " << optdes::fingerprint(scenario) << '\n'
            << "stop_reason: " << optdes::to_string(result.stop_reason) << '\n'
            << "iterations: " << result.iterations << '\n'
            << "function_evaluations: " << result.function_evaluations << '\n';
  if (result.best_fitness.singular) {
    std::cout << "best_value: singular\n";
  } else {
    std::cout << "best_value: " << format_g6(result.best_fitness.value) << '\n';
  }
  print_design(result.best_design);

  if (!options.out.empty()) {
    optdes::write_text_atomic(options.out,
                              optdes::run_record_json(scenario, result) + "\n");
  }
  return result.best_fitness.singular ? kExitSingular : kExitOk;
}

struct EvalOptions {
  std::string design_path;
  int factors = 0;
  std::string criterion = "both";
  std::optional<double> reference;
  std::string catalog_path;
};

int cmd_eval(const EvalOptions& options) {
  if (options.factors < 1) throw std::invalid_argument("--factors must be >= 1");
  const bool want_d = options.criterion == "both" || options.criterion == "D" ||
                      options.criterion == "d";
  const bool want_i = options.criterion == "both" || options.criterion == "I" ||
                      options.criterion == "i";
  if (!want_d && !want_i) {
    throw std::invalid_argument("--criterion must be D, I, or both");
  }
  if (options.reference && options.criterion == "both") {
    throw std::invalid_argument("--reference needs a single --criterion");
  }
  optdes::ReferenceCatalog catalog;
  if (!options.catalog_path.empty()) {
    catalog = optdes::load_catalog(options.catalog_path);
  }
  const optdes::DesignMatrix design =
      optdes::load_design_csv(options.design_path, options.factors);
  const optdes::SecondOrderModel model(options.factors);
  const int n = static_cast<int>(design.rows());
  const int p = model.params();
  std::cout << "N: " << n << "\nK: " << options.factors << '\n';

  bool any_singular = false;
  const auto report = [&](optdes::CriterionKind kind, const optdes::CriterionValue& value) {
    const std::string name = std::string(optdes::to_string(kind)) + "-score";
    if (value.singular) {
      std::cout << name << ": singular\n";
      any_singular = true;
      return;
    }
    std::cout << name << ": " << format_g6(value.value) << '\n';
    std::optional<double> reference = options.reference;
    if (!reference) {
      if (const auto* entry = catalog.find(options.factors, n, kind)) {
        reference = entry->value;
      }
    }
    if (reference) {
      const optdes::CriterionValue ref{kind, *reference, false};
      std::cout << "relative_efficiency(" << optdes::to_string(kind)
                << "): " << format_g6(optdes::relative_efficiency(kind, value, ref, p))
                << " vs reference " << format_g6(*reference) << '\n';
    }
  };

  if (want_d) report(optdes::CriterionKind::D, optdes::d_score(design, model));
  if (want_i) {
    const optdes::MomentMatrix moment = optdes::moment_matrix(model);
    report(optdes::CriterionKind::I, optdes::iv_score(design, model, moment));
  }
  return any_singular ? kExitSingular : kExitOk;
}

struct MomentOptions {
  int factors = 0;
  bool as_json = false;
};

int cmd_moment(const MomentOptions& options) {
  if (options.factors < 1 || options.factors > 6) {
    throw std::invalid_argument("--factors must lie in [1, 6]");
  }
  const optdes::SecondOrderModel model(options.factors);
  const optdes::MomentMatrix moment = optdes::moment_matrix(model);
  const int p = model.params();

  if (options.as_json) {
    std::string json = "{\"factors\":" + std::to_string(options.factors);
    json += ",\"volume\":" + optdes::format_g17(moment.volume);
    json += ",\"terms\":[";
    for (int t = 0; t < p; ++t) {
      if (t > 0) json += ',';
      json += '"' + model.terms()[static_cast<std::size_t>(t)].label() + '"';
    }
    json += "],\"w\":[";
    for (int a = 0; a < p; ++a) {
      if (a > 0) json += ',';
      json += '[';
      for (int b = 0; b < p; ++b) {
        if (b > 0) json += ',';
        json += optdes::format_g17(moment.w(a, b));
      }
      json += ']';
    }
    json += "]}";
    std::cout << json << '\n';
    return kExitOk;
  }

  std::cout << "factors: " << options.factors << '\n'
            << "volume: " << format_g6(moment.volume) << '\n';
  std::vector<std::string> labels;
  std::size_t width = 0;
  for (int t = 0; t < p; ++t) {
    labels.push_back(model.terms()[static_cast<std::size_t>(t)].label());
    width = std::max(width, labels.back().size());
  }
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      width = std::max(width, format_g6(moment.w(a, b)).size());
    }
  }
  const auto pad = [&](const std::string& text) {
    std::cout << std::string(width + 2 - text.size(), ' ') << text;
  };
  pad("");
  for (int b = 0; b < p; ++b) pad(labels[static_cast<std::size_t>(b)]);
  std::cout << '\n';
  for (int a = 0; a < p; ++a) {
    pad(labels[static_cast<std::size_t>(a)]);
    for (int b = 0; b < p; ++b) pad(format_g6(moment.w(a, b)));
    std::cout << '\n';
  }
  return kExitOk;
}

struct BenchOptions {
  bool use_paper_grid = false;
  bool paper_scale = false;
  std::string scenarios_path;
  int replicates = 20;
  std::vector<int> swarm_sizes{50, 150};
  std::vector<std::string> variants{"global", "local"};
  std::vector<std::string> criteria{"D", "I"};
  int workers = 0;
  std::string catalog_path;
  std::uint64_t root_seed = 20240101;
  std::string out_results = "results.jsonl";
  std::string out_summary = "summary.csv";
};

int cmd_bench(BenchOptions options, const CLI::App& subcommand) {
  if (options.paper_scale) {
    options.use_paper_grid = true;
    if (subcommand.count("--replicates") == 0) options.replicates = 140;
    if (subcommand.count("--swarm-sizes") == 0) options.swarm_sizes = {50, 150, 500};
  }
  if (options.use_paper_grid == !options.scenarios_path.empty()) {
    throw std::invalid_argument("pass exactly one of --paper-grid / --scenarios");
  }
  if (options.replicates < 1) throw std::invalid_argument("--replicates must be >= 1");
  for (int s : options.swarm_sizes) {
    if (s < 1) throw std::invalid_argument("--swarm-sizes entries must be >= 1");
  }

  std::vector<optdes::Topology::Kind> variants;
  for (const auto& text : options.variants) {
    variants.push_back(optdes::topology_from_string(text));
  }
  std::vector<optdes::CriterionKind> criteria;
  for (const auto& text : options.criteria) {
    criteria.push_back(optdes::criterion_from_string(text));
  }

  // All inputs are read and validated before any search starts.
  std::vector<std::pair<int, int>> cells;
  if (options.use_paper_grid) {
    cells = optdes::paper_grid();
  } else {
    std::ifstream in(options.scenarios_path);
    if (!in) {
      throw std::runtime_error("cannot open scenario file '" +
                               options.scenarios_path + "'");
    }
    nlohmann::json doc;
    in >> doc;
    if (!doc.is_array() || doc.empty()) {
      throw std::runtime_error("scenario file must be a non-empty JSON array");
    }
    for (const auto& cell : doc) {
      const int k = cell.at("K").get<int>();
      const int n = cell.at("N").get<int>();
      if (k < 1 || n < 1) throw std::runtime_error("scenario cells need K, N >= 1");
      cells.emplace_back(k, n);
    }
  }
  optdes::ReferenceCatalog catalog;
  if (!options.catalog_path.empty()) {
    catalog = optdes::load_catalog(options.catalog_path);
  }

  int workers = options.workers;
  if (workers < 1) {
    if (const char* env = std::getenv("OPTDES_WORKERS")) {
      workers = std::atoi(env);
    }
  }

  std::vector<optdes::Scenario> scenarios;
  for (const auto& [k, n] : cells) {
    for (const auto kind : criteria) {
      for (const auto variant : variants) {
        for (const int swarm_size : options.swarm_sizes) {
          optdes::Scenario scenario;
          scenario.factors = k;
          scenario.points = n;
          scenario.criterion = kind;
          scenario.swarm_size = swarm_size;
          scenario.variant = variant;
          scenario.replicates = options.replicates;
          scenario.root_seed = options.root_seed;
          scenarios.push_back(scenario);
        }
      }
    }
  }

  const auto batches = optdes::run_batch(scenarios, workers);

  std::string results_text;
  std::string summary_text = optdes::summary_csv_header() + "\n";
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    for (const auto& run : batches[s]) {
      results_text += optdes::run_record_json(scenarios[s], run);
      results_text += '\n';
    }
    const optdes::ReplicateSummary summary =
        optdes::summarize(batches[s], scenarios[s], catalog);
    summary_text += optdes::summary_csv_row(summary) + "\n";
    std::cout << optdes::fingerprint(scenarios[s])
              << " replicates=" << scenarios[s].replicates
              << " best=" << format_g6(summary.best_value)
              << " median=" << format_g6(summary.median_value)
              << " success=" << format_g6(summary.success_probability)
              << " prop95=" << format_g6(summary.prop_highly_efficient)
              << " ref=" << summary.reference_source
              << " med_evals=" << format_g6(summary.median_function_evaluations)
              << " med_wall=" << format_g6(summary.median_wall_time_seconds)
              << "s\n";
  }
  optdes::write_text_atomic(options.out_results, results_text);
  optdes::write_text_atomic(options.out_summary, summary_text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact D- and I-optimal design generation with particle swarms"};
  app.require_subcommand(1);

  RunOptions run_options;
  CLI::App* run = app.add_subcommand("run", "Search for an optimal design");
  run->add_option("--criterion", run_options.criterion, "D or I")->required();
  run->add_option("--factors", run_options.factors, "number of design factors K")
      ->required();
  run->add_option("--points", run_options.points, "number of design points N")
      ->required();
  run->add_option("--swarm-size", run_options.swarm_size, "particles per swarm");
  run->add_option("--topology", run_options.topology, "global or local");
  run->add_option("--seed", run_options.seed, "run seed");
  run->add_option("--max-iter", run_options.max_iterations, "iteration cap");
  run->add_option("--out", run_options.out, "write the run record as JSON");

  EvalOptions eval_options;
  CLI::App* eval = app.add_subcommand("eval", "Score a design file");
  eval->add_option("--design", eval_options.design_path, "design CSV path")
      ->required();
  eval->add_option("--factors", eval_options.factors, "number of design factors K")
      ->required();
  eval->add_option("--criterion", eval_options.criterion, "D, I, or both");
  double reference_value = 0.0;
  CLI::Option* reference_option =
      eval->add_option("--reference", reference_value, "reference criterion value");
  eval->add_option("--catalog", eval_options.catalog_path, "reference catalog JSON");

  MomentOptions moment_options;
  CLI::App* moment = app.add_subcommand("moment", "Print the moment matrix");
  moment->add_option("--factors", moment_options.factors, "number of design factors K")
      ->required();
  moment->add_flag("--json", moment_options.as_json, "machine-readable output");

  BenchOptions bench_options;
  CLI::App* bench = app.add_subcommand("bench", "Run a replicated benchmark");
  bench->add_flag("--paper-grid", bench_options.use_paper_grid,
                  "use the built-in 21-cell study grid");
  bench->add_flag("--paper-scale", bench_options.paper_scale,
                  "study grid at full scale: 140 replicates, S in {50,150,500}");
  bench->add_option("--scenarios", bench_options.scenarios_path,
                    "JSON array of {K, N} cells");
  bench->add_option("--replicates", bench_options.replicates, "runs per scenario");
  bench->add_option("--swarm-sizes", bench_options.swarm_sizes, "swarm sizes")
      ->delimiter(',');
  bench->add_option("--variants", bench_options.variants, "global, local")
      ->delimiter(',');
  bench->add_option("--criteria", bench_options.criteria, "D, I")->delimiter(',');
  bench->add_option("--workers", bench_options.workers,
                    "worker threads (default: OPTDES_WORKERS or all cores)");
  bench->add_option("--catalog", bench_options.catalog_path, "reference catalog JSON");
  bench->add_option("--root-seed", bench_options.root_seed, "batch root seed");
  bench->add_option("--out-results", bench_options.out_results, "results JSONL path");
  bench->add_option("--out-summary", bench_options.out_summary, "summary CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_options);
    if (eval->parsed()) {
      if (reference_option->count() > 0) eval_options.reference = reference_value;
      return cmd_eval(eval_options);
    }
    if (moment->parsed()) return cmd_moment(moment_options);
    if (bench->parsed()) return cmd_bench(bench_options, *bench);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
