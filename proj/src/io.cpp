#include "optdes/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace optdes {

std::string format_g17(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    }
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("rename to '" + path + "' failed: " + ec.message());
  }
}

namespace {

constexpr double kBoundTolerance = 1e-12;

double parse_clamped(const std::string& token, const std::string& path, int line) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  while (end != nullptr && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  if (end == token.c_str() || end == nullptr || *end != '\0' || errno == ERANGE) {
    throw std::runtime_error(path + ":" + std::to_string(line) +
                             ": malformed value '" + token + "'");
  }
  if (value < -1.0 - kBoundTolerance || value > 1.0 + kBoundTolerance) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": value " +
                             token + " outside [-1, 1]");
  }
  return std::min(1.0, std::max(-1.0, value));
}

}  // namespace

DesignMatrix load_design_csv(const std::string& path, int expected_factors) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open design file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string token;
    while (std::getline(fields, token, ',')) {
      const auto start = token.find_first_not_of(" \t");
      if (start == std::string::npos) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": empty field");
      }
      row.push_back(parse_clamped(token.substr(start), path, line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("design file '" + path + "' is empty");
  const int k = static_cast<int>(rows.front().size());
  if (expected_factors > 0 && k != expected_factors) {
    throw std::runtime_error("design file '" + path + "' has " +
                             std::to_string(k) + " factors, expected " +
                             std::to_string(expected_factors));
  }
  DesignMatrix design(static_cast<Eigen::Index>(rows.size()), k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < k; ++j) {
      design(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    }
  }
  return design;
}

std::string design_csv(const DesignMatrix& design) {
  std::string out;
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    for (Eigen::Index j = 0; j < design.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_g17(design(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string run_record_json(const Scenario& scenario, const RunResult& result) {
  std::string json = "{\"fingerprint\":\"" + fingerprint(scenario) + "\"";
  json += ",\"K\":" + std::to_string(scenario.factors);
  json += ",\"N\":" + std::to_string(scenario.points);
  json += ",\"criterion\":\"" + std::string(to_string(scenario.criterion)) + "\"";
  json += ",\"variant\":\"" + std::string(to_string(scenario.variant)) + "\"";
  json += ",\"swarm_size\":" + std::to_string(scenario.swarm_size);
  json += ",\"seed\":" + std::to_string(result.seed);
  json += ",\"rng\":\"" + std::string(Rng::name()) + "\"";
  json += ",\"best_value\":";
  json += result.best_fitness.singular ? "null" : format_g17(result.best_fitness.value);
  json += ",\"singular\":";
  json += result.best_fitness.singular ? "true" : "false";
  json += ",\"iterations\":" + std::to_string(result.iterations);
  json += ",\"function_evaluations\":" + std::to_string(result.function_evaluations);
  json += ",\"wall_time_seconds\":" + format_g17(result.wall_time_seconds);
  json += ",\"stop_reason\":\"" + std::string(to_string(result.stop_reason)) + "\"";
  json += ",\"best_design\":[";
  bool first = true;
  for (Eigen::Index i = 0; i < result.best_design.rows(); ++i) {
    for (Eigen::Index j = 0; j < result.best_design.cols(); ++j) {
      if (!first) json += ',';
      json += format_g17(result.best_design(i, j));
      first = false;
    }
  }
  json += "]}";
  return json;
}

std::vector<RunRecord> read_results_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results file '" + path + "'");
  std::vector<RunRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    RunRecord record;
    record.fingerprint = j.at("fingerprint").get<std::string>();
    record.factors = j.at("K").get<int>();
    record.points = j.at("N").get<int>();
    record.criterion = criterion_from_string(j.at("criterion").get<std::string>());
    record.variant = topology_from_string(j.at("variant").get<std::string>());
    record.swarm_size = j.at("swarm_size").get<int>();
    record.seed = j.at("seed").get<std::uint64_t>();
    record.rng = j.at("rng").get<std::string>();
    record.singular = j.at("singular").get<bool>();
    record.best_value = j.at("best_value").is_null()
                            ? std::numeric_limits<double>::infinity()
                            : j.at("best_value").get<double>();
    record.iterations = j.at("iterations").get<std::int64_t>();
    record.function_evaluations = j.at("function_evaluations").get<std::int64_t>();
    record.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    record.stop_reason = j.at("stop_reason").get<std::string>();
    record.best_design_row_major = j.at("best_design").get<std::vector<double>>();
    records.push_back(std::move(record));
  }
  return records;
}

ReferenceCatalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open catalog file '" + path + "'");
  nlohmann::json j;
  in >> j;
  if (!j.is_object()) {
    throw std::runtime_error("catalog '" + path + "' must be a JSON object");
  }
  ReferenceCatalog catalog;
  for (const auto& [key, body] : j.items()) {
    ReferenceEntry entry;
    entry.value = body.at("value").get<double>();
    if (!(entry.value > 0.0) || !std::isfinite(entry.value)) {
      throw std::runtime_error("catalog entry '" + key +
                               "' must carry a positive finite value");
    }
    if (body.contains("design")) {
      const auto& rows = body.at("design");
      if (!rows.is_array() || rows.empty()) {
        throw std::runtime_error("catalog entry '" + key + "': bad design");
      }
      const auto n = static_cast<Eigen::Index>(rows.size());
      const auto k = static_cast<Eigen::Index>(rows.front().size());
      DesignMatrix design(n, k);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != k) {
          throw std::runtime_error("catalog entry '" + key +
                                   "': ragged design rows");
        }
        for (Eigen::Index c = 0; c < k; ++c) {
          design(i, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
      }
      entry.design = std::move(design);
    }
    catalog.entries.emplace(key, std::move(entry));
  }
  return catalog;
}

std::string summary_csv_header() {
  return "fingerprint,K,N,criterion,variant,swarm_size,replicates,root_seed,"
         "reference_source,reference_value,best_value,median_value,"
         "success_probability,prop_highly_efficient,"
         "median_function_evaluations,median_wall_time_seconds";
}

std::string summary_csv_row(const ReplicateSummary& summary) {
  const Scenario& s = summary.scenario;
  std::string row = fingerprint(s);
  row += ',' + std::to_string(s.factors);
  row += ',' + std::to_string(s.points);
  row += ',' + std::string(to_string(s.criterion));
  row += ',' + std::string(to_string(s.variant));
  row += ',' + std::to_string(s.swarm_size);
  row += ',' + std::to_string(s.replicates);
  row += ',' + std::to_string(s.root_seed);
  row += ',' + summary.reference_source;
  row += ',' + format_g17(summary.reference_value);
  row += ',' + format_g17(summary.best_value);
  row += ',' + format_g17(summary.median_value);
  row += ',' + format_g17(summary.success_probability);
  row += ',' + format_g17(summary.prop_highly_efficient);
  row += ',' + format_g17(summary.median_function_evaluations);
  row += ',' + format_g17(summary.median_wall_time_seconds);
  return row;
}

}  // namespace optdes
