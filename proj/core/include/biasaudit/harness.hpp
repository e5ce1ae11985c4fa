#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "biasaudit/mdba.hpp"
#include "biasaudit/simulate.hpp"
#include "biasaudit/stats.hpp"
#include "biasaudit/types.hpp"

namespace biasaudit {

/// Where experiment instances come from: the built-in synthetic
/// generator or a CSV file with a schema.
struct DatasetSource {
  enum class Kind { synthetic, csv };
  Kind kind = Kind::synthetic;
  std::string name = "synthetic";
  std::size_t synthetic_rows = 6000;
  std::uint64_t synthetic_seed = 7;
  std::string csv_path;
  std::string schema_path;

  static DatasetSource from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

/// Full description of an evaluation run: the grid of scenarios, how
/// many iterations per cell, which estimators to compare and how to
/// judge the comparisons.
struct ExperimentConfig {
  DatasetSource dataset;
  std::vector<double> prevalences = {0.2, 0.3};
  std::vector<BiasKind> bias_kinds = {BiasKind::correct_ordering,
                                      BiasKind::incorrect_ordering};
  /// Gold-standard pool sizes per group, each drawn from the reserve.
  std::vector<std::size_t> gs_pool_sizes = {100, 200, 300, 400};
  std::size_t gs_reserve_per_group = 400;
  std::size_t iterations = 20;
  double confidence = 0.95;
  std::vector<std::string> methods = {"MDBA", "SR", "GS", "CL"};
  SignificanceTest significance = SignificanceTest::paired_t;
  std::uint64_t base_seed = 1;
  /// Scenario template; kind, prevalence and seed are overridden per
  /// cell and iteration.
  ScenarioSpec scenario;
  MdbaConfig mdba;
  std::size_t cl_folds = 5;

  ExperimentConfig();
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct CellKey {
  std::string dataset;
  double prevalence = 0.0;
  BiasKind kind = BiasKind::correct_ordering;
  std::size_t gs_per_group = 0;
  std::string method;
};

struct CellResult {
  /// MAE between estimated and true gaps, one entry per completed
  /// iteration.
  std::vector<double> iteration_maes;
  double mean_mae = 0.0;
  double ci_half_width = 0.0;
  /// Non-empty when any iteration failed; mean/CI then cover only
  /// the completed iterations (none if empty).
  std::string error;

  bool failed() const { return !error.empty(); }
};

/// MDBA against one baseline within one grid setting, paired across
/// iterations.
struct MethodComparison {
  std::string dataset;
  double prevalence = 0.0;
  BiasKind kind = BiasKind::correct_ordering;
  std::size_t gs_per_group = 0;
  std::string baseline;
  /// (baseline MAE - MDBA MAE) / baseline MAE * 100.
  double improvement_percent = 0.0;
  double p_value = 1.0;
  std::string stars;
  bool degenerate = false;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<std::pair<CellKey, CellResult>> cells;
  std::vector<MethodComparison> comparisons;
};

/// Runs the full grid. Failures (a world that cannot be built, an
/// estimator that errors) are recorded in the affected cells and
/// never abort the remaining grid. Iteration i of every cell uses
/// seed base_seed + i, so methods face identical worlds and the
/// comparisons are paired.
ExperimentReport run_experiment(const ExperimentConfig& config);

bool report_has_failures(const ExperimentReport& report);

nlohmann::ordered_json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);
ExperimentReport load_report(const std::string& path);

/// Writes report.json, a flat cells.csv and one per-setting plot CSV
/// (MAE with confidence bounds per pool size and method). Output is
/// byte-deterministic for identical reports.
void emit_report(const ExperimentReport& report, const std::string& out_dir);

}  // namespace biasaudit
