#include "biasaudit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "biasaudit/baselines.hpp"
#include "biasaudit/csv.hpp"
#include "biasaudit/datamodel.hpp"
#include "biasaudit/metrics.hpp"

namespace biasaudit {

namespace {

const std::set<std::string> kKnownMethods = {"MDBA", "MDBA-Naive", "SR", "GS", "CL"};

}  // namespace

DatasetSource DatasetSource::from_json(const nlohmann::json& j) {
  DatasetSource src;
  std::string kind = j.value("kind", "synthetic");
  if (kind == "synthetic") {
    src.kind = Kind::synthetic;
  } else if (kind == "csv") {
    src.kind = Kind::csv;
  } else {
    throw ValidationError("unknown dataset kind: " + kind);
  }
  if (j.contains("name")) src.name = j.at("name");
  if (j.contains("rows")) src.synthetic_rows = j.at("rows");
  if (j.contains("seed")) src.synthetic_seed = j.at("seed");
  if (j.contains("path")) src.csv_path = j.at("path");
  if (j.contains("schema")) src.schema_path = j.at("schema");
  src.validate();
  return src;
}

nlohmann::json DatasetSource::to_json() const {
  nlohmann::json j;
  if (kind == Kind::synthetic) {
    j["kind"] = "synthetic";
    j["name"] = name;
    j["rows"] = synthetic_rows;
    j["seed"] = synthetic_seed;
  } else {
    j["kind"] = "csv";
    j["name"] = name;
    j["path"] = csv_path;
    j["schema"] = schema_path;
  }
  return j;
}

void DatasetSource::validate() const {
  if (name.empty()) throw ValidationError("dataset needs a name");
  if (kind == Kind::synthetic) {
    if (synthetic_rows == 0) throw ValidationError("synthetic dataset needs rows");
  } else {
    if (csv_path.empty() || schema_path.empty()) {
      throw ValidationError("csv dataset needs path and schema");
    }
  }
}

ExperimentConfig::ExperimentConfig() {
  // Defaults target the built-in synthetic dataset.
  scenario.interaction_feature = "x4";
}

void ExperimentConfig::validate() const {
  dataset.validate();
  if (prevalences.empty()) throw ValidationError("no prevalences listed");
  for (double p : prevalences) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("prevalences must lie strictly in (0, 1)");
  }
  if (bias_kinds.empty()) throw ValidationError("no bias kinds listed");
  if (gs_pool_sizes.empty()) throw ValidationError("no pool sizes listed");
  for (std::size_t s : gs_pool_sizes) {
    if (s == 0) throw ValidationError("pool sizes must be positive");
    if (s > gs_reserve_per_group) {
      throw ValidationError("pool size " + std::to_string(s) + " exceeds the reserve of " +
                            std::to_string(gs_reserve_per_group) + " per group");
    }
  }
  if (iterations == 0) throw ValidationError("iterations must be positive");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ValidationError("confidence must lie strictly between 0 and 1");
  }
  if (methods.empty()) throw ValidationError("no methods listed");
  std::set<std::string> seen;
  for (const auto& m : methods) {
    if (!kKnownMethods.count(m)) throw ValidationError("unknown method: " + m);
    if (!seen.insert(m).second) throw ValidationError("method listed twice: " + m);
  }
  if (cl_folds < 2) throw ValidationError("label cleaning needs at least two folds");
  mdba.validate();
  bool incorrect = std::find(bias_kinds.begin(), bias_kinds.end(),
                             BiasKind::incorrect_ordering) != bias_kinds.end();
  if (incorrect && scenario.interaction_feature.empty()) {
    throw ValidationError("incorrect-ordering scenarios need scenario.interaction_feature");
  }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (j.contains("dataset")) cfg.dataset = DatasetSource::from_json(j.at("dataset"));
  if (j.contains("prevalences")) cfg.prevalences = j.at("prevalences").get<std::vector<double>>();
  if (j.contains("bias_kinds")) {
    cfg.bias_kinds.clear();
    for (const auto& k : j.at("bias_kinds")) {
      cfg.bias_kinds.push_back(bias_kind_from_string(k.get<std::string>()));
    }
  }
  if (j.contains("gs_pool_sizes_per_group")) {
    cfg.gs_pool_sizes = j.at("gs_pool_sizes_per_group").get<std::vector<std::size_t>>();
  }
  if (j.contains("gs_reserve_per_group")) cfg.gs_reserve_per_group = j.at("gs_reserve_per_group");
  if (j.contains("iterations")) cfg.iterations = j.at("iterations");
  if (j.contains("confidence")) cfg.confidence = j.at("confidence");
  if (j.contains("methods")) cfg.methods = j.at("methods").get<std::vector<std::string>>();
  if (j.contains("significance_test")) {
    cfg.significance = significance_test_from_string(j.at("significance_test"));
  }
  if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed");
  if (j.contains("scenario")) cfg.scenario = ScenarioSpec::from_json(j.at("scenario"));
  if (j.contains("mdba")) cfg.mdba = MdbaConfig::from_json(j.at("mdba"));
  if (j.contains("cl_folds")) cfg.cl_folds = j.at("cl_folds");
  cfg.validate();
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json kinds = nlohmann::json::array();
  for (BiasKind k : bias_kinds) kinds.push_back(to_string(k));
  return {{"dataset", dataset.to_json()},
          {"prevalences", prevalences},
          {"bias_kinds", kinds},
          {"gs_pool_sizes_per_group", gs_pool_sizes},
          {"gs_reserve_per_group", gs_reserve_per_group},
          {"iterations", iterations},
          {"confidence", confidence},
          {"methods", methods},
          {"significance_test", to_string(significance)},
          {"base_seed", base_seed},
          {"scenario", scenario.to_json()},
          {"mdba", mdba.to_json()},
          {"cl_folds", cl_folds}};
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(path + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

namespace {

std::vector<double> method_gaps(const std::vector<BiasEstimate>& estimates) {
  std::vector<double> gaps;
  gaps.reserve(estimates.size());
  for (const auto& est : estimates) {
    if (est.failed()) {
      throw Error(est.human_id + ": " + est.error);
    }
    gaps.push_back(est.gap);
  }
  return gaps;
}

std::vector<double> run_method(const std::string& method, const SimulatedWorld& world,
                               const ExperimentConfig& cfg, std::uint64_t iteration_seed) {
  if (method == "MDBA" || method == "MDBA-Naive") {
    MdbaConfig mdba = cfg.mdba;
    mdba.naive_mode = method == "MDBA-Naive";
    return method_gaps(estimate_bias(world.humans, world.gold_pool, mdba));
  }
  if (method == "SR") {
    return method_gaps(sr_estimate(world.humans));
  }
  if (method == "GS") {
    return method_gaps(gs_estimate(world.humans, world.gold_pool, cfg.mdba.learner));
  }
  if (method == "CL") {
    return method_gaps(cl_estimate(world.humans, world.gold_pool, cfg.mdba.learner,
                                   derive_seed(iteration_seed, 500), cfg.cl_folds));
  }
  throw ValidationError("unknown method: " + method);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();

  std::vector<Instance> instances;
  std::vector<std::string> feature_names;
  if (config.dataset.kind == DatasetSource::Kind::synthetic) {
    auto made = make_synthetic_dataset(config.dataset.synthetic_rows,
                                       config.dataset.synthetic_seed);
    instances = std::move(made.first);
    feature_names = std::move(made.second);
  } else {
    DatasetSchema schema = load_schema(config.dataset.schema_path);
    IngestResult loaded = ingest_csv(config.dataset.csv_path, schema);
    instances = std::move(loaded.instances);
    feature_names = std::move(loaded.feature_names);
  }

  ExperimentReport report;
  report.config = config;
  for (double prevalence : config.prevalences) {
    for (BiasKind kind : config.bias_kinds) {
      for (std::size_t gs_size : config.gs_pool_sizes) {
        std::map<std::string, CellResult> results;
        std::map<std::string, std::vector<double>> maes;
        for (const auto& m : config.methods) {
          results[m] = CellResult{};
          maes[m] = {};
        }

        for (std::size_t iter = 0; iter < config.iterations; ++iter) {
          ScenarioSpec scenario = config.scenario;
          scenario.kind = kind;
          scenario.prevalence = prevalence;
          scenario.seed = config.base_seed + iter;

          SimulatedWorld world;
          try {
            world = build_world(instances, feature_names, config.dataset.name, scenario,
                                config.gs_reserve_per_group, gs_size);
          } catch (const Error& e) {
            std::string msg = "iteration " + std::to_string(iter) + ": world: " + e.what();
            for (const auto& m : config.methods) {
              if (!results[m].failed()) results[m].error = msg;
            }
            break;
          }

          for (const auto& m : config.methods) {
            if (results[m].failed()) continue;
            try {
              std::vector<double> gaps = run_method(m, world, config, scenario.seed);
              maes[m].push_back(mean_absolute_error(gaps, world.true_gaps));
            } catch (const Error& e) {
              results[m].error = "iteration " + std::to_string(iter) + ": " + e.what();
            }
          }
        }

        for (const auto& m : config.methods) {
          CellResult& cell = results[m];
          cell.iteration_maes = maes[m];
          if (!cell.iteration_maes.empty()) {
            double total = 0.0;
            for (double v : cell.iteration_maes) total += v;
            cell.mean_mae = total / static_cast<double>(cell.iteration_maes.size());
            cell.ci_half_width = t_interval_half_width(cell.iteration_maes, config.confidence);
          }
          CellKey key{config.dataset.name, prevalence, kind, gs_size, m};
          report.cells.emplace_back(std::move(key), std::move(cell));
        }

        bool mdba_ok = results.count("MDBA") && !results["MDBA"].failed() &&
                       maes["MDBA"].size() == config.iterations;
        if (mdba_ok) {
          for (const auto& m : config.methods) {
            if (m == "MDBA" || results[m].failed() || maes[m].size() != config.iterations) {
              continue;
            }
            MethodComparison cmp;
            cmp.dataset = config.dataset.name;
            cmp.prevalence = prevalence;
            cmp.kind = kind;
            cmp.gs_per_group = gs_size;
            cmp.baseline = m;
            double mdba_mean = 0.0, other_mean = 0.0;
            for (double v : maes["MDBA"]) mdba_mean += v;
            for (double v : maes[m]) other_mean += v;
            mdba_mean /= static_cast<double>(config.iterations);
            other_mean /= static_cast<double>(config.iterations);
            cmp.improvement_percent =
                other_mean == 0.0 ? 0.0 : (other_mean - mdba_mean) / other_mean * 100.0;
            TestResult test = paired_significance(maes["MDBA"], maes[m], config.significance);
            cmp.p_value = test.p_value;
            cmp.stars = significance_stars(test.p_value);
            cmp.degenerate = test.degenerate;
            report.comparisons.push_back(std::move(cmp));
          }
        }
      }
    }
  }
  return report;
}

bool report_has_failures(const ExperimentReport& report) {
  for (const auto& [key, cell] : report.cells) {
    if (cell.failed()) return true;
  }
  return false;
}

nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["config"] = report.config.to_json();
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& [key, cell] : report.cells) {
    nlohmann::ordered_json c;
    c["dataset"] = key.dataset;
    c["prevalence"] = key.prevalence;
    c["bias_kind"] = to_string(key.kind);
    c["gs_per_group"] = key.gs_per_group;
    c["method"] = key.method;
    c["completed_iterations"] = cell.iteration_maes.size();
    if (!cell.iteration_maes.empty()) {
      c["mean_mae"] = cell.mean_mae;
      c["ci_half_width"] = cell.ci_half_width;
      c["iteration_maes"] = cell.iteration_maes;
    }
    if (cell.failed()) c["error"] = cell.error;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  nlohmann::ordered_json comparisons = nlohmann::ordered_json::array();
  for (const auto& cmp : report.comparisons) {
    comparisons.push_back({{"dataset", cmp.dataset},
                           {"prevalence", cmp.prevalence},
                           {"bias_kind", to_string(cmp.kind)},
                           {"gs_per_group", cmp.gs_per_group},
                           {"baseline", cmp.baseline},
                           {"improvement_percent", cmp.improvement_percent},
                           {"p_value", cmp.p_value},
                           {"stars", cmp.stars},
                           {"degenerate", cmp.degenerate}});
  }
  j["comparisons"] = std::move(comparisons);
  return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != 1) {
    throw ValidationError("unsupported report format version");
  }
  ExperimentReport report;
  report.config = ExperimentConfig::from_json(j.at("config"));
  for (const auto& c : j.at("cells")) {
    CellKey key;
    key.dataset = c.at("dataset").get<std::string>();
    key.prevalence = c.at("prevalence").get<double>();
    key.kind = bias_kind_from_string(c.at("bias_kind").get<std::string>());
    key.gs_per_group = c.at("gs_per_group").get<std::size_t>();
    key.method = c.at("method").get<std::string>();
    CellResult cell;
    if (c.contains("iteration_maes")) {
      cell.iteration_maes = c.at("iteration_maes").get<std::vector<double>>();
      cell.mean_mae = c.at("mean_mae").get<double>();
      cell.ci_half_width = c.at("ci_half_width").get<double>();
    }
    if (c.contains("error")) cell.error = c.at("error").get<std::string>();
    report.cells.emplace_back(std::move(key), std::move(cell));
  }
  for (const auto& c : j.at("comparisons")) {
    MethodComparison cmp;
    cmp.dataset = c.at("dataset").get<std::string>();
    cmp.prevalence = c.at("prevalence").get<double>();
    cmp.kind = bias_kind_from_string(c.at("bias_kind").get<std::string>());
    cmp.gs_per_group = c.at("gs_per_group").get<std::size_t>();
    cmp.baseline = c.at("baseline").get<std::string>();
    cmp.improvement_percent = c.at("improvement_percent").get<double>();
    cmp.p_value = c.at("p_value").get<double>();
    cmp.stars = c.at("stars").get<std::string>();
    cmp.degenerate = c.at("degenerate").get<bool>();
    report.comparisons.push_back(std::move(cmp));
  }
  return report;
}

ExperimentReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(path + ": " + e.what());
  }
  return report_from_json(j);
}

namespace {

std::string prevalence_tag(double p) {
  return "p" + std::to_string(static_cast<long long>(std::llround(p * 100.0)));
}

}  // namespace

void emit_report(const ExperimentReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);

  {
    std::ofstream out(out_dir + "/report.json", std::ios::binary);
    if (!out) throw Error("cannot write " + out_dir + "/report.json");
    out << report_to_json(report).dump(2) << '\n';
    if (!out) throw Error("write failed: " + out_dir + "/report.json");
  }

  CsvTable cells;
  cells.header = {"dataset", "prevalence",    "bias_kind",     "gs_per_group",
                  "method",  "completed_iterations", "mean_mae", "ci_half_width",
                  "error"};
  for (const auto& [key, cell] : report.cells) {
    std::vector<std::string> row(cells.header.size());
    row[0] = key.dataset;
    row[1] = format_double(key.prevalence);
    row[2] = to_string(key.kind);
    row[3] = std::to_string(key.gs_per_group);
    row[4] = key.method;
    row[5] = std::to_string(cell.iteration_maes.size());
    if (!cell.iteration_maes.empty()) {
      row[6] = format_double(cell.mean_mae);
      row[7] = format_double(cell.ci_half_width);
    }
    row[8] = cell.error;
    cells.rows.push_back(std::move(row));
  }
  write_csv(out_dir + "/cells.csv", cells);

  // One plot table per (dataset, prevalence, bias kind): MAE and
  // confidence bounds by pool size, one column triple per method.
  for (double prevalence : report.config.prevalences) {
    for (BiasKind kind : report.config.bias_kinds) {
      CsvTable plot;
      plot.header = {"gs_per_group"};
      for (const auto& m : report.config.methods) {
        plot.header.push_back(m + "_mae");
        plot.header.push_back(m + "_lo");
        plot.header.push_back(m + "_hi");
      }
      for (std::size_t gs_size : report.config.gs_pool_sizes) {
        std::vector<std::string> row(plot.header.size());
        row[0] = std::to_string(gs_size);
        std::size_t col = 1;
        for (const auto& m : report.config.methods) {
          for (const auto& [key, cell] : report.cells) {
            if (key.prevalence == prevalence && key.kind == kind &&
                key.gs_per_group == gs_size && key.method == m &&
                !cell.iteration_maes.empty()) {
              row[col] = format_double(cell.mean_mae);
              row[col + 1] = format_double(cell.mean_mae - cell.ci_half_width);
              row[col + 2] = format_double(cell.mean_mae + cell.ci_half_width);
              break;
            }
          }
          col += 3;
        }
        plot.rows.push_back(std::move(row));
      }
      write_csv(out_dir + "/plot_" + report.config.dataset.name + "_" +
                    prevalence_tag(prevalence) + "_" + to_string(kind) + ".csv",
                plot);
    }
  }
}

}  // namespace biasaudit
