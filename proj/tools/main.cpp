#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "biasaudit/baselines.hpp"
#include "biasaudit/csv.hpp"
#include "biasaudit/datamodel.hpp"
#include "biasaudit/harness.hpp"
#include "biasaudit/mdba.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/simulate.hpp"

namespace {

using namespace biasaudit;

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(path + ": " + e.what());
  }
  return j;
}

std::pair<std::vector<Instance>, std::vector<std::string>> load_dataset(
    const DatasetSource& source) {
  if (source.kind == DatasetSource::Kind::synthetic) {
    return make_synthetic_dataset(source.synthetic_rows, source.synthetic_seed);
  }
  DatasetSchema schema = load_schema(source.schema_path);
  IngestResult loaded = ingest_csv(source.csv_path, schema);
  return {std::move(loaded.instances), std::move(loaded.feature_names)};
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::uint64_t seed, bool seed_given) {
  DatasetSource dataset;
  ScenarioSpec scenario;
  scenario.interaction_feature = "x4";
  std::size_t reserve = 400, pool = 200;
  if (!config_path.empty()) {
    nlohmann::json j = read_json_file(config_path);
    if (j.contains("dataset")) dataset = DatasetSource::from_json(j.at("dataset"));
    if (j.contains("scenario")) scenario = ScenarioSpec::from_json(j.at("scenario"));
    if (j.contains("gs_reserve_per_group")) reserve = j.at("gs_reserve_per_group");
    if (j.contains("gs_pool_per_group")) pool = j.at("gs_pool_per_group");
  }
  if (seed_given) scenario.seed = seed;

  auto [instances, feature_names] = load_dataset(dataset);
  SimulatedWorld world =
      build_world(instances, feature_names, dataset.name, scenario, reserve, pool);
  save_world(world, out_dir);

  std::cout << "world saved to " << out_dir << "\n"
            << "  humans: " << world.humans.size() << ", pool: "
            << world.gold_pool.instances.size() << " instances\n";
  for (std::size_t k = 0; k < world.humans.size(); ++k) {
    const auto& r = world.records[k];
    std::cout << "  " << r.human_id << ": true gap " << format_double(world.true_gaps[k])
              << ", group-a TPR " << format_double(r.achieved_tpr_a)
              << (r.tpr_a_within_tolerance ? "" : " (off target)") << "\n";
  }
  return 0;
}

void write_method_estimates(const std::vector<BiasEstimate>& estimates,
                            const std::string& out_dir, const std::string& method,
                            const std::string& format) {
  std::filesystem::create_directories(out_dir);
  std::string base = out_dir + "/estimates_" + method;
  if (format == "csv") {
    write_csv(base + ".csv", estimates_to_csv(estimates));
    std::cout << "wrote " << base << ".csv\n";
  } else {
    save_estimates(estimates, base + ".json");
    std::cout << "wrote " << base << ".json\n";
  }
}

int cmd_assess(const std::string& world_dir, const std::string& gold_path,
               const std::vector<std::string>& decision_paths, const std::string& schema_path,
               const std::vector<std::string>& methods, const std::string& config_path,
               const std::string& out_dir, const std::string& format, std::uint64_t seed) {
  MdbaConfig mdba;
  if (!config_path.empty()) mdba = MdbaConfig::from_json(read_json_file(config_path));

  std::vector<DecisionSet> humans;
  GoldStandardSet gold;
  std::vector<double> truths;
  bool have_truths = false;

  if (!world_dir.empty()) {
    SimulatedWorld world = load_world(world_dir);
    humans = std::move(world.humans);
    gold = std::move(world.gold_pool);
    truths = std::move(world.true_gaps);
    have_truths = true;
  } else {
    if (gold_path.empty() || decision_paths.empty() || schema_path.empty()) {
      std::cerr << "assess needs either --world or all of --gold, --decisions, --schema\n";
      return 1;
    }
    DatasetSchema schema = load_schema(schema_path);
    auto gs = ingest_csv(gold_path, schema);
    gold = GoldStandardSet::create(std::move(gs.instances));
    for (const auto& path : decision_paths) {
      auto loaded = ingest_csv(path, schema);
      humans.push_back(
          DecisionSet::create(std::filesystem::path(path).stem().string(),
                              std::move(loaded.instances)));
    }
  }

  for (const auto& method : methods) {
    std::vector<BiasEstimate> estimates;
    if (method == "MDBA" || method == "MDBA-Naive") {
      MdbaConfig cfg = mdba;
      cfg.naive_mode = method == "MDBA-Naive";
      estimates = estimate_bias(humans, gold, cfg);
    } else if (method == "SR") {
      estimates = sr_estimate(humans);
    } else if (method == "GS") {
      estimates = gs_estimate(humans, gold, mdba.learner);
    } else if (method == "CL") {
      estimates = cl_estimate(humans, gold, mdba.learner, derive_seed(seed, 500));
    } else {
      std::cerr << "unknown method: " << method << "\n";
      return 1;
    }

    std::cout << method << ":\n";
    std::vector<double> gaps;
    bool all_ok = true;
    for (const auto& est : estimates) {
      if (est.failed()) {
        std::cout << "  " << est.human_id << ": failed: " << est.error << "\n";
        all_ok = false;
        continue;
      }
      gaps.push_back(est.gap);
      std::cout << "  " << est.human_id << ": gap " << format_double(est.gap);
      if (est.uncertainty > 0) std::cout << " (spread " << format_double(est.uncertainty) << ")";
      if (!est.warning.empty()) std::cout << " [" << est.warning << "]";
      std::cout << "\n";
    }
    if (have_truths && all_ok) {
      std::cout << "  MAE vs true gaps: " << format_double(mean_absolute_error(gaps, truths))
                << "\n";
    }
    write_method_estimates(estimates, out_dir, method, format);
  }
  return 0;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_dir,
                  std::uint64_t seed, bool seed_given) {
  ExperimentConfig config;
  if (!config_path.empty()) config = load_experiment_config(config_path);
  if (seed_given) config.base_seed = seed;
  config.validate();

  ExperimentReport report = run_experiment(config);
  emit_report(report, out_dir);
  std::cout << "report written to " << out_dir << "\n";
  for (const auto& cmp : report.comparisons) {
    std::cout << "  " << cmp.dataset << " p=" << format_double(cmp.prevalence) << " "
              << to_string(cmp.kind) << " gs=" << cmp.gs_per_group << ": MDBA vs "
              << cmp.baseline << ": " << format_double(cmp.improvement_percent)
              << "% improvement, p=" << format_double(cmp.p_value) << " " << cmp.stars << "\n";
  }
  if (report_has_failures(report)) {
    std::cerr << "some cells failed; see " << out_dir << "/report.json\n";
    return 2;
  }
  return 0;
}

int cmd_report(const std::string& input, const std::string& out_dir) {
  ExperimentReport report = load_report(input);
  std::cout << "dataset=" << report.config.dataset.name
            << " iterations=" << report.config.iterations << "\n";
  for (const auto& [key, cell] : report.cells) {
    std::cout << "  " << key.dataset << " p=" << format_double(key.prevalence) << " "
              << to_string(key.kind) << " gs=" << key.gs_per_group << " " << key.method << ": ";
    if (cell.iteration_maes.empty()) {
      std::cout << "failed: " << cell.error << "\n";
      continue;
    }
    std::cout << "MAE " << format_double(cell.mean_mae) << " +- "
              << format_double(cell.ci_half_width);
    if (cell.failed()) std::cout << " (partial: " << cell.error << ")";
    std::cout << "\n";
  }
  for (const auto& cmp : report.comparisons) {
    std::cout << "  MDBA vs " << cmp.baseline << " (p=" << format_double(cmp.prevalence) << ", "
              << to_string(cmp.kind) << ", gs=" << cmp.gs_per_group << "): "
              << format_double(cmp.improvement_percent) << "% p=" << format_double(cmp.p_value)
              << " " << cmp.stars << "\n";
  }
  if (!out_dir.empty()) {
    emit_report(report, out_dir);
    std::cout << "artifacts re-emitted to " << out_dir << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimate group error-rate bias of human decision-makers"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Build a simulated decision world and save it");
  std::string sim_config, sim_out = "world";
  std::uint64_t sim_seed = 0;
  sim->add_option("--config", sim_config, "JSON with dataset/scenario/pool settings");
  sim->add_option("--out-dir", sim_out, "Directory for the world files");
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Override the scenario seed");

  auto* assess = app.add_subcommand("assess", "Estimate per-human bias from decision data");
  std::string as_world, as_gold, as_schema, as_config, as_out = ".", as_format = "json";
  std::vector<std::string> as_decisions, as_methods = {"MDBA"};
  std::uint64_t as_seed = 1234;
  assess->add_option("--world", as_world, "World directory produced by simulate");
  assess->add_option("--gold", as_gold, "CSV with gold-standard labels");
  assess->add_option("--decisions", as_decisions, "CSV files, one per human")->delimiter(',');
  assess->add_option("--schema", as_schema, "Dataset schema JSON for the CSV files");
  assess->add_option("--methods", as_methods, "Estimators to run (MDBA, MDBA-Naive, SR, GS, CL)")
      ->delimiter(',');
  assess->add_option("--config", as_config, "Estimator configuration JSON");
  assess->add_option("--out-dir", as_out, "Directory for estimate files");
  assess->add_option("--format", as_format, "Estimate file format")
      ->check(CLI::IsMember({"json", "csv"}));
  assess->add_option("--seed", as_seed, "Seed for cross-validation folds");

  auto* bench = app.add_subcommand("benchmark", "Run the full evaluation grid");
  std::string bench_config, bench_out = "reports";
  std::uint64_t bench_seed = 0;
  bench->add_option("--config", bench_config, "Experiment configuration JSON");
  bench->add_option("--out-dir", bench_out, "Directory for report artifacts");
  auto* bench_seed_opt = bench->add_option("--seed", bench_seed, "Override the base seed");

  auto* rep = app.add_subcommand("report", "Summarize a saved report");
  std::string rep_input, rep_out;
  rep->add_option("--input", rep_input, "report.json to read")->required();
  rep->add_option("--out-dir", rep_out, "Re-emit CSV artifacts here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return cmd_simulate(sim_config, sim_out, sim_seed, sim_seed_opt->count() > 0);
    }
    if (assess->parsed()) {
      return cmd_assess(as_world, as_gold, as_decisions, as_schema, as_methods, as_config,
                        as_out, as_format, as_seed);
    }
    if (bench->parsed()) {
      return cmd_benchmark(bench_config, bench_out, bench_seed, bench_seed_opt->count() > 0);
    }
    if (rep->parsed()) {
      return cmd_report(rep_input, rep_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
