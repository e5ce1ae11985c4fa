#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "biasaudit/learners.hpp"
#include "biasaudit/types.hpp"

namespace biasaudit {

/// How simulated humans misrank instances inside the disadvantaged
/// group: correct ordering miscalibrates the decision threshold only,
/// incorrect ordering corrupts the ranking itself through a misused
/// interaction term.
enum class BiasKind { correct_ordering, incorrect_ordering };

const char* to_string(BiasKind kind);
BiasKind bias_kind_from_string(const std::string& name);

/// Scenario description for one simulated world of decision makers.
struct ScenarioSpec {
  BiasKind kind = BiasKind::correct_ordering;
  std::size_t num_humans = 10;
  /// Positive-label prevalence imposed on every group.
  double prevalence = 0.2;
  /// Group-a TPR targets per human (correct ordering). Empty means
  /// evenly spaced from 0.54 to 0.90.
  std::vector<double> target_tprs_a;
  /// Group-not_a TPR produced by random noise on positives.
  double advantaged_tpr = 0.95;
  /// Half-width of the acceptance band around TPR targets.
  double tolerance = 0.01;
  /// Feature crossed with the group indicator (incorrect ordering).
  std::string interaction_feature;
  /// Amount subtracted from the interaction coefficient per step.
  double coef_step = 0.01;
  /// First human's group-a TPR target (incorrect ordering); each
  /// following human lands roughly tpr_spacing higher.
  double tpr_low = 0.5;
  double tpr_spacing = 0.4 / 9;
  /// Safety cap on coefficient decrements before giving up.
  std::size_t decrement_cap = 10000;
  std::uint64_t seed = 0;
  /// Simulators deliberately use a plain logistic model so the
  /// estimation model family never matches the decision process.
  LogisticConfig sim_learner;

  static ScenarioSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
  /// target_tprs_a, or the default ladder when empty.
  std::vector<double> effective_targets() const;
};

/// count evenly spaced values from lo to hi inclusive; a single
/// point collapses to lo.
std::vector<double> linspace(double lo, double hi, std::size_t count);

/// Refits the outcome so each group has prevalence p: a logistic
/// model is trained on the original labels and the top ceil(p * n_g)
/// instances of each group by predicted probability become the
/// positives. Ties keep the earlier instance. Decisions are cleared.
std::vector<Instance> shape_prevalence(const std::vector<Instance>& instances, double p,
                                       const LogisticConfig& config = {});

struct ThresholdPick {
  double threshold = 0.0;
  double achieved_tpr = 0.0;
  bool within_tolerance = false;
};

/// Simulates one human whose within-group ranking is correct but
/// whose group-a threshold is miscalibrated: fits a logistic model
/// to the human's gold labels, then sweeps its scores as candidate
/// thresholds and keeps the one whose group-a TPR lands closest to
/// target_tpr (ties prefer the larger threshold). Returns decisions
/// for the group-a instances in encounter order.
std::vector<int> simulate_correct_ordering(const std::vector<Instance>& labeled,
                                           double target_tpr, double tolerance,
                                           const LogisticConfig& config = {},
                                           ThresholdPick* pick = nullptr);

struct NoisePick {
  double achieved_tpr = 0.0;
  bool within_tolerance = false;
  std::size_t flips = 0;
};

/// Decisions that copy the gold labels except for round(n_pos *
/// (1 - target_tpr)) randomly chosen positives flipped to 0, the
/// closest attainable TPR to the target. Returns decisions parallel
/// to the input.
std::vector<int> simulate_advantaged_noise(const std::vector<Instance>& labeled,
                                           double target_tpr, double tolerance,
                                           std::uint64_t seed, NoisePick* pick = nullptr);

struct CoefficientPick {
  double coefficient = 0.0;
  double achieved_tpr = 0.0;
  /// TPR bound the search aimed for (band center for the first
  /// human, previous TPR + spacing for the rest).
  double bound = 0.0;
  bool satisfied = false;
};

struct IncorrectOrderingResult {
  /// Per human, decisions for the group-a instances in encounter order.
  std::vector<std::vector<int>> decisions_a;
  std::vector<CoefficientPick> picks;
};

/// Simulates humans who misuse an interaction term: one logistic
/// model is fit on the pool plus every human's labeled set with a
/// Z * A column appended, then per human the interaction coefficient
/// is lowered in steps of coef_step until the group-a TPR of top-p
/// selection reaches its target. The first human stops inside
/// tpr_low +- tolerance-band (tpr_spacing wide); each later human
/// keeps the last coefficient whose TPR still clears the previous
/// human's TPR plus tpr_spacing, which yields an increasing ladder.
/// interaction_index addresses the Z feature within the raw features.
/// Throws SimulationError, naming the human, when a target is
/// unreachable within decrement_cap steps.
IncorrectOrderingResult simulate_incorrect_ordering(
    const std::vector<std::vector<Instance>>& human_sets, const std::vector<Instance>& gold_pool,
    std::size_t interaction_index, const ScenarioSpec& spec);

/// What one simulated human actually attained.
struct HumanSimRecord {
  std::string human_id;
  double target_tpr_a = 0.0;
  double achieved_tpr_a = 0.0;
  bool tpr_a_within_tolerance = false;
  double achieved_tpr_not_a = 0.0;
  bool tpr_not_a_within_tolerance = false;
};

struct SimulatedWorld {
  ScenarioSpec scenario;
  std::string dataset_id;
  std::vector<std::string> feature_names;
  std::vector<DecisionSet> humans;
  GoldStandardSet gold_pool;
  /// TPR gap of each human's decisions against the gold labels of
  /// their own instances; the quantity estimators try to recover.
  std::vector<double> true_gaps;
  std::vector<HumanSimRecord> records;
};

/// Builds a full world: shapes prevalence, reserves
/// gs_reserve_per_group labeled instances per group, samples the
/// experiment pool (gs_pool_per_group per group) from that reserve,
/// stratifies the rest across humans and simulates their decisions
/// per the scenario. The pool and the decision sets never share
/// instances.
SimulatedWorld build_world(const std::vector<Instance>& instances,
                           const std::vector<std::string>& feature_names,
                           const std::string& dataset_id, const ScenarioSpec& scenario,
                           std::size_t gs_reserve_per_group, std::size_t gs_pool_per_group);

/// Writes a world as a directory: manifest.json, gold_standard.csv
/// and one CSV per human. Byte-deterministic.
void save_world(const SimulatedWorld& world, const std::string& dir);

SimulatedWorld load_world(const std::string& dir);

/// Five standard-normal features x0..x4 with a linear-logit outcome
/// and a balanced random group split; deterministic for a seed.
std::pair<std::vector<Instance>, std::vector<std::string>> make_synthetic_dataset(
    std::size_t rows, std::uint64_t seed);

}  // namespace biasaudit
