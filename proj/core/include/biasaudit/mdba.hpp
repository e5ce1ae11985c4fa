#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biasaudit/csv.hpp"
#include "biasaudit/learners.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/types.hpp"

namespace biasaudit {

/// Configuration for the decision-model bias estimator.
struct MdbaConfig {
  /// Target ratio of model-flagged to human-flagged instances per
  /// group. The recalibration step aims each group's threshold at
  /// this ratio; must be positive.
  double c = 1.0;
  /// Relative tolerance when matching the attained ratio to c.
  double rpr_tolerance = 0.05;
  /// Divide the measured gap by c to undo the scale the ratio
  /// constraint imposes on group TPRs.
  bool rescale_by_c = true;
  /// Skip recalibration and classify at a fixed 0.5 threshold for
  /// both groups (ablation variant).
  bool naive_mode = false;
  LearnerSpec learner;

  static MdbaConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

/// Threshold search output for one group: every threshold whose
/// attained flag ratio lies within tolerance of the target, or the
/// single nearest-attainable threshold when none qualifies.
struct RprGroupSearch {
  std::vector<double> thresholds;
  std::vector<double> attained;
  bool nearest_only = false;
};

struct RprSearchResult {
  RprGroupSearch by_group[2];

  RprGroupSearch& group(Group g) { return by_group[static_cast<int>(g)]; }
  const RprGroupSearch& group(Group g) const { return by_group[static_cast<int>(g)]; }
};

/// Sweeps candidate thresholds (the distinct model scores in each
/// group plus 0 and 1) and keeps those whose ratio of flagged
/// instances to the human's positive decisions is within
/// rpr_tolerance * c of c. Classification at threshold t flags
/// scores >= t. When nothing qualifies, returns the threshold with
/// the closest attainable ratio (ties pick the larger threshold) and
/// sets nearest_only. Throws UndefinedRateError when a group has no
/// positive decisions.
RprSearchResult find_rpr_thresholds(const Model& model, const std::vector<Instance>& instances,
                                    double c, double relative_tolerance);

/// One bias estimate for one human. A non-empty `error` marks a
/// failed estimate whose numeric fields are meaningless.
struct BiasEstimate {
  std::string human_id;
  std::string method;
  /// Estimated TPR(a) - TPR(not_a) of the human's decisions.
  double gap = 0.0;
  /// Spread (population stddev) of the gap across qualifying
  /// threshold combinations; 0 when a single combination was used.
  double uncertainty = 0.0;
  double c = 1.0;
  bool rescaled_by_c = false;
  std::vector<double> thresholds_a;
  std::vector<double> thresholds_not_a;
  double attained_rpr_a = 0.0;
  double attained_rpr_not_a = 0.0;
  bool rpr_outside_tolerance_a = false;
  bool rpr_outside_tolerance_not_a = false;
  std::string warning;
  std::string error;

  bool failed() const { return !error.empty(); }
};

/// Estimates each human's group TPR gap: fits a model of the human's
/// decisions, recalibrates per-group thresholds to the flag ratio c
/// (skipped in naive mode), classifies the gold-standard set and
/// compares those classifications with the gold labels. Qualifying
/// thresholds are averaged; their spread is reported as uncertainty.
/// Per-human failures are recorded in the estimate, never thrown.
/// Decision sets sharing instances with the gold-standard set get a
/// warning.
std::vector<BiasEstimate> estimate_bias(const std::vector<DecisionSet>& decision_sets,
                                        const GoldStandardSet& gold, const MdbaConfig& config);

nlohmann::json estimates_to_json(const std::vector<BiasEstimate>& estimates);
CsvTable estimates_to_csv(const std::vector<BiasEstimate>& estimates);
void save_estimates(const std::vector<BiasEstimate>& estimates, const std::string& path);

}  // namespace biasaudit
