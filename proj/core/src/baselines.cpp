#include "biasaudit/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "biasaudit/datamodel.hpp"
#include "biasaudit/metrics.hpp"

namespace biasaudit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BiasEstimate blank_estimate(const std::string& human_id, const char* method) {
  BiasEstimate est;
  est.human_id = human_id;
  est.method = method;
  est.c = kNaN;
  est.rescaled_by_c = false;
  est.attained_rpr_a = kNaN;
  est.attained_rpr_not_a = kNaN;
  return est;
}

// Gap of the human's decisions against 0/1 reference outputs.
double decision_gap(const DecisionSet& ds, const std::vector<int>& references) {
  std::vector<int> decisions = decision_vector(ds.instances);
  std::vector<Group> groups = group_vector(ds.instances);
  return tpr_gap(group_confusion(decisions, references, groups)).value;
}

}  // namespace

std::vector<BiasEstimate> sr_estimate(const std::vector<DecisionSet>& decision_sets,
                                      SrNormalization normalization) {
  if (decision_sets.empty()) throw ValidationError("no decision sets given");
  std::vector<BiasEstimate> estimates;
  estimates.reserve(decision_sets.size());
  for (const auto& ds : decision_sets) {
    BiasEstimate est = blank_estimate(ds.human_id, "SR");
    try {
      SelectionRates rates = selection_rates(ds);
      if (normalization == SrNormalization::proportion) {
        est.gap = rates.rate_a - rates.rate_not_a;
      } else {
        est.gap = static_cast<double>(rates.selected_a - rates.selected_not_a);
      }
    } catch (const Error& e) {
      est.error = e.what();
    }
    estimates.push_back(std::move(est));
  }
  return estimates;
}

std::vector<BiasEstimate> gs_estimate(const std::vector<DecisionSet>& decision_sets,
                                      const GoldStandardSet& gold, const LearnerSpec& learner,
                                      std::size_t min_class_count) {
  if (decision_sets.empty()) throw ValidationError("no decision sets given");
  std::vector<int> gold_y = label_vector(gold.instances);
  auto positives = static_cast<std::size_t>(std::count(gold_y.begin(), gold_y.end(), 1));
  std::size_t negatives = gold_y.size() - positives;
  if (positives < min_class_count || negatives < min_class_count) {
    throw ValidationError("gold-standard set needs at least " + std::to_string(min_class_count) +
                          " instances per outcome class, has " + std::to_string(positives) +
                          " positive and " + std::to_string(negatives) + " negative");
  }
  auto model = fit_model(feature_matrix(gold.instances), gold_y, learner);

  std::vector<BiasEstimate> estimates;
  estimates.reserve(decision_sets.size());
  for (const auto& ds : decision_sets) {
    BiasEstimate est = blank_estimate(ds.human_id, "GS");
    try {
      std::vector<double> probs = predict_proba(*model, feature_matrix(ds.instances));
      std::vector<int> references(probs.size());
      for (std::size_t i = 0; i < probs.size(); ++i) references[i] = probs[i] >= 0.5 ? 1 : 0;
      est.gap = decision_gap(ds, references);
    } catch (const Error& e) {
      est.error = e.what();
    }
    estimates.push_back(std::move(est));
  }
  return estimates;
}

ConfidentJoint confident_joint(const std::vector<double>& prob_positive,
                               const std::vector<int>& given_labels) {
  if (prob_positive.empty() || prob_positive.size() != given_labels.size()) {
    throw ValidationError("confident joint needs matching nonempty inputs");
  }
  double sum[2] = {0.0, 0.0};
  std::int64_t count[2] = {0, 0};
  for (std::size_t i = 0; i < prob_positive.size(); ++i) {
    double p = prob_positive[i];
    int y = given_labels[i];
    if (y != 0 && y != 1) throw ValidationError("given labels must be 0 or 1");
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probabilities must lie in [0, 1]");
    sum[y] += y == 1 ? p : 1.0 - p;
    ++count[y];
  }
  if (count[0] == 0 || count[1] == 0) {
    throw ValidationError("confident joint needs both given classes present");
  }

  ConfidentJoint joint;
  joint.class_thresholds[0] = sum[0] / static_cast<double>(count[0]);
  joint.class_thresholds[1] = sum[1] / static_cast<double>(count[1]);
  joint.estimated.resize(prob_positive.size());
  for (std::size_t i = 0; i < prob_positive.size(); ++i) {
    double p[2] = {1.0 - prob_positive[i], prob_positive[i]};
    bool qual0 = p[0] >= joint.class_thresholds[0];
    bool qual1 = p[1] >= joint.class_thresholds[1];
    int j;
    if (!qual0 && !qual1) {
      joint.estimated[i] = -1;
      continue;
    }
    if (qual0 && qual1) {
      if (p[1] > p[0]) {
        j = 1;
      } else if (p[0] > p[1]) {
        j = 0;
      } else {
        j = given_labels[i];
      }
    } else {
      j = qual1 ? 1 : 0;
    }
    joint.estimated[i] = j;
    ++joint.counts[static_cast<std::size_t>(given_labels[i])][static_cast<std::size_t>(j)];
  }
  return joint;
}

std::vector<BiasEstimate> cl_estimate(const std::vector<DecisionSet>& decision_sets,
                                      const GoldStandardSet& gold, const LearnerSpec& learner,
                                      std::uint64_t cv_seed, std::size_t cv_folds) {
  if (decision_sets.empty()) throw ValidationError("no decision sets given");
  if (cv_folds < 2) throw ValidationError("cross-validation needs at least two folds");

  // Pool gold labels with every human's decisions-as-labels.
  std::vector<Instance> pool = gold.instances;
  for (auto& inst : pool) inst.decision.reset();
  for (const auto& ds : decision_sets) {
    for (const auto& inst : ds.instances) {
      Instance copy = inst;
      copy.gold_label = copy.decision;
      copy.decision.reset();
      pool.push_back(std::move(copy));
    }
  }

  Matrix pool_x = feature_matrix(pool);
  std::vector<int> pool_y = label_vector(pool);
  std::vector<Group> pool_g = group_vector(pool);

  std::vector<std::pair<int, int>> keys;
  keys.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    keys.emplace_back(static_cast<int>(pool_g[i]), pool_y[i]);
  }
  auto folds = stratified_index_partition(keys, cv_folds, cv_seed);

  // Out-of-sample probabilities via cross-validation.
  std::vector<double> oos_probs(pool.size(), 0.0);
  for (const auto& fold : folds) {
    std::vector<char> held_out(pool.size(), 0);
    for (std::size_t i : fold) held_out[i] = 1;
    Matrix train_x;
    std::vector<int> train_y;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (held_out[i]) continue;
      train_x.push_back(pool_x[i]);
      train_y.push_back(pool_y[i]);
    }
    auto fold_model = fit_model(train_x, train_y, learner);
    for (std::size_t i : fold) oos_probs[i] = fold_model->predict_proba(pool_x[i]);
  }

  ConfidentJoint joint = confident_joint(oos_probs, pool_y);
  Matrix clean_x;
  std::vector<int> clean_y;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (joint.estimated[i] >= 0 && joint.estimated[i] != pool_y[i]) continue;
    clean_x.push_back(pool_x[i]);
    clean_y.push_back(pool_y[i]);
  }
  bool pos = std::find(clean_y.begin(), clean_y.end(), 1) != clean_y.end();
  bool neg = std::find(clean_y.begin(), clean_y.end(), 0) != clean_y.end();
  if (clean_y.empty() || !pos || !neg) {
    throw DegeneratePoolError("label cleaning removed an entire outcome class from the pool");
  }
  auto clean_model = fit_model(clean_x, clean_y, learner);

  std::vector<BiasEstimate> estimates;
  estimates.reserve(decision_sets.size());
  for (const auto& ds : decision_sets) {
    BiasEstimate est = blank_estimate(ds.human_id, "CL");
    try {
      std::vector<double> probs = predict_proba(*clean_model, feature_matrix(ds.instances));
      std::vector<int> references(probs.size());
      for (std::size_t i = 0; i < probs.size(); ++i) references[i] = probs[i] >= 0.5 ? 1 : 0;
      est.gap = decision_gap(ds, references);
    } catch (const Error& e) {
      est.error = e.what();
    }
    estimates.push_back(std::move(est));
  }
  return estimates;
}

}  // namespace biasaudit
