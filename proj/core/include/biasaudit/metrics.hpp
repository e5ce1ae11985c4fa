#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biasaudit/types.hpp"

namespace biasaudit {

struct ConfusionCells {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  std::int64_t predicted_positive() const { return tp + fp; }
  std::int64_t actual_positive() const { return tp + fn; }
};

/// Confusion counts split by protected group.
struct GroupConfusion {
  ConfusionCells by_group[2];

  ConfusionCells& cells(Group g) { return by_group[static_cast<int>(g)]; }
  const ConfusionCells& cells(Group g) const { return by_group[static_cast<int>(g)]; }
};

/// Tallies predictions against references per group. All vectors must
/// have equal nonzero length and 0/1 entries.
GroupConfusion group_confusion(const std::vector<int>& predictions,
                               const std::vector<int>& references,
                               const std::vector<Group>& groups);

/// TP / (TP + FN). Throws UndefinedRateError when no actual positives.
double tpr(const ConfusionCells& c);

/// FP / (FP + TN). Throws UndefinedRateError when no actual negatives.
double fpr(const ConfusionCells& c);

/// (TP + FP) / (TP + FN): ratio of predicted to actual positives.
/// Equals TPR / PPV. Throws UndefinedRateError when no actual positives.
double rpr(const ConfusionCells& c);

enum class GapKind { tpr, fpr };

/// A between-group rate difference, oriented so that positive values
/// mean the first group's rate is higher.
struct GapValue {
  double value = 0.0;
  GapKind kind = GapKind::tpr;
  Group first_group = Group::a;
};

/// TPR(first) - TPR(other). Throws UndefinedRateError when either
/// group lacks actual positives, naming the group.
GapValue tpr_gap(const GroupConfusion& confusion, Group first = Group::a);

/// FPR(first) - FPR(other), same conventions.
GapValue fpr_gap(const GroupConfusion& confusion, Group first = Group::a);

/// Fraction of positive decisions within each group of a decision set.
struct SelectionRates {
  double rate_a = 0.0;
  double rate_not_a = 0.0;
  std::int64_t selected_a = 0;
  std::int64_t selected_not_a = 0;
};
SelectionRates selection_rates(const DecisionSet& decisions);

/// Mean absolute error between parallel estimate/truth vectors.
double mean_absolute_error(const std::vector<double>& estimates,
                           const std::vector<double>& truths);

}  // namespace biasaudit
