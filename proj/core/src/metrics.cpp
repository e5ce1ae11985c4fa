#include "biasaudit/metrics.hpp"

#include <cmath>

namespace biasaudit {

GroupConfusion group_confusion(const std::vector<int>& predictions,
                               const std::vector<int>& references,
                               const std::vector<Group>& groups) {
  if (predictions.empty() || predictions.size() != references.size() ||
      predictions.size() != groups.size()) {
    throw ValidationError("confusion inputs must be nonempty and the same length");
  }
  GroupConfusion confusion;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    int p = predictions[i];
    int r = references[i];
    if ((p != 0 && p != 1) || (r != 0 && r != 1)) {
      throw ValidationError("confusion inputs must be 0 or 1");
    }
    ConfusionCells& c = confusion.cells(groups[i]);
    if (p == 1 && r == 1) {
      ++c.tp;
    } else if (p == 1 && r == 0) {
      ++c.fp;
    } else if (p == 0 && r == 1) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return confusion;
}

double tpr(const ConfusionCells& c) {
  std::int64_t denom = c.tp + c.fn;
  if (denom == 0) throw UndefinedRateError("TPR undefined: no actual positives");
  return static_cast<double>(c.tp) / static_cast<double>(denom);
}

double fpr(const ConfusionCells& c) {
  std::int64_t denom = c.fp + c.tn;
  if (denom == 0) throw UndefinedRateError("FPR undefined: no actual negatives");
  return static_cast<double>(c.fp) / static_cast<double>(denom);
}

double rpr(const ConfusionCells& c) {
  std::int64_t denom = c.tp + c.fn;
  if (denom == 0) throw UndefinedRateError("RPR undefined: no actual positives");
  return static_cast<double>(c.tp + c.fp) / static_cast<double>(denom);
}

namespace {

GapValue rate_gap(const GroupConfusion& confusion, Group first, GapKind kind) {
  auto rate = [&](Group g) {
    try {
      return kind == GapKind::tpr ? tpr(confusion.cells(g)) : fpr(confusion.cells(g));
    } catch (const UndefinedRateError& e) {
      throw UndefinedRateError(std::string(e.what()) + " in group " + to_string(g));
    }
  };
  GapValue gap;
  gap.kind = kind;
  gap.first_group = first;
  gap.value = rate(first) - rate(other(first));
  return gap;
}

}  // namespace

GapValue tpr_gap(const GroupConfusion& confusion, Group first) {
  return rate_gap(confusion, first, GapKind::tpr);
}

GapValue fpr_gap(const GroupConfusion& confusion, Group first) {
  return rate_gap(confusion, first, GapKind::fpr);
}

SelectionRates selection_rates(const DecisionSet& decisions) {
  std::int64_t selected[2] = {0, 0};
  std::int64_t total[2] = {0, 0};
  for (const auto& inst : decisions.instances) {
    if (!inst.decision) throw ValidationError("decision set has an undecided instance");
    int g = static_cast<int>(inst.group);
    ++total[g];
    selected[g] += *inst.decision;
  }
  if (total[0] == 0 || total[1] == 0) {
    throw ValidationError("selection rates need both groups present");
  }
  SelectionRates rates;
  rates.selected_a = selected[0];
  rates.selected_not_a = selected[1];
  rates.rate_a = static_cast<double>(selected[0]) / static_cast<double>(total[0]);
  rates.rate_not_a = static_cast<double>(selected[1]) / static_cast<double>(total[1]);
  return rates;
}

double mean_absolute_error(const std::vector<double>& estimates,
                           const std::vector<double>& truths) {
  if (estimates.empty() || estimates.size() != truths.size()) {
    throw ValidationError("MAE needs nonempty vectors of equal length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    total += std::abs(estimates[i] - truths[i]);
  }
  return total / static_cast<double>(estimates.size());
}

}  // namespace biasaudit
