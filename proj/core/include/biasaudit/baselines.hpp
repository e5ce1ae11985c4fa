#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "biasaudit/learners.hpp"
#include "biasaudit/mdba.hpp"
#include "biasaudit/types.hpp"

namespace biasaudit {

enum class SrNormalization {
  proportion,  // positive decisions / group size
  raw_count,   // positive decisions, unnormalized
};

/// Selection-rate gap per human: the difference between the groups'
/// positive-decision rates (or raw counts). Uses no outcome data.
std::vector<BiasEstimate> sr_estimate(const std::vector<DecisionSet>& decision_sets,
                                      SrNormalization normalization = SrNormalization::proportion);

/// Trains a model of the true outcome on the gold-standard set and
/// scores each human's decisions against that model's 0.5-threshold
/// classifications of the human's instances, as if the model output
/// were the reference. Requires at least min_class_count gold
/// instances of each outcome class.
std::vector<BiasEstimate> gs_estimate(const std::vector<DecisionSet>& decision_sets,
                                      const GoldStandardSet& gold, const LearnerSpec& learner,
                                      std::size_t min_class_count = 20);

/// Joint counts of (given label, estimated true label) built from
/// out-of-sample class probabilities. An example with given label i
/// counts toward cell (i, j) when its class-j probability reaches
/// the mean class-j probability over examples given label j; of the
/// qualifying classes, the most probable wins and ties keep the
/// given label. Examples qualifying for no class are left out
/// (assigned -1).
struct ConfidentJoint {
  std::array<std::array<std::int64_t, 2>, 2> counts{};  // [given][estimated]
  std::array<double, 2> class_thresholds{};
  std::vector<int> estimated;  // per example: 0, 1, or -1 when unqualified

  std::int64_t off_diagonal() const { return counts[0][1] + counts[1][0]; }
};

/// prob_positive[i] is the out-of-sample P(label = 1) for example i.
ConfidentJoint confident_joint(const std::vector<double>& prob_positive,
                               const std::vector<int>& given_labels);

/// Label-cleaning estimator: pools the gold-standard set (gold labels)
/// with every decision set (decisions as labels), computes
/// out-of-sample probabilities by stratified cross-validation, drops
/// examples whose confident-joint cell is off-diagonal, retrains on
/// the kept examples and scores each human against the cleaned
/// model's 0.5-threshold classifications. Throws DegeneratePoolError
/// when pruning empties an outcome class.
std::vector<BiasEstimate> cl_estimate(const std::vector<DecisionSet>& decision_sets,
                                      const GoldStandardSet& gold, const LearnerSpec& learner,
                                      std::uint64_t cv_seed, std::size_t cv_folds = 5);

}  // namespace biasaudit
