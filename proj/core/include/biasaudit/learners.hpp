#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biasaudit/types.hpp"

namespace biasaudit {

struct LogisticConfig {
  double learning_rate = 0.1;
  std::size_t max_iters = 2000;
  double l2 = 1e-4;
  double tol = 1e-8;
};

struct BoostedTreesConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 3;
  double shrinkage = 0.1;
  std::size_t min_leaf = 5;
  double leaf_reg = 1.0;
};

/// Model family plus hyperparameters, serializable for configs.
struct LearnerSpec {
  enum class Family { logistic, boosted_trees };
  Family family = Family::boosted_trees;
  LogisticConfig logistic;
  BoostedTreesConfig boosted;

  static LearnerSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Probabilistic binary classifier.
class Model {
 public:
  virtual ~Model() = default;
  /// P(y = 1 | row). Throws ValidationError on a width mismatch.
  virtual double predict_proba(const std::vector<double>& row) const = 0;
  virtual std::size_t n_features() const = 0;
  virtual nlohmann::json to_json() const = 0;
  virtual std::unique_ptr<Model> clone() const = 0;
};

std::vector<double> predict_proba(const Model& model, const Matrix& x);

class LogisticModel final : public Model {
 public:
  LogisticModel() = default;
  LogisticModel(std::vector<double> weights, double bias, LogisticConfig config);

  double predict_proba(const std::vector<double>& row) const override;
  std::size_t n_features() const override { return weights_.size(); }
  nlohmann::json to_json() const override;
  std::unique_ptr<Model> clone() const override;

  double weight(std::size_t idx) const;
  /// Overwrites one coefficient in place; used by decision simulators
  /// that perturb a fitted model.
  void set_weight(std::size_t idx, double value);
  double bias() const { return bias_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
  LogisticConfig config_;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  double predict(const std::vector<double>& row) const;
};

class BoostedTreesModel final : public Model {
 public:
  BoostedTreesModel() = default;
  BoostedTreesModel(double base_score, std::vector<RegressionTree> trees, std::size_t n_features,
                    BoostedTreesConfig config, std::vector<double> staged_losses);

  double predict_proba(const std::vector<double>& row) const override;
  std::size_t n_features() const override { return n_features_; }
  nlohmann::json to_json() const override;
  std::unique_ptr<Model> clone() const override;

  const std::vector<RegressionTree>& trees() const { return trees_; }
  /// Mean training log-loss after each boosting stage, starting with
  /// the prior-only model. Non-increasing by construction.
  const std::vector<double>& staged_losses() const { return staged_losses_; }

 private:
  double base_score_ = 0.0;
  std::vector<RegressionTree> trees_;
  std::size_t n_features_ = 0;
  BoostedTreesConfig config_;
  std::vector<double> staged_losses_;
};

/// Full-batch gradient descent with halving line search from a zero
/// initial point, so training is deterministic. Throws TrainingError
/// when only one class is present and DivergenceError on non-finite
/// loss.
LogisticModel fit_logistic(const Matrix& x, const std::vector<int>& y,
                           const LogisticConfig& config = {});

/// Gradient boosting on log-loss: each stage fits a depth-capped
/// regression tree to the negative gradients, hessian-weighted split
/// gain, Newton leaf values shrunk by the learning rate. Split ties
/// go to the lowest feature index, then the lowest threshold.
BoostedTreesModel fit_boosted_trees(const Matrix& x, const std::vector<int>& y,
                                    const BoostedTreesConfig& config = {});

std::unique_ptr<Model> fit_model(const Matrix& x, const std::vector<int>& y,
                                 const LearnerSpec& spec);

/// Regularized logistic training objective and its gradient; the
/// bias term is never regularized.
struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};
LossGrad logistic_loss_grad(const Matrix& x, const std::vector<int>& y,
                            const std::vector<double>& w, double b, double l2);

/// Mean log-loss of model probabilities against 0/1 outcomes.
double log_loss(const Model& model, const Matrix& x, const std::vector<int>& y);

std::unique_ptr<Model> model_from_json(const nlohmann::json& j);
void save_model(const Model& model, const std::string& path);
std::unique_ptr<Model> load_model(const std::string& path);

struct TuneResult {
  LearnerSpec best;
  double cv_log_loss = 0.0;
};

/// Picks the grid entry with the lowest stratified k-fold CV log
/// loss; ties keep the earliest entry. Folds stratify on
/// (group, outcome) so every training split sees both classes.
TuneResult tune_learner(const Matrix& x, const std::vector<int>& y,
                        const std::vector<Group>& groups, const std::vector<LearnerSpec>& grid,
                        std::size_t folds, std::uint64_t seed);

std::vector<LearnerSpec> default_tuning_grid(LearnerSpec::Family family);

}  // namespace biasaudit
