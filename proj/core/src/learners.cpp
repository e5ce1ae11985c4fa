#include "biasaudit/learners.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "biasaudit/datamodel.hpp"

namespace biasaudit {

namespace {

constexpr int kModelFormatVersion = 1;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  if (z > 30.0) return z;
  return std::log1p(std::exp(z));
}

void check_training_inputs(const Matrix& x, const std::vector<int>& y) {
  if (x.empty()) throw TrainingError("no training rows");
  if (x.size() != y.size()) throw TrainingError("feature and outcome counts differ");
  std::size_t width = x.front().size();
  if (width == 0) throw TrainingError("training rows have no features");
  for (const auto& row : x) {
    if (row.size() != width) throw TrainingError("training rows have inconsistent widths");
  }
  bool pos = false, neg = false;
  for (int v : y) {
    if (v != 0 && v != 1) throw TrainingError("outcomes must be 0 or 1");
    (v == 1 ? pos : neg) = true;
  }
  if (!pos || !neg) throw TrainingError("training outcomes contain a single class");
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> predict_proba(const Model& model, const Matrix& x) {
  std::vector<double> p;
  p.reserve(x.size());
  for (const auto& row : x) p.push_back(model.predict_proba(row));
  return p;
}

LearnerSpec LearnerSpec::from_json(const nlohmann::json& j) {
  LearnerSpec spec;
  std::string family = j.at("family").get<std::string>();
  if (family == "logistic") {
    spec.family = Family::logistic;
  } else if (family == "boosted_trees") {
    spec.family = Family::boosted_trees;
  } else {
    throw ValidationError("unknown learner family: " + family);
  }
  if (j.contains("logistic")) {
    const auto& l = j.at("logistic");
    if (l.contains("learning_rate")) spec.logistic.learning_rate = l.at("learning_rate");
    if (l.contains("max_iters")) spec.logistic.max_iters = l.at("max_iters");
    if (l.contains("l2")) spec.logistic.l2 = l.at("l2");
    if (l.contains("tol")) spec.logistic.tol = l.at("tol");
  }
  if (j.contains("boosted_trees")) {
    const auto& b = j.at("boosted_trees");
    if (b.contains("n_trees")) spec.boosted.n_trees = b.at("n_trees");
    if (b.contains("max_depth")) spec.boosted.max_depth = b.at("max_depth");
    if (b.contains("shrinkage")) spec.boosted.shrinkage = b.at("shrinkage");
    if (b.contains("min_leaf")) spec.boosted.min_leaf = b.at("min_leaf");
    if (b.contains("leaf_reg")) spec.boosted.leaf_reg = b.at("leaf_reg");
  }
  return spec;
}

nlohmann::json LearnerSpec::to_json() const {
  nlohmann::json j;
  if (family == Family::logistic) {
    j["family"] = "logistic";
    j["logistic"] = {{"learning_rate", logistic.learning_rate},
                     {"max_iters", logistic.max_iters},
                     {"l2", logistic.l2},
                     {"tol", logistic.tol}};
  } else {
    j["family"] = "boosted_trees";
    j["boosted_trees"] = {{"n_trees", boosted.n_trees},
                          {"max_depth", boosted.max_depth},
                          {"shrinkage", boosted.shrinkage},
                          {"min_leaf", boosted.min_leaf},
                          {"leaf_reg", boosted.leaf_reg}};
  }
  return j;
}

LogisticModel::LogisticModel(std::vector<double> weights, double bias, LogisticConfig config)
    : weights_(std::move(weights)), bias_(bias), config_(config) {}

double LogisticModel::predict_proba(const std::vector<double>& row) const {
  if (row.size() != weights_.size()) {
    throw ValidationError("feature width " + std::to_string(row.size()) + " does not match model (" +
                          std::to_string(weights_.size()) + ")");
  }
  return sigmoid(dot(weights_, row) + bias_);
}

double LogisticModel::weight(std::size_t idx) const {
  if (idx >= weights_.size()) throw ValidationError("coefficient index out of range");
  return weights_[idx];
}

void LogisticModel::set_weight(std::size_t idx, double value) {
  if (idx >= weights_.size()) throw ValidationError("coefficient index out of range");
  weights_[idx] = value;
}

nlohmann::json LogisticModel::to_json() const {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["family"] = "logistic";
  j["weights"] = weights_;
  j["bias"] = bias_;
  j["config"] = {{"learning_rate", config_.learning_rate},
                 {"max_iters", config_.max_iters},
                 {"l2", config_.l2},
                 {"tol", config_.tol}};
  return j;
}

std::unique_ptr<Model> LogisticModel::clone() const {
  return std::make_unique<LogisticModel>(*this);
}

double RegressionTree::predict(const std::vector<double>& row) const {
  int at = 0;
  while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(at)];
    at = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(at)].value;
}

BoostedTreesModel::BoostedTreesModel(double base_score, std::vector<RegressionTree> trees,
                                     std::size_t n_features, BoostedTreesConfig config,
                                     std::vector<double> staged_losses)
    : base_score_(base_score),
      trees_(std::move(trees)),
      n_features_(n_features),
      config_(config),
      staged_losses_(std::move(staged_losses)) {}

double BoostedTreesModel::predict_proba(const std::vector<double>& row) const {
  if (row.size() != n_features_) {
    throw ValidationError("feature width " + std::to_string(row.size()) + " does not match model (" +
                          std::to_string(n_features_) + ")");
  }
  double raw = base_score_;
  for (const auto& tree : trees_) raw += tree.predict(row);
  return sigmoid(raw);
}

nlohmann::json BoostedTreesModel::to_json() const {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["family"] = "boosted_trees";
  j["n_features"] = n_features_;
  j["base_score"] = base_score_;
  j["config"] = {{"n_trees", config_.n_trees},
                 {"max_depth", config_.max_depth},
                 {"shrinkage", config_.shrinkage},
                 {"min_leaf", config_.min_leaf},
                 {"leaf_reg", config_.leaf_reg}};
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
      if (n.feature < 0) {
        nodes.push_back({{"value", n.value}});
      } else {
        nodes.push_back(
            {{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);
  return j;
}

std::unique_ptr<Model> BoostedTreesModel::clone() const {
  return std::make_unique<BoostedTreesModel>(*this);
}

LossGrad logistic_loss_grad(const Matrix& x, const std::vector<int>& y,
                            const std::vector<double>& w, double b, double l2) {
  std::size_t n = x.size();
  LossGrad out;
  out.grad_w.assign(w.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double z = dot(w, x[i]) + b;
    out.loss += softplus(z) - y[i] * z;
    double resid = sigmoid(z) - y[i];
    for (std::size_t f = 0; f < w.size(); ++f) out.grad_w[f] += resid * x[i][f];
    out.grad_b += resid;
  }
  double inv_n = 1.0 / static_cast<double>(n);
  out.loss *= inv_n;
  out.grad_b *= inv_n;
  for (std::size_t f = 0; f < w.size(); ++f) {
    out.grad_w[f] = out.grad_w[f] * inv_n + l2 * w[f];
    out.loss += 0.5 * l2 * w[f] * w[f];
  }
  return out;
}

LogisticModel fit_logistic(const Matrix& x, const std::vector<int>& y,
                           const LogisticConfig& config) {
  check_training_inputs(x, y);
  if (config.learning_rate <= 0) throw TrainingError("learning rate must be positive");
  std::size_t width = x.front().size();
  std::vector<double> w(width, 0.0);
  double b = 0.0;

  auto loss_only = [&](const std::vector<double>& wv, double bv) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double z = dot(wv, x[i]) + bv;
      loss += softplus(z) - y[i] * z;
    }
    loss /= static_cast<double>(x.size());
    for (double v : wv) loss += 0.5 * config.l2 * v * v;
    return loss;
  };

  double current = loss_only(w, b);
  std::vector<double> trial_w(width);
  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    LossGrad lg = logistic_loss_grad(x, y, w, b, config.l2);
    if (!std::isfinite(lg.loss)) {
      throw DivergenceError("logistic loss became non-finite at iteration " + std::to_string(iter));
    }
    double step = config.learning_rate;
    double trial_loss = std::numeric_limits<double>::infinity();
    double trial_b = b;
    bool improved = false;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t f = 0; f < width; ++f) trial_w[f] = w[f] - step * lg.grad_w[f];
      trial_b = b - step * lg.grad_b;
      trial_loss = loss_only(trial_w, trial_b);
      if (std::isfinite(trial_loss) && trial_loss <= current) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
    double gain = current - trial_loss;
    w.swap(trial_w);
    b = trial_b;
    current = trial_loss;
    if (gain < config.tol) break;
  }
  if (!std::isfinite(current)) throw DivergenceError("logistic training loss is non-finite");
  return LogisticModel(std::move(w), b, config);
}

namespace {

struct NodeStats {
  std::size_t count = 0;
  double sum_g = 0.0;
  double sum_h = 0.0;
};

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

double leaf_score(double g, double h, double reg) { return g * g / (h + reg); }

RegressionTree grow_tree(const Matrix& x, const std::vector<std::vector<std::uint32_t>>& sorted_idx,
                         const std::vector<double>& grad, const std::vector<double>& hess,
                         const BoostedTreesConfig& cfg) {
  std::size_t n = x.size();
  std::size_t m = x.front().size();
  RegressionTree tree;
  tree.nodes.push_back(TreeNode{});
  std::vector<int> node_of(n, 0);
  std::vector<NodeStats> stats(1);
  for (std::size_t i = 0; i < n; ++i) {
    stats[0].count++;
    stats[0].sum_g += grad[i];
    stats[0].sum_h += hess[i];
  }
  std::vector<int> active = {0};

  for (std::size_t depth = 0; depth < cfg.max_depth && !active.empty(); ++depth) {
    std::vector<SplitChoice> best(tree.nodes.size());
    std::vector<char> is_active(tree.nodes.size(), 0);
    for (int nd : active) is_active[static_cast<std::size_t>(nd)] = 1;

    std::vector<NodeStats> left(tree.nodes.size());
    std::vector<double> last_val(tree.nodes.size(), 0.0);
    std::vector<char> seen(tree.nodes.size(), 0);
    for (std::size_t f = 0; f < m; ++f) {
      for (int nd : active) {
        left[static_cast<std::size_t>(nd)] = NodeStats{};
        seen[static_cast<std::size_t>(nd)] = 0;
      }
      for (std::uint32_t i : sorted_idx[f]) {
        auto nd = static_cast<std::size_t>(node_of[i]);
        if (!is_active[nd]) continue;
        double v = x[i][f];
        if (seen[nd] && v > last_val[nd]) {
          std::size_t right_count = stats[nd].count - left[nd].count;
          if (left[nd].count >= cfg.min_leaf && right_count >= cfg.min_leaf) {
            double gr = stats[nd].sum_g - left[nd].sum_g;
            double hr = stats[nd].sum_h - left[nd].sum_h;
            double gain = leaf_score(left[nd].sum_g, left[nd].sum_h, cfg.leaf_reg) +
                          leaf_score(gr, hr, cfg.leaf_reg) -
                          leaf_score(stats[nd].sum_g, stats[nd].sum_h, cfg.leaf_reg);
            if (gain > best[nd].gain + 1e-12) {
              best[nd] = SplitChoice{gain, static_cast<int>(f), 0.5 * (last_val[nd] + v)};
            }
          }
        }
        left[nd].count++;
        left[nd].sum_g += grad[i];
        left[nd].sum_h += hess[i];
        last_val[nd] = v;
        seen[nd] = 1;
      }
    }

    std::vector<int> next_active;
    std::vector<int> split_left(tree.nodes.size(), -1);
    for (int nd : active) {
      auto ndx = static_cast<std::size_t>(nd);
      if (best[ndx].feature < 0 || best[ndx].gain <= 1e-12) continue;
      // Grab the child index before push_back can reallocate the
      // node storage out from under a reference.
      int left_child = static_cast<int>(tree.nodes.size());
      TreeNode& node = tree.nodes[ndx];
      node.feature = best[ndx].feature;
      node.threshold = best[ndx].threshold;
      node.left = left_child;
      node.right = left_child + 1;
      split_left[ndx] = left_child;
      tree.nodes.push_back(TreeNode{});
      tree.nodes.push_back(TreeNode{});
      stats.resize(tree.nodes.size());
      next_active.push_back(left_child);
      next_active.push_back(left_child + 1);
    }
    if (next_active.empty()) break;
    for (std::size_t i = 0; i < n; ++i) {
      auto nd = static_cast<std::size_t>(node_of[i]);
      if (nd >= split_left.size() || split_left[nd] < 0) continue;
      const TreeNode& node = tree.nodes[nd];
      int child = x[i][static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                                : node.right;
      node_of[i] = child;
      auto c = static_cast<std::size_t>(child);
      stats[c].count++;
      stats[c].sum_g += grad[i];
      stats[c].sum_h += hess[i];
    }
    active = std::move(next_active);
  }

  for (std::size_t nd = 0; nd < tree.nodes.size(); ++nd) {
    if (tree.nodes[nd].feature < 0) {
      tree.nodes[nd].value =
          -cfg.shrinkage * stats[nd].sum_g / (stats[nd].sum_h + cfg.leaf_reg);
    }
  }
  return tree;
}

}  // namespace

BoostedTreesModel fit_boosted_trees(const Matrix& x, const std::vector<int>& y,
                                    const BoostedTreesConfig& config) {
  check_training_inputs(x, y);
  if (config.min_leaf == 0) throw TrainingError("min_leaf must be positive");
  std::size_t n = x.size();
  std::size_t m = x.front().size();

  double pos = static_cast<double>(std::accumulate(y.begin(), y.end(), 0));
  double p0 = std::clamp(pos / static_cast<double>(n), 1e-12, 1.0 - 1e-12);
  double base_score = std::log(p0 / (1.0 - p0));

  std::vector<std::vector<std::uint32_t>> sorted_idx(m);
  for (std::size_t f = 0; f < m; ++f) {
    auto& idx = sorted_idx[f];
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (x[a][f] != x[b][f]) return x[a][f] < x[b][f];
      return a < b;
    });
  }

  std::vector<double> raw(n, base_score);
  auto mean_loss = [&] {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) loss += softplus(raw[i]) - y[i] * raw[i];
    return loss / static_cast<double>(n);
  };

  std::vector<double> staged = {mean_loss()};
  std::vector<double> grad(n), hess(n);
  std::vector<RegressionTree> trees;
  trees.reserve(config.n_trees);
  for (std::size_t t = 0; t < config.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      double p = sigmoid(raw[i]);
      grad[i] = p - y[i];
      hess[i] = p * (1.0 - p);
    }
    RegressionTree tree = grow_tree(x, sorted_idx, grad, hess, config);
    for (std::size_t i = 0; i < n; ++i) raw[i] += tree.predict(x[i]);
    trees.push_back(std::move(tree));
    double loss = mean_loss();
    if (!std::isfinite(loss)) {
      throw DivergenceError("boosting loss became non-finite at stage " + std::to_string(t));
    }
    staged.push_back(loss);
  }
  return BoostedTreesModel(base_score, std::move(trees), m, config, std::move(staged));
}

std::unique_ptr<Model> fit_model(const Matrix& x, const std::vector<int>& y,
                                 const LearnerSpec& spec) {
  if (spec.family == LearnerSpec::Family::logistic) {
    return std::make_unique<LogisticModel>(fit_logistic(x, y, spec.logistic));
  }
  return std::make_unique<BoostedTreesModel>(fit_boosted_trees(x, y, spec.boosted));
}

double log_loss(const Model& model, const Matrix& x, const std::vector<int>& y) {
  if (x.size() != y.size() || x.empty()) throw ValidationError("log_loss needs matching nonempty inputs");
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p = std::clamp(model.predict_proba(x[i]), 1e-12, 1.0 - 1e-12);
    loss += y[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return loss / static_cast<double>(x.size());
}

std::unique_ptr<Model> model_from_json(const nlohmann::json& j) {
  int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion) {
    throw ValidationError("unsupported model format version " + std::to_string(version));
  }
  std::string family = j.at("family").get<std::string>();
  if (family == "logistic") {
    LogisticConfig cfg;
    const auto& c = j.at("config");
    cfg.learning_rate = c.at("learning_rate");
    cfg.max_iters = c.at("max_iters");
    cfg.l2 = c.at("l2");
    cfg.tol = c.at("tol");
    return std::make_unique<LogisticModel>(j.at("weights").get<std::vector<double>>(),
                                           j.at("bias").get<double>(), cfg);
  }
  if (family == "boosted_trees") {
    BoostedTreesConfig cfg;
    const auto& c = j.at("config");
    cfg.n_trees = c.at("n_trees");
    cfg.max_depth = c.at("max_depth");
    cfg.shrinkage = c.at("shrinkage");
    cfg.min_leaf = c.at("min_leaf");
    cfg.leaf_reg = c.at("leaf_reg");
    std::vector<RegressionTree> trees;
    for (const auto& tj : j.at("trees")) {
      RegressionTree tree;
      for (const auto& nj : tj.at("nodes")) {
        TreeNode node;
        if (nj.contains("feature")) {
          node.feature = nj.at("feature");
          node.threshold = nj.at("threshold");
          node.left = nj.at("left");
          node.right = nj.at("right");
        } else {
          node.value = nj.at("value");
        }
        tree.nodes.push_back(node);
      }
      trees.push_back(std::move(tree));
    }
    return std::make_unique<BoostedTreesModel>(j.at("base_score").get<double>(), std::move(trees),
                                               j.at("n_features").get<std::size_t>(), cfg,
                                               std::vector<double>{});
  }
  throw ValidationError("unknown model family: " + family);
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << model.to_json().dump(2) << '\n';
  if (!out) throw Error("write failed: " + path);
}

std::unique_ptr<Model> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return model_from_json(j);
}

TuneResult tune_learner(const Matrix& x, const std::vector<int>& y,
                        const std::vector<Group>& groups, const std::vector<LearnerSpec>& grid,
                        std::size_t folds, std::uint64_t seed) {
  if (grid.empty()) throw ValidationError("tuning grid is empty");
  if (folds < 2) throw ValidationError("tuning needs at least two folds");
  if (x.size() != y.size() || x.size() != groups.size()) {
    throw ValidationError("tuning inputs have mismatched lengths");
  }
  std::vector<std::pair<int, int>> keys;
  keys.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    keys.emplace_back(static_cast<int>(groups[i]), y[i]);
  }
  auto parts = stratified_index_partition(keys, folds, seed);

  TuneResult result;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& spec : grid) {
    double total = 0.0;
    for (std::size_t fold = 0; fold < folds; ++fold) {
      Matrix train_x, test_x;
      std::vector<int> train_y, test_y;
      std::vector<char> in_test(x.size(), 0);
      for (std::size_t i : parts[fold]) in_test[i] = 1;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (in_test[i]) {
          test_x.push_back(x[i]);
          test_y.push_back(y[i]);
        } else {
          train_x.push_back(x[i]);
          train_y.push_back(y[i]);
        }
      }
      auto model = fit_model(train_x, train_y, spec);
      total += log_loss(*model, test_x, test_y);
    }
    double mean = total / static_cast<double>(folds);
    if (mean < best) {
      best = mean;
      result.best = spec;
      result.cv_log_loss = mean;
    }
  }
  return result;
}

std::vector<LearnerSpec> default_tuning_grid(LearnerSpec::Family family) {
  std::vector<LearnerSpec> grid;
  if (family == LearnerSpec::Family::logistic) {
    for (double l2 : {1e-5, 1e-4, 1e-3, 1e-2}) {
      LearnerSpec spec;
      spec.family = LearnerSpec::Family::logistic;
      spec.logistic.l2 = l2;
      grid.push_back(spec);
    }
  } else {
    for (std::size_t depth : {2u, 3u}) {
      for (std::size_t trees : {50u, 100u}) {
        LearnerSpec spec;
        spec.family = LearnerSpec::Family::boosted_trees;
        spec.boosted.max_depth = depth;
        spec.boosted.n_trees = trees;
        grid.push_back(spec);
      }
    }
  }
  return grid;
}

}  // namespace biasaudit
