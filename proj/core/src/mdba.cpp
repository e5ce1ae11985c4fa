#include "biasaudit/mdba.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "biasaudit/datamodel.hpp"

namespace biasaudit {

void MdbaConfig::validate() const {
  if (!(c > 0.0)) throw ValidationError("flag ratio c must be positive");
  if (rpr_tolerance < 0.0) throw ValidationError("rpr_tolerance must be non-negative");
}

MdbaConfig MdbaConfig::from_json(const nlohmann::json& j) {
  MdbaConfig cfg;
  if (j.contains("c")) cfg.c = j.at("c");
  if (j.contains("rpr_tolerance")) cfg.rpr_tolerance = j.at("rpr_tolerance");
  if (j.contains("rescale_by_c")) cfg.rescale_by_c = j.at("rescale_by_c");
  if (j.contains("naive_mode")) cfg.naive_mode = j.at("naive_mode");
  if (j.contains("learner")) cfg.learner = LearnerSpec::from_json(j.at("learner"));
  cfg.validate();
  return cfg;
}

nlohmann::json MdbaConfig::to_json() const {
  return {{"c", c},
          {"rpr_tolerance", rpr_tolerance},
          {"rescale_by_c", rescale_by_c},
          {"naive_mode", naive_mode},
          {"learner", learner.to_json()}};
}

namespace {

// Rows shaped for the model: the group column is appended when the
// model was trained with it.
Matrix model_inputs(const Model& model, const std::vector<Instance>& instances) {
  std::size_t raw = instances.front().features.size();
  if (model.n_features() == raw) return feature_matrix(instances, false);
  if (model.n_features() == raw + 1) return feature_matrix(instances, true);
  throw ValidationError("model expects " + std::to_string(model.n_features()) +
                        " features, instances have " + std::to_string(raw));
}

}  // namespace

RprSearchResult find_rpr_thresholds(const Model& model, const std::vector<Instance>& instances,
                                    double c, double relative_tolerance) {
  if (!(c > 0.0)) throw ValidationError("flag ratio c must be positive");
  if (relative_tolerance < 0.0) throw ValidationError("tolerance must be non-negative");
  if (instances.empty()) throw ValidationError("threshold search needs instances");

  Matrix x = model_inputs(model, instances);
  RprSearchResult result;
  for (int g = 0; g < 2; ++g) {
    Group grp = static_cast<Group>(g);
    std::vector<double> scores;
    std::int64_t positives = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto& inst = instances[i];
      if (inst.group != grp) continue;
      if (!inst.decision) throw ValidationError("threshold search needs decided instances");
      scores.push_back(model.predict_proba(x[i]));
      positives += *inst.decision;
    }
    if (scores.empty()) {
      throw UndefinedRateError(std::string("no instances in group ") + to_string(grp));
    }
    if (positives == 0) {
      throw UndefinedRateError(std::string("no positive decisions in group ") + to_string(grp) +
                               ", flag ratio undefined");
    }
    std::sort(scores.begin(), scores.end());

    std::vector<double> candidates = scores;
    candidates.push_back(0.0);
    candidates.push_back(1.0);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    RprGroupSearch& search = result.group(grp);
    double best_dist = std::numeric_limits<double>::infinity();
    double best_threshold = 0.0;
    double best_attained = 0.0;
    for (double t : candidates) {
      auto first_ge = std::lower_bound(scores.begin(), scores.end(), t);
      auto flagged = static_cast<double>(scores.end() - first_ge);
      double attained = flagged / static_cast<double>(positives);
      double dist = std::abs(attained - c);
      if (dist <= relative_tolerance * c) {
        search.thresholds.push_back(t);
        search.attained.push_back(attained);
      }
      if (dist <= best_dist) {
        best_dist = dist;
        best_threshold = t;
        best_attained = attained;
      }
    }
    if (search.thresholds.empty()) {
      search.thresholds.push_back(best_threshold);
      search.attained.push_back(best_attained);
      search.nearest_only = true;
    }
  }
  return result;
}

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double population_variance(const std::vector<double>& v) {
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

// TPR of threshold classifications against gold labels, for one
// group, at each threshold in `thresholds`.
std::vector<double> gold_tprs(const std::vector<double>& probs, const std::vector<int>& labels,
                              const std::vector<Group>& groups, Group grp,
                              const std::vector<double>& thresholds) {
  std::int64_t denom = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (groups[i] == grp && labels[i] == 1) ++denom;
  }
  if (denom == 0) {
    throw UndefinedRateError(std::string("gold-standard set has no positives in group ") +
                             to_string(grp));
  }
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    std::int64_t tp = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (groups[i] == grp && labels[i] == 1 && probs[i] >= t) ++tp;
    }
    out.push_back(static_cast<double>(tp) / static_cast<double>(denom));
  }
  return out;
}

// Attained flag ratio on the decision set at one threshold; NaN when
// the group has no positive decisions.
double attained_ratio(const std::vector<double>& scores, std::int64_t positives, double t) {
  if (positives == 0) return std::numeric_limits<double>::quiet_NaN();
  std::int64_t flagged = 0;
  for (double s : scores) {
    if (s >= t) ++flagged;
  }
  return static_cast<double>(flagged) / static_cast<double>(positives);
}

}  // namespace

std::vector<BiasEstimate> estimate_bias(const std::vector<DecisionSet>& decision_sets,
                                        const GoldStandardSet& gold, const MdbaConfig& config) {
  config.validate();
  if (decision_sets.empty()) throw ValidationError("no decision sets given");

  Matrix gold_x = feature_matrix(gold.instances);
  std::vector<int> gold_y = label_vector(gold.instances);
  std::vector<Group> gold_g = group_vector(gold.instances);
  std::set<InstanceId> gold_ids;
  for (const auto& inst : gold.instances) gold_ids.insert(inst.id);

  std::vector<BiasEstimate> estimates;
  estimates.reserve(decision_sets.size());
  for (const auto& ds : decision_sets) {
    BiasEstimate est;
    est.human_id = ds.human_id;
    est.method = config.naive_mode ? "MDBA-Naive" : "MDBA";
    est.c = config.c;
    est.rescaled_by_c = config.rescale_by_c;
    try {
      std::size_t shared = 0;
      for (const auto& inst : ds.instances) shared += gold_ids.count(inst.id);
      if (shared > 0) {
        est.warning = "decision set shares " + std::to_string(shared) +
                      " instance(s) with the gold-standard set";
      }

      Matrix x = feature_matrix(ds.instances);
      std::vector<int> y = decision_vector(ds.instances);
      auto model = fit_model(x, y, config.learner);

      if (config.naive_mode) {
        est.thresholds_a = {0.5};
        est.thresholds_not_a = {0.5};
        std::vector<double> scores[2];
        std::int64_t positives[2] = {0, 0};
        for (std::size_t i = 0; i < ds.instances.size(); ++i) {
          int g = static_cast<int>(ds.instances[i].group);
          scores[g].push_back(model->predict_proba(x[i]));
          positives[g] += y[i];
        }
        est.attained_rpr_a = attained_ratio(scores[0], positives[0], 0.5);
        est.attained_rpr_not_a = attained_ratio(scores[1], positives[1], 0.5);
      } else {
        RprSearchResult search = find_rpr_thresholds(*model, ds.instances, config.c,
                                                     config.rpr_tolerance);
        est.thresholds_a = search.group(Group::a).thresholds;
        est.thresholds_not_a = search.group(Group::not_a).thresholds;
        est.attained_rpr_a = mean(search.group(Group::a).attained);
        est.attained_rpr_not_a = mean(search.group(Group::not_a).attained);
        est.rpr_outside_tolerance_a = search.group(Group::a).nearest_only;
        est.rpr_outside_tolerance_not_a = search.group(Group::not_a).nearest_only;
      }

      std::vector<double> gold_probs = predict_proba(*model, gold_x);
      // TPR(a) varies only with the a-threshold and TPR(not_a) only
      // with the other, so the mean and spread over all threshold
      // combinations factor into per-group terms.
      std::vector<double> tprs_a = gold_tprs(gold_probs, gold_y, gold_g, Group::a,
                                             est.thresholds_a);
      std::vector<double> tprs_not_a = gold_tprs(gold_probs, gold_y, gold_g, Group::not_a,
                                                 est.thresholds_not_a);
      double gap = mean(tprs_a) - mean(tprs_not_a);
      double spread = std::sqrt(population_variance(tprs_a) + population_variance(tprs_not_a));
      if (config.rescale_by_c) {
        gap /= config.c;
        spread /= config.c;
      }
      est.gap = gap;
      est.uncertainty = spread;
    } catch (const Error& e) {
      est.error = e.what();
    }
    estimates.push_back(std::move(est));
  }
  return estimates;
}

nlohmann::json estimates_to_json(const std::vector<BiasEstimate>& estimates) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& est : estimates) {
    nlohmann::json j;
    j["human_id"] = est.human_id;
    j["method"] = est.method;
    if (est.failed()) {
      j["error"] = est.error;
      arr.push_back(std::move(j));
      continue;
    }
    j["gap"] = est.gap;
    j["uncertainty"] = est.uncertainty;
    if (!std::isnan(est.c)) {
      j["c"] = est.c;
      j["rescaled_by_c"] = est.rescaled_by_c;
    }
    if (!est.thresholds_a.empty() || !est.thresholds_not_a.empty()) {
      j["thresholds"] = {{"a", est.thresholds_a}, {"not_a", est.thresholds_not_a}};
      auto ratio = [](double v) -> nlohmann::json {
        if (std::isnan(v)) return nullptr;
        return v;
      };
      j["attained_rpr"] = {{"a", ratio(est.attained_rpr_a)}, {"not_a", ratio(est.attained_rpr_not_a)}};
      j["rpr_outside_tolerance"] = {{"a", est.rpr_outside_tolerance_a},
                                    {"not_a", est.rpr_outside_tolerance_not_a}};
    }
    if (!est.warning.empty()) j["warning"] = est.warning;
    arr.push_back(std::move(j));
  }
  return arr;
}

CsvTable estimates_to_csv(const std::vector<BiasEstimate>& estimates) {
  CsvTable table;
  table.header = {"human_id",          "method",
                  "gap",               "uncertainty",
                  "c",                 "rescaled_by_c",
                  "n_thresholds_a",    "n_thresholds_not_a",
                  "attained_rpr_a",    "attained_rpr_not_a",
                  "rpr_outside_tolerance_a", "rpr_outside_tolerance_not_a",
                  "warning",           "error"};
  for (const auto& est : estimates) {
    std::vector<std::string> row(table.header.size());
    row[0] = est.human_id;
    row[1] = est.method;
    if (!est.failed()) {
      row[2] = format_double(est.gap);
      row[3] = format_double(est.uncertainty);
      row[4] = std::isnan(est.c) ? "" : format_double(est.c);
      row[5] = est.rescaled_by_c ? "1" : "0";
      row[6] = std::to_string(est.thresholds_a.size());
      row[7] = std::to_string(est.thresholds_not_a.size());
      row[8] = std::isnan(est.attained_rpr_a) ? "" : format_double(est.attained_rpr_a);
      row[9] = std::isnan(est.attained_rpr_not_a) ? "" : format_double(est.attained_rpr_not_a);
      row[10] = est.rpr_outside_tolerance_a ? "1" : "0";
      row[11] = est.rpr_outside_tolerance_not_a ? "1" : "0";
    }
    row[12] = est.warning;
    row[13] = est.error;
    table.rows.push_back(std::move(row));
  }
  return table;
}

void save_estimates(const std::vector<BiasEstimate>& estimates, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << estimates_to_json(estimates).dump(2) << '\n';
  if (!out) throw Error("write failed: " + path);
}

}  // namespace biasaudit
