#include "biasaudit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "biasaudit/csv.hpp"
#include "biasaudit/datamodel.hpp"
#include "biasaudit/metrics.hpp"

namespace biasaudit {

const char* to_string(BiasKind kind) {
  return kind == BiasKind::correct_ordering ? "correct_ordering" : "incorrect_ordering";
}

BiasKind bias_kind_from_string(const std::string& name) {
  if (name == "correct_ordering") return BiasKind::correct_ordering;
  if (name == "incorrect_ordering") return BiasKind::incorrect_ordering;
  throw ValidationError("unknown bias kind: " + name);
}

void ScenarioSpec::validate() const {
  if (num_humans == 0) throw ValidationError("scenario needs at least one human");
  if (!(prevalence > 0.0 && prevalence < 1.0)) {
    throw ValidationError("prevalence must lie strictly between 0 and 1");
  }
  if (tolerance < 0.0) throw ValidationError("tolerance must be non-negative");
  if (!(advantaged_tpr >= 0.0 && advantaged_tpr <= 1.0)) {
    throw ValidationError("advantaged TPR must lie in [0, 1]");
  }
  if (!target_tprs_a.empty() && target_tprs_a.size() != num_humans) {
    throw ValidationError("target TPR count does not match the number of humans");
  }
  for (double t : target_tprs_a) {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("TPR targets must lie in [0, 1]");
  }
  if (coef_step < 0.0) throw ValidationError("coefficient step must be non-negative");
  if (kind == BiasKind::incorrect_ordering) {
    if (!(tpr_low >= 0.0 && tpr_low <= 1.0)) throw ValidationError("tpr_low must lie in [0, 1]");
    if (!(tpr_spacing > 0.0)) throw ValidationError("tpr_spacing must be positive");
  }
}

std::vector<double> ScenarioSpec::effective_targets() const {
  if (!target_tprs_a.empty()) return target_tprs_a;
  return linspace(0.54, 0.90, num_humans);
}

ScenarioSpec ScenarioSpec::from_json(const nlohmann::json& j) {
  ScenarioSpec spec;
  if (j.contains("kind")) spec.kind = bias_kind_from_string(j.at("kind"));
  if (j.contains("num_humans")) spec.num_humans = j.at("num_humans");
  if (j.contains("prevalence")) spec.prevalence = j.at("prevalence");
  if (j.contains("target_tprs_a")) {
    spec.target_tprs_a = j.at("target_tprs_a").get<std::vector<double>>();
  }
  if (j.contains("advantaged_tpr")) spec.advantaged_tpr = j.at("advantaged_tpr");
  if (j.contains("tolerance")) spec.tolerance = j.at("tolerance");
  if (j.contains("interaction_feature")) spec.interaction_feature = j.at("interaction_feature");
  if (j.contains("coef_step")) spec.coef_step = j.at("coef_step");
  if (j.contains("tpr_low")) spec.tpr_low = j.at("tpr_low");
  if (j.contains("tpr_spacing")) spec.tpr_spacing = j.at("tpr_spacing");
  if (j.contains("decrement_cap")) spec.decrement_cap = j.at("decrement_cap");
  if (j.contains("seed")) spec.seed = j.at("seed");
  if (j.contains("sim_learner")) {
    const auto& l = j.at("sim_learner");
    if (l.contains("learning_rate")) spec.sim_learner.learning_rate = l.at("learning_rate");
    if (l.contains("max_iters")) spec.sim_learner.max_iters = l.at("max_iters");
    if (l.contains("l2")) spec.sim_learner.l2 = l.at("l2");
    if (l.contains("tol")) spec.sim_learner.tol = l.at("tol");
  }
  spec.validate();
  return spec;
}

nlohmann::json ScenarioSpec::to_json() const {
  return {{"kind", to_string(kind)},
          {"num_humans", num_humans},
          {"prevalence", prevalence},
          {"target_tprs_a", target_tprs_a},
          {"advantaged_tpr", advantaged_tpr},
          {"tolerance", tolerance},
          {"interaction_feature", interaction_feature},
          {"coef_step", coef_step},
          {"tpr_low", tpr_low},
          {"tpr_spacing", tpr_spacing},
          {"decrement_cap", decrement_cap},
          {"seed", seed},
          {"sim_learner",
           {{"learning_rate", sim_learner.learning_rate},
            {"max_iters", sim_learner.max_iters},
            {"l2", sim_learner.l2},
            {"tol", sim_learner.tol}}}};
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count == 0) throw ValidationError("linspace needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  return out;
}

std::vector<Instance> shape_prevalence(const std::vector<Instance>& instances, double p,
                                       const LogisticConfig& config) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("prevalence must lie strictly between 0 and 1");
  if (instances.empty()) throw ValidationError("no instances to shape");

  Matrix x = feature_matrix(instances);
  std::vector<int> y = label_vector(instances);
  LogisticModel model = fit_logistic(x, y, config);

  std::vector<double> probs;
  probs.reserve(instances.size());
  for (const auto& row : x) probs.push_back(model.predict_proba(row));

  std::vector<Instance> shaped = instances;
  for (auto& inst : shaped) {
    inst.gold_label = 0;
    inst.decision.reset();
  }
  for (int g = 0; g < 2; ++g) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (static_cast<int>(instances[i].group) == g) idx.push_back(i);
    }
    if (idx.empty()) continue;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (probs[a] != probs[b]) return probs[a] > probs[b];
      return a < b;
    });
    auto top = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(idx.size())));
    for (std::size_t i = 0; i < top && i < idx.size(); ++i) shaped[idx[i]].gold_label = 1;
  }
  return shaped;
}

namespace {

// TPR of "score >= threshold" decisions over the given positives.
double threshold_tpr(const std::vector<double>& scores, const std::vector<int>& labels,
                     double threshold) {
  std::int64_t tp = 0, pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    ++pos;
    if (scores[i] >= threshold) ++tp;
  }
  return static_cast<double>(tp) / static_cast<double>(pos);
}

}  // namespace

std::vector<int> simulate_correct_ordering(const std::vector<Instance>& labeled,
                                           double target_tpr, double tolerance,
                                           const LogisticConfig& config, ThresholdPick* pick) {
  if (labeled.empty()) throw ValidationError("no instances to simulate on");
  if (!(target_tpr >= 0.0 && target_tpr <= 1.0)) {
    throw ValidationError("TPR target must lie in [0, 1]");
  }
  Matrix x = feature_matrix(labeled);
  std::vector<int> y = label_vector(labeled);
  LogisticModel model = fit_logistic(x, y, config);
  std::vector<double> probs;
  probs.reserve(labeled.size());
  for (const auto& row : x) probs.push_back(model.predict_proba(row));

  std::vector<double> a_scores;
  std::vector<int> a_labels;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    if (labeled[i].group != Group::a) continue;
    a_scores.push_back(probs[i]);
    a_labels.push_back(y[i]);
  }
  if (a_scores.empty()) throw SimulationError("no group-a instances to simulate decisions for");
  if (std::find(a_labels.begin(), a_labels.end(), 1) == a_labels.end()) {
    throw SimulationError("group a has no positive instances, TPR target is unreachable");
  }

  // Candidate thresholds are the model's own scores; sweeping from
  // high to low visits every achievable decision set.
  std::vector<double> candidates = probs;
  std::sort(candidates.begin(), candidates.end(), std::greater<>());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  double best_threshold = candidates.front();
  double best_tpr = 0.0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (double t : candidates) {
    double value = threshold_tpr(a_scores, a_labels, t);
    double dist = std::abs(value - target_tpr);
    if (dist < best_dist) {
      best_dist = dist;
      best_threshold = t;
      best_tpr = value;
    }
  }
  if (pick) {
    pick->threshold = best_threshold;
    pick->achieved_tpr = best_tpr;
    pick->within_tolerance = best_dist <= tolerance;
  }
  std::vector<int> decisions;
  decisions.reserve(a_scores.size());
  for (double s : a_scores) decisions.push_back(s >= best_threshold ? 1 : 0);
  return decisions;
}

std::vector<int> simulate_advantaged_noise(const std::vector<Instance>& labeled,
                                           double target_tpr, double tolerance,
                                           std::uint64_t seed, NoisePick* pick) {
  if (labeled.empty()) throw ValidationError("no instances to simulate on");
  if (!(target_tpr >= 0.0 && target_tpr <= 1.0)) {
    throw ValidationError("TPR target must lie in [0, 1]");
  }
  std::vector<int> y = label_vector(labeled);
  std::vector<std::size_t> positives;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1) positives.push_back(i);
  }
  if (positives.empty()) {
    throw SimulationError("no positive instances, TPR target is unreachable");
  }
  auto pos = static_cast<double>(positives.size());
  auto flips = static_cast<std::size_t>(std::llround(pos * (1.0 - target_tpr)));
  flips = std::min(flips, positives.size());

  shuffle_indices(positives, seed);
  std::vector<int> decisions = y;
  for (std::size_t i = 0; i < flips; ++i) decisions[positives[i]] = 0;

  if (pick) {
    pick->flips = flips;
    pick->achieved_tpr = (pos - static_cast<double>(flips)) / pos;
    pick->within_tolerance = std::abs(pick->achieved_tpr - target_tpr) <= tolerance;
  }
  return decisions;
}

namespace {

// Rows for the pooled interaction model: raw features, the group
// indicator, then Z * A.
std::vector<double> interaction_row(const Instance& inst, std::size_t z_index) {
  std::vector<double> row = inst.features;
  double a = inst.group == Group::a ? 1.0 : 0.0;
  row.push_back(a);
  row.push_back(inst.features[z_index] * a);
  return row;
}

// Selects the top `count` rows by score; ties keep the earlier row.
std::vector<int> top_p_decisions(const std::vector<double>& scores, std::size_t count) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  std::vector<int> decisions(scores.size(), 0);
  for (std::size_t i = 0; i < count && i < order.size(); ++i) decisions[order[i]] = 1;
  return decisions;
}

}  // namespace

IncorrectOrderingResult simulate_incorrect_ordering(
    const std::vector<std::vector<Instance>>& human_sets, const std::vector<Instance>& gold_pool,
    std::size_t interaction_index, const ScenarioSpec& spec) {
  spec.validate();
  if (human_sets.empty()) throw ValidationError("no human sets to simulate");
  if (gold_pool.empty()) throw ValidationError("the gold pool is empty");
  std::size_t width = gold_pool.front().features.size();
  if (interaction_index >= width) {
    throw ValidationError("interaction feature index out of range");
  }

  Matrix pooled_x;
  std::vector<int> pooled_y;
  auto append = [&](const std::vector<Instance>& set) {
    for (const auto& inst : set) {
      if (inst.features.size() != width) {
        throw ValidationError("instance feature widths differ across sets");
      }
      if (!inst.gold_label) throw ValidationError("instance has no gold label");
      pooled_x.push_back(interaction_row(inst, interaction_index));
      pooled_y.push_back(*inst.gold_label);
    }
  };
  append(gold_pool);
  for (const auto& set : human_sets) append(set);

  LogisticModel model = fit_logistic(pooled_x, pooled_y, spec.sim_learner);
  std::size_t coef_index = width + 1;
  double fitted_coef = model.weight(coef_index);

  IncorrectOrderingResult result;
  double prev_tpr = 0.0;
  for (std::size_t k = 0; k < human_sets.size(); ++k) {
    Matrix a_rows;
    std::vector<int> a_labels;
    for (const auto& inst : human_sets[k]) {
      if (inst.group != Group::a) continue;
      a_rows.push_back(interaction_row(inst, interaction_index));
      a_labels.push_back(*inst.gold_label);
    }
    std::string who = "human " + std::to_string(k + 1);
    if (a_rows.empty()) throw SimulationError(who + " has no group-a instances");
    if (std::find(a_labels.begin(), a_labels.end(), 1) == a_labels.end()) {
      throw SimulationError(who + " has no group-a positives, TPR target is unreachable");
    }
    auto top = static_cast<std::size_t>(
        std::ceil(spec.prevalence * static_cast<double>(a_rows.size())));

    auto evaluate = [&](double coef) {
      model.set_weight(coef_index, coef);
      std::vector<double> scores;
      scores.reserve(a_rows.size());
      for (const auto& row : a_rows) scores.push_back(model.predict_proba(row));
      std::vector<int> decisions = top_p_decisions(scores, top);
      std::int64_t tp = 0, pos = 0;
      for (std::size_t i = 0; i < decisions.size(); ++i) {
        if (a_labels[i] != 1) continue;
        ++pos;
        tp += decisions[i];
      }
      return std::pair<double, std::vector<int>>(
          static_cast<double>(tp) / static_cast<double>(pos), std::move(decisions));
    };

    CoefficientPick pick;
    std::vector<int> accepted;
    double coef = fitted_coef;
    if (k == 0) {
      // Walk down until the TPR lands inside tpr_low +- tpr_spacing.
      pick.bound = spec.tpr_low;
      for (std::size_t step = 0;; ++step) {
        auto [value, decisions] = evaluate(coef);
        if (std::abs(value - spec.tpr_low) <= spec.tpr_spacing) {
          pick.coefficient = coef;
          pick.achieved_tpr = value;
          pick.satisfied = true;
          accepted = std::move(decisions);
          break;
        }
        if (value < spec.tpr_low - spec.tpr_spacing) {
          throw SimulationError(who + " skipped past its target band near TPR " +
                                std::to_string(value));
        }
        if (spec.coef_step == 0.0) {
          throw SimulationError(who + ": a zero coefficient step cannot reach the target");
        }
        if (step >= spec.decrement_cap) {
          throw SimulationError(who + ": target not reached within " +
                                std::to_string(spec.decrement_cap) + " decrements");
        }
        coef -= spec.coef_step;
      }
    } else {
      // Each later human keeps the last coefficient whose TPR still
      // clears the previous human's TPR plus the spacing; stopping at
      // the first drop below that bound yields an increasing ladder.
      pick.bound = prev_tpr + spec.tpr_spacing;
      bool have_ok = false;
      double ok_coef = 0.0, ok_tpr = 0.0;
      std::vector<int> ok_decisions;
      for (std::size_t step = 0;; ++step) {
        auto [value, decisions] = evaluate(coef);
        if (value >= pick.bound) {
          have_ok = true;
          ok_coef = coef;
          ok_tpr = value;
          ok_decisions = std::move(decisions);
        } else if (have_ok) {
          break;
        } else {
          throw SimulationError(who + ": bound " + std::to_string(pick.bound) +
                                " exceeds the achievable TPR " + std::to_string(value));
        }
        if (spec.coef_step == 0.0) break;
        if (step >= spec.decrement_cap) {
          throw SimulationError(who + ": TPR never dropped below the bound within " +
                                std::to_string(spec.decrement_cap) + " decrements");
        }
        coef -= spec.coef_step;
      }
      pick.coefficient = ok_coef;
      pick.achieved_tpr = ok_tpr;
      pick.satisfied = true;
      accepted = std::move(ok_decisions);
    }
    model.set_weight(coef_index, fitted_coef);
    prev_tpr = pick.achieved_tpr;
    result.decisions_a.push_back(std::move(accepted));
    result.picks.push_back(pick);
  }
  return result;
}

namespace {

std::string human_name(std::size_t index, std::size_t total) {
  std::string number = std::to_string(index + 1);
  std::size_t width = std::max<std::size_t>(2, std::to_string(total).size());
  while (number.size() < width) number.insert(number.begin(), '0');
  return "human_" + number;
}

double world_true_gap(const DecisionSet& ds) {
  return tpr_gap(group_confusion(decision_vector(ds.instances), label_vector(ds.instances),
                                 group_vector(ds.instances)))
      .value;
}

}  // namespace

SimulatedWorld build_world(const std::vector<Instance>& instances,
                           const std::vector<std::string>& feature_names,
                           const std::string& dataset_id, const ScenarioSpec& scenario,
                           std::size_t gs_reserve_per_group, std::size_t gs_pool_per_group) {
  scenario.validate();
  if (instances.empty()) throw ValidationError("no instances to build a world from");
  if (instances.front().features.size() != feature_names.size()) {
    throw ValidationError("feature name count does not match instance width");
  }
  if (gs_pool_per_group > gs_reserve_per_group) {
    throw ValidationError("the pool cannot exceed the reserve");
  }

  std::vector<Instance> shaped =
      shape_prevalence(instances, scenario.prevalence, scenario.sim_learner);

  GoldStandardSet reserve =
      sample_gs_pool(shaped, gs_reserve_per_group, derive_seed(scenario.seed, 11));
  std::set<InstanceId> reserved;
  for (const auto& inst : reserve.instances) reserved.insert(inst.id);
  std::vector<Instance> remaining;
  remaining.reserve(shaped.size() - reserve.instances.size());
  for (const auto& inst : shaped) {
    if (!reserved.count(inst.id)) remaining.push_back(inst);
  }

  auto parts = stratified_partition(remaining, scenario.num_humans, derive_seed(scenario.seed, 12));
  GoldStandardSet pool =
      sample_gs_pool(reserve.instances, gs_pool_per_group, derive_seed(scenario.seed, 13));

  SimulatedWorld world;
  world.scenario = scenario;
  world.dataset_id = dataset_id;
  world.feature_names = feature_names;
  world.gold_pool = std::move(pool);

  std::vector<double> targets = scenario.effective_targets();
  std::vector<std::vector<int>> decisions_a(scenario.num_humans);
  std::vector<HumanSimRecord> records(scenario.num_humans);

  if (scenario.kind == BiasKind::correct_ordering) {
    for (std::size_t k = 0; k < scenario.num_humans; ++k) {
      ThresholdPick pick;
      decisions_a[k] = simulate_correct_ordering(parts[k], targets[k], scenario.tolerance,
                                                 scenario.sim_learner, &pick);
      records[k].target_tpr_a = targets[k];
      records[k].achieved_tpr_a = pick.achieved_tpr;
      records[k].tpr_a_within_tolerance = pick.within_tolerance;
    }
  } else {
    if (scenario.interaction_feature.empty()) {
      throw ValidationError("incorrect-ordering scenarios need an interaction feature");
    }
    auto it = std::find(feature_names.begin(), feature_names.end(), scenario.interaction_feature);
    if (it == feature_names.end()) {
      throw ValidationError("interaction feature '" + scenario.interaction_feature +
                            "' is not a dataset feature");
    }
    auto z_index = static_cast<std::size_t>(it - feature_names.begin());
    IncorrectOrderingResult sim =
        simulate_incorrect_ordering(parts, world.gold_pool.instances, z_index, scenario);
    for (std::size_t k = 0; k < scenario.num_humans; ++k) {
      decisions_a[k] = std::move(sim.decisions_a[k]);
      records[k].target_tpr_a = sim.picks[k].bound;
      records[k].achieved_tpr_a = sim.picks[k].achieved_tpr;
      records[k].tpr_a_within_tolerance = sim.picks[k].satisfied;
    }
  }

  for (std::size_t k = 0; k < scenario.num_humans; ++k) {
    std::vector<Instance> not_a;
    for (const auto& inst : parts[k]) {
      if (inst.group == Group::not_a) not_a.push_back(inst);
    }
    NoisePick noise;
    std::vector<int> decisions_not_a = simulate_advantaged_noise(
        not_a, scenario.advantaged_tpr, scenario.tolerance,
        derive_seed(scenario.seed, 100 + k), &noise);
    records[k].human_id = human_name(k, scenario.num_humans);
    records[k].achieved_tpr_not_a = noise.achieved_tpr;
    records[k].tpr_not_a_within_tolerance = noise.within_tolerance;

    std::vector<Instance> with_decisions = parts[k];
    std::size_t ai = 0, ni = 0;
    for (auto& inst : with_decisions) {
      if (inst.group == Group::a) {
        inst.decision = decisions_a[k][ai++];
      } else {
        inst.decision = decisions_not_a[ni++];
      }
    }
    world.humans.push_back(DecisionSet::create(records[k].human_id, std::move(with_decisions)));
    world.true_gaps.push_back(world_true_gap(world.humans.back()));
  }
  world.records = std::move(records);
  return world;
}

void save_world(const SimulatedWorld& world, const std::string& dir) {
  std::filesystem::create_directories(dir);
  InstanceCsvLayout layout;
  layout.feature_names = world.feature_names;

  const std::string gs_file = "gold_standard.csv";
  write_instances_csv(dir + "/" + gs_file, world.gold_pool.instances, layout);

  nlohmann::ordered_json manifest;
  manifest["format_version"] = 1;
  manifest["dataset_id"] = world.dataset_id;
  manifest["feature_names"] = world.feature_names;
  manifest["scenario"] = world.scenario.to_json();
  manifest["gold_standard_file"] = gs_file;
  nlohmann::ordered_json humans = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < world.humans.size(); ++k) {
    const auto& record = world.records[k];
    std::string file = world.humans[k].human_id + ".csv";
    write_instances_csv(dir + "/" + file, world.humans[k].instances, layout);
    humans.push_back({{"id", world.humans[k].human_id},
                      {"file", file},
                      {"true_gap", world.true_gaps[k]},
                      {"target_tpr_a", record.target_tpr_a},
                      {"achieved_tpr_a", record.achieved_tpr_a},
                      {"tpr_a_within_tolerance", record.tpr_a_within_tolerance},
                      {"achieved_tpr_not_a", record.achieved_tpr_not_a},
                      {"tpr_not_a_within_tolerance", record.tpr_not_a_within_tolerance}});
  }
  manifest["humans"] = std::move(humans);

  std::ofstream out(dir + "/manifest.json", std::ios::binary);
  if (!out) throw Error("cannot write " + dir + "/manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw Error("write failed: " + dir + "/manifest.json");
}

SimulatedWorld load_world(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw IngestError("cannot open " + dir + "/manifest.json");
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(dir + "/manifest.json: " + e.what());
  }
  if (manifest.at("format_version").get<int>() != 1) {
    throw ValidationError("unsupported world format version");
  }

  SimulatedWorld world;
  world.dataset_id = manifest.at("dataset_id").get<std::string>();
  world.feature_names = manifest.at("feature_names").get<std::vector<std::string>>();
  world.scenario = ScenarioSpec::from_json(manifest.at("scenario"));

  DatasetSchema schema;
  schema.feature_columns = world.feature_names;
  schema.group_column = "group";
  schema.group_a_value = "a";
  schema.label_column = "gold_label";
  schema.decision_column = "decision";

  schema.dataset_id = world.dataset_id + "/gold_standard";
  auto gs = ingest_csv(dir + "/" + manifest.at("gold_standard_file").get<std::string>(), schema);
  world.gold_pool = GoldStandardSet::create(std::move(gs.instances));

  for (const auto& h : manifest.at("humans")) {
    std::string id = h.at("id").get<std::string>();
    schema.dataset_id = world.dataset_id + "/" + id;
    auto loaded = ingest_csv(dir + "/" + h.at("file").get<std::string>(), schema);
    world.humans.push_back(DecisionSet::create(id, std::move(loaded.instances)));
    world.true_gaps.push_back(h.at("true_gap").get<double>());
    HumanSimRecord record;
    record.human_id = id;
    record.target_tpr_a = h.at("target_tpr_a").get<double>();
    record.achieved_tpr_a = h.at("achieved_tpr_a").get<double>();
    record.tpr_a_within_tolerance = h.at("tpr_a_within_tolerance").get<bool>();
    record.achieved_tpr_not_a = h.at("achieved_tpr_not_a").get<double>();
    record.tpr_not_a_within_tolerance = h.at("tpr_not_a_within_tolerance").get<bool>();
    world.records.push_back(std::move(record));
  }
  return world;
}

std::pair<std::vector<Instance>, std::vector<std::string>> make_synthetic_dataset(
    std::size_t rows, std::uint64_t seed) {
  if (rows == 0) throw ValidationError("a dataset needs at least one row");
  std::mt19937_64 rng(derive_seed(seed, 21));
  auto uniform = [&] {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  };
  // Box-Muller, hand-rolled so the stream is identical across
  // platforms (std::normal_distribution is not).
  double spare = 0.0;
  bool have_spare = false;
  auto normal = [&] {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare = r * std::sin(2.0 * M_PI * u2);
    have_spare = true;
    return r * std::cos(2.0 * M_PI * u2);
  };

  const double coef[5] = {0.8, -0.6, 0.5, 0.4, 0.3};
  std::vector<Instance> instances;
  instances.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    Instance inst;
    inst.id = InstanceId{"synthetic", i};
    inst.features.resize(5);
    double logit = 0.0;
    for (std::size_t f = 0; f < 5; ++f) {
      inst.features[f] = normal();
      logit += coef[f] * inst.features[f];
    }
    inst.group = uniform() < 0.5 ? Group::a : Group::not_a;
    double p = 1.0 / (1.0 + std::exp(-2.2 * logit));
    inst.gold_label = uniform() < p ? 1 : 0;
    instances.push_back(std::move(inst));
  }
  return {std::move(instances), {"x0", "x1", "x2", "x3", "x4"}};
}

}  // namespace biasaudit
