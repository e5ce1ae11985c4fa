#include "biasaudit/datamodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "biasaudit/csv.hpp"

namespace biasaudit {

DecisionSet DecisionSet::create(std::string human_id, std::vector<Instance> instances) {
  if (human_id.empty()) throw ValidationError("decision set needs a human id");
  if (instances.empty()) throw ValidationError("decision set for " + human_id + " is empty");
  bool has_a = false, has_not_a = false;
  for (const auto& inst : instances) {
    if (!inst.decision) {
      throw ValidationError("decision set for " + human_id + " has an undecided instance");
    }
    (inst.group == Group::a ? has_a : has_not_a) = true;
  }
  if (!has_a || !has_not_a) {
    throw ValidationError("decision set for " + human_id + " covers only one group");
  }
  return DecisionSet{std::move(human_id), std::move(instances)};
}

GoldStandardSet GoldStandardSet::create(std::vector<Instance> instances) {
  if (instances.empty()) throw ValidationError("gold-standard set is empty");
  bool has_a = false, has_not_a = false, has_pos = false, has_neg = false;
  for (const auto& inst : instances) {
    if (!inst.gold_label) {
      throw ValidationError("gold-standard set has an unlabeled instance");
    }
    (inst.group == Group::a ? has_a : has_not_a) = true;
    (*inst.gold_label == 1 ? has_pos : has_neg) = true;
  }
  if (!has_a || !has_not_a) throw ValidationError("gold-standard set covers only one group");
  if (!has_pos || !has_neg) throw ValidationError("gold-standard set covers only one outcome class");
  return GoldStandardSet{std::move(instances)};
}

DatasetSchema DatasetSchema::from_json(const nlohmann::json& j) {
  DatasetSchema s;
  s.dataset_id = j.at("dataset_id").get<std::string>();
  s.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
  if (j.contains("categorical_columns")) {
    s.categorical_columns = j.at("categorical_columns").get<std::vector<std::string>>();
  }
  s.group_column = j.at("group_column").get<std::string>();
  s.group_a_value = j.at("group_a_value").get<std::string>();
  if (j.contains("label_column")) s.label_column = j.at("label_column").get<std::string>();
  if (j.contains("label_positive_value")) {
    s.label_positive_value = j.at("label_positive_value").get<std::string>();
  }
  if (j.contains("decision_column")) s.decision_column = j.at("decision_column").get<std::string>();
  if (j.contains("decision_positive_value")) {
    s.decision_positive_value = j.at("decision_positive_value").get<std::string>();
  }
  if (j.contains("missing_tokens")) {
    s.missing_tokens = j.at("missing_tokens").get<std::vector<std::string>>();
  }
  s.validate();
  return s;
}

nlohmann::json DatasetSchema::to_json() const {
  nlohmann::json j;
  j["dataset_id"] = dataset_id;
  j["feature_columns"] = feature_columns;
  j["categorical_columns"] = categorical_columns;
  j["group_column"] = group_column;
  j["group_a_value"] = group_a_value;
  if (label_column) j["label_column"] = *label_column;
  if (label_positive_value) j["label_positive_value"] = *label_positive_value;
  if (decision_column) j["decision_column"] = *decision_column;
  if (decision_positive_value) j["decision_positive_value"] = *decision_positive_value;
  j["missing_tokens"] = missing_tokens;
  return j;
}

void DatasetSchema::validate() const {
  if (dataset_id.empty()) throw ValidationError("schema needs a dataset_id");
  if (feature_columns.empty()) throw ValidationError("schema lists no feature columns");
  std::set<std::string> names;
  auto add = [&](const std::string& n, const char* what) {
    if (n.empty()) throw ValidationError(std::string("schema has an empty ") + what + " name");
    if (!names.insert(n).second) {
      throw ValidationError("schema uses column '" + n + "' more than once");
    }
  };
  for (const auto& f : feature_columns) add(f, "feature column");
  add(group_column, "group column");
  if (label_column) add(*label_column, "label column");
  if (decision_column) add(*decision_column, "decision column");
  std::set<std::string> feats(feature_columns.begin(), feature_columns.end());
  for (const auto& c : categorical_columns) {
    if (!feats.count(c)) {
      throw ValidationError("categorical column '" + c + "' is not a feature column");
    }
  }
}

DatasetSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(path + ": " + e.what());
  }
  return DatasetSchema::from_json(j);
}

namespace {

double parse_number(const std::string& cell, std::size_t row, const std::string& col) {
  double v = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw IngestError("row " + std::to_string(row) + ", column '" + col +
                      "': not a number: '" + cell + "'");
  }
  return v;
}

int parse_binary(const std::string& cell, const std::optional<std::string>& positive,
                 std::size_t row, const std::string& col) {
  if (positive) return cell == *positive ? 1 : 0;
  double v = parse_number(cell, row, col);
  if (v != 0.0 && v != 1.0) {
    throw IngestError("row " + std::to_string(row) + ", column '" + col +
                      "': expected 0 or 1, got '" + cell + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

IngestResult ingest_csv_text(const std::string& text, const DatasetSchema& schema) {
  schema.validate();
  CsvTable table = parse_csv(text);

  std::vector<std::size_t> feature_idx(schema.feature_columns.size());
  for (std::size_t i = 0; i < schema.feature_columns.size(); ++i) {
    feature_idx[i] = table.column(schema.feature_columns[i]);
  }
  std::size_t group_idx = table.column(schema.group_column);

  auto optional_column = [&](const std::optional<std::string>& name) -> std::optional<std::size_t> {
    if (!name) return std::nullopt;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == *name) return i;
    }
    return std::nullopt;
  };
  auto label_idx = optional_column(schema.label_column);
  auto decision_idx = optional_column(schema.decision_column);

  std::set<std::string> missing(schema.missing_tokens.begin(), schema.missing_tokens.end());
  auto is_missing = [&](const std::string& cell) { return missing.count(cell) != 0; };

  std::vector<std::size_t> used = feature_idx;
  used.push_back(group_idx);
  if (label_idx) used.push_back(*label_idx);
  if (decision_idx) used.push_back(*decision_idx);

  std::vector<bool> keep(table.rows.size(), true);
  std::size_t dropped = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c : used) {
      if (is_missing(table.rows[r][c])) {
        keep[r] = false;
        ++dropped;
        break;
      }
    }
  }

  std::set<std::string> categorical(schema.categorical_columns.begin(),
                                    schema.categorical_columns.end());
  // Observed category values per categorical column, lexicographic.
  std::map<std::string, std::set<std::string>> categories;
  for (std::size_t i = 0; i < schema.feature_columns.size(); ++i) {
    const auto& col = schema.feature_columns[i];
    if (!categorical.count(col)) continue;
    auto& vals = categories[col];
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      if (keep[r]) vals.insert(table.rows[r][feature_idx[i]]);
    }
  }

  IngestResult result;
  for (std::size_t i = 0; i < schema.feature_columns.size(); ++i) {
    const auto& col = schema.feature_columns[i];
    if (categorical.count(col)) {
      for (const auto& v : categories[col]) result.feature_names.push_back(col + "=" + v);
    } else {
      result.feature_names.push_back(col);
    }
  }

  result.dropped_rows = dropped;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (!keep[r]) continue;
    const auto& row = table.rows[r];
    Instance inst;
    inst.id = InstanceId{schema.dataset_id, r};
    for (std::size_t i = 0; i < schema.feature_columns.size(); ++i) {
      const auto& col = schema.feature_columns[i];
      const auto& cell = row[feature_idx[i]];
      if (categorical.count(col)) {
        for (const auto& v : categories[col]) inst.features.push_back(cell == v ? 1.0 : 0.0);
      } else {
        inst.features.push_back(parse_number(cell, r, col));
      }
    }
    inst.group = row[group_idx] == schema.group_a_value ? Group::a : Group::not_a;
    if (label_idx) {
      inst.gold_label =
          parse_binary(row[*label_idx], schema.label_positive_value, r, *schema.label_column);
    }
    if (decision_idx) {
      inst.decision = parse_binary(row[*decision_idx], schema.decision_positive_value, r,
                                   *schema.decision_column);
    }
    result.instances.push_back(std::move(inst));
  }
  return result;
}

IngestResult ingest_csv(const std::string& path, const DatasetSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return ingest_csv_text(text, schema);
  } catch (const IngestError& e) {
    throw IngestError(path + ": " + e.what());
  }
}

void write_instances_csv(const std::string& path, const std::vector<Instance>& instances,
                         const InstanceCsvLayout& layout) {
  bool any_label = false, any_decision = false;
  for (const auto& inst : instances) {
    any_label |= inst.gold_label.has_value();
    any_decision |= inst.decision.has_value();
    if (inst.features.size() != layout.feature_names.size()) {
      throw ValidationError("instance width does not match layout feature names");
    }
  }
  CsvTable table;
  table.header = layout.feature_names;
  table.header.push_back(layout.group_column);
  if (any_label) table.header.push_back(layout.label_column);
  if (any_decision) table.header.push_back(layout.decision_column);
  for (const auto& inst : instances) {
    std::vector<std::string> row;
    row.reserve(table.header.size());
    for (double v : inst.features) row.push_back(format_double(v));
    row.push_back(inst.group == Group::a ? layout.group_a_value : layout.group_not_a_value);
    if (any_label) row.push_back(inst.gold_label ? std::to_string(*inst.gold_label) : "");
    if (any_decision) row.push_back(inst.decision ? std::to_string(*inst.decision) : "");
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + (stream + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void shuffle_indices(std::vector<std::size_t>& indices, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = indices.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(indices[i - 1], indices[j]);
  }
}

std::vector<std::vector<std::size_t>> stratified_index_partition(
    const std::vector<std::pair<int, int>>& keys, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw PartitionError("cannot partition into zero parts");
  if (k > keys.size()) {
    throw PartitionError("cannot split " + std::to_string(keys.size()) + " instances into " +
                         std::to_string(k) + " parts");
  }
  std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < keys.size(); ++i) strata[keys[i]].push_back(i);

  std::vector<std::vector<std::size_t>> parts(k);
  std::mt19937_64 rng(derive_seed(seed, 0));
  for (auto& [key, idx] : strata) {
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(idx[i - 1], idx[j]);
    }
    for (std::size_t i = 0; i < idx.size(); ++i) parts[i % k].push_back(idx[i]);
  }
  for (auto& part : parts) std::sort(part.begin(), part.end());
  return parts;
}

std::vector<std::vector<Instance>> stratified_partition(const std::vector<Instance>& instances,
                                                        std::size_t k, std::uint64_t seed) {
  std::vector<std::pair<int, int>> keys;
  keys.reserve(instances.size());
  for (const auto& inst : instances) {
    keys.emplace_back(static_cast<int>(inst.group),
                      inst.gold_label ? *inst.gold_label : 2);
  }
  auto index_parts = stratified_index_partition(keys, k, seed);
  std::vector<std::vector<Instance>> parts(k);
  for (std::size_t p = 0; p < k; ++p) {
    parts[p].reserve(index_parts[p].size());
    for (std::size_t i : index_parts[p]) parts[p].push_back(instances[i]);
  }
  return parts;
}

GoldStandardSet sample_gs_pool(const std::vector<Instance>& instances, std::size_t per_group,
                               std::uint64_t seed) {
  if (per_group == 0) throw SamplingError("per-group sample size must be positive");
  // Indices of labeled instances split by (group, outcome).
  std::vector<std::size_t> pos[2], neg[2];
  std::size_t labeled = 0, positives = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!instances[i].gold_label) continue;
    ++labeled;
    int g = static_cast<int>(instances[i].group);
    if (*instances[i].gold_label == 1) {
      ++positives;
      pos[g].push_back(i);
    } else {
      neg[g].push_back(i);
    }
  }
  if (labeled == 0) throw SamplingError("no labeled instances to sample from");
  double prevalence = static_cast<double>(positives) / static_cast<double>(labeled);
  auto need_pos = static_cast<std::size_t>(std::llround(prevalence * static_cast<double>(per_group)));
  if (need_pos > per_group) need_pos = per_group;
  std::size_t need_neg = per_group - need_pos;

  std::mt19937_64 rng(derive_seed(seed, 1));
  auto draw = [&](std::vector<std::size_t>& from, std::size_t count, Group g, const char* cls) {
    if (from.size() < count) {
      throw SamplingError(std::string("group ") + to_string(g) + " has " +
                          std::to_string(from.size()) + " " + cls + " instances, need " +
                          std::to_string(count));
    }
    for (std::size_t i = from.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(from[i - 1], from[j]);
    }
    return std::vector<std::size_t>(from.begin(), from.begin() + static_cast<std::ptrdiff_t>(count));
  };

  std::vector<Instance> sample;
  sample.reserve(2 * per_group);
  for (int g = 0; g < 2; ++g) {
    Group grp = static_cast<Group>(g);
    for (std::size_t i : draw(pos[g], need_pos, grp, "positive")) sample.push_back(instances[i]);
    for (std::size_t i : draw(neg[g], need_neg, grp, "negative")) sample.push_back(instances[i]);
  }
  return GoldStandardSet::create(std::move(sample));
}

Matrix feature_matrix(const std::vector<Instance>& instances, bool include_group) {
  Matrix x;
  x.reserve(instances.size());
  for (const auto& inst : instances) {
    std::vector<double> row = inst.features;
    if (include_group) row.push_back(inst.group == Group::a ? 1.0 : 0.0);
    x.push_back(std::move(row));
  }
  return x;
}

std::vector<int> label_vector(const std::vector<Instance>& instances) {
  std::vector<int> y;
  y.reserve(instances.size());
  for (const auto& inst : instances) {
    if (!inst.gold_label) throw ValidationError("instance has no gold label");
    y.push_back(*inst.gold_label);
  }
  return y;
}

std::vector<int> decision_vector(const std::vector<Instance>& instances) {
  std::vector<int> y;
  y.reserve(instances.size());
  for (const auto& inst : instances) {
    if (!inst.decision) throw ValidationError("instance has no decision");
    y.push_back(*inst.decision);
  }
  return y;
}

std::vector<Group> group_vector(const std::vector<Instance>& instances) {
  std::vector<Group> g;
  g.reserve(instances.size());
  for (const auto& inst : instances) g.push_back(inst.group);
  return g;
}

}  // namespace biasaudit
