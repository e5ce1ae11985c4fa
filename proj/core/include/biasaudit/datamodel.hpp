#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "biasaudit/types.hpp"

namespace biasaudit {

/// Column mapping for a tabular dataset. Feature columns are read
/// left to right in the order listed here; categorical features are
/// one-hot expanded, everything else is parsed as a number.
struct DatasetSchema {
  std::string dataset_id;
  std::vector<std::string> feature_columns;
  std::vector<std::string> categorical_columns;
  std::string group_column;
  /// Cell value mapped to Group::a; every other value maps to not_a.
  std::string group_a_value;
  std::optional<std::string> label_column;
  /// When set, label cells equal to this string are positive; when
  /// unset the label column must contain 0/1. Same for decisions.
  std::optional<std::string> label_positive_value;
  std::optional<std::string> decision_column;
  std::optional<std::string> decision_positive_value;
  /// Cell values treated as missing; rows containing one are dropped.
  std::vector<std::string> missing_tokens = {""};

  static DatasetSchema from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Checks column names are distinct and categoricals are a subset
  /// of the feature columns; throws ValidationError.
  void validate() const;
};

/// Loads a schema from a JSON file.
DatasetSchema load_schema(const std::string& path);

struct IngestResult {
  std::vector<Instance> instances;
  /// Feature names after one-hot expansion. Categorical column `c`
  /// with observed values v1 < v2 < ... expands to `c=v1`, `c=v2`,
  /// ... in lexicographic order.
  std::vector<std::string> feature_names;
  std::size_t dropped_rows = 0;
};

/// Reads a CSV file through a schema. Rows with a missing token in
/// any used column are dropped and counted; a non-numeric value in a
/// numeric column is an IngestError naming row and column.
IngestResult ingest_csv(const std::string& path, const DatasetSchema& schema);

/// Same, parsing in-memory text instead of a file.
IngestResult ingest_csv_text(const std::string& text, const DatasetSchema& schema);

/// Column layout used when writing instances back to CSV.
struct InstanceCsvLayout {
  std::vector<std::string> feature_names;
  std::string group_column = "group";
  std::string group_a_value = "a";
  std::string group_not_a_value = "not_a";
  std::string label_column = "gold_label";
  std::string decision_column = "decision";
};

/// Writes instances as CSV. Label/decision columns are included only
/// when at least one instance carries the field; absent values in an
/// included column are written as empty cells. Doubles are written
/// with shortest round-trip formatting, so write/ingest is lossless.
void write_instances_csv(const std::string& path, const std::vector<Instance>& instances,
                         const InstanceCsvLayout& layout);

/// Splits index set {0..keys.size()-1} into k parts, balancing each
/// stratum (distinct key) across parts: part sizes within a stratum
/// differ by at most one. Deterministic for a fixed seed.
std::vector<std::vector<std::size_t>> stratified_index_partition(
    const std::vector<std::pair<int, int>>& keys, std::size_t k, std::uint64_t seed);

/// Stratified partition of instances by (group, outcome). Instances
/// without a gold label form their own stratum. Throws
/// PartitionError if k is zero or exceeds the instance count.
std::vector<std::vector<Instance>> stratified_partition(
    const std::vector<Instance>& instances, std::size_t k, std::uint64_t seed);

/// Draws per_group labeled instances from each group, preserving the
/// overall outcome prevalence of the labeled input within each group
/// (positive count rounded to nearest). Throws SamplingError when a
/// group lacks enough instances of either class.
GoldStandardSet sample_gs_pool(const std::vector<Instance>& instances,
                               std::size_t per_group, std::uint64_t seed);

/// Feature matrix for model input. The group indicator is appended
/// as a trailing 0/1 column (a=1) when include_group is set, since
/// group membership is part of every instance's feature description.
Matrix feature_matrix(const std::vector<Instance>& instances, bool include_group = true);

/// Gold labels as 0/1; throws ValidationError on unlabeled instances.
std::vector<int> label_vector(const std::vector<Instance>& instances);

/// Decisions as 0/1; throws ValidationError on undecided instances.
std::vector<int> decision_vector(const std::vector<Instance>& instances);

std::vector<Group> group_vector(const std::vector<Instance>& instances);

/// Deterministic Fisher-Yates shuffle driven by a splitmix-seeded
/// mt19937_64, identical across platforms for a fixed seed.
void shuffle_indices(std::vector<std::size_t>& indices, std::uint64_t seed);

/// Derives independent sub-seeds from a base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace biasaudit
