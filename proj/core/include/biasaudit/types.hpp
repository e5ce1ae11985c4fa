#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace biasaudit {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed inputs or violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// CSV or schema problems encountered while loading data.
class IngestError : public Error {
 public:
  using Error::Error;
};

/// Stratified partitioning cannot satisfy its guarantees.
class PartitionError : public Error {
 public:
  using Error::Error;
};

/// A requested sample cannot be drawn from the available data.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Model fitting failed (degenerate labels, bad hyperparameters, ...).
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Optimization produced a non-finite loss.
class DivergenceError : public TrainingError {
 public:
  using TrainingError::TrainingError;
};

/// A rate (TPR, RPR, ...) is undefined because a denominator is zero.
class UndefinedRateError : public Error {
 public:
  using Error::Error;
};

/// A decision simulator could not reach its target.
class SimulationError : public Error {
 public:
  using Error::Error;
};

/// Label cleaning removed an entire class from the pool.
class DegeneratePoolError : public Error {
 public:
  using Error::Error;
};

/// Binary protected-group indicator. `a` denotes the group whose
/// true-positive rate appears first in every reported gap.
enum class Group : std::uint8_t { a = 0, not_a = 1 };

inline Group other(Group g) { return g == Group::a ? Group::not_a : Group::a; }

inline const char* to_string(Group g) { return g == Group::a ? "a" : "not_a"; }

/// Stable identity of a row within a named dataset. Used to detect
/// overlap between decision sets and gold-standard sets.
struct InstanceId {
  std::string dataset_id;
  std::size_t row = 0;

  friend bool operator==(const InstanceId&, const InstanceId&) = default;
  friend auto operator<=>(const InstanceId&, const InstanceId&) = default;
};

/// One decision subject: numeric features, group membership and,
/// where known, the ground-truth outcome and/or a human decision.
/// Labels and decisions are 0/1.
struct Instance {
  InstanceId id;
  std::vector<double> features;
  Group group = Group::a;
  std::optional<int> gold_label;
  std::optional<int> decision;
};

/// All decisions attributed to a single human. Every instance must
/// carry a decision and both groups must be represented.
struct DecisionSet {
  std::string human_id;
  std::vector<Instance> instances;

  /// Validates the invariants above; throws ValidationError.
  static DecisionSet create(std::string human_id, std::vector<Instance> instances);
};

/// Instances with known ground-truth outcomes. Both groups and both
/// outcome classes must be represented.
struct GoldStandardSet {
  std::vector<Instance> instances;

  /// Validates the invariants above; throws ValidationError.
  static GoldStandardSet create(std::vector<Instance> instances);
};

using Matrix = std::vector<std::vector<double>>;

}  // namespace biasaudit
