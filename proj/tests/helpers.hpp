#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "biasaudit/types.hpp"

namespace testutil {

// Fresh scratch directory under the system temp path; wiped on entry
// so reruns start clean.
inline std::string temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "biasaudit_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline biasaudit::Instance make_instance(const std::string& dataset, std::size_t row,
                                         std::vector<double> features, biasaudit::Group group,
                                         std::optional<int> gold_label = std::nullopt,
                                         std::optional<int> decision = std::nullopt) {
  biasaudit::Instance inst;
  inst.id = biasaudit::InstanceId{dataset, row};
  inst.features = std::move(features);
  inst.group = group;
  inst.gold_label = gold_label;
  inst.decision = decision;
  return inst;
}

}  // namespace testutil
