#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <vector>

#include "daylight/dataset/sample.hpp"

namespace illum::dataset {

// Indices into a canonically sorted sample list.
struct SplitIndices {
  std::vector<std::size_t> train, val, test1, test2;
  std::uint64_t seed = 0;
  std::chrono::sys_days holdout_day{};

  nlohmann::json to_json() const;
  static SplitIndices from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static SplitIndices load(const std::filesystem::path& path);

  const std::vector<std::size_t>& named(std::string_view set) const;
  bool operator==(const SplitIndices&) const = default;
};

// All holdout_day samples go to test2. The rest is stratified by sensor_id
// into 70% train / 15% val / 15% test1: globally train = floor(0.7 n), the
// remainder halves with the odd sample going to test1, and per-sensor quotas
// are apportioned by largest remainder (ties to the lower sensor id).
SplitIndices split(std::span<const Sample> samples, std::uint64_t seed, std::chrono::sys_days holdout_day);

}  // namespace illum::dataset
