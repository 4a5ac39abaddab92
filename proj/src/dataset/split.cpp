#include "daylight/dataset/split.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <numeric>

#include "daylight/errors.hpp"
#include "daylight/features/timestamp.hpp"
#include "daylight/rng.hpp"

namespace illum::dataset {

namespace {

// Largest-remainder apportionment of `total` across strata proportional to
// `sizes` (which sum to `base`). Ties go to the earlier stratum.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& sizes, std::size_t base, std::size_t total) {
  std::vector<std::size_t> out(sizes.size());
  std::vector<std::size_t> remainders(sizes.size());
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const std::size_t numer = sizes[s] * total;
    out[s] = base == 0 ? 0 : numer / base;
    remainders[s] = base == 0 ? 0 : numer % base;
    assigned += out[s];
  }
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < total; ++i) {
    ++out[order[i % order.size()]];
    ++assigned;
  }
  return out;
}

}  // namespace

SplitIndices split(std::span<const Sample> samples, std::uint64_t seed, std::chrono::sys_days holdout_day) {
  SplitIndices out;
  out.seed = seed;
  out.holdout_day = holdout_day;

  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].timestamp.day == holdout_day) {
      out.test2.push_back(i);
    } else {
      strata[samples[i].sensor_id].push_back(i);
    }
  }
  if (out.test2.empty()) {
    throw ConfigError(fmt::format("holdout day {} has no samples", features::format_date(holdout_day)));
  }
  const std::size_t remainder = samples.size() - out.test2.size();
  if (remainder == 0) {
    throw ConfigError(fmt::format("every sample falls on holdout day {}; nothing left to train on",
                                  features::format_date(holdout_day)));
  }

  const std::size_t train_total = remainder * 7 / 10;
  const std::size_t rest_total = remainder - train_total;
  const std::size_t val_total = rest_total / 2;

  std::vector<std::size_t> sizes;
  for (const auto& [id, members] : strata) sizes.push_back(members.size());
  const auto train_counts = apportion(sizes, remainder, train_total);
  std::vector<std::size_t> rest_sizes(sizes.size());
  for (std::size_t s = 0; s < sizes.size(); ++s) rest_sizes[s] = sizes[s] - train_counts[s];
  const auto val_counts = apportion(rest_sizes, rest_total, val_total);

  std::size_t s = 0;
  for (auto& [id, members] : strata) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(id)));
    rng.shuffle(std::span<std::size_t>(members));
    const std::size_t n_train = train_counts[s];
    const std::size_t n_val = val_counts[s];
    out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val.insert(out.val.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train),
                   members.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test1.insert(out.test1.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), members.end());
    ++s;
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test1.begin(), out.test1.end());
  return out;
}

const std::vector<std::size_t>& SplitIndices::named(std::string_view set) const {
  if (set == "train") return train;
  if (set == "val") return val;
  if (set == "test1") return test1;
  if (set == "test2") return test2;
  throw ConfigError(fmt::format("unknown split '{}'", set));
}

nlohmann::json SplitIndices::to_json() const {
  return {{"seed", seed},
          {"holdout_day", features::format_date(holdout_day)},
          {"counts", {{"train", train.size()}, {"val", val.size()}, {"test1", test1.size()}, {"test2", test2.size()}}},
          {"train", train},
          {"val", val},
          {"test1", test1},
          {"test2", test2}};
}

SplitIndices SplitIndices::from_json(const nlohmann::json& j) {
  SplitIndices s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.holdout_day = features::parse_date(j.at("holdout_day").get<std::string>());
    s.train = j.at("train").get<std::vector<std::size_t>>();
    s.val = j.at("val").get<std::vector<std::size_t>>();
    s.test1 = j.at("test1").get<std::vector<std::size_t>>();
    s.test2 = j.at("test2").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("split file: {}", e.what()));
  }
  return s;
}

void SplitIndices::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json().dump() << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

SplitIndices SplitIndices::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open split file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("split file {}: {}", path.string(), e.what()));
  }
  return from_json(j);
}

}  // namespace illum::dataset
