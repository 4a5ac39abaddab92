#include "daylight/train/data.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <map>

#include "daylight/errors.hpp"
#include "daylight/features/preprocess.hpp"

namespace illum::train {

namespace {

struct ImageBank {
  nn::Tensor<float> images;
  std::vector<std::size_t> image_of_sample;
};

ImageBank load_images(const dataset::Corpus& corpus, const features::WindowMask& mask, std::size_t size) {
  if (corpus.samples.empty()) throw ConfigError("corpus has no samples");
  std::map<std::string, std::size_t> slot;
  std::vector<std::string> order;
  ImageBank bank;
  bank.image_of_sample.reserve(corpus.samples.size());
  for (const auto& s : corpus.samples) {
    const auto [it, inserted] = slot.emplace(s.image_ref, order.size());
    if (inserted) order.push_back(s.image_ref);
    bank.image_of_sample.push_back(it->second);
  }
  const std::size_t plane = size * size;
  bank.images = nn::Tensor<float>(nn::Shape{order.size(), 1, size, size});
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto raw = features::read_image(corpus.image_dir / order[i]);
    const auto tensor = features::preprocess_image(raw, mask, size);
    std::copy_n(tensor.data(), plane, bank.images.data() + i * plane);
  }
  return bank;
}

nn::Tensor<float> to_float(const nn::Tensor<double>& t) { return nn::tensor_cast<float>(t); }

PreparedData assemble(const dataset::Corpus& corpus, const features::WindowMask& mask, std::size_t size,
                      features::ScalerParams input_scaler, features::ScalerParams target_scaler) {
  PreparedData data;
  data.image_size = size;
  data.mask = mask;
  auto bank = load_images(corpus, mask, size);
  data.images = std::move(bank.images);
  data.image_of_sample = std::move(bank.image_of_sample);
  const auto raw_features = raw_feature_matrix(corpus.samples);
  data.targets_lux = raw_target_matrix(corpus.samples);
  data.features = to_float(features::apply_scaler(raw_features, input_scaler, features::ScaleDirection::forward));
  data.targets = to_float(features::apply_scaler(data.targets_lux, target_scaler, features::ScaleDirection::forward));
  data.input_scaler = std::move(input_scaler);
  data.target_scaler = std::move(target_scaler);
  return data;
}

nn::Tensor<double> select_rows(const nn::Tensor<double>& m, std::span<const std::size_t> rows) {
  const std::size_t K = m.dim(1);
  nn::Tensor<double> out(nn::Shape{rows.size(), K});
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy_n(m.data() + rows[i] * K, K, out.data() + i * K);
  return out;
}

}  // namespace

nn::Tensor<double> raw_feature_matrix(std::span<const dataset::Sample> samples) {
  if (samples.empty()) throw ConfigError("no samples");
  nn::Tensor<double> m(nn::Shape{samples.size(), features::kStructuredFeatureCount});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto row = dataset::build_feature_vector(samples[i]).as_array();
    std::copy(row.begin(), row.end(), m.data() + i * row.size());
  }
  return m;
}

nn::Tensor<double> raw_target_matrix(std::span<const dataset::Sample> samples) {
  if (samples.empty()) throw ConfigError("no samples");
  nn::Tensor<double> m(nn::Shape{samples.size(), dataset::kTargetCount});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::copy(samples[i].targets.begin(), samples[i].targets.end(), m.data() + i * dataset::kTargetCount);
  }
  return m;
}

void validate_split(const dataset::SplitIndices& splits, std::size_t sample_count) {
  std::vector<char> seen(sample_count, 0);
  for (const auto* part : {&splits.train, &splits.val, &splits.test1, &splits.test2}) {
    for (auto i : *part) {
      if (i >= sample_count) {
        throw DataError(fmt::format("split index {} out of range for {} samples", i, sample_count));
      }
      if (seen[i]++) throw DataError(fmt::format("split assigns sample {} twice", i));
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw DataError("split does not cover every sample; was it made for this corpus?");
  }
}

PreparedData prepare_data(const dataset::Corpus& corpus, std::span<const std::size_t> fit_rows, std::size_t image_size) {
  if (fit_rows.empty()) throw ConfigError("training split is empty");
  const auto raw_features = raw_feature_matrix(corpus.samples);
  const auto raw_targets = raw_target_matrix(corpus.samples);
  for (auto r : fit_rows) {
    if (r >= corpus.samples.size()) throw DataError(fmt::format("row {} out of range", r));
  }
  const std::vector<std::string> feature_names(features::kFeatureOrder.begin(), features::kFeatureOrder.end());
  const std::vector<std::string> target_names(dataset::kTargetNames.begin(), dataset::kTargetNames.end());
  auto input_scaler = features::fit_scaler(select_rows(raw_features, fit_rows), features::kTrainSplit, feature_names);
  auto target_scaler = features::fit_scaler(select_rows(raw_targets, fit_rows), features::kTrainSplit, target_names);
  const auto mask = corpus.mask.value_or(features::WindowMask::full_frame());
  return assemble(corpus, mask, image_size, std::move(input_scaler), std::move(target_scaler));
}

PreparedData prepare_training_data(const dataset::Corpus& corpus, const dataset::SplitIndices& splits,
                                   std::size_t image_size) {
  validate_split(splits, corpus.samples.size());
  return prepare_data(corpus, splits.train, image_size);
}

PreparedData prepare_inference_data(const dataset::Corpus& corpus, const model::Checkpoint& checkpoint) {
  const auto mask = checkpoint.mask.value_or(features::WindowMask::full_frame());
  return assemble(corpus, mask, checkpoint.config.image_size, checkpoint.input_scaler, checkpoint.target_scaler);
}

Batch make_batch(const PreparedData& data, std::span<const std::size_t> rows) {
  if (rows.empty()) throw ConfigError("empty batch");
  const std::size_t S = data.image_size;
  const std::size_t plane = S * S;
  std::map<std::size_t, std::size_t> local;
  std::vector<std::size_t> unique;
  Batch b;
  b.image_of_row.reserve(rows.size());
  for (auto r : rows) {
    const auto [it, inserted] = local.emplace(data.image_of_sample[r], unique.size());
    if (inserted) unique.push_back(data.image_of_sample[r]);
    b.image_of_row.push_back(it->second);
  }
  b.images = nn::Tensor<float>(nn::Shape{unique.size(), 1, S, S});
  for (std::size_t u = 0; u < unique.size(); ++u) {
    std::copy_n(data.images.data() + unique[u] * plane, plane, b.images.data() + u * plane);
  }
  const std::size_t F = data.features.dim(1), K = data.targets.dim(1);
  b.features = nn::Tensor<float>(nn::Shape{rows.size(), F});
  b.targets = nn::Tensor<float>(nn::Shape{rows.size(), K});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(data.features.data() + rows[i] * F, F, b.features.data() + i * F);
    std::copy_n(data.targets.data() + rows[i] * K, K, b.targets.data() + i * K);
  }
  return b;
}

}  // namespace illum::train
