#pragma once

#include <span>
#include <vector>

#include "daylight/dataset/corpus.hpp"
#include "daylight/dataset/split.hpp"
#include "daylight/features/scaler.hpp"
#include "daylight/model/checkpoint.hpp"
#include "daylight/nn/tensor.hpp"

namespace illum::train {

// Model-ready view of a corpus: each distinct image preprocessed once, and
// standardized structured features and targets per sample.
struct PreparedData {
  std::size_t image_size = 0;
  nn::Tensor<float> images;                // [U, 1, S, S]
  std::vector<std::size_t> image_of_sample;  // sample -> row of `images`
  nn::Tensor<float> features;              // [N, 4], standardized
  nn::Tensor<float> targets;               // [N, 3], standardized
  nn::Tensor<double> targets_lux;          // [N, 3]
  features::ScalerParams input_scaler;
  features::ScalerParams target_scaler;
  features::WindowMask mask;

  std::size_t size() const { return image_of_sample.size(); }
};

// Raw (unscaled) structured features and targets, [N, 4] and [N, 3].
nn::Tensor<double> raw_feature_matrix(std::span<const dataset::Sample> samples);
nn::Tensor<double> raw_target_matrix(std::span<const dataset::Sample> samples);

// Checks that the split indexes `sample_count` samples, is pairwise
// disjoint and covers every sample. Throws DataError.
void validate_split(const dataset::SplitIndices& splits, std::size_t sample_count);

// Fits both scalers on `fit_rows` (the training rows) and standardizes
// every sample.
PreparedData prepare_data(const dataset::Corpus& corpus, std::span<const std::size_t> fit_rows, std::size_t image_size);

// Fits both scalers on the training rows only, then standardizes every row.
// The corpus mask is used when present, otherwise the full frame.
PreparedData prepare_training_data(const dataset::Corpus& corpus, const dataset::SplitIndices& splits,
                                   std::size_t image_size);

// Applies a checkpoint's stored mask, image size and scalers (no refitting).
PreparedData prepare_inference_data(const dataset::Corpus& corpus, const model::Checkpoint& checkpoint);

// One minibatch with deduplicated images.
struct Batch {
  nn::Tensor<float> images;
  std::vector<std::size_t> image_of_row;
  nn::Tensor<float> features;
  nn::Tensor<float> targets;
};

Batch make_batch(const PreparedData& data, std::span<const std::size_t> rows);

}  // namespace illum::train
