#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "daylight/model/config.hpp"
#include "daylight/nn/tape.hpp"
#include "daylight/rng.hpp"

namespace illum::model {

template <typename T>
struct Parameter {
  std::string name;
  nn::Tensor<T> value;
  nn::Tensor<T> grad;
};

struct ParamSpec {
  std::string name;
  nn::Shape shape;
};

// Parameter names and shapes in declaration order:
// cnn.conv{1..4}.{weight,bias}, struct.dense.{weight,bias},
// head.dense{1..n}.{weight,bias}, head.out.{weight,bias}.
std::vector<ParamSpec> parameter_specs(const ModelConfig& config);

struct LayerCount {
  std::string layer;
  std::size_t count = 0;
};

struct ParamReport {
  std::vector<LayerCount> layers;
  std::size_t total = 0;
  std::size_t head_total = 0;  // fused representation -> outputs
};

ParamReport count_params(const ModelConfig& config);

// Layer output shapes recorded during a forward pass.
using ShapeTrace = std::vector<std::pair<std::string, nn::Shape>>;

// Multimodal regressor: a four-block CNN (conv3x3 -> relu -> maxpool2) with
// global average pooling for the image, a dense+relu projection of the four
// structured features, concatenation, then an MLP head (dense -> relu ->
// dropout per hidden layer) and a linear 3-unit output.
template <typename T>
class MultimodalNet {
 public:
  // Kaiming-uniform weights (bound sqrt(6 / fan_in)), zero biases.
  explicit MultimodalNet(ModelConfig config);
  // Adopts existing weights; names and shapes must match the architecture.
  MultimodalNet(ModelConfig config, std::vector<std::pair<std::string, nn::Tensor<T>>> weights);

  const ModelConfig& config() const { return config_; }
  std::vector<Parameter<T>>& parameters() { return params_; }
  const std::vector<Parameter<T>>& parameters() const { return params_; }

  // images: [U, 1, S, S]; image_of_row[i] selects the image for feature row
  // i; features: [B, 4]. Each distinct image passes the CNN once. Returns
  // the [B, 3] output node. When `bound` is given it receives the tape
  // variables of the parameters (for gradient collection).
  nn::Var forward(nn::Tape<T>& tape, const nn::Tensor<T>& images, std::span<const std::size_t> image_of_row,
                  const nn::Tensor<T>& features, bool training, Rng* dropout_rng,
                  std::vector<nn::Var>* bound = nullptr, ShapeTrace* trace = nullptr) const;

  // Eval-mode convenience.
  nn::Tensor<T> predict(const nn::Tensor<T>& images, std::span<const std::size_t> image_of_row,
                        const nn::Tensor<T>& features) const;

  // Copies gradients for `bound` (as filled by forward) into parameters.
  void collect_gradients(const nn::Tape<T>& tape, const std::vector<nn::Var>& bound);

  std::vector<std::pair<std::string, nn::Tensor<T>>> weights() const;
  void set_weights(const std::vector<std::pair<std::string, nn::Tensor<T>>>& weights);

  // FNV-1a over the raw parameter bytes.
  std::uint64_t weights_hash() const;

 private:
  ModelConfig config_;
  std::vector<Parameter<T>> params_;
};

extern template class MultimodalNet<float>;
extern template class MultimodalNet<double>;

}  // namespace illum::model
