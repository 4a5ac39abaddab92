#include "daylight/model/network.hpp"

#include <cmath>
#include <cstring>
#include <fmt/format.h>

#include "daylight/errors.hpp"
#include "daylight/features/feature_vector.hpp"
#include "daylight/nn/ops.hpp"

namespace illum::model {

std::vector<ParamSpec> parameter_specs(const ModelConfig& config) {
  std::vector<ParamSpec> specs;
  std::size_t in_ch = 1;
  for (std::size_t l = 0; l < config.cnn_channels.size(); ++l) {
    const std::size_t out_ch = config.cnn_channels[l];
    specs.push_back({fmt::format("cnn.conv{}.weight", l + 1), {out_ch, in_ch, kConvKernel, kConvKernel}});
    specs.push_back({fmt::format("cnn.conv{}.bias", l + 1), {out_ch}});
    in_ch = out_ch;
  }
  specs.push_back({"struct.dense.weight", {config.struct_embed_dim, features::kStructuredFeatureCount}});
  specs.push_back({"struct.dense.bias", {config.struct_embed_dim}});
  std::size_t width = config.fused_dim();
  for (std::size_t h = 0; h < config.mlp_hidden.size(); ++h) {
    specs.push_back({fmt::format("head.dense{}.weight", h + 1), {config.mlp_hidden[h], width}});
    specs.push_back({fmt::format("head.dense{}.bias", h + 1), {config.mlp_hidden[h]}});
    width = config.mlp_hidden[h];
  }
  specs.push_back({"head.out.weight", {kOutputs, width}});
  specs.push_back({"head.out.bias", {kOutputs}});
  return specs;
}

ParamReport count_params(const ModelConfig& config) {
  config.validate();
  ParamReport report;
  for (const auto& spec : parameter_specs(config)) {
    const auto layer = spec.name.substr(0, spec.name.rfind('.'));
    const std::size_t n = nn::shape_numel(spec.shape);
    if (report.layers.empty() || report.layers.back().layer != layer) report.layers.push_back({layer, 0});
    report.layers.back().count += n;
    report.total += n;
    if (spec.name.rfind("head.", 0) == 0) report.head_total += n;
  }
  return report;
}

template <typename T>
MultimodalNet<T>::MultimodalNet(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, 0x1417));
  for (auto& spec : parameter_specs(config_)) {
    nn::Tensor<T> value(spec.shape);
    if (spec.shape.size() > 1) {
      std::size_t fan_in = 1;
      for (std::size_t i = 1; i < spec.shape.size(); ++i) fan_in *= spec.shape[i];
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      for (auto& v : value.values()) v = static_cast<T>(rng.uniform(-bound, bound));
    }
    params_.push_back({std::move(spec.name), value, nn::Tensor<T>(value.shape())});
  }
}

template <typename T>
MultimodalNet<T>::MultimodalNet(ModelConfig config, std::vector<std::pair<std::string, nn::Tensor<T>>> weights)
    : config_(std::move(config)) {
  config_.validate();
  for (auto& spec : parameter_specs(config_)) {
    params_.push_back({std::move(spec.name), nn::Tensor<T>(spec.shape), nn::Tensor<T>(spec.shape)});
  }
  set_weights(weights);
}

template <typename T>
void MultimodalNet<T>::set_weights(const std::vector<std::pair<std::string, nn::Tensor<T>>>& weights) {
  if (weights.size() != params_.size()) {
    throw DimensionError(fmt::format("expected {} weight tensors, got {}", params_.size(), weights.size()));
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (weights[i].first != params_[i].name) {
      throw DimensionError(fmt::format("weight {} is '{}', expected '{}'", i, weights[i].first, params_[i].name));
    }
    if (weights[i].second.shape() != params_[i].value.shape()) {
      throw DimensionError(fmt::format("weight '{}' has shape {}, expected {}", params_[i].name,
                                       nn::shape_to_string(weights[i].second.shape()),
                                       nn::shape_to_string(params_[i].value.shape())));
    }
    params_[i].value = weights[i].second;
  }
}

template <typename T>
std::vector<std::pair<std::string, nn::Tensor<T>>> MultimodalNet<T>::weights() const {
  std::vector<std::pair<std::string, nn::Tensor<T>>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.emplace_back(p.name, p.value);
  return out;
}

template <typename T>
std::uint64_t MultimodalNet<T>::weights_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : params_) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p.value.data());
    for (std::size_t i = 0; i < p.value.numel() * sizeof(T); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

namespace {

template <typename T>
void check_layer(const nn::Tape<T>& tape, nn::Var v, const std::string& layer, ShapeTrace* trace) {
  const auto& value = tape.value(v);
  if (!value.all_finite()) throw NumericError("non-finite activation in layer " + layer);
  if (trace) trace->emplace_back(layer, value.shape());
}

}  // namespace

template <typename T>
nn::Var MultimodalNet<T>::forward(nn::Tape<T>& tape, const nn::Tensor<T>& images,
                                  std::span<const std::size_t> image_of_row, const nn::Tensor<T>& features,
                                  bool training, Rng* dropout_rng, std::vector<nn::Var>* bound,
                                  ShapeTrace* trace) const {
  const std::size_t S = config_.image_size;
  if (features.rank() != 2 || features.dim(1) != features::kStructuredFeatureCount) {
    throw DimensionError(fmt::format("structured features must be [B, {}], got {}", features::kStructuredFeatureCount,
                                     nn::shape_to_string(features.shape())));
  }
  if (images.rank() != 4 || images.dim(1) != 1 || images.dim(2) != S || images.dim(3) != S) {
    throw DimensionError(fmt::format("images must be [U, 1, {}, {}], got {}", S, S, nn::shape_to_string(images.shape())));
  }
  const std::size_t B = features.dim(0);
  if (image_of_row.size() != B) {
    throw DimensionError(fmt::format("{} feature rows but {} image references", B, image_of_row.size()));
  }
  if (training && config_.dropout > 0.0 && dropout_rng == nullptr) {
    throw ParameterError("training-mode forward with dropout needs a generator");
  }

  std::vector<nn::Var> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(bound ? tape.variable(p.value) : tape.constant(p.value));
  if (bound) *bound = vars;

  std::size_t k = 0;
  nn::Var x = tape.constant(images);
  if (trace) trace->emplace_back("input.image", images.shape());
  for (std::size_t l = 0; l < config_.cnn_channels.size(); ++l) {
    const auto name = fmt::format("cnn.conv{}", l + 1);
    x = nn::conv2d(tape, x, vars[k], vars[k + 1], kConvPadding, 1);
    k += 2;
    check_layer(tape, x, name, nullptr);
    // relu and max commute, so pooling first does the same math on a
    // quarter of the elements.
    x = nn::maxpool2d(tape, x, kPoolWindow);
    x = nn::relu(tape, x);
    check_layer(tape, x, name + ".pool", trace);
  }
  nn::Var embedding = nn::global_avg_pool(tape, x);
  check_layer(tape, embedding, "cnn.embedding", trace);
  embedding = nn::gather_rows(tape, embedding, image_of_row);

  nn::Var s = tape.constant(features);
  s = nn::relu(tape, nn::dense(tape, s, vars[k], vars[k + 1]));
  k += 2;
  check_layer(tape, s, "struct.embedding", trace);

  nn::Var z = nn::concat_cols(tape, embedding, s);
  check_layer(tape, z, "fusion", trace);
  for (std::size_t h = 0; h < config_.mlp_hidden.size(); ++h) {
    const auto name = fmt::format("head.dense{}", h + 1);
    z = nn::relu(tape, nn::dense(tape, z, vars[k], vars[k + 1]));
    k += 2;
    check_layer(tape, z, name, trace);
    if (training && config_.dropout > 0.0) z = nn::dropout(tape, z, config_.dropout, true, *dropout_rng);
  }
  nn::Var out = nn::dense(tape, z, vars[k], vars[k + 1]);
  check_layer(tape, out, "head.out", trace);
  return out;
}

template <typename T>
nn::Tensor<T> MultimodalNet<T>::predict(const nn::Tensor<T>& images, std::span<const std::size_t> image_of_row,
                                        const nn::Tensor<T>& features) const {
  nn::Tape<T> tape;
  const nn::Var out = forward(tape, images, image_of_row, features, false, nullptr);
  return tape.value(out);
}

template <typename T>
void MultimodalNet<T>::collect_gradients(const nn::Tape<T>& tape, const std::vector<nn::Var>& bound) {
  if (bound.size() != params_.size()) throw InternalError("bound variables do not match the parameter list");
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i].grad = tape.gradient(bound[i]);
}

template class MultimodalNet<float>;
template class MultimodalNet<double>;

}  // namespace illum::model
