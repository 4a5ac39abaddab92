#include "daylight/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <numeric>

#include "daylight/errors.hpp"
#include "daylight/nn/adam.hpp"
#include "daylight/nn/ops.hpp"

namespace illum::train {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5a17;
constexpr std::uint64_t kDropoutStream = 0xd409;
// Distinct images per evaluation chunk.
constexpr std::size_t kEvalImagesPerChunk = 64;

// Groups rows so each chunk touches at most kEvalImagesPerChunk images.
std::vector<std::vector<std::size_t>> eval_chunks(const PreparedData& data, std::span<const std::size_t> rows) {
  std::map<std::size_t, std::vector<std::size_t>> by_image;  // image -> positions in `rows`
  for (std::size_t i = 0; i < rows.size(); ++i) by_image[data.image_of_sample[rows[i]]].push_back(i);
  std::vector<std::vector<std::size_t>> chunks;
  std::size_t images_in_chunk = kEvalImagesPerChunk;
  for (const auto& [image, positions] : by_image) {
    if (images_in_chunk == kEvalImagesPerChunk) {
      chunks.emplace_back();
      images_in_chunk = 0;
    }
    chunks.back().insert(chunks.back().end(), positions.begin(), positions.end());
    ++images_in_chunk;
  }
  return chunks;
}

}  // namespace

bool EarlyStopping::observe(std::size_t epoch, double val_loss) {
  improved_ = val_loss < best_;
  if (improved_) {
    best_ = val_loss;
    best_epoch_ = epoch;
    return false;
  }
  return epoch - best_epoch_ >= patience_;
}

nn::Tensor<float> predict_rows(const model::MultimodalNet<float>& net, const PreparedData& data,
                               std::span<const std::size_t> rows) {
  if (rows.empty()) throw ConfigError("cannot predict an empty split");
  const std::size_t K = model::kOutputs;
  nn::Tensor<float> out(nn::Shape{rows.size(), K});
  for (const auto& positions : eval_chunks(data, rows)) {
    std::vector<std::size_t> chunk_rows(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) chunk_rows[i] = rows[positions[i]];
    const Batch b = make_batch(data, chunk_rows);
    const auto pred = net.predict(b.images, b.image_of_row, b.features);
    for (std::size_t i = 0; i < positions.size(); ++i) {
      std::copy_n(pred.data() + i * K, K, out.data() + positions[i] * K);
    }
  }
  return out;
}

double evaluate_mse(const model::MultimodalNet<float>& net, const PreparedData& data, std::span<const std::size_t> rows) {
  const auto pred = predict_rows(net, data, rows);
  const std::size_t K = model::kOutputs;
  double acc = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      const double d = static_cast<double>(pred[i * K + k]) - static_cast<double>(data.targets[rows[i] * K + k]);
      acc += d * d;
    }
  }
  return acc / static_cast<double>(rows.size() * K);
}

TrainResult train(const model::ModelConfig& config, const PreparedData& data, std::span<const std::size_t> train_rows,
                  std::span<const std::size_t> val_rows, const TrainOptions& options) {
  config.validate();
  if (train_rows.empty()) throw ConfigError("training split is empty");
  if (val_rows.empty()) throw ConfigError("validation split is empty");
  if (config.image_size != data.image_size) {
    throw ConfigError(fmt::format("model expects {}px images but data was prepared at {}px", config.image_size,
                                  data.image_size));
  }

  model::MultimodalNet<float> net(config);
  nn::Adam<float> adam(nn::AdamOptions{config.lr});
  EarlyStopping stopper(config.patience);
  TrainResult result;
  auto best_weights = net.weights();

  std::vector<nn::Tensor<float>*> param_ptrs;
  std::vector<const nn::Tensor<float>*> grad_ptrs;
  for (auto& p : net.parameters()) {
    param_ptrs.push_back(&p.value);
    grad_ptrs.push_back(&p.grad);
  }

  const std::vector<std::size_t> base_order(train_rows.begin(), train_rows.end());
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::vector<std::size_t> order = base_order;
    Rng shuffle_rng(derive_seed(derive_seed(config.seed, kShuffleStream), epoch));
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    Rng dropout_rng(derive_seed(derive_seed(config.seed, kDropoutStream), epoch));

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size, ++batch_index) {
      const std::size_t count = std::min(config.batch_size, order.size() - first);
      const Batch b = make_batch(data, std::span<const std::size_t>(order).subspan(first, count));
      nn::Tape<float> tape;
      std::vector<nn::Var> bound;
      nn::Var pred;
      try {
        pred = net.forward(tape, b.images, b.image_of_row, b.features, true, &dropout_rng, &bound);
      } catch (const NumericError& e) {
        throw NumericError(fmt::format("epoch {} batch {}: {}", epoch, batch_index, e.what()));
      }
      const nn::Var loss = nn::mse_loss(tape, pred, tape.constant(b.targets));
      const double loss_value = tape.value(loss)[0];
      if (!std::isfinite(loss_value)) {
        throw NumericError(fmt::format("non-finite training loss at epoch {} batch {}", epoch, batch_index));
      }
      tape.backward(loss);
      net.collect_gradients(tape, bound);
      for (const auto& p : net.parameters()) {
        if (!p.grad.all_finite()) {
          throw NumericError(fmt::format("non-finite gradient for {} at epoch {} batch {}", p.name, epoch, batch_index));
        }
      }
      adam.step(param_ptrs, grad_ptrs);
      loss_sum += loss_value * static_cast<double>(count);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = loss_sum / static_cast<double>(order.size());
    rec.val_mse = evaluate_mse(net, data, val_rows);
    if (!std::isfinite(rec.val_mse)) throw NumericError(fmt::format("non-finite validation loss at epoch {}", epoch));
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.history.epochs.push_back(rec);

    const bool stop = stopper.observe(epoch, rec.val_mse);
    if (stopper.improved()) best_weights = net.weights();
    if (options.on_epoch) options.on_epoch(rec);
    if (stop) {
      result.history.stopped_early = true;
      break;
    }
  }

  result.history.best_epoch = stopper.best_epoch();
  result.history.best_val_mse = stopper.best_loss();
  auto& ck = result.checkpoint;
  ck.config = config;
  ck.input_scaler = data.input_scaler;
  ck.target_scaler = data.target_scaler;
  ck.mask = data.mask;
  ck.weights = std::move(best_weights);
  ck.best_val_mse = stopper.best_loss();
  ck.best_epoch = stopper.best_epoch();
  return result;
}

void write_curves(const std::filesystem::path& path, const TrainHistory& history) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,train_mse,val_mse\n";
  for (const auto& e : history.epochs) out << fmt::format("{},{:.17g},{:.17g}\n", e.epoch, e.train_mse, e.val_mse);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace illum::train
