#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "daylight/model/checkpoint.hpp"
#include "daylight/model/network.hpp"
#include "daylight/train/data.hpp"

namespace illum::train {

struct EpochRecord {
  std::size_t epoch = 0;  // zero-based
  double train_mse = 0.0;
  double val_mse = 0.0;
  double wall_seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_mse = std::numeric_limits<double>::infinity();
  bool stopped_early = false;

  std::size_t last_epoch() const { return epochs.empty() ? 0 : epochs.back().epoch; }
};

// Patience-based stopping on strictly improving validation loss (no minimum
// delta). Ties keep the earlier epoch.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Returns true when training should stop after this epoch.
  bool observe(std::size_t epoch, double val_loss);
  bool improved() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

 private:
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  bool improved_ = false;
};

struct TrainOptions {
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  model::Checkpoint checkpoint;
  TrainHistory history;
};

// Mean squared error over all rows in eval mode (single pass, no dropout).
double evaluate_mse(const model::MultimodalNet<float>& net, const PreparedData& data, std::span<const std::size_t> rows);

// Standardized predictions [rows, 3] in eval mode.
nn::Tensor<float> predict_rows(const model::MultimodalNet<float>& net, const PreparedData& data,
                               std::span<const std::size_t> rows);

// Adam on MSE with per-epoch seeded shuffles, full validation after every
// epoch, best-weight retention and early stopping. The returned checkpoint
// holds the best-validation weights and the data's scalers and mask.
// Throws ConfigError on empty splits and NumericError on a non-finite loss.
TrainResult train(const model::ModelConfig& config, const PreparedData& data, std::span<const std::size_t> train_rows,
                  std::span<const std::size_t> val_rows, const TrainOptions& options = {});

// Writes `epoch,train_mse,val_mse`.
void write_curves(const std::filesystem::path& path, const TrainHistory& history);

}  // namespace illum::train
