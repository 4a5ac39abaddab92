#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "daylight/model/config.hpp"
#include "daylight/train/trainer.hpp"

namespace illum::train {

struct SweepEntry {
  std::string name;
  std::vector<std::size_t> mlp_hidden;
  double dropout = 0.0;
  double lr = 0.001;
};

// Models A-F.
const std::vector<SweepEntry>& sweep_entries();

// `base` with the entry's head, dropout, learning rate and name applied.
model::ModelConfig sweep_config(const model::ModelConfig& base, const SweepEntry& entry);

struct SweepRow {
  SweepEntry entry;
  std::optional<double> val_mse;  // empty for a failed run
  std::optional<double> val_r2;   // mean over targets, standardized space
  std::optional<std::size_t> best_epoch;
  std::optional<std::size_t> last_epoch;
  bool stopped_early = false;
  std::string error;
};

// Trains every entry in turn, writing curves_<name>.csv and
// checkpoint_<name>.dlnc into `out_dir` (when non-empty). A failing run is
// recorded with its error and the sweep continues.
std::vector<SweepRow> run_sweep(const model::ModelConfig& base, const PreparedData& data,
                                std::span<const std::size_t> train_rows, std::span<const std::size_t> val_rows,
                                const std::filesystem::path& out_dir, const TrainOptions& options = {});

// Columns: model,mlp,dropout,lr,val_mse,val_r2,best_epoch.
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace illum::train
