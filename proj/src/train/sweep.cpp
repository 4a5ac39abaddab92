#include "daylight/train/sweep.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <fstream>
#include <iostream>

#include "daylight/errors.hpp"
#include "daylight/eval/metrics.hpp"

namespace illum::train {

const std::vector<SweepEntry>& sweep_entries() {
  static const std::vector<SweepEntry> entries{
      {"A", {64, 32}, 0.0, 0.001},       {"B", {64, 32}, 0.3, 0.001},       {"C", {128, 64, 32}, 0.0, 0.001},
      {"D", {128, 64, 32}, 0.3, 0.001},  {"E", {256, 128, 64}, 0.3, 0.001}, {"F", {256, 128, 64}, 0.5, 0.001},
  };
  return entries;
}

model::ModelConfig sweep_config(const model::ModelConfig& base, const SweepEntry& entry) {
  model::ModelConfig c = base;
  c.name = entry.name;
  c.mlp_hidden = entry.mlp_hidden;
  c.dropout = entry.dropout;
  c.lr = entry.lr;
  return c;
}

std::vector<SweepRow> run_sweep(const model::ModelConfig& base, const PreparedData& data,
                                std::span<const std::size_t> train_rows, std::span<const std::size_t> val_rows,
                                const std::filesystem::path& out_dir, const TrainOptions& options) {
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  std::vector<SweepRow> rows;
  for (const auto& entry : sweep_entries()) {
    SweepRow row;
    row.entry = entry;
    std::cerr << fmt::format("model {}: mlp [{}], dropout {}\n", entry.name, fmt::join(entry.mlp_hidden, ", "),
                             entry.dropout);
    try {
      const auto config = sweep_config(base, entry);
      const auto result = train(config, data, train_rows, val_rows, options);
      row.val_mse = result.history.best_val_mse;
      row.best_epoch = result.history.best_epoch;
      row.last_epoch = result.history.last_epoch();
      row.stopped_early = result.history.stopped_early;

      const auto net = result.checkpoint.instantiate();
      const auto pred = nn::tensor_cast<double>(predict_rows(net, data, val_rows));
      nn::Tensor<double> truth(pred.shape());
      const std::size_t K = model::kOutputs;
      for (std::size_t i = 0; i < val_rows.size(); ++i) {
        for (std::size_t k = 0; k < K; ++k) truth[i * K + k] = data.targets[val_rows[i] * K + k];
      }
      double r2_sum = 0.0;
      for (const auto& m : eval::compute_metrics(truth, pred)) {
        if (!m.r2) throw DataError("validation targets have zero variance");
        r2_sum += *m.r2;
      }
      row.val_r2 = r2_sum / static_cast<double>(K);

      if (!out_dir.empty()) {
        write_curves(out_dir / fmt::format("curves_{}.csv", entry.name), result.history);
        result.checkpoint.save(out_dir / fmt::format("checkpoint_{}.dlnc", entry.name));
      }
    } catch (const Error& e) {
      row.val_mse.reset();
      row.val_r2.reset();
      row.best_epoch.reset();
      row.error = e.what();
      std::cerr << fmt::format("warning: model {} failed: {}\n", entry.name, e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "model,mlp,dropout,lr,val_mse,val_r2,best_epoch\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},", r.entry.name, fmt::join(r.entry.mlp_hidden, "-"), r.entry.dropout, r.entry.lr);
    out << (r.val_mse ? fmt::format("{:.17g}", *r.val_mse) : "") << ',';
    out << (r.val_r2 ? fmt::format("{:.17g}", *r.val_r2) : "") << ',';
    out << (r.best_epoch ? fmt::format("{}", *r.best_epoch) : "") << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace illum::train
