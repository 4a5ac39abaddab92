#include "daylight/cli/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <optional>

#include "daylight/dataset/corpus.hpp"
#include "daylight/dataset/split.hpp"
#include "daylight/errors.hpp"
#include "daylight/eval/report.hpp"
#include "daylight/features/feature_vector.hpp"
#include "daylight/features/image.hpp"
#include "daylight/features/preprocess.hpp"
#include "daylight/model/checkpoint.hpp"
#include "daylight/synth/synthgen.hpp"
#include "daylight/train/data.hpp"
#include "daylight/train/sweep.hpp"
#include "daylight/train/trainer.hpp"

#ifndef DAYLIGHT_VERSION
#define DAYLIGHT_VERSION "0.0.0"
#endif

namespace illum::cli {

namespace fs = std::filesystem;

nlohmann::json RunManifest::to_json() const {
  return {{"command", command}, {"config", config},   {"seeds", seeds},
          {"inputs", inputs},   {"outputs", outputs}, {"version", version()},
          {"wall_time_seconds", wall_time_seconds}};
}

void RunManifest::save(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

const char* version() { return DAYLIGHT_VERSION; }

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void configure_threads() {
  const char* env = std::getenv("DAYLIGHT_NET_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError(fmt::format("DAYLIGHT_NET_THREADS must be a positive integer, got '{}'", env));
  Eigen::setNbThreads(static_cast<int>(n));
}

void log_epoch(std::ostream& err, const std::string& name, const train::EpochRecord& r) {
  err << fmt::format("[{}] epoch {:3d}  train {:.6f}  val {:.6f}  ({:.1f}s)\n", name, r.epoch, r.train_mse, r.val_mse,
                     r.wall_seconds);
}

// Native square resolution of the corpus images when it is a usable model
// input size below the default, otherwise the default.
std::size_t sweep_image_size(const dataset::Corpus& corpus) {
  if (corpus.samples.empty()) return features::kDefaultImageSize;
  const auto img = features::read_image(corpus.image_dir / corpus.samples.front().image_ref);
  const std::size_t s = img.width;
  if (img.height == s && s >= 16 && s % 16 == 0 && s < features::kDefaultImageSize) return s;
  return features::kDefaultImageSize;
}

struct Options {
  // synth
  std::size_t days = 0;
  std::uint64_t seed = 0;
  std::string out;
  bool clear_sky = false;
  std::size_t image_size = features::kDefaultImageSize;
  // split / train / sweep / eval
  std::string data;
  std::string holdout_day;
  std::string splits;
  std::string config;
  bool smoke = false;
  std::string checkpoint;
  std::string set;
  // predict
  std::string image;
  std::string time;
  double x = 0.0;
  double d = 0.0;
};

int cmd_synth(const Options& o, std::ostream& out) {
  const auto t0 = Clock::now();
  synth::SynthConfig cfg;
  cfg.seed = o.seed;
  cfg.clear_sky = o.clear_sky;
  cfg.image_size = o.image_size;
  const auto summary = synth::generate_corpus(o.days, cfg, o.out);
  RunManifest m;
  m.command = "synth";
  m.config = cfg.to_json();
  m.config["days"] = o.days;
  m.seeds["seed"] = o.seed;
  m.outputs["dir"] = o.out;
  m.outputs["samples"] = (fs::path(o.out) / "samples.csv").string();
  m.wall_time_seconds = seconds_since(t0);
  m.save(fs::path(o.out) / "manifest.json");
  out << fmt::format("wrote {} rows and {} images ({} to {}) to {}\n", summary.rows, summary.images,
                     features::format_date(summary.first_day), features::format_date(summary.last_day), o.out);
  return kExitOk;
}

int cmd_split(const Options& o, std::ostream& out) {
  const auto t0 = Clock::now();
  const auto corpus = dataset::load_corpus_dir(o.data);
  const auto holdout = features::parse_date(o.holdout_day);
  const auto s = dataset::split(corpus.samples, o.seed, holdout);
  s.save(o.out);
  RunManifest m;
  m.command = "split";
  m.config = {{"holdout_day", o.holdout_day}, {"samples", corpus.samples.size()}};
  m.seeds["seed"] = o.seed;
  m.inputs["data"] = o.data;
  m.outputs["splits"] = o.out;
  m.wall_time_seconds = seconds_since(t0);
  fs::path mpath = o.out;
  mpath.replace_extension(".manifest.json");
  m.save(mpath);
  out << fmt::format("train {} / val {} / test1 {} / test2 {} -> {}\n", s.train.size(), s.val.size(), s.test1.size(),
                     s.test2.size(), o.out);
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  const auto config = model::ModelConfig::load(o.config);
  config.validate();
  const auto corpus = dataset::load_corpus_dir(o.data);
  const auto splits = dataset::SplitIndices::load(o.splits);
  const auto data = train::prepare_training_data(corpus, splits, config.image_size);
  train::TrainOptions opts;
  opts.on_epoch = [&](const train::EpochRecord& r) { log_epoch(err, config.name, r); };
  const auto result = train::train(config, data, splits.train, splits.val, opts);

  fs::create_directories(o.out);
  const fs::path ckpt = fs::path(o.out) / "checkpoint.dlnc";
  const fs::path curves = fs::path(o.out) / fmt::format("curves_{}.csv", config.name);
  result.checkpoint.save(ckpt);
  train::write_curves(curves, result.history);

  RunManifest m;
  m.command = "train";
  m.config = config.to_json();
  m.seeds["model"] = config.seed;
  m.seeds["split"] = splits.seed;
  m.inputs = {{"data", o.data}, {"splits", o.splits}, {"config", o.config}};
  m.outputs = {{"checkpoint", ckpt.string()}, {"curves", curves.string()}};
  m.wall_time_seconds = seconds_since(t0);
  m.save(fs::path(o.out) / "manifest.json");
  out << fmt::format("best epoch {} (val MSE {:.6f}), {} epochs{} -> {}\n", result.history.best_epoch,
                     result.history.best_val_mse, result.history.epochs.size(),
                     result.history.stopped_early ? ", stopped early" : "", ckpt.string());
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  const auto corpus = dataset::load_corpus_dir(o.data);
  const auto splits = dataset::SplitIndices::load(o.splits);
  model::ModelConfig base;
  base.image_size = sweep_image_size(corpus);
  if (o.smoke) base.max_epochs = 20;
  const auto data = train::prepare_training_data(corpus, splits, base.image_size);
  train::TrainOptions opts;
  opts.on_epoch = [&](const train::EpochRecord& r) { log_epoch(err, "sweep", r); };
  const auto rows = train::run_sweep(base, data, splits.train, splits.val, o.out, opts);
  const fs::path table = fs::path(o.out) / "sweep.csv";
  train::write_sweep_csv(table, rows);

  RunManifest m;
  m.command = "sweep";
  m.config = base.to_json();
  m.config["smoke"] = o.smoke;
  m.config["models"] = nlohmann::json::array();
  for (const auto& e : train::sweep_entries()) m.config["models"].push_back(train::sweep_config(base, e).to_json());
  m.seeds["model"] = base.seed;
  m.seeds["split"] = splits.seed;
  m.inputs = {{"data", o.data}, {"splits", o.splits}};
  m.outputs = {{"dir", o.out}, {"summary", table.string()}};
  m.wall_time_seconds = seconds_since(t0);
  m.save(fs::path(o.out) / "manifest.json");

  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (r.val_mse) {
      out << fmt::format("model {}: val MSE {:.6f}, val R2 {:.4f}, best epoch {}\n", r.entry.name, *r.val_mse, *r.val_r2,
                         *r.best_epoch);
    } else {
      ++failed;
      out << fmt::format("model {}: failed: {}\n", r.entry.name, r.error);
    }
  }
  return failed == 0 ? kExitOk : kExitData;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto t0 = Clock::now();
  const auto checkpoint = model::Checkpoint::load(o.checkpoint);
  const auto corpus = dataset::load_corpus_dir(o.data);
  const auto splits = dataset::SplitIndices::load(o.splits);
  train::validate_split(splits, corpus.samples.size());
  const auto ev = eval::evaluate(checkpoint, corpus, splits.named(o.set), o.set);
  eval::write_exports(o.out, ev, corpus.samples);

  RunManifest m;
  m.command = "eval";
  m.config = checkpoint.config.to_json();
  m.config["set"] = o.set;
  m.seeds["model"] = checkpoint.config.seed;
  m.seeds["split"] = splits.seed;
  m.inputs = {{"checkpoint", o.checkpoint}, {"data", o.data}, {"splits", o.splits}};
  m.outputs = {{"dir", o.out}, {"report", (fs::path(o.out) / "report.json").string()}};
  m.wall_time_seconds = seconds_since(t0);
  m.save(fs::path(o.out) / "manifest.json");

  out << fmt::format("{} ({} samples)\n", o.set, ev.report.count);
  for (std::size_t k = 0; k < dataset::kTargetCount; ++k) {
    const auto& lux = ev.report.lux[k];
    const auto& st = ev.report.standardized[k];
    out << fmt::format("  {}: R2 {:.4f}  MAE {:.2f} lux  RMSE {:.2f} lux  (standardized RMSE {:.4f})\n",
                       dataset::kTargetNames[k], lux.r2.value_or(std::nan("")), lux.mae, lux.rmse, st.rmse);
  }
  return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const auto checkpoint = model::Checkpoint::load(o.checkpoint);
  const int minute = features::parse_clock(o.time);
  const features::Timestamp ts{std::chrono::sys_days{}, minute};
  const auto fv = features::build_feature_vector(ts, o.x, o.d).as_array();
  const auto scaled = features::apply_scaler(std::span<const double>(fv.data(), fv.size()), checkpoint.input_scaler,
                                             features::ScaleDirection::forward);

  const auto mask = checkpoint.mask.value_or(features::WindowMask::full_frame());
  const auto image = features::preprocess_image(features::read_image(o.image), mask, checkpoint.config.image_size);
  const std::size_t S = checkpoint.config.image_size;
  nn::Tensor<float> images(nn::Shape{1, 1, S, S}, std::vector<float>(image.values().begin(), image.values().end()));
  nn::Tensor<float> feats(nn::Shape{1, scaled.size()});
  for (std::size_t i = 0; i < scaled.size(); ++i) feats[i] = static_cast<float>(scaled[i]);

  const auto net = checkpoint.instantiate();
  const std::size_t row_image = 0;
  const auto pred = net.predict(images, std::span<const std::size_t>(&row_image, 1), feats);
  std::vector<double> std_out(pred.values().begin(), pred.values().end());
  const auto lux = features::apply_scaler(std::span<const double>(std_out), checkpoint.target_scaler,
                                          features::ScaleDirection::inverse);
  out << "Eh,Es,Ee\n" << fmt::format("{:.3f},{:.3f},{:.3f}\n", lux[0], lux[1], lux[2]);
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Daylight illuminance prediction from window images", "daylight"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--days", o.days, "Number of days")->required()->check(CLI::PositiveNumber);
  synth->add_option("--seed", o.seed, "Generator seed")->required();
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_flag("--clear-sky", o.clear_sky, "Disable cloud modulation");
  synth->add_option("--image-size", o.image_size, "Rendered image side in pixels")->check(CLI::PositiveNumber);

  auto* split = app.add_subcommand("split", "Split a corpus into train/val/test1/test2");
  split->add_option("--data", o.data, "Corpus directory")->required();
  split->add_option("--seed", o.seed, "Split seed")->required();
  split->add_option("--holdout-day", o.holdout_day, "Test2 day (YYYY-MM-DD)")->required();
  split->add_option("--out", o.out, "Split file")->required();

  auto* train = app.add_subcommand("train", "Train one model");
  train->add_option("--data", o.data, "Corpus directory")->required();
  train->add_option("--splits", o.splits, "Split file")->required();
  train->add_option("--config", o.config, "Model config JSON")->required();
  train->add_option("--out", o.out, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Train the six candidate models");
  sweep->add_option("--data", o.data, "Corpus directory")->required();
  sweep->add_option("--splits", o.splits, "Split file")->required();
  sweep->add_option("--out", o.out, "Output directory")->required();
  sweep->add_flag("--smoke", o.smoke, "Cap every run at 20 epochs");

  auto* evaluate = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  evaluate->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  evaluate->add_option("--data", o.data, "Corpus directory")->required();
  evaluate->add_option("--splits", o.splits, "Split file")->required();
  evaluate->add_option("--set", o.set, "Split to evaluate")->required()->check(CLI::IsMember({"test1", "test2", "val"}));
  evaluate->add_option("--out", o.out, "Output directory")->required();

  auto* predict = app.add_subcommand("predict", "Predict illuminance for one image and position");
  predict->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  predict->add_option("--image", o.image, "Window image")->required();
  predict->add_option("--time", o.time, "Clock time (HH:MM)")->required();
  predict->add_option("--x", o.x, "Distance from the west wall (m)")->required();
  predict->add_option("--d", o.d, "Distance from the window (m)")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    configure_threads();
    if (synth->parsed()) return cmd_synth(o, out);
    if (split->parsed()) return cmd_split(o, out);
    if (train->parsed()) return cmd_train(o, out, err);
    if (sweep->parsed()) return cmd_sweep(o, out, err);
    if (evaluate->parsed()) return cmd_eval(o, out);
    if (predict->parsed()) return cmd_predict(o, out);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, out, err);
}

}  // namespace illum::cli
