#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "daylight/errors.hpp"
#include "daylight/nn/adam.hpp"
#include "daylight/nn/ops.hpp"
#include "daylight/synth/synthgen.hpp"
#include "daylight/train/sweep.hpp"
#include "daylight/train/trainer.hpp"
#include "support/temp_dir.hpp"

using namespace illum;
using namespace illum::train;

namespace {

// Two generated days at 16 px, prepared once for the whole binary.
struct Fixture {
  oracle::TempDir dir;
  dataset::Corpus corpus;
  dataset::SplitIndices splits;
  PreparedData data;
  std::vector<std::size_t> train_rows, val_rows;

  Fixture() {
    synth::SynthConfig cfg;
    cfg.image_size = 16;
    cfg.seed = 5;
    synth::generate_corpus(2, cfg, dir.path());
    corpus = dataset::load_corpus_dir(dir.path());
    splits = dataset::split(corpus.samples, 3, cfg.start_date + std::chrono::days(1));
    data = prepare_training_data(corpus, splits, 16);
    train_rows.assign(splits.train.begin(), splits.train.begin() + 160);
    val_rows.assign(splits.val.begin(), splits.val.begin() + 80);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

model::ModelConfig small_model() {
  model::ModelConfig c;
  c.cnn_channels = {4, 4, 8, 8};
  c.struct_embed_dim = 8;
  c.mlp_hidden = {16};
  c.image_size = 16;
  c.batch_size = 32;
  c.max_epochs = 6;
  c.seed = 21;
  c.lr = 0.003;
  return c;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(EarlyStopping, FrozenAfterEpochFive) {
  EarlyStopping es(12);
  std::size_t stopped_at = 0;
  for (std::size_t epoch = 0; epoch < 200; ++epoch) {
    const double val = epoch <= 5 ? 1.0 / static_cast<double>(epoch + 1) : 1.0 / 6.0;
    if (es.observe(epoch, val)) {
      stopped_at = epoch;
      break;
    }
  }
  EXPECT_EQ(stopped_at, 17u);
  EXPECT_EQ(es.best_epoch(), 5u);
}

TEST(EarlyStopping, StrictlyImprovingNeverStops) {
  EarlyStopping es(12);
  for (std::size_t epoch = 0; epoch < 200; ++epoch) {
    ASSERT_FALSE(es.observe(epoch, 100.0 - static_cast<double>(epoch)));
    EXPECT_TRUE(es.improved());
  }
  EXPECT_EQ(es.best_epoch(), 199u);
}

TEST(EarlyStopping, TiesKeepFirstAndWorseningCounts) {
  EarlyStopping es(3);
  EXPECT_FALSE(es.observe(0, 2.0));
  EXPECT_FALSE(es.observe(1, 1.0));
  EXPECT_FALSE(es.observe(2, 1.0));
  EXPECT_FALSE(es.improved());
  EXPECT_FALSE(es.observe(3, 5.0));
  EXPECT_TRUE(es.observe(4, 1.0));
  EXPECT_EQ(es.best_epoch(), 1u);
  EXPECT_EQ(es.best_loss(), 1.0);
}

TEST(Data, ScalersFitOnTrainOnly) {
  const auto& f = fixture();
  EXPECT_EQ(f.data.input_scaler.fitted_on, "train");
  std::vector<dataset::Sample> train;
  for (auto i : f.splits.train) train.push_back(f.corpus.samples[i]);
  const auto raw = raw_target_matrix(train);
  double mean = 0.0;
  for (std::size_t i = 0; i < train.size(); ++i) mean += raw.at({i, 1});
  mean /= static_cast<double>(train.size());
  EXPECT_NEAR(f.data.target_scaler.mean[1], mean, 1e-9 * std::abs(mean));
  EXPECT_EQ(f.data.images.dim(0), 2u * 109u);
  EXPECT_EQ(f.data.size(), f.corpus.samples.size());
}

TEST(Data, SplitValidation) {
  const auto& f = fixture();
  EXPECT_NO_THROW(validate_split(f.splits, f.corpus.samples.size()));
  auto overlap = f.splits;
  overlap.val.push_back(overlap.train.front());
  EXPECT_THROW(validate_split(overlap, f.corpus.samples.size()), DataError);
  auto missing = f.splits;
  missing.test1.pop_back();
  EXPECT_THROW(validate_split(missing, f.corpus.samples.size()), DataError);
  EXPECT_THROW(validate_split(f.splits, f.corpus.samples.size() + 1), DataError);
}

TEST(Data, BatchDeduplicatesImages) {
  const auto& f = fixture();
  // Rows 0..15 share one timestamp, hence one image.
  std::vector<std::size_t> rows(16);
  for (std::size_t i = 0; i < 16; ++i) rows[i] = i;
  const auto batch = make_batch(f.data, rows);
  EXPECT_EQ(batch.images.dim(0), 1u);
  EXPECT_EQ(batch.features.dim(0), 16u);
  for (auto r : batch.image_of_row) EXPECT_EQ(r, 0u);
}

TEST(Trainer, LossDescendsOverTenAdamSteps) {
  const auto& f = fixture();
  model::MultimodalNet<float> net(small_model());
  const std::vector<std::size_t> rows(f.train_rows.begin(), f.train_rows.begin() + 32);
  const auto batch = make_batch(f.data, rows);
  nn::Adam<float> adam(nn::AdamOptions{0.003});
  std::vector<double> losses;
  for (int step = 0; step < 10; ++step) {
    nn::Tape<float> tape;
    std::vector<nn::Var> bound;
    const auto out = net.forward(tape, batch.images, batch.image_of_row, batch.features, true, nullptr, &bound);
    const auto loss = nn::mse_loss(tape, out, tape.constant(batch.targets));
    losses.push_back(tape.value(loss)[0]);
    tape.backward(loss);
    net.collect_gradients(tape, bound);
    std::vector<nn::Tensor<float>*> params;
    std::vector<const nn::Tensor<float>*> grads;
    for (auto& p : net.parameters()) {
      params.push_back(&p.value);
      grads.push_back(&p.grad);
    }
    adam.step(params, grads);
  }
  EXPECT_LT(losses.back(), losses.front());
  EXPECT_LT(*std::max_element(losses.begin() + 5, losses.end()), losses.front());
}

TEST(Trainer, ValidationDoesNotTouchWeights) {
  const auto& f = fixture();
  model::ModelConfig c = small_model();
  c.dropout = 0.5;
  const model::MultimodalNet<float> net(c);
  const auto before = net.weights_hash();
  const double a = evaluate_mse(net, f.data, f.val_rows);
  const double b = evaluate_mse(net, f.data, f.val_rows);
  EXPECT_EQ(net.weights_hash(), before);
  EXPECT_EQ(a, b);
}

TEST(Trainer, EvaluateMseMatchesPredictions) {
  const auto& f = fixture();
  const model::MultimodalNet<float> net(small_model());
  const auto pred = predict_rows(net, f.data, f.val_rows);
  ASSERT_EQ(pred.shape(), (nn::Shape{f.val_rows.size(), 3}));
  double sum = 0.0;
  for (std::size_t i = 0; i < f.val_rows.size(); ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      const double d = static_cast<double>(pred.at({i, k})) - f.data.targets.at({f.val_rows[i], k});
      sum += d * d;
    }
  }
  EXPECT_NEAR(evaluate_mse(net, f.data, f.val_rows), sum / static_cast<double>(3 * f.val_rows.size()), 1e-6);
}

TEST(Trainer, CheckpointHoldsBestValidationWeights) {
  const auto& f = fixture();
  model::ModelConfig c = small_model();
  c.max_epochs = 8;
  std::size_t callbacks = 0;
  TrainOptions opts;
  opts.on_epoch = [&](const EpochRecord&) { ++callbacks; };
  const auto result = train::train(c, f.data, f.train_rows, f.val_rows, opts);
  const auto& h = result.history;
  ASSERT_EQ(h.epochs.size(), 8u);
  EXPECT_EQ(callbacks, 8u);
  std::size_t argmin = 0;
  for (std::size_t e = 1; e < h.epochs.size(); ++e)
    if (h.epochs[e].val_mse < h.epochs[argmin].val_mse) argmin = e;
  EXPECT_EQ(h.best_epoch, argmin);
  EXPECT_EQ(h.best_val_mse, h.epochs[argmin].val_mse);
  EXPECT_EQ(result.checkpoint.best_epoch, argmin);
  EXPECT_EQ(result.checkpoint.input_scaler, f.data.input_scaler);

  const auto net = result.checkpoint.instantiate();
  EXPECT_NEAR(evaluate_mse(net, f.data, f.val_rows), h.best_val_mse, 1e-9);
  EXPECT_LT(h.epochs.back().train_mse, h.epochs.front().train_mse);
}

TEST(Trainer, DeterministicAcrossRuns) {
  const auto& f = fixture();
  model::ModelConfig c = small_model();
  c.max_epochs = 3;
  c.dropout = 0.3;
  const auto a = train::train(c, f.data, f.train_rows, f.val_rows);
  const auto b = train::train(c, f.data, f.train_rows, f.val_rows);
  for (std::size_t e = 0; e < 3; ++e) EXPECT_EQ(a.history.epochs[e].val_mse, b.history.epochs[e].val_mse);
  EXPECT_EQ(a.checkpoint.serialize(), b.checkpoint.serialize());
}

TEST(Trainer, EarlyStopInvariant) {
  const auto& f = fixture();
  model::ModelConfig c = small_model();
  c.patience = 2;
  c.max_epochs = 60;
  c.lr = 0.05;
  const auto result = train::train(c, f.data, f.train_rows, f.val_rows);
  const auto& h = result.history;
  if (h.stopped_early) {
    EXPECT_EQ(h.last_epoch() - h.best_epoch, 2u);
  } else {
    EXPECT_EQ(h.last_epoch(), 59u);
  }
}

TEST(Trainer, RejectsBadInputs) {
  const auto& f = fixture();
  const std::vector<std::size_t> none;
  EXPECT_THROW(train::train(small_model(), f.data, none, f.val_rows), ConfigError);
  EXPECT_THROW(train::train(small_model(), f.data, f.train_rows, none), ConfigError);
  model::ModelConfig c = small_model();
  c.image_size = 32;
  EXPECT_THROW(train::train(c, f.data, f.train_rows, f.val_rows), ConfigError);
}

TEST(Trainer, CurvesCsv) {
  TrainHistory h;
  h.epochs = {{0, 0.5, 0.25, 1.0}, {1, 0.125, 0.1, 1.0}};
  oracle::TempDir dir;
  write_curves(dir.path() / "c.csv", h);
  const auto lines = lines_of(oracle::read_file(dir.path() / "c.csv"));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "epoch,train_mse,val_mse");
  EXPECT_EQ(lines[1], "0,0.5,0.25");
  EXPECT_EQ(lines[2].substr(0, 8), "1,0.125,");
  EXPECT_DOUBLE_EQ(std::stod(lines[2].substr(8)), 0.1);
}

TEST(Sweep, EntriesAndConfig) {
  const auto& entries = sweep_entries();
  ASSERT_EQ(entries.size(), 6u);
  EXPECT_EQ(entries[0].name, "A");
  EXPECT_EQ(entries[2].mlp_hidden, (std::vector<std::size_t>{128, 64, 32}));
  EXPECT_EQ(entries[2].dropout, 0.0);
  EXPECT_EQ(entries[5].dropout, 0.5);
  model::ModelConfig base = small_model();
  const auto c = sweep_config(base, entries[4]);
  EXPECT_EQ(c.name, "E");
  EXPECT_EQ(c.mlp_hidden, (std::vector<std::size_t>{256, 128, 64}));
  EXPECT_EQ(c.dropout, 0.3);
  EXPECT_EQ(c.cnn_channels, base.cnn_channels);
  EXPECT_EQ(c.seed, base.seed);
}

TEST(Sweep, RunsAllModelsAndWritesTable) {
  const auto& f = fixture();
  model::ModelConfig base = small_model();
  base.max_epochs = 2;
  oracle::TempDir dir;
  const auto rows = run_sweep(base, f.data, f.train_rows, f.val_rows, dir.path());
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    ASSERT_TRUE(r.val_mse.has_value());
    EXPECT_TRUE(r.val_r2.has_value());
    EXPECT_TRUE(std::filesystem::exists(dir.path() / ("curves_" + r.entry.name + ".csv")));
    EXPECT_TRUE(std::filesystem::exists(dir.path() / ("checkpoint_" + r.entry.name + ".dlnc")));
  }
  write_sweep_csv(dir.path() / "sweep.csv", rows);
  const auto lines = lines_of(oracle::read_file(dir.path() / "sweep.csv"));
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], "model,mlp,dropout,lr,val_mse,val_r2,best_epoch");
  EXPECT_EQ(lines[3].substr(0, 16), "C,128-64-32,0,0.");
  EXPECT_EQ(std::count(lines[6].begin(), lines[6].end(), ','), 6);
}

TEST(Sweep, FailedRunsAreRecorded) {
  const auto& f = fixture();
  model::ModelConfig base = small_model();
  base.image_size = 32;  // does not match the prepared data
  const auto rows = run_sweep(base, f.data, f.train_rows, f.val_rows, {});
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_FALSE(r.error.empty());
    EXPECT_FALSE(r.val_mse.has_value());
  }
  oracle::TempDir dir;
  write_sweep_csv(dir.path() / "sweep.csv", rows);
  const auto lines = lines_of(oracle::read_file(dir.path() / "sweep.csv"));
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[1], "A,64-32,0,0.001,,,");
}
