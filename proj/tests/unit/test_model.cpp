#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "daylight/errors.hpp"
#include "daylight/model/checkpoint.hpp"
#include "daylight/model/config.hpp"
#include "daylight/model/network.hpp"
#include "daylight/nn/ops.hpp"
#include "support/temp_dir.hpp"

using namespace illum;
using namespace illum::model;
using nn::Tensor;

namespace {

ModelConfig model_c() {
  ModelConfig c;
  c.name = "C";
  c.mlp_hidden = {128, 64, 32};
  return c;
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.cnn_channels = {2, 2, 2, 2};
  c.struct_embed_dim = 3;
  c.mlp_hidden = {4};
  c.image_size = 16;
  c.seed = 9;
  return c;
}

template <typename T>
Tensor<T> random_tensor(nn::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

std::size_t param_index(const MultimodalNet<double>& net, const std::string& name) {
  const auto& ps = net.parameters();
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (ps[i].name == name) return i;
  throw std::runtime_error("no parameter " + name);
}

features::ScalerParams scaler(std::size_t k, double shift) {
  features::ScalerParams p;
  for (std::size_t i = 0; i < k; ++i) {
    p.mean.push_back(shift + static_cast<double>(i));
    p.std.push_back(1.5 + static_cast<double>(i));
  }
  p.fitted_on = "train";
  return p;
}

Checkpoint make_checkpoint() {
  Checkpoint ck;
  ck.config = tiny_config();
  ck.input_scaler = scaler(4, 0.25);
  ck.target_scaler = scaler(3, 100.0);
  ck.mask = features::WindowMask({{{0.1, 0.1}, {0.9, 0.1}, {0.9, 0.9}}});
  ck.weights = MultimodalNet<float>(ck.config).weights();
  ck.best_val_mse = 0.0123;
  ck.best_epoch = 7;
  return ck;
}

}  // namespace

TEST(ParamCount, HandCounts) {
  const auto report = count_params(model_c());
  ASSERT_FALSE(report.layers.empty());
  EXPECT_EQ(report.layers[0].layer, "cnn.conv1");
  EXPECT_EQ(report.layers[0].count, 16u * 1 * 9 + 16);
  std::size_t structured = 0;
  for (const auto& l : report.layers)
    if (l.layer == "struct.dense") structured = l.count;
  EXPECT_EQ(structured, 4u * 32 + 32);
  // 160*128+128 + 128*64+64 + 64*32+32 + 32*3+3
  EXPECT_EQ(report.head_total, 31043u);
  // conv: 160 + 4640 + 18496 + 73856
  EXPECT_EQ(report.total, 97152u + 160u + 31043u);
}

TEST(ParamCount, MatchesInstantiatedNetwork) {
  for (const auto& hidden : std::vector<std::vector<std::size_t>>{{64, 32}, {128, 64, 32}, {256, 128, 64}}) {
    ModelConfig c = model_c();
    c.mlp_hidden = hidden;
    const MultimodalNet<float> net(c);
    std::size_t n = 0;
    for (const auto& p : net.parameters()) n += p.value.numel();
    EXPECT_EQ(n, count_params(c).total);
  }
}

TEST(Network, ShapeTraceAt128) {
  const ModelConfig c = model_c();
  const MultimodalNet<float> net(c);
  Rng rng(1);
  const auto images = random_tensor<float>({1, 1, 128, 128}, rng, 0.0, 1.0);
  const auto feats = random_tensor<float>({2, 4}, rng);
  const std::vector<std::size_t> rows{0, 0};
  nn::Tape<float> tape;
  ShapeTrace trace;
  const auto out = net.forward(tape, images, rows, feats, false, nullptr, nullptr, &trace);
  std::map<std::string, nn::Shape> shapes(trace.begin(), trace.end());
  EXPECT_EQ(shapes.at("cnn.conv1.pool"), (nn::Shape{1, 16, 64, 64}));
  EXPECT_EQ(shapes.at("cnn.conv2.pool"), (nn::Shape{1, 32, 32, 32}));
  EXPECT_EQ(shapes.at("cnn.conv3.pool"), (nn::Shape{1, 64, 16, 16}));
  EXPECT_EQ(shapes.at("cnn.conv4.pool"), (nn::Shape{1, 128, 8, 8}));
  EXPECT_EQ(shapes.at("cnn.embedding"), (nn::Shape{1, 128}));
  EXPECT_EQ(shapes.at("struct.embedding"), (nn::Shape{2, 32}));
  EXPECT_EQ(shapes.at("fusion"), (nn::Shape{2, 160}));
  EXPECT_EQ(tape.value(out).shape(), (nn::Shape{2, 3}));
  EXPECT_EQ(c.fused_dim(), 160u);
}

TEST(Network, SameSeedSameWeights) {
  const MultimodalNet<float> a(tiny_config()), b(tiny_config());
  EXPECT_EQ(a.weights_hash(), b.weights_hash());
  ModelConfig other = tiny_config();
  other.seed = 10;
  EXPECT_NE(MultimodalNet<float>(other).weights_hash(), a.weights_hash());
  for (const auto& p : a.parameters())
    if (p.value.rank() == 1)
      for (float v : p.value.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Network, KaimingBound) {
  const MultimodalNet<double> net(model_c());
  for (const auto& p : net.parameters()) {
    if (p.value.rank() < 2) continue;
    std::size_t fan_in = 1;
    for (std::size_t i = 1; i < p.value.rank(); ++i) fan_in *= p.value.dim(i);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double v : p.value.values()) ASSERT_LE(std::abs(v), bound) << p.name;
  }
}

TEST(Network, IdenticalSamplesGiveIdenticalRows) {
  const MultimodalNet<float> net(tiny_config());
  Rng rng(2);
  const auto img = random_tensor<float>({1, 1, 16, 16}, rng, 0.0, 1.0);
  Tensor<float> images({2, 1, 16, 16});
  std::copy(img.values().begin(), img.values().end(), images.values().begin());
  std::copy(img.values().begin(), img.values().end(), images.values().begin() + 256);
  Tensor<float> feats({2, 4}, {0.1f, -0.2f, 0.3f, 0.4f, 0.1f, -0.2f, 0.3f, 0.4f});
  const std::vector<std::size_t> rows{0, 1};
  const auto out = net.predict(images, rows, feats);
  ASSERT_EQ(out.shape(), (nn::Shape{2, 3}));
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(out[k], out[3 + k]);
}

TEST(Network, EvalIsBitwiseDeterministic) {
  ModelConfig c = tiny_config();
  c.dropout = 0.5;
  const MultimodalNet<float> net(c);
  Rng rng(3);
  const auto images = random_tensor<float>({3, 1, 16, 16}, rng, 0.0, 1.0);
  const auto feats = random_tensor<float>({5, 4}, rng);
  const std::vector<std::size_t> rows{0, 1, 2, 1, 0};
  EXPECT_EQ(net.predict(images, rows, feats), net.predict(images, rows, feats));
}

TEST(Network, ZeroWeightsZeroOutput) {
  MultimodalNet<float> net(tiny_config());
  auto w = net.weights();
  for (auto& [name, t] : w) t.fill(0.0f);
  net.set_weights(w);
  const Tensor<float> images({1, 1, 16, 16});
  const Tensor<float> feats({1, 4});
  const std::vector<std::size_t> rows{0};
  const auto out = net.predict(images, rows, feats);
  for (float v : out.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Network, ShapeErrors) {
  const MultimodalNet<float> net(tiny_config());
  const Tensor<float> images({1, 1, 16, 16});
  const std::vector<std::size_t> rows{0};
  EXPECT_THROW(net.predict(images, rows, Tensor<float>({1, 5})), DimensionError);
  EXPECT_THROW(net.predict(Tensor<float>({1, 1, 32, 32}), rows, Tensor<float>({1, 4})), DimensionError);
  const std::vector<std::size_t> two{0, 0};
  EXPECT_THROW(net.predict(images, two, Tensor<float>({1, 4})), DimensionError);
}

TEST(Network, NanActivationNamesLayer) {
  MultimodalNet<float> net(tiny_config());
  auto w = net.weights();
  w[0].second[0] = std::nanf("");
  net.set_weights(w);
  try {
    net.predict(Tensor<float>({1, 1, 16, 16}, 0.5f), std::vector<std::size_t>{0}, Tensor<float>({1, 4}));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("cnn.conv1"), std::string::npos);
  }
}

TEST(Network, WeightAdoptionChecksNamesAndShapes) {
  const MultimodalNet<float> net(tiny_config());
  auto w = net.weights();
  EXPECT_NO_THROW(MultimodalNet<float>(tiny_config(), w));
  auto renamed = w;
  renamed[1].first = "cnn.conv1.other";
  EXPECT_THROW(MultimodalNet<float>(tiny_config(), renamed), DimensionError);
  auto reshaped = w;
  reshaped[1].second = Tensor<float>({3});
  EXPECT_THROW(MultimodalNet<float>(tiny_config(), reshaped), DimensionError);
}

// Central differences of the full model's MSE on sampled parameters.
TEST(Network, FullModelGradientCheck) {
  MultimodalNet<double> net(tiny_config());
  Rng rng(17);
  const auto images = random_tensor<double>({2, 1, 16, 16}, rng, 0.0, 1.0);
  const auto feats = random_tensor<double>({3, 4}, rng);
  const auto target = random_tensor<double>({3, 3}, rng);
  const std::vector<std::size_t> rows{0, 1, 1};

  auto loss_of = [&](const MultimodalNet<double>& m) {
    const auto pred = m.predict(images, rows, feats);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) s += (pred[i] - target[i]) * (pred[i] - target[i]);
    return s / static_cast<double>(pred.numel());
  };

  nn::Tape<double> tape;
  std::vector<nn::Var> bound;
  const auto out = net.forward(tape, images, rows, feats, false, nullptr, &bound);
  tape.backward(nn::mse_loss(tape, out, tape.constant(target)));
  net.collect_gradients(tape, bound);

  const std::vector<std::string> names{"cnn.conv1.weight", "cnn.conv2.weight", "cnn.conv3.bias", "cnn.conv4.weight",
                                       "struct.dense.weight", "struct.dense.bias", "head.dense1.weight",
                                       "head.out.weight", "head.out.bias"};
  std::size_t checked = 0;
  for (const auto& name : names) {
    const std::size_t pi = param_index(net, name);
    for (int rep = 0; rep < 2; ++rep) {
      const std::size_t j = rng.below(net.parameters()[pi].value.numel());
      const double analytic = net.parameters()[pi].grad[j];
      const double h = 1e-6;
      const double orig = net.parameters()[pi].value[j];
      net.parameters()[pi].value[j] = orig + h;
      const double up = loss_of(net);
      net.parameters()[pi].value[j] = orig - h;
      const double down = loss_of(net);
      net.parameters()[pi].value[j] = orig;
      const double numeric = (up - down) / (2 * h);
      const double rel = std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-8);
      EXPECT_LT(rel, 1e-4) << name << "[" << j << "] analytic " << analytic << " numeric " << numeric;
      ++checked;
    }
  }
  EXPECT_GE(checked, 8u);
}

TEST(Config, JsonRoundTripAndRejection) {
  ModelConfig c = model_c();
  c.dropout = 0.3;
  c.seed = 77;
  EXPECT_EQ(ModelConfig::from_json(c.to_json()), c);

  const auto partial = ModelConfig::from_json({{"mlp_hidden", {64, 32}}});
  EXPECT_EQ(partial.mlp_hidden, (std::vector<std::size_t>{64, 32}));
  EXPECT_EQ(partial.cnn_channels, (std::vector<std::size_t>{16, 32, 64, 128}));
  EXPECT_EQ(partial.lr, 0.001);

  EXPECT_THROW(ModelConfig::from_json({{"mlp_hiden", {64}}}), ConfigError);
  EXPECT_THROW(ModelConfig::from_json({{"mlp_hidden", nlohmann::json::array()}}), ConfigError);
  EXPECT_THROW(ModelConfig::from_json({{"dropout", 1.0}}), ConfigError);
  EXPECT_THROW(ModelConfig::from_json({{"image_size", 100}}), ConfigError);
  EXPECT_THROW(ModelConfig::from_json({{"cnn_channels", {16, 32, 64}}}), ConfigError);
  EXPECT_THROW(ModelConfig::from_json({{"lr", "fast"}}), ConfigError);
}

TEST(CheckpointFile, ByteRoundTrip) {
  const Checkpoint ck = make_checkpoint();
  const auto bytes = ck.serialize();
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DLNC");
  const auto back = Checkpoint::deserialize(bytes);
  EXPECT_EQ(back.serialize(), bytes);
  EXPECT_EQ(back.config, ck.config);
  EXPECT_EQ(back.input_scaler, ck.input_scaler);
  EXPECT_EQ(back.target_scaler, ck.target_scaler);
  EXPECT_EQ(back.best_epoch, 7u);
  EXPECT_EQ(back.best_val_mse, 0.0123);
  ASSERT_TRUE(back.mask.has_value());
  EXPECT_EQ(back.mask->polygons(), ck.mask->polygons());
  ASSERT_EQ(back.weights.size(), ck.weights.size());
  for (std::size_t i = 0; i < ck.weights.size(); ++i) EXPECT_EQ(back.weights[i], ck.weights[i]);

  oracle::TempDir dir;
  ck.save(dir.path() / "a.dlnc");
  Checkpoint::load(dir.path() / "a.dlnc").save(dir.path() / "b.dlnc");
  EXPECT_EQ(oracle::read_file(dir.path() / "a.dlnc"), oracle::read_file(dir.path() / "b.dlnc"));
}

TEST(CheckpointFile, InstantiatedNetworkMatches) {
  const Checkpoint ck = make_checkpoint();
  const auto net = Checkpoint::deserialize(ck.serialize()).instantiate();
  EXPECT_EQ(net.weights_hash(), MultimodalNet<float>(ck.config, ck.weights).weights_hash());
}

TEST(CheckpointFile, CorruptionDetected) {
  const auto bytes = make_checkpoint().serialize();
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(Checkpoint::deserialize(bad_magic), DataError);
  auto bad_version = bytes;
  bad_version[4] = 99;
  EXPECT_THROW(Checkpoint::deserialize(bad_version), DataError);
  EXPECT_THROW(Checkpoint::deserialize(std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 4)), DataError);
  EXPECT_THROW(Checkpoint::deserialize(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 20)), DataError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(Checkpoint::deserialize(trailing), DataError);
  EXPECT_THROW(Checkpoint::deserialize({}), DataError);
}

TEST(CheckpointFile, MissingFile) {
  EXPECT_THROW(Checkpoint::load("/nonexistent/x.dlnc"), DataError);
}
