#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "daylight/dataset/corpus.hpp"
#include "daylight/errors.hpp"
#include "daylight/features/image.hpp"
#include "daylight/features/timestamp.hpp"
#include "daylight/synth/synthgen.hpp"
#include "support/temp_dir.hpp"

using namespace illum;
using namespace illum::synth;

namespace {

// Reference formulas written out longhand with the default constants.
struct RefLux {
  double eh, es, ee;
};

RefLux reference_lux(double t, double x, double d, double c) {
  double s = 0.0;
  if (t > 360.0 && t < 1080.0) s = std::sin(std::numbers::pi * (t - 360.0) / 720.0);
  const double a = 1.0 / ((1.0 + 0.6 * d) * (1.0 + 0.6 * d));
  const double g = 1.0 - 0.03 * x;
  const double ge = 1.0 - 0.03 * (8.9 - x);
  return {0.45 * 2000.0 * s * c * a * g, 2000.0 * std::pow(s, 1.2) * c * a * g,
          0.35 * 2000.0 * std::pow(s, 1.1) * c * a * ge};
}

SynthConfig small_config(std::size_t image_size = 16) {
  SynthConfig cfg;
  cfg.image_size = image_size;
  cfg.seed = 11;
  return cfg;
}

double window_mean(const features::Image8& img) {
  const auto mask = window_mask().raster(img.width, img.height);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      sum += img.pixels[i];
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

}  // namespace

TEST(SunFactor, Examples) {
  const SynthConfig cfg;
  EXPECT_DOUBLE_EQ(sun_factor(360, cfg), 0.0);
  EXPECT_DOUBLE_EQ(sun_factor(720, cfg), 1.0);
  EXPECT_NEAR(sun_factor(540, cfg), std::sqrt(0.5), 1e-12);
  EXPECT_DOUBLE_EQ(sun_factor(1080, cfg), 0.0);
  EXPECT_DOUBLE_EQ(sun_factor(100, cfg), 0.0);
  EXPECT_DOUBLE_EQ(sun_factor(1300, cfg), 0.0);
}

TEST(CloudFactor, ClearSkyAndBounds) {
  SynthConfig cfg;
  const auto date = cfg.start_date;
  const auto phases = day_cloud_phases(cfg, date);
  const auto again = day_cloud_phases(cfg, date);
  EXPECT_EQ(phases.phi1, again.phi1);
  EXPECT_EQ(phases.phi2, again.phi2);
  double lo = 2.0, hi = -1.0;
  for (int t = 0; t < 1440; ++t) {
    const double c = cloud_factor(t, phases, cfg);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  EXPECT_GE(lo, 0.3);
  EXPECT_LE(hi, 1.0);
  EXPECT_LT(lo, hi);

  cfg.clear_sky = true;
  for (int t = 0; t < 1440; t += 7) EXPECT_EQ(cloud_factor(t, phases, cfg), 1.0);
}

TEST(CloudFactor, PhasesDifferAcrossDays) {
  const SynthConfig cfg;
  const auto a = day_cloud_phases(cfg, cfg.start_date);
  const auto b = day_cloud_phases(cfg, cfg.start_date + std::chrono::days(1));
  EXPECT_NE(a.phi1, b.phi1);
}

TEST(OracleIlluminance, NoonSensor13) {
  const SynthConfig cfg;
  const auto lux = oracle_illuminance(720, 5.8, 6.0, 1.0, cfg);
  // 2000 * 0.826 / 21.16
  EXPECT_NEAR(lux[1], 78.0718336, 1e-6);
  const auto ref = reference_lux(720, 5.8, 6.0, 1.0);
  EXPECT_NEAR(lux[0], ref.eh, 1e-9);
  EXPECT_NEAR(lux[1], ref.es, 1e-9);
  EXPECT_NEAR(lux[2], ref.ee, 1e-9);
}

TEST(OracleIlluminance, BeforeSunriseIsDark) {
  const SynthConfig cfg;
  const auto lux = oracle_illuminance(300, 2.8, 3.0, 1.0, cfg);
  EXPECT_EQ(lux[0], 0.0);
  EXPECT_EQ(lux[1], 0.0);
  EXPECT_EQ(lux[2], 0.0);
}

TEST(OracleIlluminance, DecaysWithDepth) {
  const SynthConfig cfg;
  for (double t : {500.0, 720.0, 1000.0}) {
    double prev = 1e300;
    for (double d : {1.5, 3.0, 4.5, 6.0}) {
      const double es = oracle_illuminance(t, 2.8, d, 0.7, cfg)[1];
      EXPECT_LT(es, prev);
      prev = es;
    }
  }
}

TEST(OracleIlluminance, MatchesReferenceOverGrid) {
  const SynthConfig cfg;
  for (int t = 480; t <= 1020; t += 35) {
    for (double x : cfg.sensor_x) {
      for (double d : cfg.sensor_d) {
        for (double c : {0.3, 0.61, 1.0}) {
          const auto lux = oracle_illuminance(t, x, d, c, cfg);
          const auto ref = reference_lux(t, x, d, c);
          EXPECT_NEAR(lux[0], ref.eh, 1e-9);
          EXPECT_NEAR(lux[1], ref.es, 1e-9);
          EXPECT_NEAR(lux[2], ref.ee, 1e-9);
        }
      }
    }
  }
}

TEST(TargetNoise, ZeroSigmaIsIdentityAndClampsAtZero) {
  Rng rng(3);
  const std::array<double, 3> lux{10.0, 20.0, 30.0};
  EXPECT_EQ(add_target_noise(lux, 0.0, rng), lux);
  const auto noisy = add_target_noise(lux, 50.0, rng);
  for (double v : noisy) EXPECT_GE(v, 0.0);
}

TEST(SensorGrid, NumberingAndPositions) {
  const auto sites = sensor_grid(SynthConfig{});
  ASSERT_EQ(sites.size(), 16u);
  std::set<std::pair<double, double>> positions;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    EXPECT_EQ(sites[i].id, static_cast<int>(i) + 1);
    positions.insert({sites[i].x, sites[i].d});
  }
  EXPECT_EQ(positions.size(), 16u);
  EXPECT_DOUBLE_EQ(sites[0].d, 1.5);
  EXPECT_DOUBLE_EQ(sites[12].x, 5.8);
  EXPECT_DOUBLE_EQ(sites[12].d, 6.0);
}

TEST(Render, NightLevelAndCanvas) {
  const SynthConfig cfg = small_config(40).noise_free();
  EXPECT_EQ(window_level(0.0, 1.0), 38);
  EXPECT_EQ(window_level(1.0, 1.0), 255);
  const auto img = render_window_image(200, 1.0, cfg, nullptr);
  ASSERT_EQ(img.width, 40u);
  EXPECT_EQ(img.at(0, 0), 10);
  EXPECT_EQ(img.at(39, 39), 10);
  // The +-10% ramp spreads 38 over roughly [34, 42].
  const auto mask = window_mask().raster(40, 40);
  std::set<int> window_values;
  for (std::size_t y = 0; y < 40; ++y)
    for (std::size_t x = 0; x < 40; ++x)
      if (mask[y * 40 + x]) window_values.insert(img.at(x, y));
      else EXPECT_EQ(img.at(x, y), 10);
  EXPECT_GE(*window_values.begin(), 34);
  EXPECT_LE(*window_values.rbegin(), 42);
}

TEST(Render, NoonClearSkySaturates) {
  const SynthConfig cfg = small_config(32).noise_free();
  const auto img = render_window_image(720, 1.0, cfg, nullptr);
  const auto mask = window_mask().raster(32, 32);
  int brightest = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) brightest = std::max<int>(brightest, img.pixels[i]);
  EXPECT_EQ(brightest, 255);
}

TEST(Render, WindowMeanIncreasesWithSunCloud) {
  const SynthConfig cfg = small_config(32).noise_free();
  double prev = -1.0;
  // S(t) rises from 08:00 to noon; pair with a rising cloud factor.
  for (int k = 0; k <= 8; ++k) {
    const double t = 480 + 30 * k;
    const double c = 0.3 + 0.05 * k;
    const double m = window_mean(render_window_image(t, c, cfg, nullptr));
    EXPECT_GT(m, prev);
    prev = m;
  }
}

TEST(Render, DeterministicGivenRng) {
  const SynthConfig cfg = small_config(24);
  Rng a(5), b(5);
  EXPECT_EQ(render_window_image(600, 0.8, cfg, &a), render_window_image(600, 0.8, cfg, &b));
}

TEST(Config, Validation) {
  SynthConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.sunrise = 500;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.lateral_coeff = 0.2;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.depth_coeff = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_EQ(SynthConfig{}.ticks_per_day(), 109);
}

TEST(Corpus, OneDayCounts) {
  oracle::TempDir dir;
  const auto summary = generate_corpus(1, small_config(), dir.path());
  EXPECT_EQ(summary.rows, 1744u);
  EXPECT_EQ(summary.images, 109u);
  const auto records = dataset::read_csv(dir.path() / "samples.csv");
  EXPECT_EQ(records.size(), 1744u);
  std::size_t images = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path() / "images")) images += e.is_regular_file();
  EXPECT_EQ(images, 109u);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "mask.json"));
}

TEST(Corpus, ZeroDaysRejected) {
  oracle::TempDir dir;
  EXPECT_THROW(generate_corpus(0, small_config(), dir.path()), ConfigError);
}

TEST(Corpus, ByteIdenticalAcrossRuns) {
  oracle::TempDir a, b;
  generate_corpus(2, small_config(), a.path());
  generate_corpus(2, small_config(), b.path());
  EXPECT_EQ(oracle::read_file(a.path() / "samples.csv"), oracle::read_file(b.path() / "samples.csv"));
  const std::string img = "images/img_20240604_1235.pgm";
  EXPECT_EQ(oracle::read_file(a.path() / img), oracle::read_file(b.path() / img));

  SynthConfig other = small_config();
  other.seed = 12;
  oracle::TempDir c;
  generate_corpus(2, other, c.path());
  EXPECT_NE(oracle::read_file(a.path() / "samples.csv"), oracle::read_file(c.path() / "samples.csv"));
}

TEST(Corpus, NoiseFreeRowsMatchReference) {
  oracle::TempDir dir;
  const SynthConfig cfg = small_config().noise_free();
  generate_corpus(2, cfg, dir.path());
  const auto corpus = dataset::load_corpus_dir(dir.path());
  ASSERT_EQ(corpus.samples.size(), 2u * 1744u);
  for (const auto& s : corpus.samples) {
    const auto phases = day_cloud_phases(cfg, s.timestamp.day);
    const double c = cloud_factor(s.timestamp.minute_of_day, phases, cfg);
    const auto ref = reference_lux(s.timestamp.minute_of_day, s.x, s.d, c);
    ASSERT_NEAR(s.targets[0], ref.eh, 1e-9);
    ASSERT_NEAR(s.targets[1], ref.es, 1e-9);
    ASSERT_NEAR(s.targets[2], ref.ee, 1e-9);
  }
}

TEST(Corpus, NoisyRowsStayNearReference) {
  oracle::TempDir dir;
  const SynthConfig cfg = small_config();
  generate_corpus(1, cfg, dir.path());
  const auto corpus = dataset::load_corpus_dir(dir.path());
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (const auto& s : corpus.samples) {
    const auto phases = day_cloud_phases(cfg, s.timestamp.day);
    const double c = cloud_factor(s.timestamp.minute_of_day, phases, cfg);
    const auto ref = reference_lux(s.timestamp.minute_of_day, s.x, s.d, c);
    const double rel = s.targets[1] / ref.es - 1.0;
    EXPECT_LT(std::abs(rel), 0.02 * 6.0);
    sum_sq += rel * rel;
    ++n;
  }
  EXPECT_NEAR(std::sqrt(sum_sq / static_cast<double>(n)), 0.02, 0.003);
}

TEST(Corpus, UnwritableDirectory) {
  EXPECT_THROW(generate_corpus(1, small_config(), "/proc/illum_nope"), IoError);
}
