#include "daylight/synth/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numbers>

#include "daylight/dataset/corpus.hpp"
#include "daylight/errors.hpp"
#include "daylight/features/timestamp.hpp"

namespace illum::synth {

namespace fs = std::filesystem;

namespace {

// Stream tags for the per-day generators.
constexpr std::uint64_t kCloudStream = 1;
constexpr std::uint64_t kTargetStream = 2;
constexpr std::uint64_t kPixelStream = 3;

constexpr std::uint8_t kCanvasLevel = 10;

struct Rect {
  double x0, y0, x1, y1;
};

constexpr std::array<Rect, 2> kWindows{Rect{0.10, 0.30, 0.45, 0.75}, Rect{0.55, 0.30, 0.90, 0.75}};

Rng day_stream(const SynthConfig& cfg, std::chrono::sys_days date, std::uint64_t tag) {
  const auto day_number = static_cast<std::uint64_t>(date.time_since_epoch().count());
  return Rng(derive_seed(derive_seed(cfg.seed, day_number), tag));
}

}  // namespace

SynthConfig SynthConfig::noise_free() const {
  SynthConfig c = *this;
  c.noise_sigma = 0.0;
  c.pixel_noise_sigma = 0.0;
  return c;
}

void SynthConfig::validate() const {
  if (!(sunrise < work_start && work_end < sunset)) {
    throw ConfigError("daylight must span the working window (sunrise < start, end < sunset)");
  }
  if (work_start < 0 || work_end >= 1440 || work_end < work_start || cadence_minutes <= 0) {
    throw ConfigError("invalid working window or cadence");
  }
  for (double v : {peak_lux, depth_coeff, lateral_coeff, exp_south, exp_horizontal, exp_east, ratio_horizontal,
                   ratio_east, room_width}) {
    if (!(v > 0.0)) throw ConfigError("synthetic model coefficients must be positive");
  }
  if (noise_sigma < 0.0 || pixel_noise_sigma < 0.0) throw ConfigError("noise levels must be non-negative");
  if (!(cloud_min > 0.0 && cloud_min <= cloud_max && cloud_max <= 1.0)) throw ConfigError("invalid cloud bounds");
  if (sensor_x.empty() || sensor_d.empty()) throw ConfigError("sensor grid is empty");
  for (double x : sensor_x) {
    if (x < 0.0 || x > room_width) throw ConfigError("sensor X outside the room");
  }
  const double max_x = *std::max_element(sensor_x.begin(), sensor_x.end());
  const double min_x = *std::min_element(sensor_x.begin(), sensor_x.end());
  if (!(lateral_coeff * max_x < 1.0) || !(lateral_coeff * (room_width - min_x) < 1.0)) {
    throw ConfigError("lateral coefficient makes the lateral factor non-positive");
  }
  if (image_size < 16) throw ConfigError("image size must be at least 16");
}

nlohmann::json SynthConfig::to_json() const {
  return {{"sunrise", sunrise},
          {"sunset", sunset},
          {"peak_lux", peak_lux},
          {"depth_coeff", depth_coeff},
          {"lateral_coeff", lateral_coeff},
          {"room_width", room_width},
          {"exponents", {{"south", exp_south}, {"horizontal", exp_horizontal}, {"east", exp_east}}},
          {"ratios", {{"horizontal", ratio_horizontal}, {"east", ratio_east}}},
          {"noise_sigma", noise_sigma},
          {"pixel_noise_sigma", pixel_noise_sigma},
          {"cloud_bounds", {cloud_min, cloud_max}},
          {"clear_sky", clear_sky},
          {"image_size", image_size},
          {"cadence_minutes", cadence_minutes},
          {"work_start", features::format_clock(work_start)},
          {"work_end", features::format_clock(work_end)},
          {"sensor_x", sensor_x},
          {"sensor_d", sensor_d},
          {"start_date", features::format_date(start_date)},
          {"seed", seed}};
}

std::vector<SensorSite> sensor_grid(const SynthConfig& cfg) {
  std::vector<SensorSite> sites;
  const std::size_t nx = cfg.sensor_x.size();
  for (std::size_t di = 0; di < cfg.sensor_d.size(); ++di) {
    // Within a depth row the numbering runs east to west.
    for (std::size_t k = 0; k < nx; ++k) {
      const std::size_t xi = nx - 1 - k;
      sites.push_back({static_cast<int>(di * nx + k + 1), cfg.sensor_x[xi], cfg.sensor_d[di]});
    }
  }
  std::sort(sites.begin(), sites.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return sites;
}

double sun_factor(double minutes, const SynthConfig& cfg) {
  if (minutes <= cfg.sunrise || minutes >= cfg.sunset) return 0.0;
  const double s = std::sin(std::numbers::pi * (minutes - cfg.sunrise) / (cfg.sunset - cfg.sunrise));
  return std::clamp(s, 0.0, 1.0);
}

CloudPhases day_cloud_phases(const SynthConfig& cfg, std::chrono::sys_days date) {
  Rng rng = day_stream(cfg, date, kCloudStream);
  const double phi1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double phi2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return {phi1, phi2};
}

double cloud_factor(double minutes, const CloudPhases& phases, const SynthConfig& cfg) {
  if (cfg.clear_sky) return 1.0;
  const double w = 2.0 * std::numbers::pi * minutes / 1440.0;
  const double c = 0.65 + 0.35 * std::sin(3.0 * w + phases.phi1) * std::sin(7.0 * w + phases.phi2);
  return std::clamp(c, cfg.cloud_min, cfg.cloud_max);
}

std::array<double, 3> oracle_illuminance(double minutes, double x, double d, double cloud, const SynthConfig& cfg) {
  const double sun = sun_factor(minutes, cfg);
  if (sun <= 0.0) return {0.0, 0.0, 0.0};
  const double depth = 1.0 / std::pow(1.0 + cfg.depth_coeff * d, 2.0);
  const double lateral = 1.0 - cfg.lateral_coeff * x;
  const double lateral_east = 1.0 - cfg.lateral_coeff * (cfg.room_width - x);
  const double base = cfg.peak_lux * cloud * depth;
  const double es = base * std::pow(sun, cfg.exp_south) * lateral;
  const double eh = cfg.ratio_horizontal * base * std::pow(sun, cfg.exp_horizontal) * lateral;
  const double ee = cfg.ratio_east * base * std::pow(sun, cfg.exp_east) * lateral_east;
  return {eh, es, ee};
}

std::array<double, 3> add_target_noise(const std::array<double, 3>& lux, double sigma, Rng& rng) {
  std::array<double, 3> out = lux;
  if (sigma <= 0.0) return out;
  for (auto& v : out) v = std::max(0.0, v * (1.0 + sigma * rng.normal()));
  return out;
}

int window_level(double sun, double cloud) {
  return static_cast<int>(std::lround(255.0 * std::min(1.0, 0.15 + 0.85 * sun * cloud)));
}

features::WindowMask window_mask() {
  std::vector<features::Polygon> polys;
  for (const auto& r : kWindows) polys.push_back({{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}});
  return features::WindowMask(std::move(polys));
}

features::Image8 render_window_image(double minutes, double cloud, const SynthConfig& cfg, Rng* pixel_noise) {
  const std::size_t n = cfg.image_size;
  const double level = window_level(sun_factor(minutes, cfg), cloud);
  features::Image8 img(n, n, 1, kCanvasLevel);
  for (std::size_t py = 0; py < n; ++py) {
    const double cy = (static_cast<double>(py) + 0.5) / static_cast<double>(n);
    for (std::size_t px = 0; px < n; ++px) {
      const double cx = (static_cast<double>(px) + 0.5) / static_cast<double>(n);
      double value = kCanvasLevel;
      for (const auto& r : kWindows) {
        if (cx >= r.x0 && cx < r.x1 && cy >= r.y0 && cy < r.y1) {
          const double v = (cy - r.y0) / (r.y1 - r.y0);  // 0 at the top edge
          value = level * (1.0 + 0.1 * (1.0 - 2.0 * v));
          break;
        }
      }
      if (pixel_noise != nullptr && cfg.pixel_noise_sigma > 0.0) value += cfg.pixel_noise_sigma * pixel_noise->normal();
      img.at(px, py) = static_cast<std::uint8_t>(std::lround(std::clamp(value, 0.0, 255.0)));
    }
  }
  return img;
}

CorpusSummary generate_corpus(std::size_t days, const SynthConfig& cfg, const fs::path& out) {
  cfg.validate();
  if (days < 1) throw ConfigError("synthetic corpus needs at least one day");
  std::error_code ec;
  fs::create_directories(out / "images", ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", (out / "images").string(), ec.message()));

  const auto sites = sensor_grid(cfg);
  CorpusSummary summary;
  summary.days = days;
  summary.first_day = cfg.start_date;
  summary.last_day = cfg.start_date + std::chrono::days(static_cast<int>(days) - 1);

  const fs::path csv_path = out / "samples.csv";
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  csv << dataset::kCsvHeader << "\n";

  for (std::size_t day = 0; day < days; ++day) {
    const auto date = cfg.start_date + std::chrono::days(static_cast<int>(day));
    const auto phases = day_cloud_phases(cfg, date);
    Rng target_rng = day_stream(cfg, date, kTargetStream);
    Rng pixel_rng = day_stream(cfg, date, kPixelStream);
    for (int tick = 0; tick < cfg.ticks_per_day(); ++tick) {
      const int minute = cfg.work_start + tick * cfg.cadence_minutes;
      const features::Timestamp ts{date, minute};
      const double cloud = cloud_factor(minute, phases, cfg);
      const auto image = render_window_image(minute, cloud, cfg, &pixel_rng);
      const std::string image_name = dataset::image_stem(ts) + ".pgm";
      features::write_pgm(out / "images" / image_name, image);
      ++summary.images;
      for (const auto& site : sites) {
        dataset::Sample s;
        s.timestamp = ts;
        s.sensor_id = site.id;
        s.x = site.x;
        s.d = site.d;
        s.image_ref = image_name;
        const auto lux = add_target_noise(oracle_illuminance(minute, site.x, site.d, cloud, cfg), cfg.noise_sigma,
                                          target_rng);
        s.targets = lux;
        csv << dataset::format_csv_row(s) << "\n";
        ++summary.rows;
      }
    }
  }
  csv.close();
  if (!csv) throw IoError("failed writing " + csv_path.string());

  window_mask().save(out / "mask.json");

  return summary;
}

}  // namespace illum::synth
