#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <vector>

#include "daylight/features/image.hpp"
#include "daylight/features/mask.hpp"
#include "daylight/rng.hpp"

// Closed-form daylight oracle: a smooth diurnal sun curve, a per-day cloud
// modulation, distance decay away from the window, and rendered window
// images whose brightness tracks the same sun/cloud product.
namespace illum::synth {

struct SynthConfig {
  double sunrise = 360.0;  // minutes
  double sunset = 1080.0;
  double peak_lux = 2000.0;
  double depth_coeff = 0.6;     // per meter from the window
  double lateral_coeff = 0.03;  // per meter from the west wall
  double room_width = 8.9;      // meters, west to east wall
  double exp_south = 1.2;
  double exp_horizontal = 1.0;
  double exp_east = 1.1;
  double ratio_horizontal = 0.45;
  double ratio_east = 0.35;
  double noise_sigma = 0.02;  // multiplicative target noise; 0 disables
  double pixel_noise_sigma = 2.0;
  double cloud_min = 0.3;
  double cloud_max = 1.0;
  bool clear_sky = false;
  std::size_t image_size = 128;
  int cadence_minutes = 5;
  int work_start = 480;  // 08:00
  int work_end = 1020;   // 17:00, inclusive
  std::vector<double> sensor_x{1.3, 2.8, 4.3, 5.8};
  std::vector<double> sensor_d{1.5, 3.0, 4.5, 6.0};
  std::chrono::sys_days start_date{std::chrono::year{2024} / std::chrono::June / 3};
  std::uint64_t seed = 0;

  // Noise-free variant (targets and pixels).
  SynthConfig noise_free() const;
  // Throws ConfigError when the invariants do not hold.
  void validate() const;
  int ticks_per_day() const { return (work_end - work_start) / cadence_minutes + 1; }
  std::size_t sensor_count() const { return sensor_x.size() * sensor_d.size(); }

  nlohmann::json to_json() const;
};

struct SensorSite {
  int id = 0;
  double x = 0.0;
  double d = 0.0;
};

// Row-major over D then X: ids 1..4 are nearest the window.
std::vector<SensorSite> sensor_grid(const SynthConfig& cfg);

double sun_factor(double minutes, const SynthConfig& cfg);

struct CloudPhases {
  double phi1 = 0.0;
  double phi2 = 0.0;
};

// Phases drawn from the (seed, date) stream.
CloudPhases day_cloud_phases(const SynthConfig& cfg, std::chrono::sys_days date);
double cloud_factor(double minutes, const CloudPhases& phases, const SynthConfig& cfg);

// Noise-free (Eh, Es, Ee) in lux.
std::array<double, 3> oracle_illuminance(double minutes, double x, double d, double cloud, const SynthConfig& cfg);
// Multiplicative (1 + sigma * eta) noise, clamped at zero.
std::array<double, 3> add_target_noise(const std::array<double, 3>& lux, double sigma, Rng& rng);

// round(255 * min(1, 0.15 + 0.85 * S * c)).
int window_level(double sun, double cloud);

// Fixed side-lit window rectangles in normalized coordinates.
features::WindowMask window_mask();

// Dark canvas with the two windows; a +-10% top-to-bottom brightness ramp
// over the window level, then optional Gaussian pixel noise.
features::Image8 render_window_image(double minutes, double cloud, const SynthConfig& cfg, Rng* pixel_noise);

struct CorpusSummary {
  std::size_t days = 0;
  std::size_t rows = 0;
  std::size_t images = 0;
  std::chrono::sys_days first_day{};
  std::chrono::sys_days last_day{};
};

// Writes <out>/samples.csv, <out>/images/img_*.pgm and <out>/mask.json.
// Throws ConfigError for days < 1 and IoError when the
// directory is not writable.
CorpusSummary generate_corpus(std::size_t days, const SynthConfig& cfg, const std::filesystem::path& out);

}  // namespace illum::synth
