#include "daylight/features/mask.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>

#include "daylight/errors.hpp"

namespace illum::features {

namespace {

double polygon_area(const Polygon& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(twice) / 2.0;
}

bool inside(const Polygon& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y > y) != (b.y > y)) {
      const double cross_x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (x < cross_x) in = !in;
    }
  }
  return in;
}

}  // namespace

WindowMask::WindowMask(std::vector<Polygon> polygons) : polygons_(std::move(polygons)) {
  double area = 0.0;
  for (const auto& poly : polygons_) {
    for (const auto& p : poly) {
      if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
        throw ConfigError(fmt::format("mask vertex ({}, {}) outside the unit square", p.x, p.y));
      }
    }
    if (poly.size() >= 3) area += polygon_area(poly);
  }
  if (!(area > 0.0)) throw ConfigError("mask encloses zero area");
}

WindowMask WindowMask::full_frame() { return WindowMask({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}); }

WindowMask WindowMask::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("polygons") || !j["polygons"].is_array()) {
    throw ConfigError("mask configuration needs a 'polygons' array");
  }
  std::vector<Polygon> polys;
  for (const auto& jp : j["polygons"]) {
    Polygon poly;
    for (const auto& v : jp) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError("mask vertices must be [x, y] number pairs");
      }
      poly.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    polys.push_back(std::move(poly));
  }
  return WindowMask(std::move(polys));
}

WindowMask WindowMask::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mask configuration " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("mask configuration {}: {}", path.string(), e.what()));
  }
  return from_json(j);
}

nlohmann::json WindowMask::to_json() const {
  nlohmann::json polys = nlohmann::json::array();
  for (const auto& poly : polygons_) {
    nlohmann::json jp = nlohmann::json::array();
    for (const auto& p : poly) jp.push_back({p.x, p.y});
    polys.push_back(std::move(jp));
  }
  return {{"polygons", std::move(polys)}};
}

void WindowMask::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json().dump(2) << "\n";
}

bool WindowMask::contains(double x, double y) const {
  for (const auto& poly : polygons_) {
    if (poly.size() >= 3 && inside(poly, x, y)) return true;
  }
  return false;
}

std::vector<bool> WindowMask::raster(std::size_t width, std::size_t height) const {
  std::vector<bool> keep(width * height);
  for (std::size_t y = 0; y < height; ++y) {
    const double cy = (static_cast<double>(y) + 0.5) / static_cast<double>(height);
    for (std::size_t x = 0; x < width; ++x) {
      const double cx = (static_cast<double>(x) + 0.5) / static_cast<double>(width);
      keep[y * width + x] = contains(cx, cy);
    }
  }
  return keep;
}

}  // namespace illum::features
