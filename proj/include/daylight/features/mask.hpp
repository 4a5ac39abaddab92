#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <vector>

namespace illum::features {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

using Polygon = std::vector<Point2>;

// Window region as polygons in normalized image coordinates ([0,1]^2, x to
// the right, y down). A pixel is kept when its center lies inside any
// polygon (even-odd rule).
class WindowMask {
 public:
  WindowMask() = default;
  // Throws ConfigError when the polygons enclose zero area or leave [0,1]^2.
  explicit WindowMask(std::vector<Polygon> polygons);

  static WindowMask full_frame();
  static WindowMask from_json(const nlohmann::json& j);
  static WindowMask load(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

  bool contains(double x, double y) const;
  // Per-pixel keep flags for a width x height raster.
  std::vector<bool> raster(std::size_t width, std::size_t height) const;

  const std::vector<Polygon>& polygons() const { return polygons_; }

 private:
  std::vector<Polygon> polygons_;
};

}  // namespace illum::features
