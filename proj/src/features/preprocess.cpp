#include "daylight/features/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "daylight/errors.hpp"

namespace illum::features {

Image8 apply_mask(const Image8& raw, const WindowMask& mask) {
  const auto keep = mask.raster(raw.width, raw.height);
  if (std::none_of(keep.begin(), keep.end(), [](bool k) { return k; })) {
    throw ConfigError("mask selects no pixels of the image");
  }
  Image8 out = raw;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) continue;
    for (std::size_t c = 0; c < out.channels; ++c) out.pixels[i * out.channels + c] = 0;
  }
  return out;
}

std::vector<double> to_grayscale(const Image8& image) {
  const std::size_t n = image.width * image.height;
  std::vector<double> gray(n);
  if (image.channels == 1) {
    for (std::size_t i = 0; i < n; ++i) gray[i] = image.pixels[i];
  } else if (image.channels == 3) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto* p = &image.pixels[i * 3];
      gray[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
  } else {
    throw DataError("grayscale conversion needs 1 or 3 channels");
  }
  return gray;
}

std::vector<double> resize_bilinear(const std::vector<double>& src, std::size_t src_w, std::size_t src_h,
                                    std::size_t dst_w, std::size_t dst_h) {
  if (src.size() != src_w * src_h || src_w == 0 || src_h == 0 || dst_w == 0 || dst_h == 0) {
    throw DimensionError("resize: bad raster dimensions");
  }
  std::vector<double> out(dst_w * dst_h);
  const double sx = static_cast<double>(src_w) / static_cast<double>(dst_w);
  const double sy = static_cast<double>(src_h) / static_cast<double>(dst_h);
  auto source_coord = [](double dst, double scale, std::size_t size, std::size_t& i0, std::size_t& i1, double& frac) {
    double s = (dst + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(size - 1));
    i0 = static_cast<std::size_t>(std::floor(s));
    i1 = std::min(i0 + 1, size - 1);
    frac = s - static_cast<double>(i0);
  };
  for (std::size_t y = 0; y < dst_h; ++y) {
    std::size_t y0, y1;
    double fy;
    source_coord(static_cast<double>(y), sy, src_h, y0, y1, fy);
    for (std::size_t x = 0; x < dst_w; ++x) {
      std::size_t x0, x1;
      double fx;
      source_coord(static_cast<double>(x), sx, src_w, x0, x1, fx);
      const double top = src[y0 * src_w + x0] * (1.0 - fx) + src[y0 * src_w + x1] * fx;
      const double bottom = src[y1 * src_w + x0] * (1.0 - fx) + src[y1 * src_w + x1] * fx;
      out[y * dst_w + x] = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

double normalize_pixel(double p) { return std::clamp(p / 127.5 - 1.0, -1.0, 1.0); }

nn::Tensor<float> preprocess_image(const Image8& raw, const WindowMask& mask, std::size_t size) {
  if (raw.width == 0 || raw.height == 0 || raw.pixels.size() != raw.width * raw.height * raw.channels) {
    throw DataError("image has inconsistent dimensions");
  }
  if (size == 0) throw ConfigError("target image size must be positive");
  const Image8 masked = apply_mask(raw, mask);
  const auto gray = to_grayscale(masked);
  const auto resized = resize_bilinear(gray, raw.width, raw.height, size, size);
  nn::Tensor<float> out(nn::Shape{1, size, size});
  for (std::size_t i = 0; i < resized.size(); ++i) out[i] = static_cast<float>(normalize_pixel(resized[i]));
  return out;
}

}  // namespace illum::features
