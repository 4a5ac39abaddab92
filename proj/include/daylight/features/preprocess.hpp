#pragma once

#include <cstddef>

#include "daylight/features/image.hpp"
#include "daylight/features/mask.hpp"
#include "daylight/nn/tensor.hpp"

namespace illum::features {

inline constexpr std::size_t kDefaultImageSize = 128;

// Individual stages, exposed so the pipeline order can be tested.
Image8 apply_mask(const Image8& raw, const WindowMask& mask);
// Luma 0.299 R + 0.587 G + 0.114 B; gray input passes through. Row-major
// width*height values in [0, 255].
std::vector<double> to_grayscale(const Image8& image);
// Bilinear, half-pixel centers, edge clamp.
std::vector<double> resize_bilinear(const std::vector<double>& src, std::size_t src_w, std::size_t src_h,
                                    std::size_t dst_w, std::size_t dst_h);
// p / 127.5 - 1, clamped to [-1, 1].
double normalize_pixel(double p);

// mask -> grayscale -> resize -> normalize. Returns a [1, size, size] tensor.
nn::Tensor<float> preprocess_image(const Image8& raw, const WindowMask& mask, std::size_t size = kDefaultImageSize);

}  // namespace illum::features
