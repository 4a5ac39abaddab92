#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace illum::features {

// 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Image8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> pixels;

  Image8() = default;
  Image8(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), pixels(w * h * c, fill) {}

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c = 0) { return pixels[(y * width + x) * channels + c]; }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return pixels[(y * width + x) * channels + c];
  }
  bool operator==(const Image8&) const = default;
};

// Binary PGM (P5) / PPM (P6) with maxval 255. Other formats are decoded
// through OpenCV when the library was built with it. Throws DataError.
Image8 read_image(const std::filesystem::path& path);
Image8 decode_netpbm(const std::vector<std::uint8_t>& bytes);

// Writes a single-channel image as binary PGM. Throws IoError.
void write_pgm(const std::filesystem::path& path, const Image8& image);
std::vector<std::uint8_t> encode_pgm(const Image8& image);

}  // namespace illum::features
