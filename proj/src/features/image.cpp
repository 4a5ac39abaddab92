#include "daylight/features/image.hpp"

#include <cctype>
#include <fmt/format.h>
#include <fstream>
#include <iterator>
#include <string>

#include "daylight/errors.hpp"

#ifdef DAYLIGHT_WITH_OPENCV
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#endif

namespace illum::features {

namespace {

// Reads the next whitespace-separated header token, skipping '#' comments.
std::size_t read_header_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t value = 0;
  std::size_t digits = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + (bytes[pos] - '0');
    ++pos;
    ++digits;
  }
  if (digits == 0) throw DataError("netpbm: malformed header");
  return value;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_netpbm(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6');
}

}  // namespace

Image8 decode_netpbm(const std::vector<std::uint8_t>& bytes) {
  if (!is_netpbm(bytes)) throw DataError("not a binary PGM/PPM image");
  const std::size_t channels = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  const std::size_t width = read_header_int(bytes, pos);
  const std::size_t height = read_header_int(bytes, pos);
  const std::size_t maxval = read_header_int(bytes, pos);
  if (width == 0 || height == 0) throw DataError("netpbm: zero image dimension");
  if (maxval != 255) throw DataError(fmt::format("netpbm: only 8-bit images are supported (maxval {})", maxval));
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw DataError("netpbm: malformed header");
  ++pos;
  const std::size_t expected = width * height * channels;
  if (bytes.size() - pos < expected) {
    throw DataError(fmt::format("netpbm: truncated pixel data ({} of {} bytes)", bytes.size() - pos, expected));
  }
  Image8 img(width, height, channels);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), expected, img.pixels.begin());
  return img;
}

Image8 read_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (is_netpbm(bytes)) return decode_netpbm(bytes);
#ifdef DAYLIGHT_WITH_OPENCV
  cv::Mat mat = cv::imdecode(cv::Mat(1, static_cast<int>(bytes.size()), CV_8U, const_cast<std::uint8_t*>(bytes.data())),
                             cv::IMREAD_UNCHANGED);
  if (mat.empty() || mat.depth() != CV_8U) throw DataError("cannot decode image " + path.string());
  if (mat.channels() == 4) cv::cvtColor(mat, mat, cv::COLOR_BGRA2RGB);
  else if (mat.channels() == 3) cv::cvtColor(mat, mat, cv::COLOR_BGR2RGB);
  Image8 img(static_cast<std::size_t>(mat.cols), static_cast<std::size_t>(mat.rows),
             static_cast<std::size_t>(mat.channels()));
  for (int r = 0; r < mat.rows; ++r) {
    std::copy_n(mat.ptr<std::uint8_t>(r), img.width * img.channels, img.pixels.begin() + r * img.width * img.channels);
  }
  return img;
#else
  throw DataError("cannot decode image " + path.string() + " (only binary PGM/PPM supported in this build)");
#endif
}

std::vector<std::uint8_t> encode_pgm(const Image8& image) {
  if (image.channels != 1) throw DataError("PGM output needs a single-channel image");
  const std::string header = fmt::format("P5\n{} {}\n255\n", image.width, image.height);
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void write_pgm(const std::filesystem::path& path, const Image8& image) {
  const auto bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace illum::features
