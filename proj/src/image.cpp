#include "metadetect/image.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace metadetect {

namespace {

void check_shape(int height, int width, int channels) {
  if (height <= 0 || width <= 0) throw std::invalid_argument("image dimensions must be positive");
  if (channels != 1 && channels != 3) throw std::invalid_argument("image channels must be 1 or 3");
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  check_shape(height, width, channels);
  if (!(fill >= 0.0 && fill <= 1.0)) throw std::invalid_argument("fill value outside [0,1]");
  pixels_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Image::Image(int height, int width, int channels, std::vector<double> pixels)
    : height_(height), width_(width), channels_(channels), pixels_(std::move(pixels)) {
  check_shape(height, width, channels);
  if (pixels_.size() != static_cast<std::size_t>(height) * width * channels)
    throw std::invalid_argument("pixel buffer length does not match height*width*channels");
  for (double v : pixels_)
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("pixel value outside [0,1]");
}

void clamp_unit(std::span<double> values) {
  for (double& v : values) {
    if (std::isnan(v)) v = 0.0;
    else if (v < 0.0) v = 0.0;
    else if (v > 1.0) v = 1.0;
  }
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t image_digest(const Image& img) {
  std::vector<std::uint8_t> buf;
  buf.reserve(12 + img.size() * 4);
  append_u32(buf, static_cast<std::uint32_t>(img.height()));
  append_u32(buf, static_cast<std::uint32_t>(img.width()));
  append_u32(buf, static_cast<std::uint32_t>(img.channels()));
  for (double v : img.pixels()) append_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return fnv1a64(buf);
}

std::string to_hex(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[value & 0xF];
    value >>= 4;
  }
  return s;
}

}  // namespace metadetect
