#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace metadetect {

/// H x W x C grid of intensities in [0,1], row-major with interleaved channels.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0);
  /// Takes ownership of `pixels`; throws std::invalid_argument if the buffer
  /// length or any value violates the image invariants.
  Image(int height, int width, int channels, std::vector<double> pixels);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  double at(int y, int x, int c) const { return pixels_[index(y, x, c)]; }
  double& at(int y, int x, int c) { return pixels_[index(y, x, c)]; }

  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> pixels_;
};

/// Clamps every pixel into [0,1]; NaN becomes 0.
void clamp_unit(std::span<double> values);

/// 64-bit FNV-1a over the shape and the float32 little-endian pixel bytes.
/// Two images that round-trip to the same MTEN file share a digest.
std::uint64_t image_digest(const Image& img);

/// 64-bit FNV-1a, exposed for other content checksums.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t value);

}  // namespace metadetect
