#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "metadetect/image.hpp"

namespace metadetect {

inline constexpr int kMaxClasses = 15;

struct DatasetSpec {
  int num_classes = 15;
  int per_class = 100;
  int image_size = 32;
  int channels = 3;
  std::uint64_t seed = 1;
  double noise_std = 0.05;

  /// Throws std::invalid_argument describing the first violated field.
  void validate() const;
};

struct LabelledImage {
  Image image;
  int label = 0;
};

using Dataset = std::vector<LabelledImage>;

/// Renders per_class images of each class. Classes are parametric patterns
/// (disc, square, triangle, plus, ring, horizontal and vertical stripes,
/// concentric rings, checkerboard, horizontal and vertical gradients, flat
/// ellipse, half disc, frame, disc pair) at a random position, size, colour
/// and small orientation jitter, with additive Gaussian noise. No two classes
/// differ only by a rotation of less than 90 degrees.
///
/// Output order is index-major: (index 0, class 0..C-1), (index 1, ...), ...
/// Image (class, index) draws from its own stream seeded with
/// derive_seed(derive_seed(seed, class), index), so output is bit-identical
/// for identical specs regardless of generation order.
Dataset generate(const DatasetSpec& spec);

/// Renders one image of the given class; generate() is a loop over this.
Image render_sample(const DatasetSpec& spec, int label, int index);

struct SplitIndices {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
};

/// Stratified split: within each class (in dataset order) a Fisher-Yates
/// shuffle driven by derive_seed(seed, class) selects round(fraction * count)
/// members for `first`. Both index lists are returned in ascending order.
SplitIndices split_indices(std::span<const LabelledImage> data, double train_fraction, std::uint64_t seed);

/// split_indices materialized as (train, test) copies.
std::pair<Dataset, Dataset> split(std::span<const LabelledImage> data, double train_fraction, std::uint64_t seed);

Dataset select(std::span<const LabelledImage> data, std::span<const std::size_t> indices);
std::vector<Image> images_of(std::span<const LabelledImage> data);

}  // namespace metadetect
