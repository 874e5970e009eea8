#include "metadetect/synthdata.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "metadetect/rng.hpp"

namespace metadetect {

namespace {

constexpr double kPi = std::numbers::pi;

double len(double u, double v) { return std::sqrt(u * u + v * v); }

// Signed distance (normalized units, negative inside) to a convex polygon
// given counter-clockwise in (u, v) with v pointing down.
template <std::size_t N>
double convex_sd(const std::array<std::array<double, 2>, N>& pts, double u, double v) {
  double sd = -1e9;
  for (std::size_t i = 0; i < N; ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % N];
    const double ex = b[0] - a[0];
    const double ey = b[1] - a[1];
    const double el = len(ex, ey);
    // outward normal for this winding
    const double nx = ey / el;
    const double ny = -ex / el;
    sd = std::max(sd, nx * (u - a[0]) + ny * (v - a[1]));
  }
  return sd;
}

double plus_sd(double u, double v) {
  return std::min(std::max(std::abs(u) - 1.0, std::abs(v) - 0.3),
                  std::max(std::abs(u) - 0.3, std::abs(v) - 1.0));
}

// Coverage from a signed distance: one pixel wide linear ramp.
double edge(double sd_norm, double radius_px) { return std::clamp(0.5 - sd_norm * radius_px, 0.0, 1.0); }

struct ShapeFrame {
  double cx, cy;    // pixels
  double radius;    // pixels
  double cos_t, sin_t;
  double period;    // pixels, texture classes
  double phase;

  // to object coordinates (normalized by radius, rotated)
  std::pair<double, double> local(double x, double y) const {
    const double dx = (x - cx) / radius;
    const double dy = (y - cy) / radius;
    return {cos_t * dx + sin_t * dy, -sin_t * dx + cos_t * dy};
  }
  // rotated pixel coordinates about the image origin, for textures
  std::pair<double, double> texture(double x, double y) const {
    return {cos_t * x + sin_t * y, -sin_t * x + cos_t * y};
  }
};

double coverage(int label, const ShapeFrame& fr, double x, double y, int size) {
  const auto [u, v] = fr.local(x, y);
  const auto [tx, ty] = fr.texture(x, y);
  const double r = fr.radius;
  const double w = 2.0 * kPi / fr.period;
  switch (label) {
    case 0: return edge(len(u, v) - 1.0, r);
    case 1: return edge(std::max(std::abs(u), std::abs(v)) - 0.85, r);
    case 2: {
      static const std::array<std::array<double, 2>, 3> tri{{{0.0, -1.0}, {-0.95, 0.7}, {0.95, 0.7}}};
      return edge(convex_sd(tri, u, v), r);
    }
    case 3: return edge(plus_sd(u, v), r);
    case 4: return edge(std::abs(len(u, v) - 0.75) - 0.22, r);
    case 5: return 0.5 + 0.5 * std::sin(w * ty + fr.phase);
    case 6: return 0.5 + 0.5 * std::sin(w * tx + fr.phase);
    case 7: return 0.5 + 0.5 * std::sin(w * len(x - fr.cx, y - fr.cy) + fr.phase);
    case 8: return 0.5 + 0.5 * std::sin(w * tx + fr.phase) * std::sin(w * ty + fr.phase);
    case 9: return std::clamp((tx - (size - 1) / 2.0) / (size * 0.8) + 0.5, 0.0, 1.0);
    case 10: return std::clamp((ty - (size - 1) / 2.0) / (size * 0.8) + 0.5, 0.0, 1.0);
    case 11: return edge(len(u, v / 0.45) - 1.0, r);
    case 12: return edge(std::max(len(u, v + 0.35) - 1.0, v - 0.35), r);
    case 13: return edge(std::abs(std::max(std::abs(u), std::abs(v)) - 0.75) - 0.15, r);
    case 14: return edge(std::min(len(u - 0.55, v), len(u + 0.55, v)) - 0.4, r);
    default: throw std::invalid_argument("label out of range");
  }
}

}  // namespace

void DatasetSpec::validate() const {
  if (num_classes < 2 || num_classes > kMaxClasses)
    throw std::invalid_argument("num_classes must be between 2 and 15");
  if (per_class < 1) throw std::invalid_argument("per_class must be >= 1");
  if (image_size < 16) throw std::invalid_argument("image_size must be >= 16");
  if (channels != 1 && channels != 3) throw std::invalid_argument("channels must be 1 or 3");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw std::invalid_argument("noise_std must be >= 0");
}

Image render_sample(const DatasetSpec& spec, int label, int index) {
  if (label < 0 || label >= spec.num_classes) throw std::invalid_argument("label out of range");
  SplitMix64 rng(derive_seed(derive_seed(spec.seed, static_cast<std::uint64_t>(label)),
                             static_cast<std::uint64_t>(index)));
  const int n = spec.image_size;
  const double mid = (n - 1) / 2.0;

  ShapeFrame fr{};
  fr.cx = mid + rng.uniform(-0.12, 0.12) * n;
  fr.cy = mid + rng.uniform(-0.12, 0.12) * n;
  fr.radius = rng.uniform(0.25, 0.36) * n;
  const double theta = rng.uniform(-10.0, 10.0) * kPi / 180.0;
  fr.cos_t = std::cos(theta);
  fr.sin_t = std::sin(theta);
  fr.period = rng.uniform(0.2, 0.3) * n;
  fr.phase = rng.uniform(0.0, 2.0 * kPi);

  std::array<double, 3> fg{}, bg{};
  for (int c = 0; c < 3; ++c) {
    fg[c] = rng.uniform(0.55, 1.0);
    bg[c] = rng.uniform(0.0, 0.35);
  }

  Image img(n, n, spec.channels);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double cov = coverage(label, fr, x, y, n);
      for (int c = 0; c < spec.channels; ++c) {
        const double base = bg[c] + (fg[c] - bg[c]) * cov;
        img.at(y, x, c) = std::clamp(base + spec.noise_std * rng.normal(), 0.0, 1.0);
      }
    }
  }
  return img;
}

Dataset generate(const DatasetSpec& spec) {
  spec.validate();
  Dataset out;
  out.reserve(static_cast<std::size_t>(spec.num_classes) * spec.per_class);
  for (int i = 0; i < spec.per_class; ++i)
    for (int c = 0; c < spec.num_classes; ++c) out.push_back({render_sample(spec, c, i), c});
  return out;
}

SplitIndices split_indices(std::span<const LabelledImage> data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must lie strictly between 0 and 1");
  int max_label = -1;
  for (const auto& s : data) max_label = std::max(max_label, s.label);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].label < 0) throw std::invalid_argument("negative label in dataset");
    by_class[data[i].label].push_back(i);
  }

  SplitIndices out;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    SplitMix64 rng(derive_seed(seed, c));
    for (std::size_t i = members.size(); i > 1; --i) {
      const std::size_t j = rng.below(static_cast<std::uint32_t>(i));
      std::swap(members[i - 1], members[j]);
    }
    const auto take = static_cast<std::size_t>(std::lround(train_fraction * members.size()));
    out.first.insert(out.first.end(), members.begin(), members.begin() + take);
    out.second.insert(out.second.end(), members.begin() + take, members.end());
  }
  std::sort(out.first.begin(), out.first.end());
  std::sort(out.second.begin(), out.second.end());
  return out;
}

std::pair<Dataset, Dataset> split(std::span<const LabelledImage> data, double train_fraction, std::uint64_t seed) {
  const auto idx = split_indices(data, train_fraction, seed);
  return {select(data, idx.first), select(data, idx.second)};
}

Dataset select(std::span<const LabelledImage> data, std::span<const std::size_t> indices) {
  Dataset out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(data[i]);
  return out;
}

std::vector<Image> images_of(std::span<const LabelledImage> data) {
  std::vector<Image> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(s.image);
  return out;
}

}  // namespace metadetect
