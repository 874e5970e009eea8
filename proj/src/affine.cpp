#include "metadetect/affine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace metadetect {

namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

Point center_of(int width, int height) {
  return {(width - 1) / 2.0, (height - 1) / 2.0};
}

// p' = L (p - c) + c
AffineTransform about_point(double a, double b, double c, double d, Point center) {
  AffineTransform t{a, b, c, d, 0.0, 0.0};
  t.e = center.x - (a * center.x + b * center.y);
  t.f = center.y - (c * center.x + d * center.y);
  return t;
}

}  // namespace

bool AffineTransform::invertible() const {
  return std::isfinite(determinant()) && std::abs(determinant()) > kMinDeterminant;
}

AffineTransform identity() { return {}; }

AffineTransform compose(const AffineTransform& first, const AffineTransform& second) {
  const auto& s = second;
  const auto& t = first;
  return {
      s.a * t.a + s.b * t.c,
      s.a * t.b + s.b * t.d,
      s.c * t.a + s.d * t.c,
      s.c * t.b + s.d * t.d,
      s.a * t.e + s.b * t.f + s.e,
      s.c * t.e + s.d * t.f + s.f,
  };
}

AffineTransform inverse(const AffineTransform& t) {
  if (!t.invertible()) throw std::invalid_argument("affine transform is not invertible");
  const double det = t.determinant();
  AffineTransform inv;
  inv.a = t.d / det;
  inv.b = -t.b / det;
  inv.c = -t.c / det;
  inv.d = t.a / det;
  inv.e = -(inv.a * t.e + inv.b * t.f);
  inv.f = -(inv.c * t.e + inv.d * t.f);
  return inv;
}

AffineTransform rotation_about_center(double angle_deg, int width, int height) {
  if (!std::isfinite(angle_deg)) throw std::invalid_argument("rotation angle must be finite");
  if (angle_deg == 0.0) return identity();
  const double th = radians(angle_deg);
  const double cs = std::cos(th);
  const double sn = std::sin(th);
  return about_point(cs, -sn, sn, cs, center_of(width, height));
}

AffineTransform shear_about_center(double angle_deg, int width, int height) {
  if (!std::isfinite(angle_deg) || std::abs(angle_deg) >= 90.0)
    throw std::invalid_argument("shear angle must satisfy |angle| < 90 degrees");
  if (angle_deg == 0.0) return identity();
  return about_point(1.0, std::tan(radians(angle_deg)), 0.0, 1.0, center_of(width, height));
}

AffineTransform scale_about_center(double factor, int width, int height) {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw std::invalid_argument("scale factor must be positive");
  if (factor == 1.0) return identity();
  return about_point(factor, 0.0, 0.0, factor, center_of(width, height));
}

AffineTransform translation(double frac_x, double frac_y, int width, int height) {
  AffineTransform t;
  t.e = frac_x * width;
  t.f = frac_y * height;
  return t;
}

Image warp(const Image& img, const AffineTransform& t, Padding padding) {
  const AffineTransform inv = inverse(t);
  const int h = img.height();
  const int w = img.width();
  const int ch = img.channels();
  Image out(h, w, ch);
  const auto src = img.pixels();
  auto dst = out.pixels();

  auto sample = [&](int y, int x, int c) -> double {
    if (x < 0 || x >= w || y < 0 || y >= h) {
      if (padding == Padding::Zero) return 0.0;
      x = std::clamp(x, 0, w - 1);
      y = std::clamp(y, 0, h - 1);
    }
    return src[(static_cast<std::size_t>(y) * w + x) * ch + c];
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Point s = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      // Beyond one pixel outside the source every tap is padding, so clamping
      // the sample position leaves the result unchanged and keeps casts in range.
      s.x = std::clamp(s.x, -2.0, w + 1.0);
      s.y = std::clamp(s.y, -2.0, h + 1.0);
      const double fx0 = std::floor(s.x);
      const double fy0 = std::floor(s.y);
      const double wx = s.x - fx0;
      const double wy = s.y - fy0;
      const int x0 = static_cast<int>(fx0);
      const int y0 = static_cast<int>(fy0);
      double* px = &dst[(static_cast<std::size_t>(y) * w + x) * ch];
      for (int c = 0; c < ch; ++c) {
        const double top = (1.0 - wx) * sample(y0, x0, c) + wx * sample(y0, x0 + 1, c);
        const double bottom = (1.0 - wx) * sample(y0 + 1, x0, c) + wx * sample(y0 + 1, x0 + 1, c);
        px[c] = std::clamp((1.0 - wy) * top + wy * bottom, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace metadetect
