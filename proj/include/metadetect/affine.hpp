#pragma once

#include "metadetect/image.hpp"

namespace metadetect {

struct Point {
  double x = 0.0;  // column
  double y = 0.0;  // row
};

/// 2x3 affine map  x' = a*x + b*y + e,  y' = c*x + d*y + f.
/// Coordinates are in pixels with x along columns and y along rows.
struct AffineTransform {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
  double e = 0.0, f = 0.0;

  double determinant() const { return a * d - b * c; }
  bool invertible() const;
  Point apply(Point p) const { return {a * p.x + b * p.y + e, c * p.x + d * p.y + f}; }

  friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

/// Minimum |det| of the linear part accepted by inverse() and warp().
inline constexpr double kMinDeterminant = 1e-9;

AffineTransform identity();

/// Transform equivalent to applying `first`, then `second`.
AffineTransform compose(const AffineTransform& first, const AffineTransform& second);

/// Throws std::invalid_argument when the linear part is singular.
AffineTransform inverse(const AffineTransform& t);

// The constructors below anchor the linear part at the image center
// ((w-1)/2, (h-1)/2). Angles are in degrees.
AffineTransform rotation_about_center(double angle_deg, int width, int height);
/// Horizontal shear x' = x + tan(angle)*(y - cy). Rejects |angle| >= 90.
AffineTransform shear_about_center(double angle_deg, int width, int height);
/// Rejects factor <= 0.
AffineTransform scale_about_center(double factor, int width, int height);
/// Shift of (frac_x*width, frac_y*height) pixels.
AffineTransform translation(double frac_x, double frac_y, int width, int height);

enum class Padding { Zero, Edge };

/// Inverse-mapped bilinear resampling onto a canvas of the input's size.
/// Samples falling outside the source read 0 (Zero) or the nearest border
/// pixel (Edge).
Image warp(const Image& img, const AffineTransform& t, Padding padding = Padding::Zero);

}  // namespace metadetect
