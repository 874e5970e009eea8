#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "metadetect/affine.hpp"

namespace metadetect {

enum class TransformKind { Rotation, Shear, Scale, Translate };

inline constexpr TransformKind kAllKinds[] = {TransformKind::Rotation, TransformKind::Shear,
                                              TransformKind::Scale, TransformKind::Translate};

/// Default number of incremental steps per relation.
inline constexpr std::size_t kDefaultSteps = 60;

std::string to_string(TransformKind kind);
/// Accepts "rotation", "shear", "scale", "translate" (case-sensitive).
TransformKind parse_kind(std::string_view name);

/// Per-step transform magnitudes. Units depend on the kind:
///   Rotation  - degrees, 0.5*(k+1)
///   Shear     - degrees, 1 + 0.9*k
///   Scale     - zoom-out unit u = 1 + 0.05*(k+1); the image is scaled by 1/u
///   Translate - fraction of width and height, 0.05 + 0.02*k on both axes
struct TransformSchedule {
  TransformKind kind = TransformKind::Rotation;
  std::vector<double> params;

  std::size_t size() const { return params.size(); }
};

/// Throws std::invalid_argument when steps == 0.
TransformSchedule schedule(TransformKind kind, std::size_t steps = kDefaultSteps);

/// The concrete transform for one schedule magnitude on a width x height image.
AffineTransform transform_for(TransformKind kind, double param, int width, int height);

}  // namespace metadetect
