#include "metadetect/schedule.hpp"

#include <stdexcept>

namespace metadetect {

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Rotation: return "rotation";
    case TransformKind::Shear: return "shear";
    case TransformKind::Scale: return "scale";
    case TransformKind::Translate: return "translate";
  }
  throw std::invalid_argument("unknown transform kind");
}

TransformKind parse_kind(std::string_view name) {
  for (TransformKind k : kAllKinds)
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown transform kind '" + std::string(name) + "'");
}

TransformSchedule schedule(TransformKind kind, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("schedule needs at least one step");
  TransformSchedule s{kind, {}};
  s.params.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double k = static_cast<double>(i);
    switch (kind) {
      case TransformKind::Rotation: s.params.push_back(0.5 * (k + 1.0)); break;
      case TransformKind::Shear: s.params.push_back(1.0 + 0.9 * k); break;
      case TransformKind::Scale: s.params.push_back(1.0 + 0.05 * (k + 1.0)); break;
      case TransformKind::Translate: s.params.push_back(0.05 + 0.02 * k); break;
    }
  }
  return s;
}

AffineTransform transform_for(TransformKind kind, double param, int width, int height) {
  switch (kind) {
    case TransformKind::Rotation: return rotation_about_center(param, width, height);
    case TransformKind::Shear: return shear_about_center(param, width, height);
    case TransformKind::Scale: return scale_about_center(1.0 / param, width, height);
    case TransformKind::Translate: return translation(param, param, width, height);
  }
  throw std::invalid_argument("unknown transform kind");
}

}  // namespace metadetect
