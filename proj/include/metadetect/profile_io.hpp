#pragma once

#include <filesystem>

#include "metadetect/metamorph.hpp"
#include "metadetect/vendor_json.hpp"

namespace metadetect {

/// {kind, steps, params[], N, M[], S[], sample_count, model_checksum,
///  created_with: {eps?, notes, calibration_digests[]}, accuracy?: {clean, adversarial}}
nlohmann::json to_json(const CalibrationProfile& profile);
/// Validates the parsed profile; errors name the offending field.
CalibrationProfile profile_from_json(const nlohmann::json& j);

void save_profile(const std::filesystem::path& path, const CalibrationProfile& profile);
CalibrationProfile load_profile(const std::filesystem::path& path);

}  // namespace metadetect
