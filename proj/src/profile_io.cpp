#include "metadetect/profile_io.hpp"

#include <stdexcept>

#include "metadetect/image_io.hpp"

namespace metadetect {

nlohmann::json to_json(const CalibrationProfile& p) {
  nlohmann::json created{{"notes", p.created_with.notes},
                         {"calibration_digests", p.created_with.calibration_digests}};
  if (p.created_with.epsilon) created["eps"] = *p.created_with.epsilon;
  nlohmann::json j{{"kind", to_string(p.kind)},
                   {"steps", p.steps()},
                   {"params", p.schedule.params},
                   {"N", p.multiplier},
                   {"M", p.mean},
                   {"S", p.stddev},
                   {"sample_count", p.sample_count},
                   {"model_checksum", p.model_checksum},
                   {"created_with", created}};
  if (p.accuracy) j["accuracy"] = {{"clean", p.accuracy->clean}, {"adversarial", p.accuracy->adversarial}};
  return j;
}

CalibrationProfile profile_from_json(const nlohmann::json& j) {
  auto field = [&](const char* name) -> const nlohmann::json& {
    if (!j.contains(name)) throw std::invalid_argument(std::string("profile: missing field '") + name + "'");
    return j.at(name);
  };
  CalibrationProfile p;
  try {
    p.kind = parse_kind(field("kind").get<std::string>());
    p.schedule.kind = p.kind;
    p.schedule.params = field("params").get<std::vector<double>>();
    if (field("steps").get<std::size_t>() != p.schedule.size())
      throw std::invalid_argument("profile: 'steps' does not match 'params'");
    p.multiplier = field("N").get<double>();
    p.mean = field("M").get<std::vector<double>>();
    p.stddev = field("S").get<std::vector<double>>();
    p.sample_count = field("sample_count").get<std::size_t>();
    p.model_checksum = field("model_checksum").get<std::string>();
    if (j.contains("created_with")) {
      const auto& c = j.at("created_with");
      if (c.contains("eps")) p.created_with.epsilon = c.at("eps").get<double>();
      p.created_with.notes = c.value("notes", "");
      if (c.contains("calibration_digests"))
        p.created_with.calibration_digests = c.at("calibration_digests").get<std::vector<std::string>>();
    }
    if (j.contains("accuracy"))
      p.accuracy = RelationAccuracy{j.at("accuracy").at("clean").get<double>(),
                                    j.at("accuracy").at("adversarial").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("profile: ") + e.what());
  }
  p.validate();
  return p;
}

void save_profile(const std::filesystem::path& path, const CalibrationProfile& profile) {
  write_text(path, to_json(profile).dump(2) + "\n");
}

CalibrationProfile load_profile(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return profile_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace metadetect
