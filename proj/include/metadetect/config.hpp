#pragma once

#include <cstdint>
#include <filesystem>
#include <iterator>
#include <string>
#include <vector>

#include "metadetect/dataset_io.hpp"
#include "metadetect/nnet.hpp"
#include "metadetect/schedule.hpp"
#include "metadetect/synthdata.hpp"
#include "metadetect/vendor_json.hpp"

namespace metadetect {

/// Relative paths are resolved against PipelineConfig::workdir.
struct PathsConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path checkpoint = "model.ckpt";
  std::filesystem::path pairs_dir = "pairs";
  std::filesystem::path profiles_dir = "profiles";
  std::filesystem::path reports_dir = "reports";
};

struct AttackConfig {
  double epsilon = kDefaultPairEpsilon;
  std::vector<double> sweep{0.01, 0.02, 0.05, 0.1, 0.2, 0.3};
  std::size_t pairs = 0;  // 0: one pair per evaluation image
};

struct DetectConfig {
  std::vector<TransformKind> kinds{std::begin(kAllKinds), std::end(kAllKinds)};
  std::size_t steps = kDefaultSteps;
  double multiplier = 1.5;
};

/// Everything a pipeline run depends on. Stage seeds are not configured
/// individually: each is derive_seed(seed, <stage tag>).
struct PipelineConfig {
  std::uint64_t seed = 1;
  DatasetSpec dataset{};  // dataset.seed is overwritten by the derived stage seed
  SubsetFractions fractions{};
  TrainConfig train{};  // train.seed likewise
  AttackConfig attack{};
  DetectConfig detect{};
  PathsConfig paths{};
  std::filesystem::path workdir = ".";
  int jobs = 0;  // <= 0: all hardware threads

  DatasetSpec dataset_spec() const;
  std::uint64_t split_seed() const;
  TrainConfig train_config() const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;

  /// Throws std::invalid_argument("<field.path>: <reason>").
  void validate() const;
};

/// Missing fields keep their defaults; unknown fields are rejected so typos
/// do not silently fall back to defaults.
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& cfg);

/// Parses and validates a JSON config file.
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace metadetect
