#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metadetect/attack.hpp"
#include "metadetect/nnet.hpp"
#include "metadetect/synthdata.hpp"

namespace metadetect {

/// Role of an image in the pipeline. Calibration and evaluation images are
/// both drawn from the held-out part of the split, disjointly.
enum class Subset { Train, Calib, Eval };

std::string to_string(Subset subset);
Subset parse_subset(const std::string& name);

struct SubsetFractions {
  double train = 0.8;  // fraction of each class used for training
  double calib = 0.4;  // fraction of each class's held-out images used for calibration

  void validate() const;
};

/// Two-level stratified split: split_indices(data, train, seed) picks the
/// training images, then split_indices(holdout, calib, derive_seed(seed, 1))
/// divides the remainder into calibration and evaluation images.
std::vector<Subset> assign_subsets(std::span<const LabelledImage> data, const SubsetFractions& fractions,
                                   std::uint64_t seed);

struct ManifestEntry {
  std::string path;  // relative to the dataset root
  int label = 0;
  int index = 0;  // position within its class
  Subset subset = Subset::Train;
  std::string checksum;  // FNV-1a 64 of the file bytes, hex
};

struct DatasetManifest {
  DatasetSpec spec;
  SubsetFractions fractions;
  std::uint64_t split_seed = 0;
  std::vector<ManifestEntry> files;
};

/// Writes <root>/<label>/<index>.ppm for every image plus manifest.json.
/// `subsets` is parallel to `data`.
DatasetManifest write_dataset(const std::filesystem::path& root, const DatasetSpec& spec,
                              std::span<const LabelledImage> data, std::span<const Subset> subsets,
                              const SubsetFractions& fractions, std::uint64_t split_seed);

DatasetManifest read_manifest(const std::filesystem::path& root);

/// Loads the images listed in the manifest, optionally restricted to one
/// subset, in manifest order. Checksum mismatches are errors.
Dataset load_dataset(const std::filesystem::path& root, std::optional<Subset> subset = std::nullopt);

/// Writes <i>_clean.mten / <i>_adv.mten plus pairs.json (epsilon, labels,
/// model predictions and flip flags, model checksum).
void write_pairs(const std::filesystem::path& dir, std::span<const ExamplePair> pairs, const ModelParams& params);

std::vector<ExamplePair> load_pairs(const std::filesystem::path& dir);

enum class PairSide { Clean, Adversarial };

/// Image loader for CLI inputs. A directory holding pairs.json yields the
/// requested side; a directory holding manifest.json yields its images
/// (restricted to `subset` when given); any other directory yields every
/// .ppm/.pgm/.mten file in lexicographic order; a file yields itself.
std::vector<Image> load_images(const std::filesystem::path& path, PairSide side = PairSide::Clean,
                               std::optional<Subset> subset = std::nullopt);

}  // namespace metadetect
