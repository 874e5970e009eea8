#include "metadetect/dataset_io.hpp"

#include <algorithm>
#include <stdexcept>

#include "metadetect/checkpoint.hpp"
#include "metadetect/image_io.hpp"
#include "metadetect/rng.hpp"
#include "metadetect/vendor_json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace metadetect {

namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kPairsName = "pairs.json";

std::string checksum_of(const std::vector<std::uint8_t>& bytes) { return to_hex(fnv1a64(bytes)); }

json parse_json_file(const fs::path& path) {
  const auto bytes = read_file(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

json spec_to_json(const DatasetSpec& s) {
  return {{"num_classes", s.num_classes}, {"per_class", s.per_class}, {"image_size", s.image_size},
          {"channels", s.channels},       {"seed", s.seed},           {"noise_std", s.noise_std}};
}

DatasetSpec spec_from_json(const json& j) {
  DatasetSpec s;
  s.num_classes = j.at("num_classes").get<int>();
  s.per_class = j.at("per_class").get<int>();
  s.image_size = j.at("image_size").get<int>();
  s.channels = j.at("channels").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.noise_std = j.at("noise_std").get<double>();
  return s;
}

bool is_image_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".ppm" || ext == ".pgm" || ext == ".pnm" || ext == ".mten";
}

}  // namespace

std::string to_string(Subset subset) {
  switch (subset) {
    case Subset::Train: return "train";
    case Subset::Calib: return "calib";
    case Subset::Eval: return "eval";
  }
  throw std::invalid_argument("unknown subset");
}

Subset parse_subset(const std::string& name) {
  if (name == "train") return Subset::Train;
  if (name == "calib") return Subset::Calib;
  if (name == "eval") return Subset::Eval;
  throw std::invalid_argument("unknown subset '" + name + "' (expected train, calib or eval)");
}

void SubsetFractions::validate() const {
  if (!(train > 0.0 && train < 1.0)) throw std::invalid_argument("train_fraction: must be in (0, 1)");
  if (!(calib > 0.0 && calib < 1.0)) throw std::invalid_argument("calib_fraction: must be in (0, 1)");
}

std::vector<Subset> assign_subsets(std::span<const LabelledImage> data, const SubsetFractions& fractions,
                                   std::uint64_t seed) {
  fractions.validate();
  std::vector<Subset> out(data.size(), Subset::Eval);
  const auto outer = split_indices(data, fractions.train, seed);
  for (std::size_t i : outer.first) out[i] = Subset::Train;
  const Dataset holdout = select(data, outer.second);
  const auto inner = split_indices(holdout, fractions.calib, derive_seed(seed, 1));
  for (std::size_t i : inner.first) out[outer.second[i]] = Subset::Calib;
  return out;
}

DatasetManifest write_dataset(const fs::path& root, const DatasetSpec& spec, std::span<const LabelledImage> data,
                              std::span<const Subset> subsets, const SubsetFractions& fractions,
                              std::uint64_t split_seed) {
  if (subsets.size() != data.size()) throw std::invalid_argument("write_dataset: subsets/data size mismatch");
  DatasetManifest m{spec, fractions, split_seed, {}};
  std::vector<int> next_index(static_cast<std::size_t>(spec.num_classes), 0);
  json files = json::array();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int label = data[i].label;
    if (label < 0 || label >= spec.num_classes) throw std::invalid_argument("write_dataset: label out of range");
    ManifestEntry e;
    e.label = label;
    e.index = next_index[static_cast<std::size_t>(label)]++;
    e.subset = subsets[i];
    e.path = std::to_string(label) + "/" + std::to_string(e.index) + ".ppm";
    const auto bytes = encode_pnm(data[i].image);
    write_file(root / e.path, bytes);
    e.checksum = checksum_of(bytes);
    files.push_back({{"path", e.path},
                     {"label", e.label},
                     {"index", e.index},
                     {"subset", to_string(e.subset)},
                     {"checksum", e.checksum}});
    m.files.push_back(std::move(e));
  }
  json j{{"spec", spec_to_json(spec)},
         {"train_fraction", fractions.train},
         {"calib_fraction", fractions.calib},
         {"split_seed", split_seed},
         {"files", files}};
  write_text(root / kManifestName, j.dump(2) + "\n");
  return m;
}

DatasetManifest read_manifest(const fs::path& root) {
  const fs::path path = root / kManifestName;
  const json j = parse_json_file(path);
  DatasetManifest m;
  try {
    m.spec = spec_from_json(j.at("spec"));
    m.fractions.train = j.at("train_fraction").get<double>();
    m.fractions.calib = j.at("calib_fraction").get<double>();
    m.split_seed = j.at("split_seed").get<std::uint64_t>();
    for (const auto& f : j.at("files")) {
      ManifestEntry e;
      e.path = f.at("path").get<std::string>();
      e.label = f.at("label").get<int>();
      e.index = f.at("index").get<int>();
      e.subset = parse_subset(f.at("subset").get<std::string>());
      e.checksum = f.at("checksum").get<std::string>();
      m.files.push_back(std::move(e));
    }
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  m.spec.validate();
  return m;
}

Dataset load_dataset(const fs::path& root, std::optional<Subset> subset) {
  const DatasetManifest m = read_manifest(root);
  Dataset out;
  for (const auto& e : m.files) {
    if (subset && e.subset != *subset) continue;
    const auto bytes = read_file(root / e.path);
    if (checksum_of(bytes) != e.checksum) throw std::runtime_error((root / e.path).string() + ": checksum mismatch");
    out.push_back({decode_pnm(bytes), e.label});
  }
  return out;
}

void write_pairs(const fs::path& dir, std::span<const ExamplePair> pairs, const ModelParams& params) {
  json entries = json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const std::string clean_name = std::to_string(i) + "_clean.mten";
    const std::string adv_name = std::to_string(i) + "_adv.mten";
    write_file(dir / clean_name, encode_mten(p.clean.image));
    write_file(dir / adv_name, encode_mten(p.adversarial));
    const int clean_pred = forward(params, p.clean.image).label;
    const int adv_pred = forward(params, p.adversarial).label;
    entries.push_back({{"clean", clean_name},
                       {"adversarial", adv_name},
                       {"label", p.clean.label},
                       {"epsilon", p.epsilon},
                       {"clean_prediction", clean_pred},
                       {"adversarial_prediction", adv_pred},
                       {"flipped", clean_pred != adv_pred}});
  }
  json j{{"count", pairs.size()},
         {"epsilon", pairs.empty() ? 0.0 : pairs.front().epsilon},
         {"model_checksum", model_checksum(params)},
         {"pairs", entries}};
  write_text(dir / kPairsName, j.dump(2) + "\n");
}

std::vector<ExamplePair> load_pairs(const fs::path& dir) {
  const json j = parse_json_file(dir / kPairsName);
  std::vector<ExamplePair> out;
  try {
    for (const auto& e : j.at("pairs")) {
      ExamplePair p;
      p.clean.image = read_image(dir / e.at("clean").get<std::string>());
      p.clean.label = e.at("label").get<int>();
      p.adversarial = read_image(dir / e.at("adversarial").get<std::string>());
      p.epsilon = e.at("epsilon").get<double>();
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error((dir / kPairsName).string() + ": " + e.what());
  }
  return out;
}

std::vector<Image> load_images(const fs::path& path, PairSide side, std::optional<Subset> subset) {
  if (!fs::exists(path)) throw std::runtime_error(path.string() + ": no such file or directory");
  std::vector<Image> out;
  if (!fs::is_directory(path)) {
    out.push_back(read_image(path));
    return out;
  }
  if (fs::exists(path / kPairsName)) {
    for (auto& p : load_pairs(path)) out.push_back(side == PairSide::Clean ? std::move(p.clean.image) : std::move(p.adversarial));
    return out;
  }
  if (fs::exists(path / kManifestName)) return images_of(load_dataset(path, subset));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path))
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(read_image(f));
  return out;
}

}  // namespace metadetect
