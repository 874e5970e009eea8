#include "metadetect/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "metadetect/image_io.hpp"
#include "metadetect/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace metadetect {

namespace {

// Stage tags for derive_seed.
constexpr std::uint64_t kDataTag = 0xda7a;
constexpr std::uint64_t kSplitTag = 0x5b1e;
constexpr std::uint64_t kTrainTag = 0x7a11;

[[noreturn]] void fail(const std::string& field, const std::string& reason) {
  throw std::invalid_argument(field + ": " + reason);
}

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported with their full path.
class ObjectReader {
 public:
  ObjectReader(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    if (!j_ || !j_->contains(key)) return nullptr;
    seen_.insert(key);
    return &j_->at(key);
  }

  ObjectReader child(const std::string& key) { return ObjectReader(find(key), field(key)); }

  template <class T>
  void read(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) fail(field(key), "expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) fail(field(key), "expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) fail(field(key), "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) fail(field(key), "expected a string");
      }
      out = v->get<T>();
    } catch (const json::exception& e) {
      fail(field(key), e.what());
    }
  }

  void read_count(const std::string& key, std::size_t& out) {
    long long v = static_cast<long long>(out);
    read(key, v);
    if (v < 0) fail(field(key), "must be >= 0");
    out = static_cast<std::size_t>(v);
  }

  void read_path(const std::string& key, fs::path& out) {
    std::string s = out.string();
    read(key, s);
    out = s;
  }

  void finish() const {
    if (!j_) return;
    for (const auto& item : j_->items())
      if (!seen_.count(item.key())) fail(field(item.key()), "unknown field");
  }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

void check_unit_open(const std::string& field, double v) {
  if (!(v > 0.0 && v < 1.0)) fail(field, "must be in (0, 1)");
}

}  // namespace

DatasetSpec PipelineConfig::dataset_spec() const {
  DatasetSpec s = dataset;
  s.seed = derive_seed(seed, kDataTag);
  return s;
}

std::uint64_t PipelineConfig::split_seed() const { return derive_seed(seed, kSplitTag); }

TrainConfig PipelineConfig::train_config() const {
  TrainConfig t = train;
  t.seed = derive_seed(seed, kTrainTag);
  return t;
}

fs::path PipelineConfig::resolve(const fs::path& p) const { return p.is_absolute() ? p : workdir / p; }

void PipelineConfig::validate() const {
  if (dataset.num_classes < 2 || dataset.num_classes > kMaxClasses)
    fail("dataset.num_classes", "must be between 2 and 15");
  if (dataset.per_class < 1) fail("dataset.per_class", "must be >= 1");
  if (dataset.image_size < 16) fail("dataset.image_size", "must be >= 16");
  if (dataset.channels != 1 && dataset.channels != 3) fail("dataset.channels", "must be 1 or 3");
  if (!(dataset.noise_std >= 0.0) || !std::isfinite(dataset.noise_std)) fail("dataset.noise_std", "must be >= 0");
  check_unit_open("dataset.train_fraction", fractions.train);
  check_unit_open("dataset.calib_fraction", fractions.calib);

  if (!(train.learning_rate > 0.0) || !std::isfinite(train.learning_rate))
    fail("train.learning_rate", "must be > 0");
  if (train.batch_size < 1) fail("train.batch_size", "must be >= 1");
  if (train.epochs < 1) fail("train.epochs", "must be >= 1");
  if (train.hidden < 1) fail("train.hidden", "must be >= 1");
  const auto& r = train.ranges;
  if (!(r.rotation_deg >= 0.0 && r.rotation_deg <= 180.0))
    fail("train.augment_ranges.rotation_deg", "must be in [0, 180]");
  if (!(r.shear_deg >= 0.0 && r.shear_deg < 90.0)) fail("train.augment_ranges.shear_deg", "must be in [0, 90)");
  if (!(r.scale_delta >= 0.0 && r.scale_delta < 1.0)) fail("train.augment_ranges.scale_delta", "must be in [0, 1)");
  if (!(r.translate_frac >= 0.0 && r.translate_frac <= 1.0))
    fail("train.augment_ranges.translate_frac", "must be in [0, 1]");

  if (!(attack.epsilon > 0.0 && attack.epsilon <= 1.0)) fail("attack.epsilon", "must be in (0, 1]");
  for (std::size_t i = 0; i < attack.sweep.size(); ++i) {
    const std::string f = "attack.sweep[" + std::to_string(i) + "]";
    if (!(attack.sweep[i] > 0.0 && attack.sweep[i] <= 1.0)) fail(f, "must be in (0, 1]");
    if (i > 0 && !(attack.sweep[i] > attack.sweep[i - 1])) fail(f, "sweep must be strictly increasing");
  }

  if (detect.kinds.empty()) fail("detect.kinds", "must name at least one transform");
  for (std::size_t i = 0; i < detect.kinds.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (detect.kinds[i] == detect.kinds[j]) fail("detect.kinds[" + std::to_string(i) + "]", "duplicate kind");
  if (detect.steps < 1) fail("detect.steps", "must be >= 1");
  if (!(detect.multiplier >= 0.0) || !std::isfinite(detect.multiplier)) fail("detect.N", "must be >= 0");

  const std::pair<const char*, const fs::path*> paths_list[] = {{"paths.data_dir", &paths.data_dir},
                                                                {"paths.checkpoint", &paths.checkpoint},
                                                                {"paths.pairs_dir", &paths.pairs_dir},
                                                                {"paths.profiles_dir", &paths.profiles_dir},
                                                                {"paths.reports_dir", &paths.reports_dir}};
  for (const auto& [name, p] : paths_list)
    if (p->empty()) fail(name, "must not be empty");
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  ObjectReader root(&j, "");
  root.read("seed", c.seed);
  root.read("jobs", c.jobs);

  ObjectReader ds = root.child("dataset");
  ds.read("num_classes", c.dataset.num_classes);
  ds.read("per_class", c.dataset.per_class);
  ds.read("image_size", c.dataset.image_size);
  ds.read("channels", c.dataset.channels);
  ds.read("noise_std", c.dataset.noise_std);
  ds.read("train_fraction", c.fractions.train);
  ds.read("calib_fraction", c.fractions.calib);
  ds.finish();

  ObjectReader tr = root.child("train");
  tr.read("learning_rate", c.train.learning_rate);
  tr.read("batch_size", c.train.batch_size);
  tr.read("epochs", c.train.epochs);
  tr.read("augment", c.train.augment);
  tr.read("hidden", c.train.hidden);
  ObjectReader ar = tr.child("augment_ranges");
  ar.read("rotation_deg", c.train.ranges.rotation_deg);
  ar.read("shear_deg", c.train.ranges.shear_deg);
  ar.read("scale_delta", c.train.ranges.scale_delta);
  ar.read("translate_frac", c.train.ranges.translate_frac);
  ar.finish();
  tr.finish();

  ObjectReader at = root.child("attack");
  at.read("epsilon", c.attack.epsilon);
  if (const json* s = at.find("sweep")) {
    if (!s->is_array()) fail("attack.sweep", "expected an array of numbers");
    c.attack.sweep.clear();
    for (std::size_t i = 0; i < s->size(); ++i) {
      if (!(*s)[i].is_number()) fail("attack.sweep[" + std::to_string(i) + "]", "expected a number");
      c.attack.sweep.push_back((*s)[i].get<double>());
    }
  }
  at.read_count("pairs", c.attack.pairs);
  at.finish();

  ObjectReader dt = root.child("detect");
  if (const json* k = dt.find("kinds")) {
    if (!k->is_array()) fail("detect.kinds", "expected an array of transform names");
    c.detect.kinds.clear();
    for (std::size_t i = 0; i < k->size(); ++i) {
      const std::string f = "detect.kinds[" + std::to_string(i) + "]";
      if (!(*k)[i].is_string()) fail(f, "expected a string");
      try {
        c.detect.kinds.push_back(parse_kind((*k)[i].get<std::string>()));
      } catch (const std::invalid_argument& e) {
        fail(f, e.what());
      }
    }
  }
  dt.read_count("steps", c.detect.steps);
  dt.read("N", c.detect.multiplier);
  dt.finish();

  ObjectReader pa = root.child("paths");
  pa.read_path("data_dir", c.paths.data_dir);
  pa.read_path("checkpoint", c.paths.checkpoint);
  pa.read_path("pairs_dir", c.paths.pairs_dir);
  pa.read_path("profiles_dir", c.paths.profiles_dir);
  pa.read_path("reports_dir", c.paths.reports_dir);
  pa.finish();

  root.finish();
  c.validate();
  return c;
}

json to_json(const PipelineConfig& c) {
  json kinds = json::array();
  for (TransformKind k : c.detect.kinds) kinds.push_back(to_string(k));
  return {{"seed", c.seed},
          {"jobs", c.jobs},
          {"dataset",
           {{"num_classes", c.dataset.num_classes},
            {"per_class", c.dataset.per_class},
            {"image_size", c.dataset.image_size},
            {"channels", c.dataset.channels},
            {"noise_std", c.dataset.noise_std},
            {"train_fraction", c.fractions.train},
            {"calib_fraction", c.fractions.calib}}},
          {"train",
           {{"learning_rate", c.train.learning_rate},
            {"batch_size", c.train.batch_size},
            {"epochs", c.train.epochs},
            {"augment", c.train.augment},
            {"hidden", c.train.hidden},
            {"augment_ranges",
             {{"rotation_deg", c.train.ranges.rotation_deg},
              {"shear_deg", c.train.ranges.shear_deg},
              {"scale_delta", c.train.ranges.scale_delta},
              {"translate_frac", c.train.ranges.translate_frac}}}}},
          {"attack", {{"epsilon", c.attack.epsilon}, {"sweep", c.attack.sweep}, {"pairs", c.attack.pairs}}},
          {"detect", {{"kinds", kinds}, {"steps", c.detect.steps}, {"N", c.detect.multiplier}}},
          {"paths",
           {{"data_dir", c.paths.data_dir.string()},
            {"checkpoint", c.paths.checkpoint.string()},
            {"pairs_dir", c.paths.pairs_dir.string()},
            {"profiles_dir", c.paths.profiles_dir.string()},
            {"reports_dir", c.paths.reports_dir.string()}}}};
}

PipelineConfig load_config(const fs::path& path) {
  const auto bytes = read_file(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace metadetect
