#include "metadetect/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

#include "metadetect/image_io.hpp"

namespace metadetect {

namespace {

constexpr char kMagic[4] = {'M', 'C', 'K', 'P'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> weight_blob(const ModelParams& p) {
  std::vector<std::uint8_t> out;
  out.reserve(4 * (p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size()));
  for (const auto* v : {&p.w1, &p.b1, &p.w2, &p.b2})
    for (double x : *v) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  return out;
}

nlohmann::json shape_json(const ModelParams& p) {
  return {{"input", {p.height, p.width, p.channels}},
          {"hidden", p.hidden},
          {"num_classes", p.classes},
          {"layers",
           nlohmann::json::array({{{"name", "w1"}, {"shape", {p.hidden, p.input_size()}}},
                                  {{"name", "b1"}, {"shape", {p.hidden}}},
                                  {{"name", "w2"}, {"shape", {p.classes, p.hidden}}},
                                  {{"name", "b2"}, {"shape", {p.classes}}}})}};
}

}  // namespace

std::string model_checksum(const ModelParams& params) {
  const auto header = shape_json(params).dump();
  std::uint64_t h = fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(header.data()), header.size()));
  h = fnv1a64(weight_blob(params), h);
  return to_hex(h);
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},
          {"augment", cfg.augment},
          {"seed", cfg.seed},
          {"hidden", cfg.hidden},
          {"augment_ranges",
           {{"rotation_deg", cfg.ranges.rotation_deg},
            {"shear_deg", cfg.ranges.shear_deg},
            {"scale_delta", cfg.ranges.scale_delta},
            {"translate_frac", cfg.ranges.translate_frac}}}};
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  ckpt.params.validate();
  nlohmann::json header = shape_json(ckpt.params);
  header["format"] = "float32-le";
  header["checksum"] = model_checksum(ckpt.params);
  header["meta"] = ckpt.meta.is_null() ? nlohmann::json::object() : ckpt.meta;
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  const auto blob = weight_blob(ckpt.params);
  out.insert(out.end(), blob.begin(), blob.end());
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw std::runtime_error("not a model checkpoint");
  const std::uint32_t len = get_u32(bytes, 4);
  if (bytes.size() < 8ull + len) throw std::runtime_error("truncated checkpoint header");
  const auto header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);

  Checkpoint ck;
  ModelParams& p = ck.params;
  const auto& input = header.at("input");
  p = zero_params(input.at(0).get<int>(), input.at(1).get<int>(), input.at(2).get<int>(),
                  header.at("hidden").get<int>(), header.at("num_classes").get<int>());
  std::size_t at = 8 + len;
  const std::size_t expected = 4 * (p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size());
  if (bytes.size() - at != expected) throw std::runtime_error("checkpoint weight blob has the wrong length");
  for (auto* v : {&p.w1, &p.b1, &p.w2, &p.b2}) {
    for (double& x : *v) {
      x = std::bit_cast<float>(get_u32(bytes, at));
      at += 4;
    }
  }
  p.validate();
  if (header.contains("checksum") && header["checksum"].get<std::string>() != model_checksum(p))
    throw std::runtime_error("checkpoint checksum mismatch");
  ck.meta = header.value("meta", nlohmann::json::object());
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_file(path));
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace metadetect
