#pragma once

#include <filesystem>
#include <string>

#include "metadetect/nnet.hpp"
#include "vendor_json.hpp"

namespace metadetect {

/// Checkpoint layout:
///   bytes 0..3   magic "MCKP"
///   bytes 4..7   u32 LE length L of the JSON header
///   next L bytes UTF-8 JSON header (shapes, layer order, config echo)
///   remainder    float32 LE weights in layer order w1, b1, w2, b2
///                (w1 is hidden x input row-major, w2 is classes x hidden)
struct Checkpoint {
  ModelParams params;
  nlohmann::json meta;  // free-form echo, stored under "meta" in the header
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// FNV-1a 64 of the shape and the float32 weight blob, as 16 hex digits.
std::string model_checksum(const ModelParams& params);

nlohmann::json to_json(const TrainConfig& cfg);

}  // namespace metadetect
