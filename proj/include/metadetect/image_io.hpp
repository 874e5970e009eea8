#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "metadetect/image.hpp"

namespace metadetect {

// Binary netpbm: P6 (3 channels) / P5 (1 channel), 8-bit, value = round(255*v).
std::vector<std::uint8_t> encode_pnm(const Image& img);
Image decode_pnm(const std::vector<std::uint8_t>& bytes);

// MTEN tensor container: "MTEN", u32 LE height, width, channels, then
// height*width*channels float32 LE values. Decoding clamps into [0,1].
std::vector<std::uint8_t> encode_mten(const Image& img);
Image decode_mten(const std::vector<std::uint8_t>& bytes);

/// Picks the codec from the file magic ("MTEN", "P5", "P6").
Image read_image(const std::filesystem::path& path);
/// Picks the codec from the extension: .mten, otherwise netpbm.
void write_image(const std::filesystem::path& path, const Image& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace metadetect
