#include "metadetect/image_io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace metadetect {

namespace {

class PnmHeaderReader {
 public:
  explicit PnmHeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw std::runtime_error("malformed netpbm header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1'000'000) throw std::runtime_error("netpbm header value too large");
    }
    return static_cast<int>(v);
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw std::runtime_error("malformed netpbm header");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 2;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_pnm(const Image& img) {
  const std::string header = std::string(img.channels() == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.size());
  for (double v : img.pixels()) out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  return out;
}

Image decode_pnm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw std::runtime_error("not a binary PGM/PPM image");
  const int channels = bytes[1] == '6' ? 3 : 1;
  PnmHeaderReader hdr(bytes);
  const int width = hdr.next_int();
  const int height = hdr.next_int();
  const int maxval = hdr.next_int();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    throw std::runtime_error("unsupported netpbm dimensions or maxval");
  const std::size_t start = hdr.raster_start();
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
  if (bytes.size() < start + count * sample_bytes) throw std::runtime_error("truncated netpbm raster");
  std::vector<double> px(count);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned v = bytes[start + i * sample_bytes];
    if (sample_bytes == 2) v = (v << 8) | bytes[start + i * 2 + 1];
    px[i] = std::min(1.0, static_cast<double>(v) / maxval);
  }
  return Image(height, width, channels, std::move(px));
}

std::vector<std::uint8_t> encode_mten(const Image& img) {
  std::vector<std::uint8_t> out{'M', 'T', 'E', 'N'};
  out.reserve(16 + img.size() * 4);
  put_u32(out, static_cast<std::uint32_t>(img.height()));
  put_u32(out, static_cast<std::uint32_t>(img.width()));
  put_u32(out, static_cast<std::uint32_t>(img.channels()));
  for (double v : img.pixels()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Image decode_mten(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "MTEN", 4) != 0)
    throw std::runtime_error("not an MTEN tensor");
  const std::uint32_t h = get_u32(bytes, 4);
  const std::uint32_t w = get_u32(bytes, 8);
  const std::uint32_t c = get_u32(bytes, 12);
  if (h == 0 || w == 0 || h > 65536 || w > 65536 || (c != 1 && c != 3))
    throw std::runtime_error("unsupported MTEN shape");
  const std::size_t count = static_cast<std::size_t>(h) * w * c;
  if (bytes.size() != 16 + count * 4) throw std::runtime_error("MTEN payload length mismatch");
  std::vector<double> px(count);
  for (std::size_t i = 0; i < count; ++i) px[i] = std::bit_cast<float>(get_u32(bytes, 16 + 4 * i));
  clamp_unit(px);
  return Image(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c), std::move(px));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

Image read_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "MTEN", 4) == 0) return decode_mten(bytes);
    return decode_pnm(bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_image(const std::filesystem::path& path, const Image& img) {
  if (path.extension() == ".mten") write_file(path, encode_mten(img));
  else write_file(path, encode_pnm(img));
}

}  // namespace metadetect
