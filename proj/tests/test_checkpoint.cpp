#include <doctest.h>

#include <stdexcept>

#include "metadetect/checkpoint.hpp"
#include "metadetect/image_io.hpp"
#include "test_util.hpp"

using namespace metadetect;

namespace {

ModelParams rounded_model(std::uint64_t seed) {
  ModelParams p = init_params(4, 5, 3, 6, 3, seed);
  round_to_float32(p);
  return p;
}

}  // namespace

TEST_SUITE("checkpoint") {
  TEST_CASE("encode/decode round-trips float32 weights exactly") {
    const ModelParams p = rounded_model(1);
    const nlohmann::json meta{{"note", "x"}, {"seed", 9}};
    const Checkpoint back = decode_checkpoint(encode_checkpoint({p, meta}));
    CHECK(back.params == p);
    CHECK(back.meta == meta);
    CHECK(model_checksum(back.params) == model_checksum(p));
  }

  TEST_CASE("encoding is deterministic") {
    const ModelParams p = rounded_model(2);
    CHECK(encode_checkpoint({p, {}}) == encode_checkpoint({p, {}}));
  }

  TEST_CASE("layout: magic, header length, json header, weight blob") {
    const ModelParams p = rounded_model(3);
    const auto bytes = encode_checkpoint({p, {}});
    REQUIRE(bytes.size() > 8);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "MCKP");
    const std::uint32_t len = bytes[4] | bytes[5] << 8 | bytes[6] << 16 | static_cast<std::uint32_t>(bytes[7]) << 24;
    const auto header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
    CHECK(header.at("hidden") == 6);
    CHECK(header.at("num_classes") == 3);
    CHECK(header.at("input") == nlohmann::json::array({4, 5, 3}));
    CHECK(header.at("format") == "float32-le");
    CHECK(header.at("layers").size() == 4);
    const std::size_t weights = p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size();
    CHECK(bytes.size() == 8 + len + 4 * weights);
  }

  TEST_CASE("checksum tracks the weights") {
    ModelParams p = rounded_model(4);
    const std::string before = model_checksum(p);
    p.b2[0] += 0.5;
    CHECK(model_checksum(p) != before);
    CHECK(model_checksum(p).size() == 16);
  }

  TEST_CASE("corrupted and truncated files are rejected") {
    const ModelParams p = rounded_model(5);
    auto bytes = encode_checkpoint({p, {}});
    auto flipped = bytes;
    flipped.back() ^= 0x40;
    CHECK_THROWS_WITH_AS(decode_checkpoint(flipped), doctest::Contains("checksum"), std::runtime_error);
    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    CHECK_THROWS_AS(decode_checkpoint(truncated), std::runtime_error);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(bad_magic), std::runtime_error);
  }

  TEST_CASE("save and load through the filesystem") {
    testutil::TempDir dir("ckpt");
    const ModelParams p = rounded_model(6);
    TrainConfig cfg;
    cfg.seed = 77;
    save_checkpoint(dir / "m/model.ckpt", {p, {{"train", to_json(cfg)}}});
    const Checkpoint back = load_checkpoint(dir / "m/model.ckpt");
    CHECK(back.params == p);
    CHECK(back.meta.at("train").at("seed") == 77);
    CHECK(back.meta.at("train").at("learning_rate") == 0.001);
    CHECK_THROWS_WITH_AS(load_checkpoint(dir / "none.ckpt"), doctest::Contains("none.ckpt"), std::runtime_error);
  }
}
