#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "metadetect/dataset_io.hpp"
#include "metadetect/image_io.hpp"
#include "test_util.hpp"

using namespace metadetect;

namespace {

DatasetSpec tiny_spec() {
  DatasetSpec spec;
  spec.num_classes = 3;
  spec.per_class = 10;
  spec.image_size = 16;
  return spec;
}

double max_abs_diff(const Image& a, const Image& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.pixels()[i] - b.pixels()[i]));
  return worst;
}

}  // namespace

TEST_SUITE("dataset_io") {
  TEST_CASE("subset names") {
    for (Subset s : {Subset::Train, Subset::Calib, Subset::Eval}) CHECK(parse_subset(to_string(s)) == s);
    CHECK_THROWS_AS(parse_subset("test"), std::invalid_argument);
  }

  TEST_CASE("subsets are disjoint, stratified and seed-determined") {
    const DatasetSpec spec = tiny_spec();
    const Dataset data = generate(spec);
    const SubsetFractions fr{0.6, 0.5};
    const auto a = assign_subsets(data, fr, 3);
    CHECK(a == assign_subsets(data, fr, 3));
    CHECK(a != assign_subsets(data, fr, 4));
    for (int c = 0; c < spec.num_classes; ++c) {
      int train = 0, calib = 0, eval = 0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].label != c) continue;
        train += a[i] == Subset::Train;
        calib += a[i] == Subset::Calib;
        eval += a[i] == Subset::Eval;
      }
      CHECK(train == 6);
      CHECK(calib == 2);
      CHECK(eval == 2);
    }
    CHECK_THROWS_AS(assign_subsets(data, {1.0, 0.5}, 1), std::invalid_argument);
    CHECK_THROWS_AS(assign_subsets(data, {0.5, 0.0}, 1), std::invalid_argument);
  }

  TEST_CASE("dataset directory round trip") {
    testutil::TempDir dir("dataset");
    const DatasetSpec spec = tiny_spec();
    const Dataset data = generate(spec);
    const SubsetFractions fr{0.6, 0.5};
    const auto subsets = assign_subsets(data, fr, 9);
    const auto written = write_dataset(dir.path(), spec, data, subsets, fr, 9);
    REQUIRE(written.files.size() == data.size());
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    CHECK(std::filesystem::exists(dir / "2/9.ppm"));

    const auto m = read_manifest(dir.path());
    CHECK(m.split_seed == 9);
    CHECK(m.fractions.train == 0.6);
    CHECK(m.spec.per_class == 10);
    std::set<std::string> paths;
    for (const auto& e : m.files) paths.insert(e.path);
    CHECK(paths.size() == data.size());

    const Dataset all = load_dataset(dir.path());
    REQUIRE(all.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK(all[i].label == data[i].label);
      CHECK(max_abs_diff(all[i].image, data[i].image) <= 0.5 / 255.0 + 1e-12);
    }
    CHECK(load_dataset(dir.path(), Subset::Calib).size() == 6);
    CHECK(load_dataset(dir.path(), Subset::Eval).size() == 6);
    CHECK(load_images(dir.path(), PairSide::Clean, Subset::Train).size() == 18);

    std::ofstream(dir / "0/0.ppm", std::ios::binary | std::ios::app) << "x";
    CHECK_THROWS_WITH_AS(load_dataset(dir.path()), doctest::Contains("checksum"), std::runtime_error);
  }

  TEST_CASE("dataset files are byte-identical across runs") {
    testutil::TempDir a("ds_a"), b("ds_b");
    const DatasetSpec spec = tiny_spec();
    const Dataset data = generate(spec);
    const auto subsets = assign_subsets(data, {}, 1);
    write_dataset(a.path(), spec, data, subsets, {}, 1);
    write_dataset(b.path(), spec, generate(spec), subsets, {}, 1);
    CHECK(read_file(a / "manifest.json") == read_file(b / "manifest.json"));
    CHECK(read_file(a / "1/3.ppm") == read_file(b / "1/3.ppm"));
  }

  TEST_CASE("pairs round trip exactly through float32 files") {
    testutil::TempDir dir("pairs");
    const DatasetSpec spec = tiny_spec();
    const Dataset data = generate(spec);
    ModelParams p = init_params(16, 16, 3, 8, 3, 4);
    round_to_float32(p);
    auto pairs = build_pairs(p, data, 0.05, 4);
    for (auto& pr : pairs) {
      for (double& v : pr.clean.image.pixels()) v = static_cast<float>(v);
      for (double& v : pr.adversarial.pixels()) v = static_cast<float>(v);
    }
    write_pairs(dir.path(), pairs, p);
    const auto back = load_pairs(dir.path());
    REQUIRE(back.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(back[i].clean.image == pairs[i].clean.image);
      CHECK(back[i].adversarial == pairs[i].adversarial);
      CHECK(back[i].clean.label == pairs[i].clean.label);
      CHECK(back[i].epsilon == 0.05);
    }
    const auto adv = load_images(dir.path(), PairSide::Adversarial);
    REQUIRE(adv.size() == 4);
    CHECK(adv[2] == pairs[2].adversarial);
  }

  TEST_CASE("plain directories and single files") {
    testutil::TempDir dir("plain");
    SplitMix64 rng(3);
    const Image a = testutil::random_image(rng, 4, 4, 3);
    const Image b = testutil::random_image(rng, 4, 4, 3);
    write_image(dir / "b.mten", b);
    write_image(dir / "a.ppm", a);
    write_text(dir / "notes.txt", "skip me");
    const auto images = load_images(dir.path());
    REQUIRE(images.size() == 2);
    CHECK(max_abs_diff(images[0], a) <= 0.5 / 255.0 + 1e-12);
    CHECK(load_images(dir / "b.mten").size() == 1);
    CHECK_THROWS_AS(load_images(dir / "missing"), std::runtime_error);
  }
}
