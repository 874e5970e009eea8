#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "metadetect/schedule.hpp"

using namespace metadetect;

TEST_SUITE("schedule") {
  TEST_CASE("schedules follow the four step formulas") {
    const auto rot = schedule(TransformKind::Rotation);
    const auto shr = schedule(TransformKind::Shear);
    const auto scl = schedule(TransformKind::Scale);
    const auto trn = schedule(TransformKind::Translate);
    REQUIRE(rot.size() == 60);
    REQUIRE(shr.size() == 60);
    REQUIRE(scl.size() == 60);
    REQUIRE(trn.size() == 60);
    for (std::size_t k = 0; k < 60; ++k) {
      const double kk = static_cast<double>(k);
      CHECK(rot.params[k] == doctest::Approx(0.5 * (kk + 1)).epsilon(1e-15));
      CHECK(shr.params[k] == doctest::Approx(1.0 + 0.9 * kk).epsilon(1e-15));
      CHECK(scl.params[k] == doctest::Approx(1.0 + 0.05 * (kk + 1)).epsilon(1e-15));
      CHECK(trn.params[k] == doctest::Approx(0.05 + 0.02 * kk).epsilon(1e-15));
    }
  }

  TEST_CASE("first and last magnitudes") {
    CHECK(schedule(TransformKind::Rotation).params.front() == 0.5);
    CHECK(schedule(TransformKind::Rotation).params.back() == 30.0);
    CHECK(schedule(TransformKind::Shear).params.front() == 1.0);
    CHECK(schedule(TransformKind::Shear).params.back() == doctest::Approx(54.1));
    CHECK(schedule(TransformKind::Scale).params.front() == doctest::Approx(1.05));
    CHECK(schedule(TransformKind::Translate).params.back() == doctest::Approx(1.23));
  }

  TEST_CASE("step count is configurable but not zero") {
    CHECK(schedule(TransformKind::Shear, 5).size() == 5);
    CHECK_THROWS_AS(schedule(TransformKind::Shear, 0), std::invalid_argument);
  }

  TEST_CASE("kind names round-trip") {
    for (TransformKind k : kAllKinds) CHECK(parse_kind(to_string(k)) == k);
    CHECK(to_string(TransformKind::Translate) == "translate");
    CHECK_THROWS_AS(parse_kind("Rotation"), std::invalid_argument);
    CHECK_THROWS_AS(parse_kind("blur"), std::invalid_argument);
  }

  TEST_CASE("transform_for maps each magnitude to its transform") {
    const Point c{(32 - 1) / 2.0, (32 - 1) / 2.0};
    // Scale unit u shrinks by 1/u about the center.
    const auto s = transform_for(TransformKind::Scale, 2.0, 32, 32);
    const Point p = s.apply({c.x + 4.0, c.y});
    CHECK(p.x == doctest::Approx(c.x + 2.0));
    // Translation moves by the fraction of each side.
    const auto t = transform_for(TransformKind::Translate, 0.25, 32, 16);
    CHECK(t.e == doctest::Approx(8.0));
    CHECK(t.f == doctest::Approx(4.0));
    const auto r = transform_for(TransformKind::Rotation, 30.0, 32, 32);
    CHECK(r.a == doctest::Approx(std::cos(30.0 * M_PI / 180.0)));
    const auto sh = transform_for(TransformKind::Shear, 10.0, 32, 32);
    CHECK(sh.b == doctest::Approx(std::tan(10.0 * M_PI / 180.0)));
  }
}
