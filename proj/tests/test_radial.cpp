#include <catch2/catch_amalgamated.hpp>

#include "waynav/radial.hpp"
#include "waynav/rng.hpp"

using namespace waynav;
using Catch::Approx;

TEST_CASE("cell_center formula", "[radial]") {
  const RadialGrid g;
  const PolarPoint p0 = cell_center(g, {0, 0});
  CHECK(p0.bearing_deg == Approx(1.5));
  CHECK(p0.range_m == Approx(0.125));

  const PolarPoint p1 = cell_center(g, {60, 11});
  CHECK(p1.bearing_deg == Approx(181.5));
  CHECK(p1.range_m == Approx(2.875));

  const PolarPoint p2 = cell_center(g, {119, 0});
  CHECK(p2.bearing_deg == Approx(358.5));
  CHECK(p2.range_m == Approx(0.125));

  CHECK_THROWS_AS(cell_center(g, {120, 0}), std::out_of_range);
  CHECK_THROWS_AS(cell_center(g, {0, 12}), std::out_of_range);
  CHECK_THROWS_AS(cell_center(g, {-1, 0}), std::out_of_range);
}

TEST_CASE("point_to_cell half-open radial intervals", "[radial]") {
  const RadialGrid g;
  // 1.0 lies in (0.75, 1.0] -> bin 3.
  const auto c = point_to_cell(g, {0.0, 1.0});
  REQUIRE(c.has_value());
  CHECK(c->a == 0);
  CHECK(c->j == 3);

  const auto wrap = point_to_cell(g, {359.9, 0.1});
  REQUIRE(wrap.has_value());
  CHECK(wrap->a == 119);
  CHECK(wrap->j == 0);

  CHECK_FALSE(point_to_cell(g, {0.0, 3.1}).has_value());

  const auto zero = point_to_cell(g, {42.0, 0.0});
  REQUIRE(zero.has_value());
  CHECK(zero->j == 0);

  const auto max = point_to_cell(g, {0.0, 3.0});
  REQUIRE(max.has_value());
  CHECK(max->j == 11);

  CHECK_THROWS_AS(point_to_cell(g, {0.0, -0.5}), std::invalid_argument);
}

TEST_CASE("point_to_cell(cell_center) round-trips all 1440 cells", "[radial]") {
  const RadialGrid g;
  for (int a = 0; a < g.num_angles; ++a) {
    for (int j = 0; j < g.num_radii; ++j) {
      const auto back = point_to_cell(g, cell_center(g, {a, j}));
      REQUIRE(back.has_value());
      CHECK(back->a == a);
      CHECK(back->j == j);
    }
  }
}

TEST_CASE("local_to_world rigid transform", "[radial]") {
  const Vec2 a = local_to_world({0, 0, 0}, {1, 0});
  CHECK(a.x == Approx(1.0));
  CHECK(a.y == Approx(0.0).margin(1e-12));

  const Vec2 b = local_to_world({0, 0, 90}, {1, 0});
  CHECK(b.x == Approx(0.0).margin(1e-12));
  CHECK(b.y == Approx(1.0));

  const Vec2 c = local_to_world({2, 3, 180}, {1, 0});
  CHECK(c.x == Approx(1.0));
  CHECK(c.y == Approx(3.0));
}

TEST_CASE("local/world transforms invert within 1e-9", "[radial]") {
  Rng rng(99);
  for (int i = 0; i < 500; ++i) {
    const AgentPose pose{rng.uniform(-10, 10), rng.uniform(-10, 10),
                         rng.uniform(0, 360)};
    const LocalPoint p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const LocalPoint back = world_to_local(pose, local_to_world(pose, p));
    CHECK(std::abs(back.x - p.x) < 1e-9);
    CHECK(std::abs(back.y - p.y) < 1e-9);
  }
}

TEST_CASE("bearings normalize into [0, 360)", "[radial]") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double d = rng.uniform(-1000, 1000);
    const double n = normalize_deg(d);
    CHECK(n >= 0.0);
    CHECK(n < 360.0);
    const double s = normalize_signed_deg(d);
    CHECK(s > -180.0);
    CHECK(s <= 180.0);
  }
  for (int i = 0; i < 200; ++i) {
    const LocalPoint p{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const PolarPoint pp = local_to_polar(p);
    CHECK(pp.bearing_deg >= 0.0);
    CHECK(pp.bearing_deg < 360.0);
    CHECK(pp.range_m >= 0.0);
  }
}

TEST_CASE("grid invariants are enforced", "[radial]") {
  RadialGrid g;
  CHECK_NOTHROW(g.validate());
  g.num_angles = 100;  // 100 * 3 != 360
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = RadialGrid{};
  g.max_range_m = 2.0;  // 12 * 0.25 != 2.0
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = RadialGrid{};
  g.radial_step_m = -0.25;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  RadialGrid coarse{36, 8, 10.0, 0.5, 4.0};
  CHECK_NOTHROW(coarse.validate());
}
