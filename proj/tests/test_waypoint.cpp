#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"
#include "waynav/waypoint.hpp"

using namespace waynav;
using Catch::Approx;

TEST_CASE("reachability_mask blocks cells at and beyond obstacles", "[waypoint]") {
  const RadialGrid g;
  SECTION("single obstacle masks its tail") {
    ObstacleMap m(g);
    m.set(10, 4, true);
    const Heatmap logits(g, 1.0);
    const Heatmap masked = reachability_mask(m, logits);
    for (int j = 0; j < 4; ++j) CHECK(masked.at(10, j) == Approx(1.0));
    for (int j = 4; j < 12; ++j) CHECK(masked.at(10, j) == -INFINITY);
    for (int j = 0; j < 12; ++j) CHECK(masked.at(11, j) == Approx(1.0));
  }
  SECTION("empty map leaves logits untouched") {
    const ObstacleMap m(g);
    const Heatmap logits(g, 0.5);
    const Heatmap masked = reachability_mask(m, logits);
    CHECK(masked.value == logits.value);
  }
  SECTION("fully enclosed agent yields an empty waypoint set") {
    ObstacleMap m(g);
    for (int a = 0; a < g.num_angles; ++a) m.set(a, 0, true);
    const Heatmap masked = reachability_mask(m, Heatmap(g, 5.0));
    for (const double v : masked.value) CHECK(v == -INFINITY);
    CHECK(nms_select(masked, 5, 1.0, 0.0).empty());
  }
}

TEST_CASE("nms_select greedy suppression in metric space", "[waypoint]") {
  const RadialGrid g;
  SECTION("close pair keeps only the higher peak") {
    Heatmap h(g, 0.0);
    const Cell peak_a{0, 4}, peak_b{2, 5};
    const LocalPoint pa = polar_to_local(cell_center(g, peak_a));
    const LocalPoint pb = polar_to_local(cell_center(g, peak_b));
    const double sep = std::hypot(pa.x - pb.x, pa.y - pb.y);
    REQUIRE(sep < 1.0);  // pair is inside the suppression radius
    h.at(peak_a.a, peak_a.j) = 0.9;
    h.at(peak_b.a, peak_b.j) = 0.8;
    const WaypointSet ws = nms_select(h, 5, 1.0, 0.5);
    REQUIRE(ws.size() == 1);
    CHECK(ws[0].cell == peak_a);
    CHECK(ws[0].score == Approx(0.9));
  }
  SECTION("distant pair both emitted in descending order") {
    Heatmap h(g, 0.0);
    h.at(0, 11) = 0.8;   // bearing 1.5, range 2.875
    h.at(60, 11) = 0.9;  // opposite side, ~5.75 m away
    const WaypointSet ws = nms_select(h, 5, 1.0, 0.5);
    REQUIRE(ws.size() == 2);
    CHECK(ws[0].score == Approx(0.9));
    CHECK(ws[1].score == Approx(0.8));
  }
  SECTION("min_score filters everything") {
    Heatmap h(g, 0.1);
    CHECK(nms_select(h, 5, 1.0, 0.25).empty());
  }
  SECTION("bad arguments throw") {
    const Heatmap h(g);
    CHECK_THROWS_AS(nms_select(h, 0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(nms_select(h, 3, 0.0, 0.0), std::invalid_argument);
  }
}

TEST_CASE("nms output is separated and sorted", "[waypoint]") {
  Rng rng(31337);
  for (int trial = 0; trial < 25; ++trial) {
    const Heatmap h = waynav::testing::random_heatmap(rng);
    const double radius = rng.uniform(0.3, 1.5);
    const int k = 1 + static_cast<int>(rng.uniform_int(8));
    const WaypointSet ws = nms_select(h, k, radius, 0.2);
    CHECK(static_cast<int>(ws.size()) <= k);
    for (size_t i = 0; i < ws.size(); ++i) {
      CHECK(ws[i].score >= 0.2);
      if (i > 0) CHECK(ws[i - 1].score >= ws[i].score);
      for (size_t j = i + 1; j < ws.size(); ++j) {
        const double d = std::hypot(ws[i].local.x - ws[j].local.x,
                                    ws[i].local.y - ws[j].local.y);
        CHECK(d >= radius);
      }
    }
  }
}

TEST_CASE("geometric_predict prefers the farthest clear cells", "[waypoint]") {
  const RadialGrid g;
  SECTION("empty map: k waypoints at max range, spread out") {
    const ObstacleMap m(g);
    WaypointSelectConfig cfg;
    cfg.k = 4;
    const WaypointSet ws = geometric_predict(m, cfg);
    REQUIRE(ws.size() == 4);
    for (const Waypoint& w : ws) {
      CHECK(local_to_polar(w.local).range_m == Approx(2.875));
    }
    for (size_t i = 0; i < ws.size(); ++i) {
      for (size_t j = i + 1; j < ws.size(); ++j) {
        CHECK(std::hypot(ws[i].local.x - ws[j].local.x,
                         ws[i].local.y - ws[j].local.y) >= cfg.nms_radius_m);
      }
    }
  }
  SECTION("corridor confines candidates to its bearings") {
    ObstacleMap m(g);
    for (int a = 0; a < g.num_angles; ++a) {
      if (a > 10) m.set(a, 0, true);  // everything but bins 0..10 blocked
    }
    const WaypointSet ws = geometric_predict(m, {});
    REQUIRE_FALSE(ws.empty());
    for (const Waypoint& w : ws) CHECK(w.cell.a <= 10);
  }
  SECTION("fully enclosed yields empty set") {
    ObstacleMap m(g);
    for (int a = 0; a < g.num_angles; ++a) m.set(a, 0, true);
    CHECK(geometric_predict(m, {}).empty());
  }
  SECTION("every waypoint is linearly reachable") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
      const ObstacleMap m = waynav::testing::random_map(rng, 0.15);
      for (const Waypoint& w : geometric_predict(m, {})) {
        for (int j = 0; j <= w.cell.j; ++j) {
          CHECK_FALSE(m.is_occupied(w.cell.a, j));
        }
      }
    }
  }
}

TEST_CASE("make_target_heatmap gaussian supervision", "[waypoint]") {
  const RadialGrid g;
  SECTION("neighbor at a cell center peaks at 1.0 there") {
    const LocalPoint p = polar_to_local(cell_center(g, {7, 5}));
    const Heatmap h = make_target_heatmap(g, {p}, 1.0);
    CHECK(h.at(7, 5) == Approx(1.0));
    CHECK(h.at(7, 6) == Approx(std::exp(-0.5)).epsilon(1e-6));
    CHECK(h.at(8, 5) == Approx(std::exp(-0.5)).epsilon(1e-6));
  }
  SECTION("coincident neighbors add to 2.0") {
    const LocalPoint p = polar_to_local(cell_center(g, {7, 5}));
    const Heatmap h = make_target_heatmap(g, {p, p}, 1.0);
    CHECK(h.at(7, 5) == Approx(2.0));
  }
  SECTION("no neighbors -> all zero") {
    const Heatmap h = make_target_heatmap(g, {}, 1.0);
    for (const double v : h.value) CHECK(v == 0.0);
  }
  SECTION("angle axis wraps") {
    const LocalPoint p = polar_to_local(cell_center(g, {0, 5}));
    const Heatmap h = make_target_heatmap(g, {p}, 1.0);
    CHECK(h.at(119, 5) == Approx(std::exp(-0.5)).epsilon(1e-6));
  }
  SECTION("out-of-range neighbor is rejected") {
    CHECK_THROWS_AS(make_target_heatmap(g, {{4.0, 0.0}}, 1.0),
                    std::invalid_argument);
  }
  SECTION("values stay non-negative, isolated peaks stay 1.0") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<LocalPoint> pts;
      const int n = 1 + static_cast<int>(rng.uniform_int(5));
      for (int i = 0; i < n; ++i) {
        const double b = rng.uniform(0, 360), r = rng.uniform(0.2, 2.9);
        pts.push_back(polar_to_local({b, r}));
      }
      const Heatmap h = make_target_heatmap(g, pts, 1.0);
      for (const double v : h.value) CHECK(v >= 0.0);
    }
  }
}
