#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "waynav/rng.hpp"
#include "waynav/topograph.hpp"

using namespace waynav;
using Catch::Approx;

namespace {

std::vector<ScoredPoint> four_spread_waypoints() {
  return {{{3.0, 0.0, 0.0}, 0.9},
          {{0.0, 3.0, 0.0}, 0.8},
          {{-3.0, 0.0, 0.0}, 0.7},
          {{0.0, -3.0, 0.0}, 0.6}};
}

}  // namespace

TEST_CASE("graph_update revisits leave the graph untouched", "[topograph]") {
  TopoGraph g;
  g.add_node({0, 0, 0});
  int provider_calls = 0;
  const WaypointProvider provider = [&]() {
    ++provider_calls;
    return four_spread_waypoints();
  };
  const auto opts1 = graph_update(g, 0, provider, 0.5);
  CHECK(provider_calls == 1);
  CHECK(opts1.size() == 4);
  CHECK(g.node_count() == 5);
  CHECK(g.edge_count() == 4);
  const auto nodes_snapshot = g.nodes();
  const auto edges_snapshot = g.edges();

  const auto opts2 = graph_update(g, 0, provider, 0.5);
  CHECK(provider_calls == 1);  // early return: predictor never re-runs
  CHECK(opts2 == opts1);
  CHECK(g.edges() == edges_snapshot);
  REQUIRE(g.node_count() == nodes_snapshot.size());
  for (size_t i = 0; i < nodes_snapshot.size(); ++i) {
    CHECK(g.nodes()[i].visited == nodes_snapshot[i].visited);
    CHECK(g.nodes()[i].cached_options == nodes_snapshot[i].cached_options);
  }
}

TEST_CASE("first visit in open space adds unvisited options", "[topograph]") {
  TopoGraph g;
  g.add_node({0, 0, 0});
  const auto opts =
      graph_update(g, 0, []() { return four_spread_waypoints(); }, 0.5);
  REQUIRE(opts.size() == 4);
  CHECK(g.node(0).visited);
  CHECK(g.node(0).options_cached);
  for (const int id : opts) {
    CHECK_FALSE(g.node(id).visited);
    CHECK(g.has_edge(0, id));
  }
}

TEST_CASE("merging_module reuses nearby nodes", "[topograph]") {
  TopoGraph g;
  g.add_node({0, 0, 0});
  const int existing = g.add_node({2.0, 0.0, 0.0});

  SECTION("waypoint within threshold merges into the existing node") {
    const auto opts = merging_module(g, {{{2.3, 0.0, 0.0}, 1.0}}, 0, 0.5);
    REQUIRE(opts.size() == 1);
    CHECK(opts[0] == existing);
    CHECK(g.node_count() == 2);
    CHECK(g.has_edge(0, existing));
    // Existing node keeps its original location.
    CHECK(g.node(existing).pos.x == Approx(2.0));
  }
  SECTION("waypoint outside threshold becomes a new node") {
    const auto opts = merging_module(g, {{{2.6, 0.0, 0.0}, 1.0}}, 0, 0.5);
    REQUIRE(opts.size() == 1);
    CHECK(opts[0] == 2);
    CHECK(g.node_count() == 3);
  }
}

TEST_CASE("merging_module removes duplicate waypoints by score", "[topograph]") {
  TopoGraph g;
  g.add_node({0, 0, 0});
  // Two candidates 0.2 m apart: the higher-scored one survives.
  const auto opts = merging_module(
      g, {{{2.0, 0.0, 0.0}, 0.5}, {{2.0, 0.2, 0.0}, 0.9}}, 0, 0.5);
  REQUIRE(opts.size() == 1);
  CHECK(g.node(opts[0]).pos.y == Approx(0.2));
  CHECK(g.node_count() == 2);
}

TEST_CASE("merge target is the nearest node, ties to lower id", "[topograph]") {
  TopoGraph g;
  g.add_node({0, 0, 0});
  const int a = g.add_node({2.0, 0.3, 0.0});
  const int b = g.add_node({2.0, -0.3, 0.0});

  SECTION("closer node wins") {
    const auto opts = merging_module(g, {{{2.0, 0.1, 0.0}, 1.0}}, 0, 0.5);
    REQUIRE(opts.size() == 1);
    CHECK(opts[0] == a);
  }
  SECTION("exact tie breaks to the lower id") {
    const auto opts = merging_module(g, {{{2.0, 0.0, 0.0}, 1.0}}, 0, 0.5);
    REQUIRE(opts.size() == 1);
    CHECK(opts[0] == std::min(a, b));
  }
}

TEST_CASE("waypoint collapsing onto the agent adds no self loop", "[topograph]") {
  TopoGraph g;
  g.add_node({0, 0, 0});
  const auto opts = merging_module(g, {{{0.1, 0.0, 0.0}, 1.0}}, 0, 0.5);
  CHECK(opts.empty());
  CHECK(g.edge_count() == 0);
  CHECK(g.node_count() == 1);
}

TEST_CASE("shortest_path uniform-cost search", "[topograph]") {
  TopoGraph g;
  g.add_node({0, 0, 0});
  g.add_node({1, 0, 0});
  g.add_node({2, 0, 0});
  g.add_edge(0, 1);
  g.add_edge(1, 2);

  SECTION("trivial self path") {
    const auto p = shortest_path(g, 1, 1);
    REQUIRE(p.has_value());
    CHECK(*p == std::vector<int>{1});
  }
  SECTION("chain expands hop by hop") {
    const auto p = shortest_path(g, 0, 2);
    REQUIRE(p.has_value());
    CHECK(*p == std::vector<int>{0, 1, 2});
    CHECK(path_length(g, *p) == Approx(2.0));
  }
  SECTION("disconnected components return nullopt") {
    g.add_node({9, 9, 0});
    CHECK_FALSE(shortest_path(g, 0, 3).has_value());
  }
  SECTION("unknown ids throw") {
    CHECK_THROWS_AS(shortest_path(g, 0, 99), std::out_of_range);
  }
  SECTION("prefers the metrically shorter route") {
    // Add a long detour edge 0-2 via a distant node.
    const int far = g.add_node({1, 5, 0});
    g.add_edge(0, far);
    g.add_edge(far, 2);
    const auto p = shortest_path(g, 0, 2);
    REQUIRE(p.has_value());
    CHECK(*p == std::vector<int>{0, 1, 2});
  }
}

TEST_CASE("visit_partition splits by flag", "[topograph]") {
  TopoGraph g;
  g.add_node({0, 0, 0});
  SECTION("fresh graph with a visited start") {
    g.node(0).visited = true;
    const auto [vis, unvis] = visit_partition(g);
    CHECK(vis == std::vector<int>{0});
    CHECK(unvis.empty());
  }
  SECTION("after one update the options are unvisited") {
    graph_update(g, 0, []() {
      return std::vector<ScoredPoint>{
          {{3, 0, 0}, 1.0}, {{0, 3, 0}, 0.9}, {{-3, 0, 0}, 0.8}};
    }, 0.5);
    const auto [vis, unvis] = visit_partition(g);
    CHECK(vis == std::vector<int>{0});
    CHECK(unvis == std::vector<int>{1, 2, 3});
  }
  SECTION("travel then update moves a node to visited") {
    graph_update(g, 0, []() {
      return std::vector<ScoredPoint>{{{3, 0, 0}, 1.0}, {{0, 3, 0}, 0.9}};
    }, 0.5);
    graph_update(g, 2, []() { return std::vector<ScoredPoint>{}; }, 0.5);
    const auto [vis, unvis] = visit_partition(g);
    CHECK(vis == std::vector<int>{0, 2});
    CHECK(unvis == std::vector<int>{1});
  }
}

TEST_CASE("randomized update sequences hold the graph invariants", "[topograph]") {
  Rng rng(616);
  for (int trial = 0; trial < 8; ++trial) {
    const double threshold = 0.5;
    TopoGraph g;
    g.add_node({0, 0, 0});
    int current = 0;
    std::map<int, std::vector<int>> frozen_options;
    for (int step = 0; step < 60; ++step) {
      const size_t nodes_before = g.node_count();
      const size_t edges_before = g.edge_count();
      std::vector<int> visited_before;
      for (const Node& n : g.nodes()) {
        if (n.visited) visited_before.push_back(n.id);
      }

      const auto provider = [&]() {
        std::vector<ScoredPoint> pts;
        const Vec3 base = g.node(current).pos;
        const int n = static_cast<int>(rng.uniform_int(5));
        for (int i = 0; i < n; ++i) {
          const double ang = rng.uniform(0, 2 * kPi);
          const double r = rng.uniform(0.2, 3.0);
          pts.push_back({{base.x + r * std::cos(ang), base.y + r * std::sin(ang), 0.0},
                         rng.uniform()});
        }
        return pts;
      };
      const auto& opts = graph_update(g, current, provider, threshold);

      // Monotone growth; visited flags never revert.
      CHECK(g.node_count() >= nodes_before);
      CHECK(g.edge_count() >= edges_before);
      for (const int id : visited_before) CHECK(g.node(id).visited);

      // Cached options are stable once set.
      const auto frozen = frozen_options.find(current);
      if (frozen == frozen_options.end()) {
        frozen_options[current] = opts;
      } else {
        CHECK(frozen->second == opts);
      }

      // Min pairwise separation between distinct nodes.
      for (size_t i = 0; i < g.node_count(); ++i) {
        for (size_t j = i + 1; j < g.node_count(); ++j) {
          CHECK(dist2d(g.nodes()[i].pos, g.nodes()[j].pos) >= threshold - 1e-9);
        }
      }

      // Every unvisited node touches at least one visited node.
      for (const Node& n : g.nodes()) {
        if (n.visited) continue;
        bool attached = false;
        for (const int nb : g.neighbors(n.id)) {
          if (g.node(nb).visited) attached = true;
        }
        CHECK(attached);
      }

      // Move somewhere: prefer an unvisited node, else any node.
      const auto [vis, unvis] = visit_partition(g);
      if (!unvis.empty()) {
        current = unvis[rng.uniform_int(unvis.size())];
      } else {
        current = static_cast<int>(rng.uniform_int(g.node_count()));
      }
    }
  }
}
