#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"
#include "waynav/planner.hpp"

using namespace waynav;
using Catch::Approx;

namespace {

PromptContext context_with_nodes(const std::vector<Vec3>& positions,
                                 const std::vector<int>& visited,
                                 int current) {
  PromptContext ctx;
  for (const Vec3& p : positions) ctx.graph.add_node(p);
  for (const int v : visited) ctx.graph.node(v).visited = true;
  for (int i = 1; i < static_cast<int>(positions.size()); ++i) {
    ctx.graph.add_edge(0, i);
  }
  ctx.trajectory = {current};
  return ctx;
}

}  // namespace

TEST_CASE("oracle stops inside the success radius", "[planner]") {
  OraclePlanner oracle({1.0, 0.0}, 3.0);
  const PromptContext ctx = context_with_nodes({{0, 0, 0}}, {0}, 0);
  const PlannerResponse r = oracle.decide(ctx);
  CHECK(r.is_stop());
}

TEST_CASE("oracle heads for the closest node", "[planner]") {
  OraclePlanner oracle({10.0, 0.0}, 3.0);
  // Node 1 is 5 m from the goal, node 2 is 2 m.
  const PromptContext ctx =
      context_with_nodes({{0, 0, 0}, {5, 0, 0}, {8, 0, 0}}, {0}, 0);
  const PlannerResponse r = oracle.decide(ctx);
  REQUIRE_FALSE(r.is_stop());
  CHECK(r.target() == 2);
}

TEST_CASE("oracle backtracks to a globally closer node", "[planner]") {
  OraclePlanner oracle({-6.0, 0.0}, 1.0);
  // Current options (2, 3) are ahead, but node 1 (previously observed,
  // unvisited, behind) is closer to the goal.
  PromptContext ctx = context_with_nodes(
      {{0, 0, 0}, {-3, 0, 0}, {2, 0, 0}, {2, 2, 0}}, {0}, 0);
  const PlannerResponse r = oracle.decide(ctx);
  REQUIRE_FALSE(r.is_stop());
  CHECK(r.target() == 1);
}

TEST_CASE("oracle is deterministic and breaks ties by id", "[planner]") {
  OraclePlanner oracle({0.0, 5.0}, 1.0);
  const PromptContext ctx =
      context_with_nodes({{0, 0, 0}, {3, 5, 0}, {-3, 5, 0}}, {0}, 0);
  const PlannerResponse a = oracle.decide(ctx);
  const PlannerResponse b = oracle.decide(ctx);
  REQUIRE_FALSE(a.is_stop());
  CHECK(a.target() == 1);  // equidistant, lower id
  CHECK(a.target() == b.target());
}

TEST_CASE("greedy explores the nearest unvisited node", "[planner]") {
  GreedyExplorer greedy;
  SECTION("single unvisited option") {
    const PromptContext ctx = context_with_nodes({{0, 0, 0}, {2, 0, 0}}, {0}, 0);
    const PlannerResponse r = greedy.decide(ctx);
    REQUIRE_FALSE(r.is_stop());
    CHECK(r.target() == 1);
  }
  SECTION("no unvisited nodes anywhere -> stop") {
    const PromptContext ctx =
        context_with_nodes({{0, 0, 0}, {2, 0, 0}}, {0, 1}, 0);
    CHECK(greedy.decide(ctx).is_stop());
  }
  SECTION("backtracking emerges from graph distance") {
    // 0 -- 1 -- 2(current); unvisited 3 hangs off node 0. Graph distance
    // from 2 to 3 runs back through 1 and 0.
    PromptContext ctx;
    ctx.graph.add_node({0, 0, 0});
    ctx.graph.add_node({1, 0, 0});
    ctx.graph.add_node({2, 0, 0});
    ctx.graph.add_node({0, 1, 0});
    ctx.graph.node(0).visited = true;
    ctx.graph.node(1).visited = true;
    ctx.graph.node(2).visited = true;
    ctx.graph.add_edge(0, 1);
    ctx.graph.add_edge(1, 2);
    ctx.graph.add_edge(0, 3);
    ctx.trajectory = {0, 1, 2};
    const PlannerResponse r = greedy.decide(ctx);
    REQUIRE_FALSE(r.is_stop());
    CHECK(r.target() == 3);
  }
}

TEST_CASE("navigate_to expands hops into turn-then-move actions", "[planner]") {
  const World w = waynav::testing::walled_room();
  TopoGraph g;
  g.add_node({4.0, 4.0, 0.0});
  g.add_node({5.0, 4.0, 0.0});
  g.add_edge(0, 1);

  SECTION("straight hop: four forwards, no collision") {
    AgentState agent{4.0, 4.0, 0.0};
    const NavResult nav = navigate_to(w, agent, g, 0, 1, MotionMode::Sliding, 500);
    REQUIRE(nav.actions.size() == 4);
    for (const auto a : nav.actions) CHECK(a == LowLevelAction::Forward);
    CHECK(nav.collisions == 0);
    CHECK(nav.reached);
    CHECK(agent.x == Approx(5.0));
    CHECK(agent.y == Approx(4.0).margin(1e-9));
  }
  SECTION("bearing 37 degrees rounds to two turns, residual accepted") {
    AgentState agent{4.0, 4.0, -37.0};
    const NavResult nav = navigate_to(w, agent, g, 0, 1, MotionMode::Sliding, 500);
    int turns = 0;
    for (const auto a : nav.actions) {
      if (a == LowLevelAction::TurnLeft) ++turns;
      CHECK(a != LowLevelAction::TurnRight);
    }
    CHECK(turns == 2);  // 37 / 15 rounds to 2, residual 7 degrees
    CHECK(agent.heading_deg == Approx(normalize_deg(-37.0 + 30.0)));
  }
  SECTION("multi-hop target walks through the intermediate node") {
    const int far = g.add_node({6.0, 4.0, 0.0});
    g.add_edge(1, far);
    AgentState agent{4.0, 4.0, 0.0};
    const NavResult nav =
        navigate_to(w, agent, g, 0, far, MotionMode::Sliding, 500);
    CHECK(nav.reached);
    CHECK(agent.x == Approx(6.0).margin(0.05));
    // Trace passes near the intermediate node.
    bool passed = false;
    for (const Vec3& p : nav.trace) {
      if (std::abs(p.x - 5.0) < 0.13 && std::abs(p.y - 4.0) < 0.13) passed = true;
    }
    CHECK(passed);
  }
  SECTION("never turns more than 180 degrees per hop") {
    for (double heading : {0.0, 90.0, 179.0, 181.0, 270.0, 359.0}) {
      AgentState agent{4.0, 4.0, heading};
      const NavResult nav =
          navigate_to(w, agent, g, 0, 1, MotionMode::Sliding, 500);
      int turns = 0;
      for (const auto a : nav.actions) {
        if (a != LowLevelAction::Forward) ++turns;
      }
      CHECK(turns <= 12);
    }
  }
  SECTION("disconnected target throws") {
    const int lone = g.add_node({7.0, 7.0, 0.0});
    AgentState agent{4.0, 4.0, 0.0};
    CHECK_THROWS_AS(navigate_to(w, agent, g, 0, lone, MotionMode::Sliding, 500),
                    std::runtime_error);
  }
  SECTION("empty world navigation never collides") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
      TopoGraph tg;
      tg.add_node({4.0, 4.0, 0.0});
      tg.add_node({rng.uniform(1.5, 6.5), rng.uniform(1.5, 6.5), 0.0});
      tg.add_edge(0, 1);
      AgentState agent{4.0, 4.0, rng.uniform(0.0, 360.0)};
      const NavResult nav =
          navigate_to(w, agent, tg, 0, 1, MotionMode::Sliding, 500);
      CHECK(nav.collisions == 0);
    }
  }
}

TEST_CASE("text explorer follows VisitInfo when present", "[planner]") {
  PromptContext ctx;
  ctx.instruction = "explore";
  ctx.graph.add_node({0, 0, 0});
  ctx.graph.node(0).visited = true;
  ctx.graph.add_node({1, 0, 0});
  ctx.graph.node(1).visited = true;  // option 1 already visited
  ctx.graph.add_node({0, 1, 0});
  ctx.graph.add_edge(0, 1);
  ctx.graph.add_edge(0, 2);
  ctx.trajectory = {0};
  ctx.options = {{1, 0.0, 1.0, true, ""}, {2, 90.0, 1.0, false, ""}};

  SECTION("with VisitInfo it prefers the unvisited option") {
    TextExplorerPlanner p;
    const PlannerResponse r = p.decide(ctx);
    REQUIRE_FALSE(r.is_stop());
    CHECK(r.target() == 2);
  }
  SECTION("without VisitInfo it cannot tell and picks the lowest id") {
    PromptOptions opts;
    opts.include_visit_info = false;
    TextExplorerPlanner p(opts);
    const PlannerResponse r = p.decide(ctx);
    REQUIRE_FALSE(r.is_stop());
    CHECK(r.target() == 1);  // the visited one: a revisit
  }
  SECTION("no options means stop") {
    PromptContext empty;
    empty.graph.add_node({0, 0, 0});
    empty.trajectory = {0};
    TextExplorerPlanner p;
    CHECK(p.decide(empty).is_stop());
  }
}
