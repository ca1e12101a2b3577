#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "waynav/actions.hpp"
#include "waynav/prompting.hpp"
#include "waynav/simworld.hpp"
#include "waynav/topograph.hpp"

namespace waynav {

// Decision-maker interface: consumes a prompt context, returns the next move.
// GoTo targets may be any node of the context graph, not just adjacent
// options; multi-hop execution realizes backtracking.
class PlannerPolicy {
 public:
  virtual ~PlannerPolicy() = default;
  virtual PlannerResponse decide(const PromptContext& ctx) = 0;
  virtual std::string name() const = 0;
};

// Ground-truth planner for harness validation. Knows the goal (never exposed
// to language planners): stops once the current node is within the success
// radius, otherwise heads for the graph node closest to the goal under the
// supplied distance (straight-line by default; the episode runner installs
// the simulator geodesic). Ties break to the lower id.
class OraclePlanner : public PlannerPolicy {
 public:
  using GoalDistance = std::function<double(const Vec2&)>;

  OraclePlanner(Vec2 goal, double success_radius)
      : goal_(goal), success_radius_(success_radius) {
    goal_distance_ = [g = goal_](const Vec2& p) { return dist2d(p, g); };
  }

  void set_goal_distance(GoalDistance fn) { goal_distance_ = std::move(fn); }

  PlannerResponse decide(const PromptContext& ctx) override {
    if (ctx.trajectory.empty()) return {"no trajectory", Stop{}};
    const int current = ctx.trajectory.back();
    const Vec3 cur_pos = ctx.graph.node(current).pos;
    if (goal_distance_(cur_pos.xy()) <= success_radius_) {
      return {"goal radius reached", Stop{}};
    }
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (const Node& n : ctx.graph.nodes()) {
      if (n.id == current) continue;
      const double d = goal_distance_(n.pos.xy());
      if (d < best_d) {
        best_d = d;
        best = n.id;
      }
    }
    // No progress available: everything reachable is farther than here.
    if (best < 0 || best_d >= goal_distance_(cur_pos.xy())) {
      return {"no closer node", Stop{}};
    }
    return {"approach goal", GoTo{best}};
  }

  std::string name() const override { return "oracle"; }

 private:
  Vec2 goal_;
  double success_radius_;
  GoalDistance goal_distance_;
};

// Exploration heuristic with no instruction understanding: visits the nearest
// unvisited node by graph distance; stops when none remain.
class GreedyExplorer : public PlannerPolicy {
 public:
  PlannerResponse decide(const PromptContext& ctx) override {
    if (ctx.trajectory.empty()) return {"", Stop{}};
    const int current = ctx.trajectory.back();
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (const Node& n : ctx.graph.nodes()) {
      if (n.visited) continue;
      const auto path = shortest_path(ctx.graph, current, n.id);
      if (!path) continue;
      const double d = path_length(ctx.graph, *path);
      if (d < best_d - 1e-12) {
        best_d = d;
        best = n.id;  // ascending scan keeps lower id on ties
      }
    }
    if (best < 0) return {"nothing left to explore", Stop{}};
    return {"explore nearest unvisited", GoTo{best}};
  }

  std::string name() const override { return "greedy"; }
};

// Prompt-sensitive scripted planner used by the ablation harness: it reads
// only the rendered text. Prefers the lowest-id unvisited action option per
// the VisitInfo section; without that section it cannot tell options apart
// and falls back to the lowest-id option.
class TextExplorerPlanner : public PlannerPolicy {
 public:
  explicit TextExplorerPlanner(PromptOptions opts = {}) : opts_(opts) {}

  PlannerResponse decide(const PromptContext& ctx) override {
    const std::string text = serialize_context(ctx, opts_);
    const auto options = parse_places(text, "Action Options:");
    if (options.empty()) return {"no options", Stop{}};
    const auto visit_lines = parse_visit_info(text);
    for (const int id : options) {
      const auto it = visit_lines.find(id);
      if (it != visit_lines.end() && !it->second) {
        return {"unvisited option", GoTo{id}};
      }
    }
    if (!visit_lines.empty()) {
      // All current options visited: revisit the first one.
      return {"all visited", GoTo{options.front()}};
    }
    return {"first option", GoTo{options.front()}};
  }

  std::string name() const override { return "text_explorer"; }

 private:
  static std::vector<int> parse_places(const std::string& text,
                                       const std::string& header) {
    std::vector<int> ids;
    const size_t at = text.find(header);
    if (at == std::string::npos) return ids;
    std::istringstream in(text.substr(at + header.size()));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '(') continue;
      if (line.find("Place ") != 0) break;  // end of section
      ids.push_back(std::stoi(line.substr(6)));
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  static std::map<int, bool> parse_visit_info(const std::string& text) {
    std::map<int, bool> out;
    const size_t at = text.find("VisitInfo:");
    if (at == std::string::npos) return out;
    std::istringstream in(text.substr(at + 10));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '(') continue;
      if (line.find("Place ") != 0) break;
      const size_t colon = line.find(':');
      if (colon == std::string::npos) break;
      out[std::stoi(line.substr(6))] =
          line.find("unvisited", colon) == std::string::npos;
    }
    return out;
  }

  PromptOptions opts_;
};

// Result of executing one GoTo through the low-level controller.
struct NavResult {
  std::vector<LowLevelAction> actions;
  std::vector<Vec3> trace;  // pose after every action
  int collisions = 0;
  int forward_count = 0;
  bool reached = true;     // final position within half a hop of the target
  bool budget_hit = false;
};

// Turn-then-move execution of a multi-hop graph path: for each hop, turn by
// the multiple of 15 degrees nearest the relative bearing (residual heading
// error is accepted, distance is recomputed per hop), then walk
// round(distance / 0.25) forward steps. Every blocked forward counts one
// collision.
inline NavResult navigate_to(const World& world, AgentState& agent,
                             const TopoGraph& g, int from_node, int target_node,
                             MotionMode mode, int action_budget,
                             double slope_threshold = 1.0) {
  const auto path = shortest_path(g, from_node, target_node);
  if (!path) {
    throw std::runtime_error("navigate_to: target disconnected from current node");
  }
  NavResult res;
  const auto z_of = [&](double x, double y) { return world.elevation_at(x, y); };
  const auto apply = [&](LowLevelAction a) {
    const StepResult sr = step(world, agent, a, mode, slope_threshold);
    agent = sr.state;
    if (a == LowLevelAction::Forward) {
      res.forward_count += 1;
      if (sr.collided) res.collisions += 1;
    }
    res.actions.push_back(a);
    res.trace.push_back({agent.x, agent.y, z_of(agent.x, agent.y)});
  };

  for (size_t hop = 1; hop < path->size(); ++hop) {
    const Vec3 hop_pos = g.node((*path)[hop]).pos;
    const PolarPoint rel = relative_polar(agent.pose(), hop_pos.xy());
    const double signed_bearing = normalize_signed_deg(rel.bearing_deg);
    const int turns =
        static_cast<int>(std::lround(std::abs(signed_bearing) / kTurnStepDeg));
    const LowLevelAction turn_dir = signed_bearing >= 0.0
                                        ? LowLevelAction::TurnLeft
                                        : LowLevelAction::TurnRight;
    for (int i = 0; i < turns; ++i) {
      if (static_cast<int>(res.actions.size()) >= action_budget) {
        res.budget_hit = true;
        res.reached = false;
        return res;
      }
      apply(turn_dir);
    }
    const int forwards =
        static_cast<int>(std::lround(rel.range_m / kForwardStepM));
    for (int i = 0; i < forwards; ++i) {
      if (static_cast<int>(res.actions.size()) >= action_budget) {
        res.budget_hit = true;
        res.reached = false;
        return res;
      }
      apply(LowLevelAction::Forward);
    }
  }
  const Vec3 final_target = g.node(target_node).pos;
  res.reached = dist2d(Vec3{agent.x, agent.y, 0}, final_target) <=
                2.0 * kForwardStepM;
  return res;
}

}  // namespace waynav
