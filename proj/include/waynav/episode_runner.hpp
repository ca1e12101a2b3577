#pragma once

#include <memory>
#include <string>
#include <vector>

#include "waynav/llm_client.hpp"
#include "waynav/metrics.hpp"
#include "waynav/planner.hpp"
#include "waynav/predictor_model.hpp"
#include "waynav/prompting.hpp"
#include "waynav/simworld.hpp"
#include "waynav/topograph.hpp"
#include "waynav/waypoint.hpp"

namespace waynav {

struct RunnerConfig {
  RadialGrid grid;
  WaypointSelectConfig select;
  double slope_threshold = 1.0;
  ElevationBand band;
  double merge_threshold = 0.5;
  double success_radius = 3.0;
  int planner_step_budget = 20;
  int action_budget = 500;
  double sensor_noise_std = 0.0;
  PromptOptions prompt_options;
  const PredictorModel* model = nullptr;  // null -> geometric predictor
};

struct StepLog {
  int step = 0;
  int node = 0;
  AgentPose pose;
  std::string prompt;
  std::string thought;
  std::string action;  // "goto <id>" or "stop"
  int collisions = 0;
  int forwards = 0;
  std::vector<LlmExchange> exchanges;
};

struct EpisodeResult {
  std::vector<Vec3> trajectory;  // start plus pose after every action
  TopoGraph graph;
  std::vector<StepLog> steps;
  int collisions = 0;
  int forward_count = 0;
  int revisits = 0;
  bool stopped = false;  // planner issued Stop (vs budget exhaustion)
  bool flagged = false;  // planner fallback or invalid target
};

// Runs the full loop for one episode: scan, obstacle map, graph update,
// context serialization, planner decision, turn-then-move execution, until
// Stop or a budget runs out.
inline EpisodeResult run_episode(const World& world, const Episode& episode,
                                 PlannerPolicy& planner,
                                 const RunnerConfig& cfg, Rng rng) {
  EpisodeResult res;
  AgentState agent = AgentState::from(episode.start);
  const auto z_at = [&](double x, double y) { return world.elevation_at(x, y); };
  res.trajectory.push_back({agent.x, agent.y, z_at(agent.x, agent.y)});

  res.graph.add_node({agent.x, agent.y, z_at(agent.x, agent.y)});
  int current = 0;
  std::vector<HistoryEntry> history;
  std::vector<int> trajectory_ids;

  const auto predict_waypoints = [&]() {
    const PointCloud cloud =
        panoramic_scan(world, agent.pose(), cfg.grid, cfg.sensor_noise_std, &rng);
    const ElevationGrid eg = bin_points(cfg.grid, cloud, cfg.band);
    const ObstacleMap map = gradient_filter(eg, cfg.slope_threshold);
    WaypointSet ws;
    if (cfg.model) {
      Heatmap logits = model_predict(*cfg.model, map);
      if (cfg.select.use_mask) logits = reachability_mask(map, logits);
      ws = nms_select(logits, cfg.select.k, cfg.select.nms_radius_m,
                      cfg.select.min_score);
    } else {
      ws = geometric_predict(map, cfg.select);
    }
    std::vector<ScoredPoint> out;
    out.reserve(ws.size());
    for (const Waypoint& w : ws) {
      const Vec2 pos = local_to_world(agent.pose(), w.local);
      out.push_back({{pos.x, pos.y, z_at(pos.x, pos.y)}, w.score});
    }
    return out;
  };

  for (int step_i = 1; step_i <= cfg.planner_step_budget; ++step_i) {
    const std::vector<int> options =
        graph_update(res.graph, current, predict_waypoints, cfg.merge_threshold);
    history.push_back({current, world.tag_at(agent.x, agent.y)});
    trajectory_ids.push_back(current);

    PromptContext ctx;
    ctx.instruction = episode.instruction;
    ctx.history = history;
    ctx.trajectory = trajectory_ids;
    ctx.graph = res.graph;
    for (const int id : options) {
      const Node& n = res.graph.node(id);
      const PolarPoint rel = relative_polar(agent.pose(), n.pos.xy());
      ctx.options.push_back({id, rel.bearing_deg, rel.range_m, n.visited,
                             world.tag_at(n.pos.x, n.pos.y)});
    }
    for (const Node& n : res.graph.nodes()) {
      if (n.visited) continue;
      bool in_options = false;
      for (const ActionOption& o : ctx.options) {
        if (o.node == n.id) {
          in_options = true;
          break;
        }
      }
      if (!in_options) {
        ctx.supplementary.push_back({n.id, world.tag_at(n.pos.x, n.pos.y)});
      }
    }

    StepLog log;
    log.step = step_i;
    log.node = current;
    log.pose = agent.pose();
    log.prompt = serialize_context(ctx, cfg.prompt_options);

    const PlannerResponse resp = planner.decide(ctx);
    if (auto* llm = dynamic_cast<LlmPlanner*>(&planner)) {
      log.exchanges = llm->exchanges();
      if (llm->last_fallback()) res.flagged = true;
    }
    log.thought = resp.thought;

    if (resp.is_stop()) {
      log.action = "stop";
      res.steps.push_back(log);
      res.stopped = true;
      break;
    }
    const int target = resp.target();
    log.action = "goto " + std::to_string(target);
    if (!res.graph.has(target)) {
      // Policy bug: an id that was never in the serialized graph.
      res.flagged = true;
      res.steps.push_back(log);
      break;
    }

    const int remaining = cfg.action_budget - static_cast<int>(res.trajectory.size() - 1);
    if (remaining <= 0) {
      res.steps.push_back(log);
      break;
    }
    NavResult nav = navigate_to(world, agent, res.graph, current, target,
                                episode.mode, remaining, cfg.slope_threshold);
    res.trajectory.insert(res.trajectory.end(), nav.trace.begin(),
                          nav.trace.end());
    res.collisions += nav.collisions;
    res.forward_count += nav.forward_count;
    log.collisions = nav.collisions;
    log.forwards = nav.forward_count;
    res.steps.push_back(log);

    if (res.graph.node(target).visited) res.revisits += 1;
    current = target;
    if (nav.budget_hit) break;
  }
  return res;
}

// Convenience: metrics for a finished episode (geodesic field from the goal).
inline EpisodeReport score_episode(const World& world, const Episode& episode,
                                   const EpisodeResult& result,
                                   const RunnerConfig& cfg, int episode_id,
                                   std::uint64_t seed) {
  const GeodesicField field(world, episode.goal, cfg.slope_threshold);
  EpisodeReport rep;
  rep.episode_id = episode_id;
  rep.seed = seed;
  rep.nav = nav_metrics(
      result.trajectory, episode.gt_path,
      [&](const Vec2& p) { return field.at(p); }, result.collisions,
      result.forward_count, cfg.success_radius);
  rep.planner_steps = static_cast<int>(result.steps.size());
  rep.revisits = result.revisits;
  rep.collisions = result.collisions;
  rep.forward_count = result.forward_count;
  rep.flagged = result.flagged;
  return rep;
}

}  // namespace waynav
