#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "waynav/config.hpp"
#include "waynav/episode_runner.hpp"
#include "waynav/serialize.hpp"

namespace waynav {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// report serialization
// ---------------------------------------------------------------------------

inline Json to_json(const NavMetrics& m) {
  return {{"ne", m.ne},           {"osr", m.osr},
          {"sr", m.sr},           {"spl", m.spl},
          {"ndtw", m.ndtw},       {"collision_rate", m.collision_rate}};
}

inline Json to_json(const EpisodeReport& r) {
  return {{"episode", r.episode_id}, {"seed", r.seed},
          {"nav", to_json(r.nav)},   {"planner_steps", r.planner_steps},
          {"revisits", r.revisits},  {"collisions", r.collisions},
          {"forward_count", r.forward_count}, {"flagged", r.flagged}};
}

inline Json to_json(const NavSummary& s) {
  return {{"count", s.count},
          {"ne_mean", s.ne_mean},
          {"osr_pct", s.osr_pct},
          {"sr_pct", s.sr_pct},
          {"spl_mean", s.spl_mean},
          {"ndtw_mean", s.ndtw_mean},
          {"collision_rate_mean", s.collision_rate_mean},
          {"revisits_mean", s.revisits_mean},
          {"flagged_count", s.flagged_count}};
}

inline Json to_json(const WaypointSummary& s) {
  return {{"count", s.count},
          {"delta_mean", s.delta_mean},
          {"pct_open_mean", s.pct_open_mean},
          {"avg_score_mean", s.avg_score_mean},
          {"d_c_mean", s.d_c_mean},
          {"d_h_mean", s.d_h_mean},
          {"distance_excluded", s.distance_excluded}};
}

inline std::string render_nav_table(
    const std::vector<std::pair<std::string, NavSummary>>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %5s %8s %7s %7s %7s %7s %9s\n",
                "run", "n", "NE", "OSR%", "SR%", "SPL", "nDTW", "Collision");
  out += line;
  for (const auto& [name, s] : rows) {
    std::snprintf(line, sizeof(line),
                  "%-16s %5d %8.2f %7.1f %7.1f %7.3f %7.3f %9.4f\n",
                  name.c_str(), s.count, s.ne_mean, s.osr_pct, s.sr_pct,
                  s.spl_mean, s.ndtw_mean, s.collision_rate_mean);
    out += line;
  }
  return out;
}

inline std::string render_waypoint_table(
    const std::vector<std::pair<std::string, WaypointSummary>>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %5s %8s %8s %10s %7s %7s\n",
                "predictor", "n", "|delta|", "%Open", "Avg_Score", "d_C", "d_H");
  out += line;
  for (const auto& [name, s] : rows) {
    std::snprintf(line, sizeof(line),
                  "%-16s %5d %8.2f %8.2f %10.3f %7.3f %7.3f\n", name.c_str(),
                  s.count, s.delta_mean, s.pct_open_mean, s.avg_score_mean,
                  s.d_c_mean, s.d_h_mean);
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// dataset on disk
// ---------------------------------------------------------------------------

struct Dataset {
  std::vector<World> worlds;
  std::vector<GtGraph> graphs;
  std::vector<std::pair<int, Episode>> episodes;  // (world index, episode)
};

inline std::string index_name(const char* stem, int i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d.json", stem, i);
  return buf;
}

inline std::uint64_t world_seed_for(std::uint64_t base, int index) {
  return Rng(base).derive("world").derive(static_cast<std::uint64_t>(index)).seed();
}

// Generates worlds, ground-truth graphs, the training JSONL and the episode
// set; everything is deterministic per seed.
inline void cmd_gen_data(const RunConfig& cfg) {
  cfg.validate();
  const fs::path out(cfg.output_dir);
  fs::create_directories(out / "worlds");
  fs::create_directories(out / "graphs");

  Dataset ds;
  for (int i = 0; i < cfg.num_worlds; ++i) {
    const std::uint64_t wseed = world_seed_for(cfg.seed, i);
    World w = generate_world(wseed, cfg.world);
    GtGraph g = sample_gt_graph(w, wseed, cfg.node_spacing, cfg.grid.max_range_m,
                                cfg.slope_threshold);
    write_json_file((out / "worlds" / index_name("world", i)).string(), to_json(w));
    write_json_file((out / "graphs" / index_name("graph", i)).string(), to_json(g));
    ds.worlds.push_back(std::move(w));
    ds.graphs.push_back(std::move(g));
  }

  // Training examples: a scan + obstacle map at each graph node paired with
  // the node's ground-truth neighbors in the agent frame.
  std::ofstream train_out((out / "train.jsonl").string());
  if (!train_out) throw std::runtime_error("cannot write train.jsonl");
  Rng data_rng = Rng(cfg.seed).derive("train_data");
  for (int i = 0; i < cfg.num_worlds; ++i) {
    const World& w = ds.worlds[static_cast<size_t>(i)];
    const GtGraph& g = ds.graphs[static_cast<size_t>(i)];
    const int limit = std::min<int>(cfg.max_nodes_per_world,
                                    static_cast<int>(g.nodes.size()));
    for (int n = 0; n < limit; ++n) {
      Rng node_rng = data_rng.derive(static_cast<std::uint64_t>(i * 100000 + n));
      const Vec3& p = g.nodes[static_cast<size_t>(n)];
      const AgentPose pose{p.x, p.y, node_rng.uniform(0.0, 360.0)};
      const PointCloud cloud = panoramic_scan(w, pose, cfg.grid,
                                              cfg.sensor_noise_std, &node_rng);
      const ObstacleMap map =
          gradient_filter(bin_points(cfg.grid, cloud, cfg.band), cfg.slope_threshold);
      Json neighbors = Json::array();
      for (const int nb : g.neighbors[static_cast<size_t>(n)]) {
        const LocalPoint lp =
            world_to_local(pose, g.nodes[static_cast<size_t>(nb)].xy());
        neighbors.push_back({lp.x, lp.y});
      }
      const Json line = {{"world", i},
                         {"node", n},
                         {"pose", {pose.x, pose.y, pose.heading_deg}},
                         {"map", to_json(map)},
                         {"neighbors", neighbors}};
      train_out << line.dump() << '\n';
    }
  }
  train_out.close();

  // Episodes, round-robin over worlds. A world that cannot host the
  // separation band falls through to the next one.
  Json episodes = Json::array();
  for (int e = 0; e < cfg.episode_count; ++e) {
    const std::uint64_t eseed =
        Rng(cfg.seed).derive("episode").derive(static_cast<std::uint64_t>(e)).seed();
    EpisodeSpec es;
    es.min_separation = cfg.min_separation;
    es.max_separation = cfg.max_separation;
    es.mode = cfg.mode;
    es.slope_threshold = cfg.slope_threshold;
    bool done = false;
    for (int attempt = 0; attempt < cfg.num_worlds && !done; ++attempt) {
      const int wi = (e + attempt) % cfg.num_worlds;
      try {
        const Episode ep =
            generate_episode(ds.worlds[static_cast<size_t>(wi)], eseed, es);
        episodes.push_back({{"world", wi}, {"episode", to_json(ep)}});
        done = true;
      } catch (const std::runtime_error&) {
        continue;
      }
    }
    if (!done) {
      throw std::runtime_error("gen-data: no world can host the separation band");
    }
  }
  write_json_file((out / "episodes.json").string(),
                  Json{{"version", kFormatVersion}, {"episodes", episodes}});
  write_json_file((out / "manifest.json").string(), make_manifest(cfg));
}

struct LoadedData {
  std::vector<World> worlds;
  std::vector<std::pair<int, Episode>> episodes;
};

inline LoadedData load_dataset(const RunConfig& cfg) {
  const fs::path out(cfg.output_dir);
  LoadedData d;
  for (int i = 0;; ++i) {
    const fs::path p = out / "worlds" / index_name("world", i);
    if (!fs::exists(p)) break;
    d.worlds.push_back(world_from_json(read_json_file(p.string())));
  }
  if (d.worlds.empty()) {
    throw std::runtime_error("no worlds in " + cfg.output_dir +
                             " (run gen-data first)");
  }
  const fs::path ep = out / "episodes.json";
  if (!fs::exists(ep)) {
    throw std::runtime_error("missing episodes.json (run gen-data first)");
  }
  for (const auto& e : read_json_file(ep.string()).at("episodes")) {
    d.episodes.push_back(
        {e.at("world").get<int>(), episode_from_json(e.at("episode"))});
  }
  return d;
}

// ---------------------------------------------------------------------------
// training & waypoint evaluation
// ---------------------------------------------------------------------------

struct LabeledExample {
  TrainingExample ex;
  std::vector<LocalPoint> neighbors;
};

inline std::vector<LabeledExample> load_training_examples(const RunConfig& cfg) {
  const fs::path path = fs::path(cfg.output_dir) / "train.jsonl";
  std::ifstream in(path.string());
  if (!in) {
    throw std::runtime_error("missing train.jsonl (run gen-data first)");
  }
  std::vector<LabeledExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    LabeledExample le;
    le.ex.map = obstacle_map_from_json(j.at("map"));
    for (const auto& nb : j.at("neighbors")) {
      le.neighbors.push_back({nb[0].get<double>(), nb[1].get<double>()});
    }
    le.ex.target = make_target_heatmap(le.ex.map.grid, le.neighbors, cfg.sigma_bins);
    out.push_back(std::move(le));
  }
  return out;
}

inline size_t holdout_start(size_t n, double fraction) {
  const size_t held = static_cast<size_t>(n * fraction);
  return n - held;
}

inline std::vector<double> cmd_train(const RunConfig& cfg) {
  cfg.validate();
  const auto labeled = load_training_examples(cfg);
  if (labeled.empty()) throw std::runtime_error("train.jsonl is empty");
  const size_t split = holdout_start(labeled.size(), cfg.holdout_fraction);
  std::vector<TrainingExample> train_set;
  for (size_t i = 0; i < split; ++i) train_set.push_back(labeled[i].ex);

  PredictorModel model =
      make_model(cfg.grid, cfg.model, Rng(cfg.seed).derive("model_init").seed());
  TrainConfig tc = cfg.train;
  tc.shuffle_seed = Rng(cfg.seed).derive("shuffle").seed();
  const std::vector<double> losses = train(model, train_set, tc);

  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  write_json_file((out / cfg.checkpoint).string(), to_json(model));
  write_json_file((out / "loss_curve.json").string(),
                  Json{{"epoch_mean_loss", losses}});
  return losses;
}

struct WaypointEval {
  WaypointSummary model;
  WaypointSummary geometric;
};

// Held-out evaluation of the trained model against the geometric baseline.
inline WaypointEval cmd_eval_waypoints(const RunConfig& cfg,
                                       const PredictorModel* override_model = nullptr) {
  cfg.validate();
  const auto labeled = load_training_examples(cfg);
  if (labeled.empty()) throw std::runtime_error("train.jsonl is empty");
  const size_t split = holdout_start(labeled.size(), cfg.holdout_fraction);

  PredictorModel loaded{};
  const PredictorModel* model = override_model;
  if (!model) {
    const fs::path ckpt = fs::path(cfg.output_dir) / cfg.checkpoint;
    if (!fs::exists(ckpt)) {
      throw std::runtime_error("missing checkpoint (run train first)");
    }
    loaded = model_from_json(read_json_file(ckpt.string()));
    model = &loaded;
  }

  std::vector<WaypointMetrics> model_metrics, geom_metrics;
  for (size_t i = split; i < labeled.size(); ++i) {
    const LabeledExample& le = labeled[i];
    Heatmap logits = model_predict(*model, le.ex.map);
    if (cfg.select.use_mask) logits = reachability_mask(le.ex.map, logits);
    const WaypointSet mws = nms_select(logits, cfg.select.k,
                                       cfg.select.nms_radius_m, cfg.select.min_score);
    model_metrics.push_back(
        waypoint_metrics(mws, le.neighbors, le.ex.target, le.ex.map));
    const WaypointSet gws = geometric_predict(le.ex.map, cfg.select);
    geom_metrics.push_back(
        waypoint_metrics(gws, le.neighbors, le.ex.target, le.ex.map));
  }
  if (model_metrics.empty()) {
    throw std::runtime_error("holdout split is empty; lower holdout_fraction");
  }
  WaypointEval ev{aggregate_waypoints(model_metrics),
                  aggregate_waypoints(geom_metrics)};
  write_json_file((fs::path(cfg.output_dir) / "eval_waypoints.json").string(),
                  Json{{"model", to_json(ev.model)},
                       {"geometric", to_json(ev.geometric)}});
  return ev;
}

// ---------------------------------------------------------------------------
// closed-loop runs
// ---------------------------------------------------------------------------

class FileBackedCache {
 public:
  explicit FileBackedCache(std::string path) : path_(std::move(path)) {
    if (fs::exists(path_)) {
      for (const auto& [k, v] : read_json_file(path_).items()) {
        entries_[k] = v.get<std::string>();
      }
    }
  }
  std::optional<std::string> get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }
  void put(const std::string& key, const std::string& value) {
    entries_[key] = value;
    dirty_ = true;
  }
  void save() {
    if (!dirty_) return;
    Json j = Json::object();
    for (const auto& [k, v] : entries_) j[k] = v;
    write_json_file(path_, j);
    dirty_ = false;
  }

 private:
  std::string path_;
  std::map<std::string, std::string> entries_;
  bool dirty_ = false;
};

inline std::unique_ptr<PlannerPolicy> make_planner(
    const RunConfig& cfg, const Episode& ep, const GeodesicField& goal_field,
    FileBackedCache* cache) {
  if (cfg.planner == "oracle") {
    auto p = std::make_unique<OraclePlanner>(ep.goal, cfg.success_radius);
    p->set_goal_distance([&goal_field](const Vec2& q) { return goal_field.at(q); });
    return p;
  }
  if (cfg.planner == "greedy") return std::make_unique<GreedyExplorer>();
  if (cfg.planner == "text_explorer") {
    return std::make_unique<TextExplorerPlanner>(cfg.prompt);
  }
  auto p = std::make_unique<LlmPlanner>(cfg.llm, cfg.prompt);
  if (cache) {
    p->set_cache([cache](const std::string& k) { return cache->get(k); },
                 [cache](const std::string& k, const std::string& v) {
                   cache->put(k, v);
                 });
  }
  return p;
}

inline Json step_log_to_json(int episode_id, const StepLog& s) {
  Json j = {{"type", "step"},
            {"episode", episode_id},
            {"step", s.step},
            {"node", s.node},
            {"pose", {s.pose.x, s.pose.y, s.pose.heading_deg}},
            {"prompt", s.prompt},
            {"thought", s.thought},
            {"action", s.action},
            {"collisions", s.collisions},
            {"forwards", s.forwards}};
  if (!s.exchanges.empty()) {
    Json ex = Json::array();
    for (const LlmExchange& e : s.exchanges) {
      ex.push_back({{"request", e.request_body},
                    {"response", e.response_content},
                    {"status", e.status},
                    {"attempts", e.attempts},
                    {"from_cache", e.from_cache},
                    {"parse_ok", e.parse_ok}});
    }
    j["llm"] = ex;
  }
  return j;
}

struct RunOutputs {
  std::vector<EpisodeReport> reports;
  NavSummary summary;
};

// Runs every episode of the dataset with the configured planner, streaming
// an append-only JSONL log and writing metrics + manifest.
inline RunOutputs cmd_run(const RunConfig& cfg, const std::string& run_name = "run") {
  cfg.validate();
  const LoadedData data = load_dataset(cfg);
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  write_json_file((out / (run_name + "_manifest.json")).string(), make_manifest(cfg));

  PredictorModel model{};
  const PredictorModel* model_ptr = nullptr;
  if (cfg.use_model) {
    const fs::path ckpt = out / cfg.checkpoint;
    if (!fs::exists(ckpt)) {
      throw std::runtime_error("use_model set but checkpoint missing");
    }
    model = model_from_json(read_json_file(ckpt.string()));
    model_ptr = &model;
  }

  std::optional<FileBackedCache> cache;
  if (cfg.planner == "llm") {
    cache.emplace((out / "llm_cache.json").string());
  }

  std::ofstream log((out / (run_name + "_episodes.jsonl")).string());
  if (!log) throw std::runtime_error("cannot write episode log");

  RunOutputs outputs;
  const RunnerConfig rc = cfg.runner(model_ptr);
  for (size_t e = 0; e < data.episodes.size(); ++e) {
    const auto& [wi, episode] = data.episodes[e];
    const World& world = data.worlds[static_cast<size_t>(wi)];
    const GeodesicField goal_field(world, episode.goal, cfg.slope_threshold);
    const auto planner = make_planner(cfg, episode, goal_field, cache ? &*cache : nullptr);
    const std::uint64_t run_seed =
        Rng(cfg.seed).derive("run").derive(static_cast<std::uint64_t>(e)).seed();

    EpisodeReport report;
    try {
      const EpisodeResult result =
          run_episode(world, episode, *planner, rc, Rng(run_seed));
      for (const StepLog& s : result.steps) {
        log << step_log_to_json(static_cast<int>(e), s).dump() << '\n';
      }
      report = score_episode(world, episode, result, rc, static_cast<int>(e),
                             run_seed);
    } catch (const std::exception& ex) {
      report.episode_id = static_cast<int>(e);
      report.seed = run_seed;
      report.flagged = true;
      log << Json{{"type", "error"}, {"episode", e}, {"what", ex.what()}}.dump()
          << '\n';
    }
    log << Json{{"type", "episode_summary"},
                {"episode", e},
                {"world", wi},
                {"report", to_json(report)}}
               .dump()
        << '\n';
    log.flush();
    outputs.reports.push_back(report);
  }
  if (cache) cache->save();

  outputs.summary = aggregate(outputs.reports);
  Json per_episode = Json::array();
  for (const EpisodeReport& r : outputs.reports) per_episode.push_back(to_json(r));
  write_json_file((out / (run_name + "_metrics.json")).string(),
                  Json{{"episodes", per_episode},
                       {"summary", to_json(outputs.summary)}});

  std::ofstream csv((out / (run_name + "_summary.csv")).string());
  csv << "count,ne_mean,osr_pct,sr_pct,spl_mean,ndtw_mean,collision_rate_mean,"
         "revisits_mean,flagged\n";
  char row[256];
  std::snprintf(row, sizeof(row), "%d,%.6f,%.3f,%.3f,%.6f,%.6f,%.6f,%.3f,%d\n",
                outputs.summary.count, outputs.summary.ne_mean,
                outputs.summary.osr_pct, outputs.summary.sr_pct,
                outputs.summary.spl_mean, outputs.summary.ndtw_mean,
                outputs.summary.collision_rate_mean,
                outputs.summary.revisits_mean, outputs.summary.flagged_count);
  csv << row;
  return outputs;
}

// Baseline plus the three ablation variants; emits paired deltas.
inline Json cmd_ablate(const RunConfig& cfg) {
  cfg.validate();
  struct Variant {
    std::string name;
    RunConfig cfg;
  };
  std::vector<Variant> variants;
  variants.push_back({"baseline", cfg});
  {
    RunConfig v = cfg;
    v.prompt.include_visit_info = false;
    variants.push_back({"no_visitinfo", v});
  }
  {
    RunConfig v = cfg;
    v.prompt.include_graph = false;
    variants.push_back({"no_topograph", v});
  }
  {
    RunConfig v = cfg;
    v.select.use_mask = false;
    variants.push_back({"no_mask", v});
  }

  Json result = Json::object();
  NavSummary baseline{};
  std::vector<std::pair<std::string, NavSummary>> rows;
  for (const Variant& v : variants) {
    const RunOutputs ro = cmd_run(v.cfg, "ablate_" + v.name);
    result[v.name] = to_json(ro.summary);
    rows.push_back({v.name, ro.summary});
    if (v.name == "baseline") baseline = ro.summary;
  }
  Json deltas = Json::object();
  for (const auto& [name, s] : rows) {
    if (name == "baseline") continue;
    deltas[name] = {{"sr_pct", s.sr_pct - baseline.sr_pct},
                    {"spl_mean", s.spl_mean - baseline.spl_mean},
                    {"collision_rate_mean",
                     s.collision_rate_mean - baseline.collision_rate_mean},
                    {"revisits_mean", s.revisits_mean - baseline.revisits_mean}};
  }
  result["deltas_vs_baseline"] = deltas;
  write_json_file((fs::path(cfg.output_dir) / "ablation.json").string(), result);
  std::cout << render_nav_table(rows);
  return result;
}

// Scan + obstacle map from a pose inside a world file, as a JSON bundle.
inline Json cmd_inspect(const RunConfig& cfg, const std::string& world_file,
                        double x, double y, double heading) {
  const World w = world_from_json(read_json_file(world_file));
  Rng rng(cfg.seed);
  const AgentPose pose{x, y, heading};
  const PointCloud cloud =
      panoramic_scan(w, pose, cfg.grid, cfg.sensor_noise_std, &rng);
  const ElevationGrid eg = bin_points(cfg.grid, cloud, cfg.band);
  const ObstacleMap map = gradient_filter(eg, cfg.slope_threshold);
  const WaypointSet ws = geometric_predict(map, cfg.select);
  Json waypoints = Json::array();
  for (const Waypoint& wp : ws) {
    waypoints.push_back({{"cell", {wp.cell.a, wp.cell.j}},
                         {"local", {wp.local.x, wp.local.y}},
                         {"score", wp.score}});
  }
  return {{"pose", {x, y, heading}},
          {"elevation_grid", to_json(eg)},
          {"obstacle_map", to_json(map)},
          {"waypoints", waypoints}};
}

}  // namespace waynav
