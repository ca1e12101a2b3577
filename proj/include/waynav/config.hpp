#pragma once

#include <stdexcept>
#include <string>

#include "waynav/episode_runner.hpp"
#include "waynav/llm_client.hpp"
#include "waynav/serialize.hpp"

namespace waynav {

constexpr const char* kToolVersion = "0.1.0";

// Raised for invalid user configuration (CLI exit code 1, as opposed to
// runtime failures which exit 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything a run needs, mirroring each module's defaults so an empty config
// file reproduces the reference pipeline.
struct RunConfig {
  RadialGrid grid;
  WaypointSelectConfig select;
  double slope_threshold = 1.0;
  double sigma_bins = 1.0;
  ModelConfig model;
  TrainConfig train;
  bool use_model = false;            // run/ablate with the trained predictor
  std::string checkpoint = "checkpoint.json";
  double merge_threshold = 0.5;
  std::string planner = "oracle";    // oracle | greedy | llm | text_explorer
  LlmClientConfig llm;
  MotionMode mode = MotionMode::Sliding;
  double sensor_noise_std = 0.0;
  ElevationBand band;
  WorldSpec world;
  int num_worlds = 10;
  int max_nodes_per_world = 20;
  double node_spacing = 1.0;
  double holdout_fraction = 0.2;
  int episode_count = 20;
  double min_separation = 4.0;
  double max_separation = 12.0;
  double success_radius = 3.0;
  int planner_step_budget = 20;
  int action_budget = 500;
  PromptOptions prompt;
  std::uint64_t seed = 7;
  std::string output_dir = "out";

  void validate() const {
    try {
      grid.validate();
      model.validate();
      world.validate();
      llm.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (select.k < 1) throw ConfigError("predictor.k must be >= 1");
    if (select.nms_radius_m <= 0) throw ConfigError("predictor.nms_radius must be > 0");
    if (slope_threshold <= 0) throw ConfigError("slope_threshold must be > 0");
    if (sigma_bins <= 0) throw ConfigError("sigma_bins must be > 0");
    if (!(band.z_min < band.z_max)) throw ConfigError("band.z_min must be below z_max");
    if (merge_threshold <= 0) throw ConfigError("merge_threshold must be > 0");
    if (planner != "oracle" && planner != "greedy" && planner != "llm" &&
        planner != "text_explorer") {
      throw ConfigError("unknown planner: " + planner);
    }
    if (train.batch_size < 1 || train.epochs < 0 || train.lr < 0) {
      throw ConfigError("bad training hyperparameters");
    }
    if (num_worlds < 1 || episode_count < 1) {
      throw ConfigError("num_worlds and episode_count must be >= 1");
    }
    if (holdout_fraction < 0.0 || holdout_fraction >= 1.0) {
      throw ConfigError("holdout_fraction must be in [0, 1)");
    }
    if (planner_step_budget < 1 || action_budget < 1) {
      throw ConfigError("budgets must be >= 1");
    }
    if (min_separation <= 0 || max_separation < min_separation) {
      throw ConfigError("bad separation band");
    }
    if (success_radius <= 0) throw ConfigError("success_radius must be > 0");
  }

  RunnerConfig runner(const PredictorModel* model_ptr = nullptr) const {
    RunnerConfig rc;
    rc.grid = grid;
    rc.select = select;
    rc.slope_threshold = slope_threshold;
    rc.band = band;
    rc.merge_threshold = merge_threshold;
    rc.success_radius = success_radius;
    rc.planner_step_budget = planner_step_budget;
    rc.action_budget = action_budget;
    rc.sensor_noise_std = sensor_noise_std;
    rc.prompt_options = prompt;
    rc.model = model_ptr;
    return rc;
  }
};

inline Json to_json(const RunConfig& c) {
  Json j;
  j["grid"] = grid_to_json(c.grid);
  j["predictor"] = {{"k", c.select.k},
                    {"nms_radius_m", c.select.nms_radius_m},
                    {"min_score", c.select.min_score},
                    {"use_mask", c.select.use_mask},
                    {"slope_threshold", c.slope_threshold},
                    {"sigma_bins", c.sigma_bins},
                    {"use_model", c.use_model},
                    {"checkpoint", c.checkpoint},
                    {"model", to_json(c.model)},
                    {"train",
                     {{"lr", c.train.lr},
                      {"batch_size", c.train.batch_size},
                      {"epochs", c.train.epochs},
                      {"weight_decay", c.train.weight_decay},
                      {"threads", c.train.threads}}}};
  j["graph"] = {{"merge_threshold", c.merge_threshold}};
  j["planner"] = {{"type", c.planner},
                  {"llm",
                   {{"base_url", c.llm.base_url},
                    {"model", c.llm.model},
                    {"api_key_env", c.llm.api_key_env},
                    {"timeout_s", c.llm.timeout_s},
                    {"max_retries", c.llm.max_retries},
                    {"temperature", c.llm.temperature}}}};
  j["sim"] = {{"mode", to_string(c.mode)},
              {"noise_std", c.sensor_noise_std},
              {"band", {{"z_min", c.band.z_min}, {"z_max", c.band.z_max}}}};
  j["world"] = to_json(c.world);
  j["data"] = {{"num_worlds", c.num_worlds},
               {"max_nodes_per_world", c.max_nodes_per_world},
               {"node_spacing", c.node_spacing},
               {"holdout_fraction", c.holdout_fraction}};
  j["episodes"] = {{"count", c.episode_count},
                   {"min_separation", c.min_separation},
                   {"max_separation", c.max_separation},
                   {"success_radius", c.success_radius}};
  j["budgets"] = {{"planner_steps", c.planner_step_budget},
                  {"low_level_actions", c.action_budget}};
  j["prompt"] = {{"include_graph", c.prompt.include_graph},
                 {"include_visit_info", c.prompt.include_visit_info}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j;
}

// Partial configs are fine: anything absent keeps its default.
inline RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  try {
    if (j.contains("grid")) c.grid = grid_from_json(j["grid"]);
    if (j.contains("predictor")) {
      const Json& p = j["predictor"];
      c.select.k = p.value("k", c.select.k);
      c.select.nms_radius_m = p.value("nms_radius_m", c.select.nms_radius_m);
      c.select.min_score = p.value("min_score", c.select.min_score);
      c.select.use_mask = p.value("use_mask", c.select.use_mask);
      c.slope_threshold = p.value("slope_threshold", c.slope_threshold);
      c.sigma_bins = p.value("sigma_bins", c.sigma_bins);
      c.use_model = p.value("use_model", c.use_model);
      c.checkpoint = p.value("checkpoint", c.checkpoint);
      if (p.contains("model")) c.model = model_config_from_json(p["model"]);
      if (p.contains("train")) {
        const Json& t = p["train"];
        c.train.lr = t.value("lr", c.train.lr);
        c.train.batch_size = t.value("batch_size", c.train.batch_size);
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.weight_decay = t.value("weight_decay", c.train.weight_decay);
        c.train.threads = t.value("threads", c.train.threads);
      }
    }
    if (j.contains("graph")) {
      c.merge_threshold = j["graph"].value("merge_threshold", c.merge_threshold);
    }
    if (j.contains("planner")) {
      const Json& p = j["planner"];
      c.planner = p.value("type", c.planner);
      if (p.contains("llm")) {
        const Json& l = p["llm"];
        c.llm.base_url = l.value("base_url", c.llm.base_url);
        c.llm.model = l.value("model", c.llm.model);
        c.llm.api_key_env = l.value("api_key_env", c.llm.api_key_env);
        c.llm.timeout_s = l.value("timeout_s", c.llm.timeout_s);
        c.llm.max_retries = l.value("max_retries", c.llm.max_retries);
        c.llm.temperature = l.value("temperature", c.llm.temperature);
      }
    }
    if (j.contains("sim")) {
      const Json& s = j["sim"];
      if (s.contains("mode")) {
        c.mode = s["mode"].get<std::string>() == "sliding"
                     ? MotionMode::Sliding
                     : MotionMode::NoSliding;
      }
      c.sensor_noise_std = s.value("noise_std", c.sensor_noise_std);
      if (s.contains("band")) {
        c.band.z_min = s["band"].value("z_min", c.band.z_min);
        c.band.z_max = s["band"].value("z_max", c.band.z_max);
      }
    }
    if (j.contains("world")) {
      const Json& w = j["world"];
      c.world.extent_w = w.value("extent_w", c.world.extent_w);
      c.world.extent_h = w.value("extent_h", c.world.extent_h);
      c.world.rooms_x = w.value("rooms_x", c.world.rooms_x);
      c.world.rooms_y = w.value("rooms_y", c.world.rooms_y);
      c.world.door_width = w.value("door_width", c.world.door_width);
      c.world.wall_height = w.value("wall_height", c.world.wall_height);
      c.world.wall_thickness = w.value("wall_thickness", c.world.wall_thickness);
      c.world.with_stairs = w.value("with_stairs", c.world.with_stairs);
      c.world.extra_door_prob = w.value("extra_door_prob", c.world.extra_door_prob);
      c.world.res = w.value("res", c.world.res);
    }
    if (j.contains("data")) {
      const Json& d = j["data"];
      c.num_worlds = d.value("num_worlds", c.num_worlds);
      c.max_nodes_per_world = d.value("max_nodes_per_world", c.max_nodes_per_world);
      c.node_spacing = d.value("node_spacing", c.node_spacing);
      c.holdout_fraction = d.value("holdout_fraction", c.holdout_fraction);
    }
    if (j.contains("episodes")) {
      const Json& e = j["episodes"];
      c.episode_count = e.value("count", c.episode_count);
      c.min_separation = e.value("min_separation", c.min_separation);
      c.max_separation = e.value("max_separation", c.max_separation);
      c.success_radius = e.value("success_radius", c.success_radius);
    }
    if (j.contains("budgets")) {
      const Json& b = j["budgets"];
      c.planner_step_budget = b.value("planner_steps", c.planner_step_budget);
      c.action_budget = b.value("low_level_actions", c.action_budget);
    }
    if (j.contains("prompt")) {
      const Json& p = j["prompt"];
      c.prompt.include_graph = p.value("include_graph", c.prompt.include_graph);
      c.prompt.include_visit_info =
          p.value("include_visit_info", c.prompt.include_visit_info);
    }
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  c.validate();
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return run_config_from_json(j);
}

// Reproducibility manifest: enough to replay a run bit-for-bit with non-LLM
// planners.
inline Json make_manifest(const RunConfig& cfg) {
  const std::string canonical = to_json(cfg).dump();
  return {{"version", kToolVersion},
          {"config_hash", hash_key(canonical)},
          {"seed", cfg.seed},
          {"config", to_json(cfg)}};
}

}  // namespace waynav
