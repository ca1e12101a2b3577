#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "waynav/obstacle_map.hpp"
#include "waynav/predictor_model.hpp"
#include "waynav/simworld.hpp"
#include "waynav/topograph.hpp"
#include "waynav/waypoint.hpp"

namespace waynav {

using Json = nlohmann::json;

constexpr int kFormatVersion = 1;

inline Json grid_to_json(const RadialGrid& g) {
  return {{"num_angles", g.num_angles},
          {"num_radii", g.num_radii},
          {"angle_step_deg", g.angle_step_deg},
          {"radial_step_m", g.radial_step_m},
          {"max_range_m", g.max_range_m}};
}

inline RadialGrid grid_from_json(const Json& j) {
  RadialGrid g;
  g.num_angles = j.at("num_angles").get<int>();
  g.num_radii = j.at("num_radii").get<int>();
  g.angle_step_deg = j.at("angle_step_deg").get<double>();
  g.radial_step_m = j.at("radial_step_m").get<double>();
  g.max_range_m = j.at("max_range_m").get<double>();
  g.validate();
  return g;
}

// --- rasters (angle-major row order) ---------------------------------------

inline Json to_json(const ObstacleMap& m) {
  Json j;
  j["version"] = kFormatVersion;
  j["type"] = "obstacle_map";
  j["grid"] = grid_to_json(m.grid);
  j["data"] = Json::array();
  for (const auto v : m.occupied) j["data"].push_back(static_cast<int>(v));
  return j;
}

inline ObstacleMap obstacle_map_from_json(const Json& j) {
  if (j.at("type") != "obstacle_map") {
    throw std::invalid_argument("not an obstacle_map raster");
  }
  ObstacleMap m(grid_from_json(j.at("grid")));
  const auto& data = j.at("data");
  if (data.size() != m.occupied.size()) {
    throw std::invalid_argument("obstacle_map raster size mismatch");
  }
  for (size_t i = 0; i < m.occupied.size(); ++i) {
    m.occupied[i] = data[i].get<int>() ? 1 : 0;
  }
  return m;
}

inline Json to_json(const ElevationGrid& e) {
  Json j;
  j["version"] = kFormatVersion;
  j["type"] = "elevation_grid";
  j["grid"] = grid_to_json(e.grid);
  j["elevation"] = e.elevation;
  j["known"] = Json::array();
  for (const auto v : e.known) j["known"].push_back(static_cast<int>(v));
  return j;
}

inline Json to_json(const Heatmap& h) {
  Json j;
  j["version"] = kFormatVersion;
  j["type"] = "heatmap";
  j["grid"] = grid_to_json(h.grid);
  j["data"] = h.value;
  return j;
}

inline Heatmap heatmap_from_json(const Json& j) {
  if (j.at("type") != "heatmap") throw std::invalid_argument("not a heatmap");
  Heatmap h(grid_from_json(j.at("grid")));
  const auto& data = j.at("data");
  if (data.size() != h.value.size()) {
    throw std::invalid_argument("heatmap size mismatch");
  }
  for (size_t i = 0; i < h.value.size(); ++i) h.value[i] = data[i].get<double>();
  return h;
}

// --- topological graph ------------------------------------------------------

inline Json to_json(const TopoGraph& g) {
  Json nodes = Json::array();
  for (const Node& n : g.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"pos", {n.pos.x, n.pos.y, n.pos.z}},
                     {"visited", n.visited},
                     {"options_cached", n.options_cached},
                     {"cached_options", n.cached_options}});
  }
  Json edges = Json::array();
  for (const auto& [i, j] : g.edges()) edges.push_back({i, j});
  return {{"version", kFormatVersion},
          {"type", "topograph"},
          {"nodes", nodes},
          {"edges", edges}};
}

inline TopoGraph topograph_from_json(const Json& j) {
  TopoGraph g;
  for (const auto& nj : j.at("nodes")) {
    const auto& p = nj.at("pos");
    const int id = g.add_node({p[0].get<double>(), p[1].get<double>(),
                               p[2].get<double>()});
    Node& n = g.node(id);
    n.visited = nj.at("visited").get<bool>();
    n.options_cached = nj.at("options_cached").get<bool>();
    n.cached_options = nj.at("cached_options").get<std::vector<int>>();
  }
  for (const auto& ej : j.at("edges")) {
    g.add_edge(ej[0].get<int>(), ej[1].get<int>());
  }
  return g;
}

// --- world & episodes -------------------------------------------------------

inline Json to_json(const WorldSpec& s) {
  return {{"extent_w", s.extent_w},
          {"extent_h", s.extent_h},
          {"rooms_x", s.rooms_x},
          {"rooms_y", s.rooms_y},
          {"door_width", s.door_width},
          {"wall_height", s.wall_height},
          {"wall_thickness", s.wall_thickness},
          {"with_stairs", s.with_stairs},
          {"extra_door_prob", s.extra_door_prob},
          {"res", s.res}};
}

inline WorldSpec world_spec_from_json(const Json& j) {
  WorldSpec s;
  s.extent_w = j.at("extent_w").get<double>();
  s.extent_h = j.at("extent_h").get<double>();
  s.rooms_x = j.at("rooms_x").get<int>();
  s.rooms_y = j.at("rooms_y").get<int>();
  s.door_width = j.at("door_width").get<double>();
  s.wall_height = j.at("wall_height").get<double>();
  s.wall_thickness = j.at("wall_thickness").get<double>();
  s.with_stairs = j.at("with_stairs").get<bool>();
  s.extra_door_prob = j.at("extra_door_prob").get<double>();
  s.res = j.at("res").get<double>();
  return s;
}

// Procedurally generated worlds serialize as spec + seed and are rebuilt on
// load (compact and bit-reproducible); hand-built worlds fall back to the raw
// heightfield raster.
inline Json to_json(const World& w) {
  Json j;
  j["version"] = kFormatVersion;
  j["type"] = "world";
  if (w.spec) {
    j["kind"] = "procedural";
    j["seed"] = w.seed();
    j["spec"] = to_json(*w.spec);
    return j;
  }
  j["kind"] = "raster";
  j["res"] = w.res();
  j["nx"] = w.nx();
  j["ny"] = w.ny();
  j["elev"] = w.raster();
  Json regions = Json::array();
  for (const Region& r : w.regions()) {
    regions.push_back({{"x0", r.x0},
                       {"y0", r.y0},
                       {"x1", r.x1},
                       {"y1", r.y1},
                       {"tag", r.tag}});
  }
  j["regions"] = regions;
  return j;
}

inline World world_from_json(const Json& j) {
  if (j.at("type") != "world") throw std::invalid_argument("not a world file");
  if (j.at("kind") == "procedural") {
    return generate_world(j.at("seed").get<std::uint64_t>(),
                          world_spec_from_json(j.at("spec")));
  }
  World w = World::flat(j.at("nx").get<int>() * j.at("res").get<double>(),
                        j.at("ny").get<int>() * j.at("res").get<double>(),
                        j.at("res").get<double>());
  const auto& elev = j.at("elev");
  if (elev.size() != w.raster().size()) {
    throw std::invalid_argument("world raster size mismatch");
  }
  for (size_t i = 0; i < w.raster().size(); ++i) {
    w.raster()[i] = elev[i].get<double>();
  }
  for (const auto& rj : j.value("regions", Json::array())) {
    w.add_region({rj.at("x0").get<double>(), rj.at("y0").get<double>(),
                  rj.at("x1").get<double>(), rj.at("y1").get<double>(),
                  rj.at("tag").get<std::string>()});
  }
  return w;
}

inline Json to_json(const Episode& e) {
  Json path = Json::array();
  for (const Vec3& p : e.gt_path) path.push_back({p.x, p.y, p.z});
  return {{"version", kFormatVersion},
          {"type", "episode"},
          {"start", {e.start.x, e.start.y, e.start.heading_deg}},
          {"goal", {e.goal.x, e.goal.y}},
          {"instruction", e.instruction},
          {"gt_path", path},
          {"geodesic_length", e.geodesic_length},
          {"mode", to_string(e.mode)}};
}

inline Episode episode_from_json(const Json& j) {
  Episode e;
  const auto& s = j.at("start");
  e.start = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
  e.goal = {j.at("goal")[0].get<double>(), j.at("goal")[1].get<double>()};
  e.instruction = j.at("instruction").get<std::string>();
  for (const auto& pj : j.at("gt_path")) {
    e.gt_path.push_back(
        {pj[0].get<double>(), pj[1].get<double>(), pj[2].get<double>()});
  }
  e.geodesic_length = j.at("geodesic_length").get<double>();
  e.mode = j.at("mode").get<std::string>() == "sliding" ? MotionMode::Sliding
                                                        : MotionMode::NoSliding;
  return e;
}

inline Json to_json(const GtGraph& g) {
  Json nodes = Json::array();
  for (const Vec3& n : g.nodes) nodes.push_back({n.x, n.y, n.z});
  Json edges = Json::array();
  for (const auto& [a, b] : g.edges) edges.push_back({a, b});
  return {{"version", kFormatVersion},
          {"type", "gt_graph"},
          {"nodes", nodes},
          {"edges", edges}};
}

inline GtGraph gt_graph_from_json(const Json& j) {
  GtGraph g;
  for (const auto& nj : j.at("nodes")) {
    g.nodes.push_back(
        {nj[0].get<double>(), nj[1].get<double>(), nj[2].get<double>()});
  }
  g.neighbors.resize(g.nodes.size());
  for (const auto& ej : j.at("edges")) {
    const int a = ej[0].get<int>(), b = ej[1].get<int>();
    g.edges.push_back({a, b});
    g.neighbors[static_cast<size_t>(a)].push_back(b);
    g.neighbors[static_cast<size_t>(b)].push_back(a);
  }
  return g;
}

// --- model checkpoints -------------------------------------------------------

inline Json to_json(const ModelConfig& c) {
  return {{"d_model", c.d_model},
          {"num_heads", c.num_heads},
          {"ff_dim", c.ff_dim},
          {"num_layers", c.num_layers}};
}

inline ModelConfig model_config_from_json(const Json& j) {
  ModelConfig c;
  c.d_model = j.at("d_model").get<int>();
  c.num_heads = j.at("num_heads").get<int>();
  c.ff_dim = j.at("ff_dim").get<int>();
  c.num_layers = j.at("num_layers").get<int>();
  c.validate();
  return c;
}

// Versioned tensor file with a shape manifest per named tensor.
inline Json to_json(const PredictorModel& m) {
  Json tensors = Json::object();
  m.params.for_each([&](const std::string& name, const Mat& t) {
    Json data = Json::array();
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) data.push_back(t(r, c));
    }
    tensors[name] = {{"shape", {t.rows(), t.cols()}}, {"data", data}};
  });
  return {{"version", kFormatVersion},
          {"type", "predictor_checkpoint"},
          {"grid", grid_to_json(m.grid)},
          {"model", to_json(m.cfg)},
          {"tensors", tensors}};
}

inline PredictorModel model_from_json(const Json& j) {
  if (j.at("type") != "predictor_checkpoint") {
    throw std::invalid_argument("not a predictor checkpoint");
  }
  PredictorModel m = make_model(grid_from_json(j.at("grid")),
                                model_config_from_json(j.at("model")), 0);
  const Json& tensors = j.at("tensors");
  m.params.for_each([&](const std::string& name, Mat& t) {
    const Json& tj = tensors.at(name);
    const auto& shape = tj.at("shape");
    if (shape[0].get<Eigen::Index>() != t.rows() ||
        shape[1].get<Eigen::Index>() != t.cols()) {
      throw std::invalid_argument("checkpoint shape mismatch for " + name);
    }
    const auto& data = tj.at("data");
    size_t i = 0;
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = data[i++].get<double>();
    }
  });
  return m;
}

// --- file helpers ------------------------------------------------------------

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  Json j;
  in >> j;
  return j;
}

}  // namespace waynav
