#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <vector>

#include "waynav/radial.hpp"

namespace waynav {

// A graph node: a visited or merely observed location. Ids are assigned in
// creation order. cached_options is set exactly once, on the node's first
// visit, and reused on every revisit.
struct Node {
  int id = 0;
  Vec3 pos;
  bool visited = false;
  bool options_cached = false;
  std::vector<int> cached_options;
};

// A candidate waypoint in world coordinates carrying its predictor score
// (used to order duplicate removal).
struct ScoredPoint {
  Vec3 pos;
  double score = 0.0;
};

// Undirected topological graph with visitation records. Nodes are stored by
// id (dense, creation order); edges mean straight-line reachability between
// endpoints at the time they were added and are never removed.
class TopoGraph {
 public:
  int add_node(const Vec3& pos) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{id, pos, false, false, {}});
    return id;
  }

  bool has(int id) const {
    return id >= 0 && id < static_cast<int>(nodes_.size());
  }

  const Node& node(int id) const {
    require(id);
    return nodes_[static_cast<size_t>(id)];
  }
  Node& node(int id) {
    require(id);
    return nodes_[static_cast<size_t>(id)];
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::set<std::pair<int, int>>& edges() const { return edges_; }

  // No self loops, no duplicates.
  void add_edge(int i, int j) {
    require(i);
    require(j);
    if (i == j) return;
    edges_.insert({std::min(i, j), std::max(i, j)});
  }

  bool has_edge(int i, int j) const {
    return edges_.count({std::min(i, j), std::max(i, j)}) > 0;
  }

  std::vector<int> neighbors(int id) const {
    require(id);
    std::vector<int> out;
    for (const auto& [i, j] : edges_) {
      if (i == id) out.push_back(j);
      if (j == id) out.push_back(i);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  size_t node_count() const { return nodes_.size(); }
  size_t edge_count() const { return edges_.size(); }

 private:
  void require(int id) const {
    if (!has(id)) throw std::out_of_range("TopoGraph: unknown node id");
  }

  std::vector<Node> nodes_;
  std::set<std::pair<int, int>> edges_;
};

// Incorporates newly predicted waypoints into the graph:
//   1. duplicate removal among the new waypoints themselves, processed in
//      descending score order (keep the first of any pair closer than the
//      merge threshold);
//   2. each survivor either reuses the nearest existing node within the
//      threshold (2-D distance, ties to the lower id) or becomes a new
//      unvisited node;
//   3. an edge is added from the current node to every option.
// Returns the option ids (excluding the current node itself), deduplicated,
// in processing order.
inline std::vector<int> merging_module(TopoGraph& g,
                                       std::vector<ScoredPoint> new_waypoints,
                                       int current, double merge_threshold) {
  if (!(merge_threshold > 0.0)) {
    throw std::invalid_argument("merging_module: threshold must be > 0");
  }
  if (!g.has(current)) {
    throw std::out_of_range("merging_module: unknown current node");
  }
  std::stable_sort(new_waypoints.begin(), new_waypoints.end(),
                   [](const ScoredPoint& a, const ScoredPoint& b) {
                     return a.score > b.score;
                   });

  std::vector<ScoredPoint> survivors;
  for (const ScoredPoint& w : new_waypoints) {
    bool dup = false;
    for (const ScoredPoint& kept : survivors) {
      if (dist2d(kept.pos, w.pos) < merge_threshold) {
        dup = true;
        break;
      }
    }
    if (!dup) survivors.push_back(w);
  }

  std::vector<int> options;
  for (const ScoredPoint& w : survivors) {
    int target = -1;
    double best = merge_threshold;
    for (const Node& n : g.nodes()) {  // ascending id: ties keep lower id
      const double d = dist2d(n.pos, w.pos);
      if (d < best) {
        best = d;
        target = n.id;
      }
    }
    // Nodes exactly at the threshold are not merged (strict <); an existing
    // node at distance == threshold therefore spawns a sibling.
    if (target < 0) target = g.add_node(w.pos);
    if (target == current) continue;  // waypoint collapsed onto the agent
    g.add_edge(current, target);
    if (std::find(options.begin(), options.end(), target) == options.end()) {
      options.push_back(target);
    }
  }
  return options;
}

using WaypointProvider = std::function<std::vector<ScoredPoint>()>;

// Algorithm: revisits return the graph unchanged and replay the node's cached
// options; a first visit marks the node visited, asks the provider for new
// waypoints (obstacle mapping + prediction happen inside it) and merges them.
inline const std::vector<int>& graph_update(TopoGraph& g, int current,
                                            const WaypointProvider& provider,
                                            double merge_threshold) {
  Node& n = g.node(current);
  if (n.visited) return n.cached_options;
  n.visited = true;
  const std::vector<int> options =
      merging_module(g, provider(), current, merge_threshold);
  Node& again = g.node(current);  // merging may reallocate the node vector
  again.cached_options = options;
  again.options_cached = true;
  return again.cached_options;
}

// Minimum total 2-D Euclidean edge length path (uniform-cost search).
// Returns nullopt when disconnected.
inline std::optional<std::vector<int>> shortest_path(const TopoGraph& g,
                                                     int from, int to) {
  if (!g.has(from) || !g.has(to)) {
    throw std::out_of_range("shortest_path: unknown node id");
  }
  if (from == to) return std::vector<int>{from};
  const size_t n = g.node_count();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> pq;
  dist[static_cast<size_t>(from)] = 0.0;
  pq.push({0.0, from});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<size_t>(u)]) continue;
    if (u == to) break;
    for (int v : g.neighbors(u)) {
      const double nd = d + dist2d(g.node(u).pos, g.node(v).pos);
      if (nd < dist[static_cast<size_t>(v)]) {
        dist[static_cast<size_t>(v)] = nd;
        prev[static_cast<size_t>(v)] = u;
        pq.push({nd, v});
      }
    }
  }
  if (!std::isfinite(dist[static_cast<size_t>(to)])) return std::nullopt;
  std::vector<int> path;
  for (int u = to; u != -1; u = prev[static_cast<size_t>(u)]) path.push_back(u);
  std::reverse(path.begin(), path.end());
  return path;
}

inline double path_length(const TopoGraph& g, const std::vector<int>& path) {
  double len = 0.0;
  for (size_t i = 1; i < path.size(); ++i) {
    len += dist2d(g.node(path[i - 1]).pos, g.node(path[i]).pos);
  }
  return len;
}

// Disjoint, exhaustive split of node ids by visitation flag, ascending.
inline std::pair<std::vector<int>, std::vector<int>> visit_partition(
    const TopoGraph& g) {
  std::pair<std::vector<int>, std::vector<int>> out;
  for (const Node& n : g.nodes()) {
    (n.visited ? out.first : out.second).push_back(n.id);
  }
  return out;
}

}  // namespace waynav
