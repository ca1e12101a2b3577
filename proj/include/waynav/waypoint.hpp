#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "waynav/obstacle_map.hpp"
#include "waynav/radial.hpp"

namespace waynav {

// Per-cell waypoint score/logit raster over the radial grid.
struct Heatmap {
  RadialGrid grid;
  std::vector<double> value;  // angle-major

  explicit Heatmap(const RadialGrid& g = RadialGrid{}, double fill = 0.0)
      : grid(g), value(static_cast<size_t>(g.cell_count()), fill) {}

  size_t idx(int a, int j) const {
    return static_cast<size_t>(a) * grid.num_radii + j;
  }
  double at(int a, int j) const { return value[idx(a, j)]; }
  double& at(int a, int j) { return value[idx(a, j)]; }
};

struct Waypoint {
  Cell cell;
  LocalPoint local;
  double score = 0.0;
};

// Selected waypoints, descending score, pairwise separated by the NMS radius.
using WaypointSet = std::vector<Waypoint>;

struct WaypointSelectConfig {
  int k = 5;
  double nms_radius_m = 1.0;
  double min_score = 0.25;
  bool use_mask = true;  // disabling reproduces the no-reachability ablation
};

// Masks out every cell at or beyond the first obstacle of its ray, enforcing
// linear reachability under the turn-then-move motion pattern. Occupied cells
// are always masked.
inline Heatmap reachability_mask(const ObstacleMap& map, const Heatmap& logits) {
  if (map.grid.num_angles != logits.grid.num_angles ||
      map.grid.num_radii != logits.grid.num_radii) {
    throw std::invalid_argument("reachability_mask: grid mismatch");
  }
  constexpr double kMasked = -std::numeric_limits<double>::infinity();
  Heatmap out = logits;
  for (int a = 0; a < map.grid.num_angles; ++a) {
    const auto first = first_obstacle_index(map, a);
    if (!first) continue;
    for (int j = *first; j < map.grid.num_radii; ++j) out.at(a, j) = kMasked;
  }
  return out;
}

// Greedy non-maximum suppression in metric space. Repeatedly takes the
// highest-scoring unsuppressed cell (ties: smaller angle bin, then smaller
// radial bin) and suppresses everything whose center lies within the NMS
// radius of it. May return fewer than k waypoints.
inline WaypointSet nms_select(const Heatmap& masked, int k, double nms_radius_m,
                              double min_score) {
  if (k < 1) throw std::invalid_argument("nms_select: k must be >= 1");
  if (!(nms_radius_m > 0.0)) {
    throw std::invalid_argument("nms_select: nms_radius must be > 0");
  }
  const RadialGrid& g = masked.grid;
  const int n = g.cell_count();
  std::vector<LocalPoint> centers(static_cast<size_t>(n));
  std::vector<std::uint8_t> alive(static_cast<size_t>(n), 0);
  for (int a = 0; a < g.num_angles; ++a) {
    for (int j = 0; j < g.num_radii; ++j) {
      const size_t i = masked.idx(a, j);
      centers[i] = polar_to_local(cell_center(g, {a, j}));
      const double v = masked.value[i];
      alive[i] = (std::isfinite(v) && v >= min_score) ? 1 : 0;
    }
  }

  WaypointSet picked;
  while (static_cast<int>(picked.size()) < k) {
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (alive[i] && (best < 0 || masked.value[i] > masked.value[best])) {
        best = i;  // scan order already encodes the a-then-j tie break
      }
    }
    if (best < 0) break;
    const Cell c{best / g.num_radii, best % g.num_radii};
    picked.push_back({c, centers[best], masked.value[best]});
    for (int i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      if (std::hypot(centers[i].x - centers[best].x,
                     centers[i].y - centers[best].y) < nms_radius_m) {
        alive[i] = 0;
      }
    }
  }
  return picked;
}

// Training-free waypoint oracle. Scores every free cell by its own range so
// NMS prefers the farthest reachable cell of each clear direction; the
// reachability mask confines candidates to linearly reachable space.
inline Heatmap geometric_heatmap(const ObstacleMap& map) {
  Heatmap h(map.grid);
  constexpr double kMasked = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < map.grid.num_angles; ++a) {
    for (int j = 0; j < map.grid.num_radii; ++j) {
      h.at(a, j) = map.is_occupied(a, j)
                       ? kMasked
                       : (j + 0.5) * map.grid.radial_step_m;
    }
  }
  return h;
}

inline WaypointSet geometric_predict(const ObstacleMap& map,
                                     const WaypointSelectConfig& cfg = {}) {
  Heatmap h = geometric_heatmap(map);
  if (cfg.use_mask) h = reachability_mask(map, h);
  return nms_select(h, cfg.k, cfg.nms_radius_m, cfg.min_score);
}

// Ground-truth supervision heatmap: one unnormalized Gaussian (peak 1.0) per
// neighbor, std sigma in bin units on both axes, angle axis wrapping.
// Overlapping Gaussians add.
inline Heatmap make_target_heatmap(const RadialGrid& grid,
                                   const std::vector<LocalPoint>& gt_neighbors,
                                   double sigma_bins = 1.0) {
  if (!(sigma_bins > 0.0)) {
    throw std::invalid_argument("make_target_heatmap: sigma must be > 0");
  }
  Heatmap h(grid);
  for (const LocalPoint& p : gt_neighbors) {
    const auto cell = point_to_cell(grid, local_to_polar(p));
    if (!cell) {
      throw std::invalid_argument("make_target_heatmap: neighbor out of range");
    }
    for (int a = 0; a < grid.num_angles; ++a) {
      int da = std::abs(a - cell->a);
      da = std::min(da, grid.num_angles - da);  // angle axis wraps
      for (int j = 0; j < grid.num_radii; ++j) {
        const int dj = j - cell->j;
        h.at(a, j) += std::exp(-(da * da + dj * dj) /
                               (2.0 * sigma_bins * sigma_bins));
      }
    }
  }
  return h;
}

}  // namespace waynav
