#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "waynav/radial.hpp"

namespace waynav {

// Agent-frame point sample: x forward, y left, z relative to the agent foot.
using PointCloud = std::vector<Vec3>;

// Accepted elevation band for binning, relative to the agent foot. Points
// above z_max (ceilings) or below z_min are ignored.
struct ElevationBand {
  double z_min = -2.0;
  double z_max = 2.0;
};

// Per-cell maximum point elevation over the radial grid. Cells that received
// no point stay unknown.
struct ElevationGrid {
  RadialGrid grid;
  std::vector<double> elevation;  // angle-major: index = a * num_radii + j
  std::vector<std::uint8_t> known;

  explicit ElevationGrid(const RadialGrid& g = RadialGrid{})
      : grid(g),
        elevation(static_cast<size_t>(g.cell_count()), 0.0),
        known(static_cast<size_t>(g.cell_count()), 0) {}

  size_t idx(int a, int j) const {
    return static_cast<size_t>(a) * grid.num_radii + j;
  }
  double elev(int a, int j) const { return elevation[idx(a, j)]; }
  bool is_known(int a, int j) const { return known[idx(a, j)] != 0; }
};

// Binary occupancy over the radial grid: 1 = obstacle, 0 = free.
struct ObstacleMap {
  RadialGrid grid;
  std::vector<std::uint8_t> occupied;  // angle-major

  explicit ObstacleMap(const RadialGrid& g = RadialGrid{})
      : grid(g), occupied(static_cast<size_t>(g.cell_count()), 0) {}

  size_t idx(int a, int j) const {
    return static_cast<size_t>(a) * grid.num_radii + j;
  }
  bool is_occupied(int a, int j) const { return occupied[idx(a, j)] != 0; }
  void set(int a, int j, bool v) { occupied[idx(a, j)] = v ? 1 : 0; }
};

// Projects a point cloud onto the radial grid, keeping per cell the maximum
// elevation of its points. Points outside the band or beyond max range are
// dropped. An empty cloud yields an all-unknown grid.
inline ElevationGrid bin_points(const RadialGrid& grid, const PointCloud& cloud,
                                const ElevationBand& band = ElevationBand{}) {
  if (!(band.z_min < band.z_max)) {
    throw std::invalid_argument("bin_points: z_min must be below z_max");
  }
  ElevationGrid eg(grid);
  for (const Vec3& p : cloud) {
    if (p.z < band.z_min || p.z > band.z_max) continue;
    const auto cell = point_to_cell(grid, local_to_polar({p.x, p.y}));
    if (!cell) continue;
    const size_t i = eg.idx(cell->a, cell->j);
    if (!eg.known[i] || p.z > eg.elevation[i]) eg.elevation[i] = p.z;
    eg.known[i] = 1;
  }
  return eg;
}

// Marks cells whose radial elevation gradient exceeds the slope threshold.
// Walking outward along each ray, an unknown cell carries the last known
// elevation (the agent foot level, 0, before any known cell), so occlusion
// shadows contribute zero gradient and stay free. The gradient is absolute:
// steep drops are obstacles too.
inline ObstacleMap gradient_filter(const ElevationGrid& eg,
                                   double slope_threshold = 1.0) {
  if (!(slope_threshold > 0.0)) {
    throw std::invalid_argument("gradient_filter: threshold must be > 0");
  }
  ObstacleMap map(eg.grid);
  const double dr = eg.grid.radial_step_m;
  for (int a = 0; a < eg.grid.num_angles; ++a) {
    double prev = 0.0;  // e(a, -1): the agent's own foot elevation
    for (int j = 0; j < eg.grid.num_radii; ++j) {
      const double cur = eg.is_known(a, j) ? eg.elev(a, j) : prev;
      if (std::abs(cur - prev) / dr > slope_threshold) map.set(a, j, true);
      prev = cur;
    }
  }
  return map;
}

// Smallest occupied radial index along ray a, if any.
inline std::optional<int> first_obstacle_index(const ObstacleMap& map, int a) {
  if (a < 0 || a >= map.grid.num_angles) {
    throw std::out_of_range("first_obstacle_index: angle bin out of bounds");
  }
  for (int j = 0; j < map.grid.num_radii; ++j) {
    if (map.is_occupied(a, j)) return j;
  }
  return std::nullopt;
}

}  // namespace waynav
