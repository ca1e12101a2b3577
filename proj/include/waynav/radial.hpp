#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace waynav {

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Normalize an angle in degrees to [0, 360).
inline double normalize_deg(double d) {
  d = std::fmod(d, 360.0);
  if (d < 0.0) d += 360.0;
  if (d >= 360.0) d = 0.0;  // fmod may round back up to 360
  return d;
}

// Normalize an angle in degrees to (-180, 180].
inline double normalize_signed_deg(double d) {
  d = normalize_deg(d);
  return d > 180.0 ? d - 360.0 : d;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  Vec2 xy() const { return {x, y}; }
};

inline double dist2d(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}
inline double dist2d(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Agent pose in the world plane. Heading is degrees, counterclockwise,
// with 0 pointing along world +x.
struct AgentPose {
  double x = 0.0;
  double y = 0.0;
  double heading_deg = 0.0;
};

// Polar coordinates in the agent frame. Bearing is measured counterclockwise
// from the agent heading, so bearing 0 is straight ahead and 90 is left.
struct PolarPoint {
  double bearing_deg = 0.0;  // in [0, 360)
  double range_m = 0.0;      // >= 0
};

// Cartesian agent frame: x forward, y left.
struct LocalPoint {
  double x = 0.0;
  double y = 0.0;
};

// Agent-centered polar discretization shared by obstacle maps, heatmaps and
// waypoint targets. Defaults: 120 angle bins of 3 degrees, 12 radial bins of
// 0.25 m, 3.0 m range.
struct RadialGrid {
  int num_angles = 120;
  int num_radii = 12;
  double angle_step_deg = 3.0;
  double radial_step_m = 0.25;
  double max_range_m = 3.0;

  int cell_count() const { return num_angles * num_radii; }

  void validate() const {
    if (num_angles <= 0 || num_radii <= 0 || angle_step_deg <= 0.0 ||
        radial_step_m <= 0.0 || max_range_m <= 0.0) {
      throw std::invalid_argument("RadialGrid: all fields must be positive");
    }
    if (std::abs(num_angles * angle_step_deg - 360.0) > 1e-9) {
      throw std::invalid_argument(
          "RadialGrid: num_angles * angle_step must cover 360 degrees");
    }
    if (std::abs(num_radii * radial_step_m - max_range_m) > 1e-9) {
      throw std::invalid_argument(
          "RadialGrid: num_radii * radial_step must equal max_range");
    }
  }
};

// One bin of the radial grid: a = angle index, j = radial index.
struct Cell {
  int a = 0;
  int j = 0;
  bool operator==(const Cell& o) const { return a == o.a && j == o.j; }
};

inline bool cell_in_bounds(const RadialGrid& g, const Cell& c) {
  return c.a >= 0 && c.a < g.num_angles && c.j >= 0 && c.j < g.num_radii;
}

// Center of a cell in polar agent coordinates.
inline PolarPoint cell_center(const RadialGrid& g, const Cell& c) {
  if (!cell_in_bounds(g, c)) {
    throw std::out_of_range("cell_center: cell (" + std::to_string(c.a) +
                            ", " + std::to_string(c.j) + ") out of bounds");
  }
  return {(c.a + 0.5) * g.angle_step_deg, (c.j + 0.5) * g.radial_step_m};
}

// Maps a polar point to its cell. Radial bin j covers the half-open interval
// (j*step, (j+1)*step]; range 0 belongs to bin 0. Returns nullopt when the
// range exceeds max_range.
inline std::optional<Cell> point_to_cell(const RadialGrid& g,
                                         const PolarPoint& p) {
  if (p.range_m < 0.0) {
    throw std::invalid_argument("point_to_cell: negative range");
  }
  if (p.range_m > g.max_range_m) return std::nullopt;
  const int a = static_cast<int>(std::floor(normalize_deg(p.bearing_deg) /
                                            g.angle_step_deg)) %
                g.num_angles;
  int j = 0;
  if (p.range_m > 0.0) {
    j = static_cast<int>(std::ceil(p.range_m / g.radial_step_m)) - 1;
    if (j < 0) j = 0;
    if (j >= g.num_radii) j = g.num_radii - 1;
  }
  return Cell{a, j};
}

inline LocalPoint polar_to_local(const PolarPoint& p) {
  const double b = deg2rad(p.bearing_deg);
  return {p.range_m * std::cos(b), p.range_m * std::sin(b)};
}

inline PolarPoint local_to_polar(const LocalPoint& p) {
  return {normalize_deg(rad2deg(std::atan2(p.y, p.x))), std::hypot(p.x, p.y)};
}

// Rigid transform of an agent-frame point into world coordinates.
inline Vec2 local_to_world(const AgentPose& pose, const LocalPoint& p) {
  const double h = deg2rad(pose.heading_deg);
  const double c = std::cos(h), s = std::sin(h);
  return {pose.x + c * p.x - s * p.y, pose.y + s * p.x + c * p.y};
}

inline LocalPoint world_to_local(const AgentPose& pose, const Vec2& w) {
  const double h = deg2rad(pose.heading_deg);
  const double c = std::cos(h), s = std::sin(h);
  const double dx = w.x - pose.x, dy = w.y - pose.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

// Bearing/range of a world point relative to the agent pose.
inline PolarPoint relative_polar(const AgentPose& pose, const Vec2& w) {
  return local_to_polar(world_to_local(pose, w));
}

}  // namespace waynav
