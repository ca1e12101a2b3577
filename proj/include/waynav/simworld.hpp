#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "waynav/actions.hpp"
#include "waynav/obstacle_map.hpp"
#include "waynav/radial.hpp"
#include "waynav/rng.hpp"

namespace waynav {

struct Region {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  std::string tag;
  bool contains(double x, double y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
};

// Where an agent should stand to face a generated staircase head-on.
struct StairInfo {
  Vec2 foot;
  double facing_deg = 0.0;
};

// Procedural floor-plan parameters. Rooms form a grid separated by walls with
// door openings; an optional elevated room is reached by a staircase with
// standard 0.17 m risers over 0.25 m treads.
struct WorldSpec {
  double extent_w = 10.0;
  double extent_h = 8.0;
  int rooms_x = 3;
  int rooms_y = 2;
  double door_width = 1.0;  // also the corridor width through walls
  double wall_height = 1.8;
  double wall_thickness = 0.1;
  bool with_stairs = false;
  double extra_door_prob = 0.3;
  double res = 0.05;

  void validate() const {
    if (res <= 0 || extent_w <= 0 || extent_h <= 0 || rooms_x < 1 || rooms_y < 1) {
      throw std::invalid_argument("WorldSpec: bad extent or room count");
    }
    if (door_width < 0.8) {
      throw std::invalid_argument("WorldSpec: corridor width below 0.8 m is infeasible");
    }
    const double room_w = extent_w / rooms_x;
    const double room_h = extent_h / rooms_y;
    if (room_w < door_width + 1.0 || room_h < door_width + 1.0) {
      throw std::invalid_argument("WorldSpec: rooms too small for doors");
    }
    if (wall_height <= 0.5) {
      throw std::invalid_argument("WorldSpec: walls must be taller than 0.5 m");
    }
  }
};

// Deterministic 2.5-D heightfield world. Elevations live on a uniform grid;
// everything outside the extent is impassable.
class World {
 public:
  static World flat(double width_m, double height_m, double res = 0.05) {
    World w;
    w.res_ = res;
    w.nx_ = std::max(1, static_cast<int>(std::lround(width_m / res)));
    w.ny_ = std::max(1, static_cast<int>(std::lround(height_m / res)));
    w.elev_.assign(static_cast<size_t>(w.nx_) * w.ny_, 0.0);
    return w;
  }

  double res() const { return res_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double width() const { return nx_ * res_; }
  double height() const { return ny_ * res_; }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t s) { seed_ = s; }

  bool in_bounds(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x < width() && y < height();
  }

  int cell_ix(double x) const {
    return std::clamp(static_cast<int>(std::floor(x / res_)), 0, nx_ - 1);
  }
  int cell_iy(double y) const {
    return std::clamp(static_cast<int>(std::floor(y / res_)), 0, ny_ - 1);
  }

  double elev_cell(int ix, int iy) const {
    return elev_[static_cast<size_t>(iy) * nx_ + ix];
  }
  double& elev_cell(int ix, int iy) {
    return elev_[static_cast<size_t>(iy) * nx_ + ix];
  }

  // Nearest-cell lookup, clamped to the extent.
  double elevation_at(double x, double y) const {
    return elev_cell(cell_ix(x), cell_iy(y));
  }

  // Sets cells whose center falls in [x0,x1) x [y0,y1).
  void fill_rect(double x0, double y0, double x1, double y1, double h) {
    for (int iy = 0; iy < ny_; ++iy) {
      const double cy = (iy + 0.5) * res_;
      if (cy < y0 || cy >= y1) continue;
      for (int ix = 0; ix < nx_; ++ix) {
        const double cx = (ix + 0.5) * res_;
        if (cx < x0 || cx >= x1) continue;
        elev_cell(ix, iy) = h;
      }
    }
  }

  void add_region(const Region& r) { regions_.push_back(r); }
  const std::vector<Region>& regions() const { return regions_; }

  std::string tag_at(double x, double y) const {
    for (const Region& r : regions_) {
      if (r.contains(x, y)) return r.tag;
    }
    return "open area";
  }

  const std::vector<double>& raster() const { return elev_; }
  std::vector<double>& raster() { return elev_; }

  std::optional<StairInfo> stair_info;
  std::optional<WorldSpec> spec;  // provenance when procedurally generated

 private:
  double res_ = 0.05;
  int nx_ = 1, ny_ = 1;
  std::vector<double> elev_;
  std::vector<Region> regions_;
  std::uint64_t seed_ = 0;
};

struct AgentState {
  double x = 0.0;
  double y = 0.0;
  double heading_deg = 0.0;

  AgentPose pose() const { return {x, y, heading_deg}; }
  static AgentState from(const AgentPose& p) { return {p.x, p.y, p.heading_deg}; }
};

// Idealized panoramic range sensing: for each angle bin of the grid, the
// heightfield is sampled along the bin-center bearing every `res` meters out
// to max range, emitting agent-frame points with elevation relative to the
// agent's foot. Optional Gaussian noise perturbs elevations.
inline PointCloud panoramic_scan(const World& world, const AgentPose& pose,
                                 const RadialGrid& grid = RadialGrid{},
                                 double noise_std = 0.0, Rng* rng = nullptr) {
  PointCloud cloud;
  const double agent_z = world.elevation_at(pose.x, pose.y);
  const int steps = static_cast<int>(std::lround(grid.max_range_m / world.res()));
  cloud.reserve(static_cast<size_t>(grid.num_angles) * steps);
  for (int a = 0; a < grid.num_angles; ++a) {
    const double bearing = (a + 0.5) * grid.angle_step_deg;
    for (int k = 1; k <= steps; ++k) {
      const double r = k * world.res();
      const LocalPoint lp = polar_to_local({bearing, r});
      const Vec2 w = local_to_world(pose, lp);
      if (!world.in_bounds(w.x, w.y)) continue;
      double z = world.elevation_at(w.x, w.y) - agent_z;
      if (noise_std > 0.0 && rng) z += rng->normal(0.0, noise_std);
      cloud.push_back({lp.x, lp.y, z});
    }
  }
  return cloud;
}

namespace detail {

// A straight hop of at most one forward step: passable iff every sample stays
// within the climb budget relative to the segment start (the same
// gradient-vs-radial-step rule the obstacle map uses, evaluated at the motion
// scale; intermediate samples catch thin walls).
inline bool hop_free(const World& w, const Vec2& from, const Vec2& to,
                     double slope_threshold) {
  const double budget = slope_threshold * kForwardStepM;
  const double e0 = w.elevation_at(from.x, from.y);
  const double len = std::hypot(to.x - from.x, to.y - from.y);
  const int n = std::max(1, static_cast<int>(std::ceil(len / w.res())));
  for (int i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double x = from.x + t * (to.x - from.x);
    const double y = from.y + t * (to.y - from.y);
    if (!w.in_bounds(x, y)) return false;
    if (std::abs(w.elevation_at(x, y) - e0) > budget) return false;
  }
  return true;
}

}  // namespace detail

struct StepResult {
  AgentState state;
  bool collided = false;
};

// Executes one low-level action. Turns always succeed. Forward motion tests
// the swept segment; when blocked, sliding mode moves the free axis component
// (larger first) and no-sliding mode stays in place. Either way a blocked
// forward counts as a collision.
inline StepResult step(const World& world, const AgentState& agent,
                       LowLevelAction action, MotionMode mode,
                       double slope_threshold = 1.0) {
  StepResult out{agent, false};
  switch (action) {
    case LowLevelAction::Stop:
      return out;
    case LowLevelAction::TurnLeft:
      out.state.heading_deg = normalize_deg(agent.heading_deg + kTurnStepDeg);
      return out;
    case LowLevelAction::TurnRight:
      out.state.heading_deg = normalize_deg(agent.heading_deg - kTurnStepDeg);
      return out;
    case LowLevelAction::Forward:
      break;
  }
  const double h = deg2rad(agent.heading_deg);
  const Vec2 from{agent.x, agent.y};
  const double dx = kForwardStepM * std::cos(h);
  const double dy = kForwardStepM * std::sin(h);
  const Vec2 target{agent.x + dx, agent.y + dy};
  if (detail::hop_free(world, from, target, slope_threshold)) {
    out.state.x = target.x;
    out.state.y = target.y;
    return out;
  }
  out.collided = true;
  if (mode == MotionMode::NoSliding) return out;
  // Sliding: keep the free axis component, larger magnitude first.
  const std::array<Vec2, 2> candidates =
      std::abs(dx) >= std::abs(dy)
          ? std::array<Vec2, 2>{Vec2{agent.x + dx, agent.y}, Vec2{agent.x, agent.y + dy}}
          : std::array<Vec2, 2>{Vec2{agent.x, agent.y + dy}, Vec2{agent.x + dx, agent.y}};
  for (const Vec2& c : candidates) {
    if (std::hypot(c.x - agent.x, c.y - agent.y) < 1e-12) continue;
    if (detail::hop_free(world, from, c, slope_threshold)) {
      out.state.x = c.x;
      out.state.y = c.y;
      return out;
    }
  }
  return out;
}

// Whether a straight segment of arbitrary length can be walked in forward
// steps (chunks of one step length, each obeying the climb budget).
inline bool segment_traversable(const World& w, const Vec2& from, const Vec2& to,
                                double slope_threshold = 1.0) {
  if (!w.in_bounds(from.x, from.y) || !w.in_bounds(to.x, to.y)) return false;
  const double len = std::hypot(to.x - from.x, to.y - from.y);
  if (len < 1e-12) return true;
  const int chunks = std::max(1, static_cast<int>(std::ceil(len / kForwardStepM)));
  Vec2 cur = from;
  for (int i = 1; i <= chunks; ++i) {
    const double t = static_cast<double>(i) / chunks;
    const Vec2 next{from.x + t * (to.x - from.x), from.y + t * (to.y - from.y)};
    if (!detail::hop_free(w, cur, next, slope_threshold)) return false;
    cur = next;
  }
  return true;
}

// A point an agent can occupy: in bounds with lateral clearance (no abrupt
// elevation change within the body radius).
inline bool standable(const World& w, const Vec2& p, double slope_threshold = 1.0,
                      double clearance = 0.2) {
  if (!w.in_bounds(p.x, p.y)) return false;
  const double e0 = w.elevation_at(p.x, p.y);
  const double budget = slope_threshold * kForwardStepM;
  for (const double r : {clearance * 0.5, clearance}) {
    for (int k = 0; k < 8; ++k) {
      const double ang = k * kPi / 4.0;
      const double x = p.x + r * std::cos(ang);
      const double y = p.y + r * std::sin(ang);
      if (!w.in_bounds(x, y)) return false;
      if (std::abs(w.elevation_at(x, y) - e0) > budget) return false;
    }
  }
  return true;
}

// Grid Dijkstra distances from a source over the traversable heightfield
// (8-connected; a move is allowed when the elevation change stays within the
// per-step climb budget). Used for geodesic metrics, episode generation and
// the ground-truth planner.
class GeodesicField {
 public:
  GeodesicField(const World& world, const Vec2& source,
                double slope_threshold = 1.0)
      : world_(&world), nx_(world.nx()), ny_(world.ny()) {
    const double kInf = std::numeric_limits<double>::infinity();
    dist_.assign(static_cast<size_t>(nx_) * ny_, kInf);
    const double budget = slope_threshold * kForwardStepM;
    const int sx = world.cell_ix(source.x), sy = world.cell_iy(source.y);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> pq;
    const auto id = [this](int ix, int iy) { return iy * nx_ + ix; };
    dist_[static_cast<size_t>(id(sx, sy))] = 0.0;
    pq.push({0.0, id(sx, sy)});
    const double res = world.res();
    const double diag = res * std::sqrt(2.0);
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (d > dist_[static_cast<size_t>(u)]) continue;
      const int ux = u % nx_, uy = u / nx_;
      const double eu = world.elev_cell(ux, uy);
      for (int dyi = -1; dyi <= 1; ++dyi) {
        for (int dxi = -1; dxi <= 1; ++dxi) {
          if (dxi == 0 && dyi == 0) continue;
          const int vx = ux + dxi, vy = uy + dyi;
          if (vx < 0 || vx >= nx_ || vy < 0 || vy >= ny_) continue;
          if (std::abs(world.elev_cell(vx, vy) - eu) > budget) continue;
          const double nd = d + ((dxi != 0 && dyi != 0) ? diag : res);
          double& dv = dist_[static_cast<size_t>(id(vx, vy))];
          if (nd < dv) {
            dv = nd;
            pq.push({nd, id(vx, vy)});
          }
        }
      }
    }
  }

  double at(const Vec2& p) const {
    if (!world_->in_bounds(p.x, p.y)) {
      return std::numeric_limits<double>::infinity();
    }
    return dist_[static_cast<size_t>(world_->cell_iy(p.y)) * nx_ +
                 world_->cell_ix(p.x)];
  }

  // Steepest-descent polyline from p back to the source, subsampled to
  // roughly `spacing` meters. Empty when p is unreachable.
  std::vector<Vec3> trace_path(const Vec2& p, double spacing = 0.25) const {
    std::vector<Vec3> path;
    if (!std::isfinite(at(p))) return path;
    int ix = world_->cell_ix(p.x), iy = world_->cell_iy(p.y);
    const auto point = [&](int cx, int cy) {
      const double x = (cx + 0.5) * world_->res();
      const double y = (cy + 0.5) * world_->res();
      return Vec3{x, y, world_->elev_cell(cx, cy)};
    };
    path.push_back({p.x, p.y, world_->elevation_at(p.x, p.y)});
    double since = 0.0;
    while (dist_[static_cast<size_t>(iy) * nx_ + ix] > 0.0) {
      int bx = ix, by = iy;
      double best = dist_[static_cast<size_t>(iy) * nx_ + ix];
      for (int dyi = -1; dyi <= 1; ++dyi) {
        for (int dxi = -1; dxi <= 1; ++dxi) {
          const int vx = ix + dxi, vy = iy + dyi;
          if (vx < 0 || vx >= nx_ || vy < 0 || vy >= ny_) continue;
          const double dv = dist_[static_cast<size_t>(vy) * nx_ + vx];
          if (dv < best) {
            best = dv;
            bx = vx;
            by = vy;
          }
        }
      }
      if (bx == ix && by == iy) break;  // stuck (flat plateau; should not happen)
      since += std::hypot((bx - ix) * world_->res(), (by - iy) * world_->res());
      ix = bx;
      iy = by;
      if (since >= spacing) {
        path.push_back(point(ix, iy));
        since = 0.0;
      }
    }
    path.push_back(point(ix, iy));
    return path;
  }

 private:
  const World* world_;
  int nx_, ny_;
  std::vector<double> dist_;
};

// ---------------------------------------------------------------------------
// Procedural generation
// ---------------------------------------------------------------------------

namespace detail {

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(static_cast<size_t>(n)) {
    for (int i = 0; i < n; ++i) parent[static_cast<size_t>(i)] = i;
  }
  int find(int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<size_t>(a)] = b;
    return true;
  }
};

inline const std::array<const char*, 10>& room_tags() {
  static const std::array<const char*, 10> tags = {
      "kitchen",     "living room", "bedroom",  "office",      "hallway",
      "dining room", "bathroom",    "studio",   "storage room", "library"};
  return tags;
}

}  // namespace detail

// Builds a deterministic multi-room world. Rooms form a rooms_x x rooms_y
// grid; a randomized spanning tree of doors guarantees connectivity, plus
// optional extra doors. With stairs enabled, one spanning-tree leaf room is
// elevated by three 0.17 m risers and reached via a staircase through its
// single door; its other walls stay closed.
inline World generate_world(std::uint64_t seed, const WorldSpec& spec) {
  spec.validate();
  Rng rng(Rng::splitmix(seed ^ 0x5eedc0de12345678ull));
  World w = World::flat(spec.extent_w, spec.extent_h, spec.res);
  w.set_seed(seed);
  w.spec = spec;

  const double t = spec.wall_thickness;
  const double H = spec.wall_height;
  const double room_w = spec.extent_w / spec.rooms_x;
  const double room_h = spec.extent_h / spec.rooms_y;
  const int nr = spec.rooms_x * spec.rooms_y;
  const auto room_id = [&](int i, int j) { return j * spec.rooms_x + i; };

  // Outer walls.
  w.fill_rect(0, 0, spec.extent_w, t, H);
  w.fill_rect(0, spec.extent_h - t, spec.extent_w, spec.extent_h, H);
  w.fill_rect(0, 0, t, spec.extent_h, H);
  w.fill_rect(spec.extent_w - t, 0, spec.extent_w, spec.extent_h, H);

  // Internal walls (full, doors carved later).
  for (int i = 1; i < spec.rooms_x; ++i) {
    const double x = i * room_w;
    w.fill_rect(x - t / 2, 0, x + t / 2, spec.extent_h, H);
  }
  for (int j = 1; j < spec.rooms_y; ++j) {
    const double y = j * room_h;
    w.fill_rect(0, y - t / 2, spec.extent_w, y + t / 2, H);
  }

  // Candidate doors: one per shared wall between adjacent rooms.
  struct WallEdge {
    int ra, rb;      // room ids
    bool vertical;   // wall orientation: vertical walls separate x-neighbors
    double wx, wy;   // wall center position (x for vertical, y for horizontal)
    double lo, hi;   // usable span along the wall
  };
  std::vector<WallEdge> walls;
  for (int j = 0; j < spec.rooms_y; ++j) {
    for (int i = 0; i + 1 < spec.rooms_x; ++i) {
      walls.push_back({room_id(i, j), room_id(i + 1, j), true, (i + 1) * room_w,
                       0, j * room_h + t, (j + 1) * room_h - t});
    }
  }
  for (int j = 0; j + 1 < spec.rooms_y; ++j) {
    for (int i = 0; i < spec.rooms_x; ++i) {
      walls.push_back({room_id(i, j), room_id(i, j + 1), false, 0,
                       (j + 1) * room_h, i * room_w + t, (i + 1) * room_w - t});
    }
  }

  // Randomized spanning tree (shuffled Kruskal).
  std::vector<size_t> order(walls.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_int(i)]);
  }
  detail::DisjointSet ds(nr);
  std::vector<bool> is_tree(walls.size(), false);
  std::vector<int> tree_degree(static_cast<size_t>(nr), 0);
  for (size_t wi : order) {
    if (ds.unite(walls[wi].ra, walls[wi].rb)) {
      is_tree[wi] = true;
      tree_degree[static_cast<size_t>(walls[wi].ra)]++;
      tree_degree[static_cast<size_t>(walls[wi].rb)]++;
    }
  }

  // Optional elevated room: a spanning-tree leaf, so it has exactly one door.
  int elevated_room = -1;
  size_t stair_wall = 0;
  if (spec.with_stairs && nr >= 2) {
    std::vector<int> leaves;
    for (int r = 0; r < nr; ++r) {
      if (tree_degree[static_cast<size_t>(r)] == 1) leaves.push_back(r);
    }
    elevated_room = leaves[rng.uniform_int(leaves.size())];
    for (size_t wi = 0; wi < walls.size(); ++wi) {
      if (is_tree[wi] &&
          (walls[wi].ra == elevated_room || walls[wi].rb == elevated_room)) {
        stair_wall = wi;
        break;
      }
    }
  }

  const double riser = 0.17, tread = 0.25;
  const int num_risers = 3;
  const double top = num_risers * riser;

  if (elevated_room >= 0) {
    const int ei = elevated_room % spec.rooms_x;
    const int ej = elevated_room / spec.rooms_x;
    w.fill_rect(ei * room_w + (ei == 0 ? t : t / 2),
                ej * room_h + (ej == 0 ? t : t / 2),
                (ei + 1) * room_w - (ei == spec.rooms_x - 1 ? t : t / 2),
                (ej + 1) * room_h - (ej == spec.rooms_y - 1 ? t : t / 2), top);
  }

  // Carve doors.
  for (size_t wi = 0; wi < walls.size(); ++wi) {
    const WallEdge& e = walls[wi];
    const bool touches_elevated =
        elevated_room >= 0 && (e.ra == elevated_room || e.rb == elevated_room);
    bool open = is_tree[wi];
    if (!open && !touches_elevated) open = rng.uniform() < spec.extra_door_prob;
    if (touches_elevated && wi != stair_wall) open = false;
    if (!open) continue;

    const double dw = spec.door_width;
    const double margin = 0.2;
    const double lo = e.lo + margin, hi = e.hi - margin - dw;
    const double pos = hi > lo ? rng.uniform(lo, hi) : lo;
    const bool is_stair_door = elevated_room >= 0 && wi == stair_wall;

    if (e.vertical) {
      w.fill_rect(e.wx - t / 2, pos, e.wx + t / 2, pos + dw, 0.0);
    } else {
      w.fill_rect(pos, e.wy - t / 2, pos + dw, e.wy + t / 2, 0.0);
    }

    if (is_stair_door) {
      // The staircase descends from the elevated floor through the door into
      // the lower room: top tread covers the wall band, lower treads step
      // down outward. Orientation depends on which side is elevated.
      const int lower = e.ra == elevated_room ? e.rb : e.ra;
      const int li = lower % spec.rooms_x;
      const int lj = lower / spec.rooms_x;
      if (e.vertical) {
        const bool lower_left = (li < elevated_room % spec.rooms_x);
        const double sgn = lower_left ? -1.0 : 1.0;  // direction into lower room
        for (int s = 0; s < num_risers; ++s) {
          const double h = top - (s + 1) * riser;
          const double xa = e.wx + sgn * (t / 2 + s * tread);
          const double xb = e.wx + sgn * (t / 2 + (s + 1) * tread);
          w.fill_rect(std::min(xa, xb), pos, std::max(xa, xb), pos + dw,
                      std::max(h, 0.0));
        }
        // Wall band inside the door joins the first tread down.
        w.fill_rect(e.wx - t / 2, pos, e.wx + t / 2, pos + dw, top - riser);
        w.stair_info = StairInfo{
            {e.wx + sgn * (t / 2 + num_risers * tread + 0.6), pos + dw / 2},
            normalize_deg(lower_left ? 0.0 : 180.0)};
      } else {
        const bool lower_below = (lj < elevated_room / spec.rooms_x);
        const double sgn = lower_below ? -1.0 : 1.0;
        for (int s = 0; s < num_risers; ++s) {
          const double h = top - (s + 1) * riser;
          const double ya = e.wy + sgn * (t / 2 + s * tread);
          const double yb = e.wy + sgn * (t / 2 + (s + 1) * tread);
          w.fill_rect(pos, std::min(ya, yb), pos + dw, std::max(ya, yb),
                      std::max(h, 0.0));
        }
        w.fill_rect(pos, e.wy - t / 2, pos + dw, e.wy + t / 2, top - riser);
        w.stair_info = StairInfo{
            {pos + dw / 2, e.wy + sgn * (t / 2 + num_risers * tread + 0.6)},
            normalize_deg(lower_below ? 90.0 : 270.0)};
      }
    }
  }

  // Scene tags, one per room, deterministic assignment.
  const auto& tags = detail::room_tags();
  const size_t tag_offset = rng.uniform_int(tags.size());
  for (int j = 0; j < spec.rooms_y; ++j) {
    for (int i = 0; i < spec.rooms_x; ++i) {
      Region r;
      r.x0 = i * room_w;
      r.y0 = j * room_h;
      r.x1 = (i + 1) * room_w;
      r.y1 = (j + 1) * room_h;
      r.tag = tags[(tag_offset + static_cast<size_t>(room_id(i, j))) % tags.size()];
      w.add_region(r);
    }
  }

  // Sanity: all room centers mutually reachable.
  const GeodesicField field(w, {room_w / 2, room_h / 2});
  for (int j = 0; j < spec.rooms_y; ++j) {
    for (int i = 0; i < spec.rooms_x; ++i) {
      const Vec2 c{(i + 0.5) * room_w, (j + 0.5) * room_h};
      if (!std::isfinite(field.at(c))) {
        throw std::logic_error("generate_world: disconnected room (generator bug)");
      }
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Ground-truth graph and episodes
// ---------------------------------------------------------------------------

struct GtGraph {
  std::vector<Vec3> nodes;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> neighbors;  // ascending, per node
};

// Poisson-disc (dart throwing) node sampling over free space; edges connect
// pairs within max_edge whose straight segment is traversable.
inline GtGraph sample_gt_graph(const World& world, std::uint64_t seed,
                               double node_spacing = 1.0, double max_edge = 3.0,
                               double slope_threshold = 1.0) {
  Rng rng(Rng::splitmix(seed ^ 0x9aafb33812ull));
  GtGraph g;
  const double area = world.width() * world.height();
  const int attempts =
      static_cast<int>(40.0 * area / (node_spacing * node_spacing));
  for (int i = 0; i < attempts; ++i) {
    const Vec2 p{rng.uniform(0.0, world.width()), rng.uniform(0.0, world.height())};
    if (!standable(world, p, slope_threshold)) continue;
    bool close = false;
    for (const Vec3& q : g.nodes) {
      if (dist2d(Vec3{p.x, p.y, 0}, q) < node_spacing) {
        close = true;
        break;
      }
    }
    if (close) continue;
    g.nodes.push_back({p.x, p.y, world.elevation_at(p.x, p.y)});
  }
  g.neighbors.resize(g.nodes.size());
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    for (size_t j = i + 1; j < g.nodes.size(); ++j) {
      if (dist2d(g.nodes[i], g.nodes[j]) > max_edge) continue;
      if (!segment_traversable(world, g.nodes[i].xy(), g.nodes[j].xy(),
                               slope_threshold)) {
        continue;
      }
      g.edges.push_back({static_cast<int>(i), static_cast<int>(j)});
      g.neighbors[i].push_back(static_cast<int>(j));
      g.neighbors[j].push_back(static_cast<int>(i));
    }
  }
  return g;
}

struct Episode {
  AgentPose start;
  Vec2 goal;
  std::string instruction;
  std::vector<Vec3> gt_path;
  double geodesic_length = 0.0;
  MotionMode mode = MotionMode::Sliding;
};

struct EpisodeSpec {
  double min_separation = 4.0;
  double max_separation = 12.0;
  MotionMode mode = MotionMode::Sliding;
  double slope_threshold = 1.0;
};

namespace detail {

inline std::string render_instruction(const std::vector<std::string>& tags,
                                      Rng& rng) {
  if (tags.empty()) return "Explore and stop at the goal.";
  std::string s;
  if (tags.size() == 1) {
    s = "Stay in the " + tags[0] + " and stop at the goal point.";
  } else {
    s = "Walk through the " + tags[0];
    for (size_t i = 1; i + 1 < tags.size(); ++i) {
      s += ", then into the " + tags[i];
    }
    s += ", and stop in the " + tags.back() + ".";
  }
  if (rng.uniform() < 0.5) s += " Do not enter other rooms.";
  return s;
}

}  // namespace detail

// Samples a start/goal pair with geodesic separation within the requested
// band, records the geodesic reference path and renders a step-by-step
// instruction from the region sequence along it.
inline Episode generate_episode(const World& world, std::uint64_t seed,
                                const EpisodeSpec& spec = {}) {
  Rng rng(Rng::splitmix(seed ^ 0xe9150de5ull));
  for (int attempt = 0; attempt < 60; ++attempt) {
    const Vec2 goal{rng.uniform(0.0, world.width()),
                    rng.uniform(0.0, world.height())};
    if (!standable(world, goal, spec.slope_threshold)) continue;
    const GeodesicField field(world, goal, spec.slope_threshold);
    for (int inner = 0; inner < 40; ++inner) {
      const Vec2 start{rng.uniform(0.0, world.width()),
                       rng.uniform(0.0, world.height())};
      if (!standable(world, start, spec.slope_threshold)) continue;
      const double sep = field.at(start);
      if (!std::isfinite(sep) || sep < spec.min_separation ||
          sep > spec.max_separation) {
        continue;
      }
      Episode ep;
      ep.start = {start.x, start.y, rng.uniform(0.0, 360.0)};
      ep.goal = goal;
      ep.gt_path = field.trace_path(start);
      ep.geodesic_length = sep;
      ep.mode = spec.mode;
      std::vector<std::string> tags;
      for (const Vec3& p : ep.gt_path) {
        const std::string tag = world.tag_at(p.x, p.y);
        if (tags.empty() || tags.back() != tag) tags.push_back(tag);
      }
      ep.instruction = detail::render_instruction(tags, rng);
      return ep;
    }
  }
  throw std::runtime_error(
      "generate_episode: no start/goal pair with feasible separation");
}

}  // namespace waynav
