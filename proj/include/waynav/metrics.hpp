#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "waynav/radial.hpp"
#include "waynav/waypoint.hpp"

namespace waynav {

struct NavMetrics {
  double ne = 0.0;      // geodesic stop-to-goal distance
  bool osr = false;     // any trajectory point within the radius
  bool sr = false;      // stopped within the radius
  double spl = 0.0;     // success weighted by path length
  double ndtw = 0.0;    // exp(-DTW / (|ref| * radius))
  double collision_rate = 0.0;
};

// Full-sequence dynamic time warping with 2-D Euclidean point cost.
inline double dtw_distance(const std::vector<Vec3>& a,
                           const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("dtw_distance: empty sequence");
  }
  const size_t n = a.size(), m = b.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, kInf), cur(m + 1, kInf);
  prev[0] = 0.0;
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = kInf;
    for (size_t j = 1; j <= m; ++j) {
      const double c = dist2d(a[i - 1], b[j - 1]);
      cur[j] = c + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

// Computes the standard navigation metric suite for one episode.
// `trajectory` is the agent position trace including the start pose;
// `geodesic_to_goal` must measure through free space (the simulator field).
inline NavMetrics nav_metrics(
    const std::vector<Vec3>& trajectory, const std::vector<Vec3>& gt_path,
    const std::function<double(const Vec2&)>& geodesic_to_goal, int collisions,
    int forward_count, double success_radius) {
  if (trajectory.empty()) {
    throw std::invalid_argument("nav_metrics: empty trajectory");
  }
  if (gt_path.empty()) {
    throw std::invalid_argument("nav_metrics: empty reference path");
  }
  NavMetrics m;
  const Vec3& stop = trajectory.back();
  const Vec3& start = trajectory.front();
  m.ne = geodesic_to_goal(stop.xy());
  m.sr = m.ne <= success_radius;
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& p : trajectory) best = std::min(best, geodesic_to_goal(p.xy()));
  m.osr = best <= success_radius;

  const double shortest = geodesic_to_goal(start.xy());
  double traveled = 0.0;
  for (size_t i = 1; i < trajectory.size(); ++i) {
    traveled += dist2d(trajectory[i - 1], trajectory[i]);
  }
  if (m.sr) {
    const double denom = std::max(traveled, shortest);
    m.spl = denom > 0.0 ? shortest / denom : 1.0;
  }
  m.ndtw = std::exp(-dtw_distance(trajectory, gt_path) /
                    (static_cast<double>(gt_path.size()) * success_radius));
  m.collision_rate =
      forward_count > 0 ? static_cast<double>(collisions) / forward_count : 0.0;
  return m;
}

struct WaypointMetrics {
  double delta = 0.0;                 // |#predicted - #ground-truth |
  std::optional<double> pct_open;     // % of predictions on truth-free cells
  std::optional<double> avg_score;    // mean GT-heatmap value at predictions
  std::optional<double> d_c, d_h;     // Chamfer / Hausdorff (meters)
};

inline double mean_nearest(const std::vector<LocalPoint>& from,
                           const std::vector<LocalPoint>& to) {
  double sum = 0.0;
  for (const LocalPoint& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const LocalPoint& q : to) {
      best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
    }
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

inline double max_nearest(const std::vector<LocalPoint>& from,
                          const std::vector<LocalPoint>& to) {
  double worst = 0.0;
  for (const LocalPoint& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const LocalPoint& q : to) {
      best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

// Symmetric mean nearest-neighbor distance.
inline std::optional<double> chamfer(const std::vector<LocalPoint>& a,
                                     const std::vector<LocalPoint>& b) {
  if (a.empty() || b.empty()) return std::nullopt;
  return 0.5 * (mean_nearest(a, b) + mean_nearest(b, a));
}

// Symmetrized max directed nearest-neighbor distance.
inline std::optional<double> hausdorff(const std::vector<LocalPoint>& a,
                                       const std::vector<LocalPoint>& b) {
  if (a.empty() || b.empty()) return std::nullopt;
  return std::max(max_nearest(a, b), max_nearest(b, a));
}

// Waypoint-predictor quality against ground truth. `truth` is the simulator's
// exact obstacle classification, not the sensed map.
inline WaypointMetrics waypoint_metrics(const WaypointSet& predicted,
                                        const std::vector<LocalPoint>& gt_neighbors,
                                        const Heatmap& gt_heatmap,
                                        const ObstacleMap& truth) {
  WaypointMetrics wm;
  wm.delta = std::abs(static_cast<double>(predicted.size()) -
                      static_cast<double>(gt_neighbors.size()));
  if (!predicted.empty()) {
    int open = 0;
    double score_sum = 0.0;
    for (const Waypoint& w : predicted) {
      if (!truth.is_occupied(w.cell.a, w.cell.j)) open += 1;
      score_sum += gt_heatmap.at(w.cell.a, w.cell.j);
    }
    wm.pct_open = 100.0 * open / static_cast<double>(predicted.size());
    wm.avg_score = score_sum / static_cast<double>(predicted.size());
  }
  std::vector<LocalPoint> pred_pts;
  pred_pts.reserve(predicted.size());
  for (const Waypoint& w : predicted) pred_pts.push_back(w.local);
  wm.d_c = chamfer(pred_pts, gt_neighbors);
  wm.d_h = hausdorff(pred_pts, gt_neighbors);
  return wm;
}

// True when no obstacle sits at or before the cell on its ray.
inline bool is_linearly_reachable(const ObstacleMap& map, const Cell& c) {
  for (int j = 0; j <= c.j; ++j) {
    if (map.is_occupied(c.a, j)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct EpisodeReport {
  int episode_id = 0;
  std::uint64_t seed = 0;
  NavMetrics nav;
  int planner_steps = 0;
  int revisits = 0;
  int collisions = 0;
  int forward_count = 0;
  bool flagged = false;  // planner fallback or execution fault
};

struct NavSummary {
  int count = 0;
  double ne_mean = 0.0;
  double osr_pct = 0.0;
  double sr_pct = 0.0;
  double spl_mean = 0.0;
  double ndtw_mean = 0.0;
  double collision_rate_mean = 0.0;
  double revisits_mean = 0.0;
  int flagged_count = 0;
};

inline NavSummary aggregate(const std::vector<EpisodeReport>& reports) {
  if (reports.empty()) {
    throw std::invalid_argument("aggregate: no reports");
  }
  NavSummary s;
  s.count = static_cast<int>(reports.size());
  for (const EpisodeReport& r : reports) {
    s.ne_mean += r.nav.ne;
    s.osr_pct += r.nav.osr ? 100.0 : 0.0;
    s.sr_pct += r.nav.sr ? 100.0 : 0.0;
    s.spl_mean += r.nav.spl;
    s.ndtw_mean += r.nav.ndtw;
    s.collision_rate_mean += r.nav.collision_rate;
    s.revisits_mean += r.revisits;
    s.flagged_count += r.flagged ? 1 : 0;
  }
  const double n = static_cast<double>(s.count);
  s.ne_mean /= n;
  s.osr_pct /= n;
  s.sr_pct /= n;
  s.spl_mean /= n;
  s.ndtw_mean /= n;
  s.collision_rate_mean /= n;
  s.revisits_mean /= n;
  return s;
}

struct WaypointSummary {
  int count = 0;
  double delta_mean = 0.0;
  double pct_open_mean = 0.0;
  double avg_score_mean = 0.0;
  double d_c_mean = 0.0;
  double d_h_mean = 0.0;
  int distance_excluded = 0;  // empty prediction sets excluded from means
};

inline WaypointSummary aggregate_waypoints(
    const std::vector<WaypointMetrics>& all) {
  if (all.empty()) {
    throw std::invalid_argument("aggregate_waypoints: no reports");
  }
  WaypointSummary s;
  s.count = static_cast<int>(all.size());
  int with_open = 0, with_dist = 0;
  for (const WaypointMetrics& m : all) {
    s.delta_mean += m.delta;
    if (m.pct_open) {
      s.pct_open_mean += *m.pct_open;
      s.avg_score_mean += m.avg_score.value_or(0.0);
      with_open += 1;
    }
    if (m.d_c && m.d_h) {
      s.d_c_mean += *m.d_c;
      s.d_h_mean += *m.d_h;
      with_dist += 1;
    } else {
      s.distance_excluded += 1;
    }
  }
  s.delta_mean /= static_cast<double>(s.count);
  if (with_open > 0) {
    s.pct_open_mean /= static_cast<double>(with_open);
    s.avg_score_mean /= static_cast<double>(with_open);
  }
  if (with_dist > 0) {
    s.d_c_mean /= static_cast<double>(with_dist);
    s.d_h_mean /= static_cast<double>(with_dist);
  }
  return s;
}

}  // namespace waynav
