#pragma once

// Shared helpers for the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <vector>

#include "waynav/predictor_model.hpp"
#include "waynav/rng.hpp"
#include "waynav/simworld.hpp"

namespace waynav::testing {

// Obstacle map with occupancy sampled i.i.d. at the given rate.
inline ObstacleMap random_map(Rng& rng, double occupancy = 0.1,
                              const RadialGrid& grid = RadialGrid{}) {
  ObstacleMap m(grid);
  for (auto& c : m.occupied) c = rng.uniform() < occupancy ? 1 : 0;
  return m;
}

inline Heatmap random_heatmap(Rng& rng, const RadialGrid& grid = RadialGrid{}) {
  Heatmap h(grid);
  for (auto& v : h.value) v = rng.uniform();
  return h;
}

// Max relative error between analytic gradients and central finite
// differences of the MSE loss, over every parameter of the model.
inline double gradient_check_max_rel_error(PredictorModel& model,
                                           const Mat& input, const Mat& target,
                                           double h = 1e-5) {
  ForwardCache cache;
  forward(model, input, &cache);
  Mat dlogits;
  mse_loss(cache.logits, target, &dlogits);
  ParamSet grads = ParamSet::zeros_like(model.params);
  backward(model, cache, dlogits, grads);

  std::vector<Mat*> ptensors, gtensors;
  model.params.for_each([&](const std::string&, Mat& t) { ptensors.push_back(&t); });
  grads.for_each([&](const std::string&, Mat& t) { gtensors.push_back(&t); });

  double worst = 0.0;
  for (size_t ti = 0; ti < ptensors.size(); ++ti) {
    Mat& p = *ptensors[ti];
    const Mat& g = *gtensors[ti];
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        const double orig = p(r, c);
        p(r, c) = orig + h;
        const double lp = mse_loss(forward(model, input), target, nullptr);
        p(r, c) = orig - h;
        const double lm = mse_loss(forward(model, input), target, nullptr);
        p(r, c) = orig;
        const double fd = (lp - lm) / (2.0 * h);
        const double ga = g(r, c);
        const double rel =
            std::abs(ga - fd) / std::max({1e-6, std::abs(ga), std::abs(fd)});
        worst = std::max(worst, rel);
      }
    }
  }
  return worst;
}

// A flat room with surrounding walls; handy for controlled sensing tests.
inline World walled_room(double w = 8.0, double h = 8.0, double wall_h = 1.8) {
  World world = World::flat(w, h);
  world.fill_rect(0, 0, w, 0.1, wall_h);
  world.fill_rect(0, h - 0.1, w, h, wall_h);
  world.fill_rect(0, 0, 0.1, h, wall_h);
  world.fill_rect(w - 0.1, 0, w, h, wall_h);
  return world;
}

}  // namespace waynav::testing
