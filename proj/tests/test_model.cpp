#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"
#include "waynav/predictor_model.hpp"
#include "waynav/serialize.hpp"

using namespace waynav;
using Catch::Approx;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.d_model = 8;
  c.num_heads = 2;
  c.ff_dim = 16;
  c.num_layers = 2;
  return c;
}

}  // namespace

TEST_CASE("zero-weight model emits the head bias everywhere", "[model]") {
  const RadialGrid g;
  PredictorModel m = make_model(g, tiny_config(), 3);
  m.params.for_each([](const std::string& name, Mat& t) {
    // LayerNorm gains stay 1 so the network is well-defined; everything else
    // goes to zero.
    if (name.find("ln") != std::string::npos && name.back() == 'g') {
      t.setOnes();
    } else {
      t.setZero();
    }
  });
  m.params.head_b.setConstant(0.75);
  Rng rng(5);
  const ObstacleMap map = waynav::testing::random_map(rng, 0.2);
  const Heatmap h = model_predict(m, map);
  for (const double v : h.value) CHECK(v == Approx(0.75));
}

TEST_CASE("forward pass is deterministic", "[model]") {
  const RadialGrid g;
  const PredictorModel m = make_model(g, tiny_config(), 11);
  Rng rng(6);
  const ObstacleMap map = waynav::testing::random_map(rng, 0.15);
  const Heatmap a = model_predict(m, map);
  const Heatmap b = model_predict(m, map);
  CHECK(a.value == b.value);
}

TEST_CASE("positional encoding makes rotation matter", "[model]") {
  const RadialGrid g;
  const PredictorModel m = make_model(g, tiny_config(), 19);
  Rng rng(7);
  const ObstacleMap map = waynav::testing::random_map(rng, 0.2);
  ObstacleMap rotated(g);
  for (int a = 0; a < g.num_angles; ++a) {
    for (int j = 0; j < g.num_radii; ++j) {
      rotated.set((a + 1) % g.num_angles, j, map.is_occupied(a, j));
    }
  }
  const Heatmap ha = model_predict(m, map);
  const Heatmap hb = model_predict(m, rotated);
  // With learned positions the model is not rotation-equivariant: the rotated
  // input's logits are not just the rotated logits of the original.
  double max_diff = 0.0;
  for (int a = 0; a < g.num_angles; ++a) {
    for (int j = 0; j < g.num_radii; ++j) {
      max_diff = std::max(
          max_diff, std::abs(hb.at((a + 1) % g.num_angles, j) - ha.at(a, j)));
    }
  }
  CHECK(max_diff > 1e-6);
}

TEST_CASE("analytic gradients match finite differences", "[model]") {
  const RadialGrid g;
  PredictorModel m = make_model(g, tiny_config(), 21);
  Rng rng(23);
  const Mat input = map_to_input(waynav::testing::random_map(rng, 0.2));
  Mat target(g.num_angles, g.num_radii);
  for (int a = 0; a < g.num_angles; ++a) {
    for (int j = 0; j < g.num_radii; ++j) target(a, j) = rng.uniform();
  }
  const double worst =
      waynav::testing::gradient_check_max_rel_error(m, input, target);
  INFO("max relative gradient error " << worst);
  CHECK(worst < 1e-4);
}

TEST_CASE("training overfits a single example", "[model][slow]") {
  RadialGrid g;
  PredictorModel m = make_model(g, tiny_config(), 40);
  Rng rng(41);
  TrainingExample ex;
  ex.map = waynav::testing::random_map(rng, 0.15);
  ex.target = make_target_heatmap(
      g, {polar_to_local({45.0, 1.6}), polar_to_local({200.0, 2.2})}, 1.0);
  TrainConfig tc;
  tc.epochs = 200;
  tc.lr = 3e-3;  // smoke-test rate; the reference rate needs more epochs
  tc.weight_decay = 0.0;
  tc.threads = 1;
  const auto losses = train(m, {ex}, tc);
  REQUIRE(losses.size() == 200);
  CHECK(losses.back() < 0.1 * losses.front());
  // Decreasing in trend: final quarter below first quarter everywhere.
  double early_min = 1e300, late_max = -1e300;
  for (size_t i = 0; i < 50; ++i) early_min = std::min(early_min, losses[i]);
  for (size_t i = 150; i < 200; ++i) late_max = std::max(late_max, losses[i]);
  CHECK(late_max < early_min);
}

TEST_CASE("training input validation", "[model]") {
  const RadialGrid g;
  PredictorModel m = make_model(g, tiny_config(), 1);
  CHECK_THROWS_AS(train(m, {}, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("zero learning rate freezes the loss curve", "[model]") {
  const RadialGrid g;
  PredictorModel m = make_model(g, tiny_config(), 2);
  Rng rng(3);
  TrainingExample ex;
  ex.map = waynav::testing::random_map(rng, 0.1);
  ex.target = Heatmap(g, 0.2);
  TrainConfig tc;
  tc.lr = 0.0;
  tc.epochs = 5;
  tc.threads = 1;
  const auto losses = train(m, {ex}, tc);
  for (size_t i = 1; i < losses.size(); ++i) {
    CHECK(losses[i] == Approx(losses[0]));
  }
}

TEST_CASE("thread fan-out does not change batch gradients", "[model]") {
  const RadialGrid g;
  Rng rng(15);
  std::vector<TrainingExample> ds;
  for (int i = 0; i < 6; ++i) {
    TrainingExample ex;
    ex.map = waynav::testing::random_map(rng, 0.15);
    ex.target = Heatmap(g, rng.uniform());
    ds.push_back(ex);
  }
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 6;
  tc.lr = 1e-3;
  PredictorModel m1 = make_model(g, tiny_config(), 77);
  PredictorModel m2 = make_model(g, tiny_config(), 77);
  TrainConfig tc1 = tc;
  tc1.threads = 1;
  TrainConfig tc2 = tc;
  tc2.threads = 2;
  const auto l1 = train(m1, ds, tc1);
  const auto l2 = train(m2, ds, tc2);
  for (size_t i = 0; i < l1.size(); ++i) {
    CHECK(l1[i] == Approx(l2[i]).epsilon(1e-9));
  }
}

TEST_CASE("checkpoint round-trips through JSON", "[model]") {
  const RadialGrid g;
  const PredictorModel m = make_model(g, tiny_config(), 123);
  const PredictorModel back = model_from_json(to_json(m));
  Rng rng(9);
  const ObstacleMap map = waynav::testing::random_map(rng, 0.2);
  const Heatmap a = model_predict(m, map);
  const Heatmap b = model_predict(back, map);
  CHECK(a.value == b.value);
}

TEST_CASE("model config is validated", "[model]") {
  ModelConfig c;
  c.d_model = 10;
  c.num_heads = 4;  // 10 % 4 != 0
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ModelConfig{};
  c.num_layers = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
