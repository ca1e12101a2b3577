#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "waynav/obstacle_map.hpp"
#include "waynav/rng.hpp"
#include "waynav/waypoint.hpp"

namespace waynav {

using Mat = Eigen::MatrixXd;

// Lightweight self-attention waypoint predictor: one token per angle bin
// (sequence length = num_angles, feature dim = num_radii of binary occupancy),
// a learned positional encoding, two post-LN transformer encoder layers and a
// per-token classification head emitting num_radii logits.
struct ModelConfig {
  int d_model = 64;
  int num_heads = 4;
  int ff_dim = 128;
  int num_layers = 2;

  void validate() const {
    if (d_model <= 0 || num_heads <= 0 || ff_dim <= 0 || num_layers <= 0) {
      throw std::invalid_argument("ModelConfig: dims must be positive");
    }
    if (d_model % num_heads != 0) {
      throw std::invalid_argument("ModelConfig: d_model % num_heads != 0");
    }
  }
};

struct LayerParams {
  Mat wq, wk, wv, wo;      // d_model x d_model
  Mat bq, bk, bv, bo;      // 1 x d_model
  Mat ln1_g, ln1_b;        // 1 x d_model
  Mat ff_w1, ff_b1;        // d_model x ff, 1 x ff
  Mat ff_w2, ff_b2;        // ff x d_model, 1 x d_model
  Mat ln2_g, ln2_b;        // 1 x d_model
};

struct ParamSet {
  Mat embed_w, embed_b;  // token_dim x d_model, 1 x d_model
  Mat pos;               // tokens x d_model
  std::vector<LayerParams> layers;
  Mat head_w, head_b;  // d_model x token_dim, 1 x token_dim

  // Visits every tensor with a stable name; the one place that defines
  // parameter order for optimizers, checkpoints and gradient checks.
  template <class F>
  void for_each(F&& f) {
    f("embed_w", embed_w);
    f("embed_b", embed_b);
    f("pos", pos);
    for (size_t l = 0; l < layers.size(); ++l) {
      const std::string p = "layer" + std::to_string(l) + ".";
      LayerParams& lp = layers[l];
      f(p + "wq", lp.wq);
      f(p + "wk", lp.wk);
      f(p + "wv", lp.wv);
      f(p + "wo", lp.wo);
      f(p + "bq", lp.bq);
      f(p + "bk", lp.bk);
      f(p + "bv", lp.bv);
      f(p + "bo", lp.bo);
      f(p + "ln1_g", lp.ln1_g);
      f(p + "ln1_b", lp.ln1_b);
      f(p + "ff_w1", lp.ff_w1);
      f(p + "ff_b1", lp.ff_b1);
      f(p + "ff_w2", lp.ff_w2);
      f(p + "ff_b2", lp.ff_b2);
      f(p + "ln2_g", lp.ln2_g);
      f(p + "ln2_b", lp.ln2_b);
    }
    f("head_w", head_w);
    f("head_b", head_b);
  }

  template <class F>
  void for_each(F&& f) const {
    const_cast<ParamSet*>(this)->for_each(
        [&](const std::string& n, Mat& m) { f(n, static_cast<const Mat&>(m)); });
  }

  static ParamSet zeros_like(const ParamSet& other) {
    ParamSet z = other;
    z.for_each([](const std::string&, Mat& m) { m.setZero(); });
    return z;
  }

  void add_scaled(const ParamSet& other, double s) {
    embed_w += s * other.embed_w;
    embed_b += s * other.embed_b;
    pos += s * other.pos;
    for (size_t l = 0; l < layers.size(); ++l) {
      LayerParams& a = layers[l];
      const LayerParams& b = other.layers[l];
      a.wq += s * b.wq;
      a.wk += s * b.wk;
      a.wv += s * b.wv;
      a.wo += s * b.wo;
      a.bq += s * b.bq;
      a.bk += s * b.bk;
      a.bv += s * b.bv;
      a.bo += s * b.bo;
      a.ln1_g += s * b.ln1_g;
      a.ln1_b += s * b.ln1_b;
      a.ff_w1 += s * b.ff_w1;
      a.ff_b1 += s * b.ff_b1;
      a.ff_w2 += s * b.ff_w2;
      a.ff_b2 += s * b.ff_b2;
      a.ln2_g += s * b.ln2_g;
      a.ln2_b += s * b.ln2_b;
    }
    head_w += s * other.head_w;
    head_b += s * other.head_b;
  }
};

struct PredictorModel {
  RadialGrid grid;
  ModelConfig cfg;
  ParamSet params;

  int tokens() const { return grid.num_angles; }
  int token_dim() const { return grid.num_radii; }
};

namespace detail {

inline Mat xavier(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-limit, limit);
  }
  return m;
}

constexpr double kLnEps = 1e-5;

}  // namespace detail

inline PredictorModel make_model(const RadialGrid& grid, const ModelConfig& cfg,
                                 std::uint64_t seed) {
  grid.validate();
  cfg.validate();
  PredictorModel m{grid, cfg, {}};
  Rng rng(seed);
  const int d = cfg.d_model, in = grid.num_radii, t = grid.num_angles;
  ParamSet& p = m.params;
  p.embed_w = detail::xavier(in, d, rng);
  p.embed_b = Mat::Zero(1, d);
  p.pos = Mat::NullaryExpr(t, d, [&](Eigen::Index, Eigen::Index) {
    return rng.normal(0.0, 0.02);
  });
  p.layers.resize(static_cast<size_t>(cfg.num_layers));
  for (LayerParams& lp : p.layers) {
    lp.wq = detail::xavier(d, d, rng);
    lp.wk = detail::xavier(d, d, rng);
    lp.wv = detail::xavier(d, d, rng);
    lp.wo = detail::xavier(d, d, rng);
    lp.bq = Mat::Zero(1, d);
    lp.bk = Mat::Zero(1, d);
    lp.bv = Mat::Zero(1, d);
    lp.bo = Mat::Zero(1, d);
    lp.ln1_g = Mat::Ones(1, d);
    lp.ln1_b = Mat::Zero(1, d);
    lp.ff_w1 = detail::xavier(d, cfg.ff_dim, rng);
    lp.ff_b1 = Mat::Zero(1, cfg.ff_dim);
    lp.ff_w2 = detail::xavier(cfg.ff_dim, d, rng);
    lp.ff_b2 = Mat::Zero(1, d);
    lp.ln2_g = Mat::Ones(1, d);
    lp.ln2_b = Mat::Zero(1, d);
  }
  p.head_w = detail::xavier(d, in, rng);
  p.head_b = Mat::Zero(1, in);
  return m;
}

inline Mat map_to_input(const ObstacleMap& map) {
  Mat x(map.grid.num_angles, map.grid.num_radii);
  for (int a = 0; a < map.grid.num_angles; ++a) {
    for (int j = 0; j < map.grid.num_radii; ++j) {
      x(a, j) = map.is_occupied(a, j) ? 1.0 : 0.0;
    }
  }
  return x;
}

// Forward activations kept for the backward pass.
struct LayerCache {
  Mat x_in;                // tokens x d
  Mat q, k, v;             // tokens x d
  std::vector<Mat> attn;   // per head, tokens x tokens (softmax rows)
  Mat ctx;                 // tokens x d (concatenated heads)
  Mat r1;                  // x_in + attn_out
  Mat xhat1;               // layernorm-normalized r1
  Eigen::VectorXd istd1;   // per-row 1/std
  Mat n1;                  // ln1 output
  Mat ff_pre;              // pre-ReLU
  Mat r2;                  // n1 + ff_out
  Mat xhat2;
  Eigen::VectorXd istd2;
  Mat n2;
};

struct ForwardCache {
  Mat x0;  // tokens x token_dim input
  Mat h0;  // embedded + positional
  std::vector<LayerCache> layers;
  Mat logits;
};

namespace detail {

// Row-wise layernorm; fills xhat and istd for the backward pass.
inline Mat layernorm(const Mat& x, const Mat& g, const Mat& b, Mat& xhat,
                     Eigen::VectorXd& istd) {
  const int rows = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  xhat.resize(rows, d);
  istd.resize(rows);
  Mat out(rows, d);
  for (int i = 0; i < rows; ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    const double is = 1.0 / std::sqrt(var + kLnEps);
    istd(i) = is;
    xhat.row(i) = (x.row(i).array() - mean) * is;
    out.row(i) = xhat.row(i).cwiseProduct(g.row(0)) + b.row(0);
  }
  return out;
}

// Backward through row-wise layernorm. Returns dx; accumulates dg/db.
inline Mat layernorm_backward(const Mat& dy, const Mat& xhat,
                              const Eigen::VectorXd& istd, const Mat& g,
                              Mat& dg, Mat& db) {
  const int rows = static_cast<int>(dy.rows());
  const int d = static_cast<int>(dy.cols());
  dg += (dy.array() * xhat.array()).colwise().sum().matrix();
  db += dy.colwise().sum();
  Mat dx(rows, d);
  for (int i = 0; i < rows; ++i) {
    const Eigen::RowVectorXd dxhat = dy.row(i).cwiseProduct(g.row(0));
    const double m1 = dxhat.mean();
    const double m2 = dxhat.cwiseProduct(xhat.row(i)).mean();
    dx.row(i) =
        istd(i) * (dxhat.array() - m1 - xhat.row(i).array() * m2).matrix();
  }
  return dx;
}

inline void softmax_rows(Mat& m) {
  for (int i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - mx).exp();
    m.row(i) /= m.row(i).sum();
  }
}

}  // namespace detail

inline Mat forward(const PredictorModel& model, const Mat& x0,
                   ForwardCache* cache = nullptr) {
  const ModelConfig& cfg = model.cfg;
  const ParamSet& p = model.params;
  const int heads = cfg.num_heads;
  const int dh = cfg.d_model / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Mat h = ((x0 * p.embed_w).rowwise() + p.embed_b.row(0)) + p.pos;
  if (cache) {
    cache->x0 = x0;
    cache->h0 = h;
    cache->layers.assign(static_cast<size_t>(cfg.num_layers), {});
  }

  for (int l = 0; l < cfg.num_layers; ++l) {
    const LayerParams& lp = p.layers[static_cast<size_t>(l)];
    LayerCache local;
    LayerCache& c = cache ? cache->layers[static_cast<size_t>(l)] : local;
    c.x_in = h;
    c.q = (h * lp.wq).rowwise() + lp.bq.row(0);
    c.k = (h * lp.wk).rowwise() + lp.bk.row(0);
    c.v = (h * lp.wv).rowwise() + lp.bv.row(0);
    c.attn.resize(static_cast<size_t>(heads));
    c.ctx.resize(h.rows(), cfg.d_model);
    for (int hd = 0; hd < heads; ++hd) {
      Mat s = c.q.middleCols(hd * dh, dh) *
              c.k.middleCols(hd * dh, dh).transpose() * scale;
      detail::softmax_rows(s);
      c.ctx.middleCols(hd * dh, dh) = s * c.v.middleCols(hd * dh, dh);
      c.attn[static_cast<size_t>(hd)] = std::move(s);
    }
    const Mat attn_out = (c.ctx * lp.wo).rowwise() + lp.bo.row(0);
    c.r1 = c.x_in + attn_out;
    c.n1 = detail::layernorm(c.r1, lp.ln1_g, lp.ln1_b, c.xhat1, c.istd1);
    c.ff_pre = (c.n1 * lp.ff_w1).rowwise() + lp.ff_b1.row(0);
    const Mat ff_out =
        (c.ff_pre.cwiseMax(0.0) * lp.ff_w2).rowwise() + lp.ff_b2.row(0);
    c.r2 = c.n1 + ff_out;
    c.n2 = detail::layernorm(c.r2, lp.ln2_g, lp.ln2_b, c.xhat2, c.istd2);
    h = c.n2;
  }

  Mat logits = (h * p.head_w).rowwise() + p.head_b.row(0);
  if (cache) cache->logits = logits;
  return logits;
}

// Backpropagates dLogits through the cached forward pass, accumulating
// parameter gradients into `grads` (which must be shaped like the params).
inline void backward(const PredictorModel& model, const ForwardCache& cache,
                     const Mat& dlogits, ParamSet& grads) {
  const ModelConfig& cfg = model.cfg;
  const ParamSet& p = model.params;
  const int heads = cfg.num_heads;
  const int dh = cfg.d_model / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const Mat& h_last = cfg.num_layers > 0
                          ? cache.layers.back().n2
                          : cache.h0;
  grads.head_w += h_last.transpose() * dlogits;
  grads.head_b += dlogits.colwise().sum();
  Mat dh_cur = dlogits * p.head_w.transpose();

  for (int l = cfg.num_layers - 1; l >= 0; --l) {
    const LayerParams& lp = p.layers[static_cast<size_t>(l)];
    LayerParams& gl = grads.layers[static_cast<size_t>(l)];
    const LayerCache& c = cache.layers[static_cast<size_t>(l)];

    // ln2
    Mat dr2 = detail::layernorm_backward(dh_cur, c.xhat2, c.istd2, lp.ln2_g,
                                         gl.ln2_g, gl.ln2_b);
    // feed-forward + residual
    const Mat relu_out = c.ff_pre.cwiseMax(0.0);
    gl.ff_w2 += relu_out.transpose() * dr2;
    gl.ff_b2 += dr2.colwise().sum();
    Mat dff_pre = (dr2 * lp.ff_w2.transpose()).array() *
                  (c.ff_pre.array() > 0.0).cast<double>();
    gl.ff_w1 += c.n1.transpose() * dff_pre;
    gl.ff_b1 += dff_pre.colwise().sum();
    Mat dn1 = dr2 + dff_pre * lp.ff_w1.transpose();

    // ln1
    Mat dr1 = detail::layernorm_backward(dn1, c.xhat1, c.istd1, lp.ln1_g,
                                         gl.ln1_g, gl.ln1_b);
    // attention output projection + residual
    gl.wo += c.ctx.transpose() * dr1;
    gl.bo += dr1.colwise().sum();
    Mat dctx = dr1 * lp.wo.transpose();

    Mat dq(c.q.rows(), cfg.d_model), dk(c.q.rows(), cfg.d_model),
        dv(c.q.rows(), cfg.d_model);
    for (int hd = 0; hd < heads; ++hd) {
      const Mat& a = c.attn[static_cast<size_t>(hd)];
      const auto vh = c.v.middleCols(hd * dh, dh);
      const auto dctx_h = dctx.middleCols(hd * dh, dh);
      Mat da = dctx_h * vh.transpose();
      dv.middleCols(hd * dh, dh) = a.transpose() * dctx_h;
      // softmax backward, rows
      const Eigen::VectorXd rowdot =
          (da.array() * a.array()).rowwise().sum().matrix();
      Mat ds = (da.colwise() - rowdot).array() * a.array() * scale;
      dq.middleCols(hd * dh, dh) = ds * c.k.middleCols(hd * dh, dh);
      dk.middleCols(hd * dh, dh) =
          ds.transpose() * c.q.middleCols(hd * dh, dh);
    }
    gl.wq += c.x_in.transpose() * dq;
    gl.bq += dq.colwise().sum();
    gl.wk += c.x_in.transpose() * dk;
    gl.bk += dk.colwise().sum();
    gl.wv += c.x_in.transpose() * dv;
    gl.bv += dv.colwise().sum();

    dh_cur = dr1 + dq * lp.wq.transpose() + dk * lp.wk.transpose() +
             dv * lp.wv.transpose();
  }

  grads.pos += dh_cur;
  grads.embed_w += cache.x0.transpose() * dh_cur;
  grads.embed_b += dh_cur.colwise().sum();
}

// Mean squared error over all cells, and its logits gradient.
inline double mse_loss(const Mat& logits, const Mat& target, Mat* dlogits) {
  const double n = static_cast<double>(logits.size());
  const Mat diff = logits - target;
  if (dlogits) *dlogits = (2.0 / n) * diff;
  return diff.squaredNorm() / n;
}

// Deterministic forward pass from an obstacle map to waypoint logits.
inline Heatmap model_predict(const PredictorModel& model,
                             const ObstacleMap& map) {
  if (map.grid.num_angles != model.grid.num_angles ||
      map.grid.num_radii != model.grid.num_radii) {
    throw std::invalid_argument("model_predict: grid mismatch");
  }
  const Mat logits = forward(model, map_to_input(map));
  if (!logits.allFinite()) {
    throw std::runtime_error("model_predict: non-finite logits (corrupt weights?)");
  }
  Heatmap h(map.grid);
  for (int a = 0; a < map.grid.num_angles; ++a) {
    for (int j = 0; j < map.grid.num_radii; ++j) h.at(a, j) = logits(a, j);
  }
  return h;
}

struct TrainingExample {
  ObstacleMap map;
  Heatmap target;
};

struct TrainConfig {
  double lr = 1e-4;
  int batch_size = 32;
  int epochs = 30;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t shuffle_seed = 1;
  int threads = 0;  // 0 = hardware concurrency (capped at 8)
};

namespace detail {

struct AdamState {
  ParamSet m, v;
  long step = 0;
};

inline void adamw_step(ParamSet& params, const ParamSet& grads,
                       AdamState& state, const TrainConfig& tc) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(tc.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(tc.beta2, static_cast<double>(state.step));
  ParamSet* gptr = const_cast<ParamSet*>(&grads);
  ParamSet* mptr = &state.m;
  ParamSet* vptr = &state.v;
  // Walk all four sets in lockstep via the canonical ordering.
  std::vector<Mat*> gs, ms, vs, ps;
  gptr->for_each([&](const std::string&, Mat& t) { gs.push_back(&t); });
  mptr->for_each([&](const std::string&, Mat& t) { ms.push_back(&t); });
  vptr->for_each([&](const std::string&, Mat& t) { vs.push_back(&t); });
  params.for_each([&](const std::string&, Mat& t) { ps.push_back(&t); });
  for (size_t i = 0; i < ps.size(); ++i) {
    Mat& g = *gs[i];
    Mat& m = *ms[i];
    Mat& v = *vs[i];
    Mat& p = *ps[i];
    m = tc.beta1 * m + (1.0 - tc.beta1) * g;
    v = tc.beta2 * v + (1.0 - tc.beta2) * g.cwiseProduct(g);
    const Mat mhat = m / bc1;
    const Mat vhat = v / bc2;
    p -= tc.lr * (mhat.array() / (vhat.array().sqrt() + tc.adam_eps)).matrix();
    p -= (tc.lr * tc.weight_decay) * p;  // decoupled weight decay
  }
}

}  // namespace detail

// Minimizes the MSE between predicted logits and target heatmaps with AdamW.
// Returns the per-epoch mean loss. Batches are processed sequentially;
// gradient accumulation within a batch may fan out over a fixed thread
// partition (deterministic for a given thread count).
inline std::vector<double> train(PredictorModel& model,
                                 const std::vector<TrainingExample>& dataset,
                                 const TrainConfig& tc = {}) {
  if (dataset.empty()) {
    throw std::invalid_argument("train: empty dataset");
  }
  if (tc.batch_size < 1 || tc.epochs < 0 || tc.lr < 0.0) {
    throw std::invalid_argument("train: bad hyperparameters");
  }
  int threads = tc.threads;
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    if (threads > 8) threads = 8;
  }

  // Inputs/targets staged as matrices once.
  const size_t n = dataset.size();
  std::vector<Mat> inputs(n), targets(n);
  for (size_t i = 0; i < n; ++i) {
    inputs[i] = map_to_input(dataset[i].map);
    Mat t(dataset[i].target.grid.num_angles, dataset[i].target.grid.num_radii);
    for (int a = 0; a < t.rows(); ++a) {
      for (int j = 0; j < t.cols(); ++j) t(a, j) = dataset[i].target.at(a, j);
    }
    targets[i] = std::move(t);
  }

  detail::AdamState state{ParamSet::zeros_like(model.params),
                          ParamSet::zeros_like(model.params), 0};
  Rng shuffle_rng(tc.shuffle_seed);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<double> epoch_losses;
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    for (size_t i = n; i > 1; --i) {  // Fisher-Yates
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
    }
    double loss_sum = 0.0;
    for (size_t start = 0; start < n; start += tc.batch_size) {
      const size_t count = std::min(static_cast<size_t>(tc.batch_size),
                                    n - start);
      const int nt = std::min<int>(threads, static_cast<int>(count));
      std::vector<ParamSet> tgrads(static_cast<size_t>(nt),
                                   ParamSet::zeros_like(model.params));
      std::vector<double> tloss(static_cast<size_t>(nt), 0.0);
      auto run = [&](int t) {
        ForwardCache cache;
        for (size_t e = start + t; e < start + count; e += nt) {
          const size_t ex = order[e];
          forward(model, inputs[ex], &cache);
          Mat dlogits;
          tloss[static_cast<size_t>(t)] +=
              mse_loss(cache.logits, targets[ex], &dlogits);
          backward(model, cache, dlogits, tgrads[static_cast<size_t>(t)]);
        }
      };
      if (nt == 1) {
        run(0);
      } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(nt));
        for (int t = 0; t < nt; ++t) pool.emplace_back(run, t);
        for (auto& th : pool) th.join();
      }
      ParamSet grads = std::move(tgrads[0]);
      for (int t = 1; t < nt; ++t) grads.add_scaled(tgrads[static_cast<size_t>(t)], 1.0);
      grads.for_each([&](const std::string&, Mat& g) {
        g /= static_cast<double>(count);
      });
      double batch_loss = 0.0;
      for (double v : tloss) batch_loss += v;
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error(
            "train: loss diverged (non-finite) at epoch " +
            std::to_string(epoch + 1));
      }
      loss_sum += batch_loss;
      detail::adamw_step(model.params, grads, state, tc);
    }
    epoch_losses.push_back(loss_sum / static_cast<double>(n));
  }
  return epoch_losses;
}

}  // namespace waynav
