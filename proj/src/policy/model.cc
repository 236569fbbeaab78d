#include "mergebench/policy/model.h"

#include <cmath>
#include <random>

#include "mergebench/core/errors.h"

namespace mergebench {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kLayerNormEps = 1e-5;

std::string dims(Eigen::Index r, Eigen::Index c) { return std::to_string(r) + "x" + std::to_string(c); }

void check_shape(const std::string& name, const MatrixXd& m, Eigen::Index rows, Eigen::Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(name + ": expected " + dims(rows, cols) + ", got " + dims(m.rows(), m.cols()));
  }
}

}  // namespace

void validate(const ModelConfig& cfg) {
  if (cfg.d_model <= 0 || cfg.heads <= 0 || cfg.self_layers < 0 || cfg.cross_layers < 0) {
    throw ValidationError("model sizes must be positive");
  }
  if (cfg.d_model % cfg.heads != 0) {
    throw ValidationError("d_model " + std::to_string(cfg.d_model) + " not divisible by heads " +
                          std::to_string(cfg.heads));
  }
}

ModelWeights zero_weights(const ModelConfig& cfg) {
  validate(cfg);
  const int d = cfg.d_model;
  ModelWeights w;
  w.cfg = cfg;
  w.vehicle_w = MatrixXd::Zero(kVehicleInputs, d);
  w.vehicle_b = MatrixXd::Zero(1, d);
  w.road_w = MatrixXd::Zero(kRoadInputs, d);
  w.road_b = MatrixXd::Zero(1, d);
  const AttentionBlock zero{MatrixXd::Zero(d, d), MatrixXd::Zero(d, d), MatrixXd::Zero(d, d), MatrixXd::Zero(d, d)};
  w.self_blocks.assign(cfg.self_layers, zero);
  w.cross_blocks.assign(cfg.cross_layers, zero);
  w.out_w = MatrixXd::Zero(d, kOutputs);
  w.out_b = MatrixXd::Zero(1, kOutputs);
  w.aux_w = MatrixXd::Zero(d, kOutputs);
  w.aux_b = MatrixXd::Zero(1, kOutputs);
  return w;
}

ModelWeights init_weights(const ModelConfig& cfg, std::uint64_t seed) {
  ModelWeights w = zero_weights(cfg);
  std::mt19937_64 rng(seed);
  for_each_tensor(w, [&](const std::string& name, MatrixXd& m) {
    if (name.ends_with("_b") || name == "out_w" || name == "aux_w") return;
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
    }
  });
  return w;
}

namespace {

template <typename W, typename Fn>
void visit(W& w, Fn&& fn) {
  fn("vehicle_w", w.vehicle_w);
  fn("vehicle_b", w.vehicle_b);
  fn("road_w", w.road_w);
  fn("road_b", w.road_b);
  auto blocks = [&](const std::string& prefix, auto& list) {
    for (std::size_t l = 0; l < list.size(); ++l) {
      const std::string p = prefix + std::to_string(l) + ".";
      fn(p + "wq", list[l].wq);
      fn(p + "wk", list[l].wk);
      fn(p + "wv", list[l].wv);
      fn(p + "wo", list[l].wo);
    }
  };
  blocks("self", w.self_blocks);
  blocks("cross", w.cross_blocks);
  fn("out_w", w.out_w);
  fn("out_b", w.out_b);
  fn("aux_w", w.aux_w);
  fn("aux_b", w.aux_b);
}

}  // namespace

void for_each_tensor(ModelWeights& w, const std::function<void(const std::string&, MatrixXd&)>& fn) { visit(w, fn); }

void for_each_tensor(const ModelWeights& w, const std::function<void(const std::string&, const MatrixXd&)>& fn) {
  visit(w, fn);
}

void validate(const ModelWeights& w) {
  validate(w.cfg);
  const ModelWeights ref = zero_weights(w.cfg);
  if (w.self_blocks.size() != ref.self_blocks.size() || w.cross_blocks.size() != ref.cross_blocks.size()) {
    throw ShapeError("attention layer count disagrees with config");
  }
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
  for_each_tensor(ref, [&](const std::string&, const MatrixXd& m) { shapes.emplace_back(m.rows(), m.cols()); });
  std::size_t i = 0;
  for_each_tensor(w, [&](const std::string& name, const MatrixXd& m) {
    check_shape(name, m, shapes[i].first, shapes[i].second);
    if (!m.allFinite()) throw ValidationError(name + ": non-finite value");
    ++i;
  });
}

std::size_t parameter_count(const ModelWeights& w) {
  std::size_t n = 0;
  for_each_tensor(w, [&](const std::string&, const MatrixXd& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

const std::array<double, kVehicleChannels>& vehicle_input_scale() {
  // x, y, theta, vx, vy, ax, ay, |a|, steer, thw, offset, style, length
  static const std::array<double, kVehicleChannels> s = {10, 10, 1, 5, 5, 2, 2, 2, 0.5, 10, 1, 3, 10};
  return s;
}

double road_input_scale() { return 20.0; }

const std::array<double, kOutputChannels>& output_scale() {
  static const std::array<double, kOutputChannels> s = {10, 1, 0.2, 5};
  return s;
}

MatrixXd encode_vehicles(const Sample& s) {
  const auto& scale = vehicle_input_scale();
  MatrixXd m = MatrixXd::Zero(1 + static_cast<Eigen::Index>(s.neighbors.size()), kVehicleInputs);
  for (int t = 0; t < kHistoryFrames; ++t) {
    for (int c = 0; c < kVehicleChannels; ++c) m(0, t * kVehicleChannels + c) = s.target_history[t][c] / scale[c];
  }
  for (std::size_t i = 0; i < s.neighbors.size(); ++i) {
    for (int t = 0; t < kHistoryFrames; ++t) {
      for (int c = 0; c < kNeighborChannels; ++c) {
        m(static_cast<Eigen::Index>(i) + 1, t * kVehicleChannels + c) = s.neighbors[i].history[t][c] / scale[c];
      }
    }
  }
  return m;
}

MatrixXd encode_road(const Sample& s) {
  MatrixXd m(kRoadPolylines, kRoadInputs);
  for (int p = 0; p < kRoadPolylines; ++p) {
    for (int j = 0; j < kRoadPoints; ++j) {
      m(p, 2 * j) = s.road[p][j].x / road_input_scale();
      m(p, 2 * j + 1) = s.road[p][j].y / road_input_scale();
    }
  }
  return m;
}

Embeddings embed(const ModelWeights& w, const MatrixXd& vehicle_inputs, const MatrixXd& road_inputs) {
  if (vehicle_inputs.rows() < 1) throw ShapeError("vehicle inputs: expected at least one row");
  check_shape("vehicle inputs", vehicle_inputs, vehicle_inputs.rows(), w.vehicle_w.rows());
  check_shape("road inputs", road_inputs, road_inputs.rows(), w.road_w.rows());
  Embeddings e;
  e.vehicles = (vehicle_inputs * w.vehicle_w).rowwise() + w.vehicle_b.row(0);
  e.road = (road_inputs * w.road_w).rowwise() + w.road_b.row(0);
  return e;
}

Embeddings embed(const ModelWeights& w, const Sample& s) { return embed(w, encode_vehicles(s), encode_road(s)); }

struct LayerCache {
  MatrixXd xq, xkv, q, k, v, h, y;
  std::vector<MatrixXd> attn;
  VectorXd inv_std;
};

struct ForwardCache {
  MatrixXd vehicle_inputs, road_inputs, road;
  std::vector<LayerCache> layers;  // self layers then cross layers
  MatrixXd final;
  ForwardOutput out;
};

namespace {

void softmax_rows(MatrixXd& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double mx = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - mx).exp();
    s.row(i) /= s.row(i).sum();
  }
}

MatrixXd attention_layer(const AttentionBlock& b, int heads, const MatrixXd& xq, const MatrixXd& xkv,
                         LayerCache* cache) {
  const Eigen::Index d = b.wq.rows();
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  MatrixXd q = xq * b.wq;
  MatrixXd k = xkv * b.wk;
  MatrixXd v = xkv * b.wv;
  MatrixXd h(xq.rows(), d);
  std::vector<MatrixXd> attn;
  attn.reserve(heads);
  for (int i = 0; i < heads; ++i) {
    MatrixXd s = (q.middleCols(i * dh, dh) * k.middleCols(i * dh, dh).transpose()) * scale;
    softmax_rows(s);
    h.middleCols(i * dh, dh) = s * v.middleCols(i * dh, dh);
    attn.push_back(std::move(s));
  }
  MatrixXd z = xq + h * b.wo;
  VectorXd inv_std(z.rows());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double mean = z.row(r).mean();
    z.row(r).array() -= mean;
    const double var = z.row(r).squaredNorm() / static_cast<double>(d);
    inv_std(r) = 1.0 / std::sqrt(var + kLayerNormEps);
    z.row(r) *= inv_std(r);
  }
  if (cache != nullptr) {
    cache->xq = xq;
    cache->xkv = xkv;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->h = std::move(h);
    cache->y = z;
    cache->inv_std = std::move(inv_std);
    cache->attn = attn;
  }
  return z;
}

// Returns d/dxq; accumulates d/dxkv into dxkv and parameter grads into g.
MatrixXd attention_layer_backward(const AttentionBlock& b, int heads, const LayerCache& c, const MatrixXd& dy,
                                  AttentionBlock& g, MatrixXd& dxkv) {
  const Eigen::Index d = b.wq.rows();
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  MatrixXd dz(dy.rows(), d);
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_g = dy.row(r).mean();
    const double mean_gy = dy.row(r).dot(c.y.row(r)) / static_cast<double>(d);
    dz.row(r) = c.inv_std(r) * (dy.row(r).array() - mean_g - c.y.row(r).array() * mean_gy).matrix();
  }

  MatrixXd dxq = dz;
  g.wo.noalias() += c.h.transpose() * dz;
  const MatrixXd dh_all = dz * b.wo.transpose();

  MatrixXd dq(c.q.rows(), d), dk(c.k.rows(), d), dv(c.v.rows(), d);
  for (int i = 0; i < heads; ++i) {
    const MatrixXd& a = c.attn[i];
    const auto dhh = dh_all.middleCols(i * dh, dh);
    const MatrixXd da = dhh * c.v.middleCols(i * dh, dh).transpose();
    dv.middleCols(i * dh, dh) = a.transpose() * dhh;
    const VectorXd rowdot = (da.array() * a.array()).rowwise().sum();
    const MatrixXd ds = (a.array() * (da.colwise() - rowdot).array()).matrix() * scale;
    dq.middleCols(i * dh, dh) = ds * c.k.middleCols(i * dh, dh);
    dk.middleCols(i * dh, dh) = ds.transpose() * c.q.middleCols(i * dh, dh);
  }
  g.wq.noalias() += c.xq.transpose() * dq;
  g.wk.noalias() += c.xkv.transpose() * dk;
  g.wv.noalias() += c.xkv.transpose() * dv;
  dxq.noalias() += dq * b.wq.transpose();
  dxkv.noalias() += dk * b.wk.transpose();
  dxkv.noalias() += dv * b.wv.transpose();
  return dxq;
}

MatrixXd run_blocks(const ModelWeights& w, const MatrixXd& vehicles, const MatrixXd& road, AttentionTrace* trace,
                    std::vector<LayerCache>* caches) {
  const int heads = w.cfg.heads;
  MatrixXd x = vehicles;
  if (caches != nullptr) caches->resize(w.self_blocks.size() + w.cross_blocks.size());
  std::size_t li = 0;
  for (const AttentionBlock& b : w.self_blocks) {
    LayerCache local;
    LayerCache* c = caches != nullptr ? &(*caches)[li] : (trace != nullptr ? &local : nullptr);
    x = attention_layer(b, heads, x, x, c);
    if (trace != nullptr) trace->self_attn.push_back(c->attn);
    ++li;
  }
  for (const AttentionBlock& b : w.cross_blocks) {
    LayerCache local;
    LayerCache* c = caches != nullptr ? &(*caches)[li] : (trace != nullptr ? &local : nullptr);
    x = attention_layer(b, heads, x, road, c);
    if (trace != nullptr) trace->cross_attn.push_back(c->attn);
    ++li;
  }
  return x;
}

MatrixXd head(const MatrixXd& w, const MatrixXd& b, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const Eigen::RowVectorXd flat = x * w + b.row(0);
  const auto& scale = output_scale();
  MatrixXd m(kFutureFrames, kOutputChannels);
  for (int t = 0; t < kFutureFrames; ++t) {
    for (int c = 0; c < kOutputChannels; ++c) m(t, c) = flat(t * kOutputChannels + c) * scale[c];
  }
  return m;
}

// d/d(raw head output) from d/d(scaled matrix).
Eigen::RowVectorXd head_grad(const MatrixXd& dm) {
  const auto& scale = output_scale();
  Eigen::RowVectorXd g(kOutputs);
  for (int t = 0; t < kFutureFrames; ++t) {
    for (int c = 0; c < kOutputChannels; ++c) g(t * kOutputChannels + c) = dm(t, c) * scale[c];
  }
  return g;
}

}  // namespace

MatrixXd attention_forward(const ModelWeights& w, const MatrixXd& vehicles, const MatrixXd& road,
                           AttentionTrace* trace) {
  const Eigen::Index d = w.cfg.d_model;
  check_shape("vehicle features", vehicles, vehicles.rows(), d);
  check_shape("road features", road, road.rows(), d);
  if (vehicles.rows() < 1 || (road.rows() < 1 && !w.cross_blocks.empty())) {
    throw ShapeError("attention needs at least one vehicle and one road token");
  }
  return run_blocks(w, vehicles, road, trace, nullptr);
}

MatrixXd to_matrix(const PlannedTrajectory& t) {
  MatrixXd m(kFutureFrames, kOutputChannels);
  for (int k = 0; k < kFutureFrames; ++k) {
    m(k, 0) = t.frames[k].x;
    m(k, 1) = t.frames[k].y;
    m(k, 2) = t.frames[k].theta;
    m(k, 3) = t.frames[k].speed;
  }
  return m;
}

PlannedTrajectory from_matrix(const MatrixXd& m) {
  check_shape("trajectory", m, kFutureFrames, kOutputChannels);
  PlannedTrajectory t;
  for (int k = 0; k < kFutureFrames; ++k) t.frames[k] = PlannedFrame{m(k, 0), m(k, 1), m(k, 2), m(k, 3)};
  return t;
}

ForwardPass::ForwardPass(const ModelWeights& w, const MatrixXd& vehicle_inputs, const MatrixXd& road_inputs)
    : w_(&w), cache_(std::make_unique<ForwardCache>()) {
  Embeddings e = embed(w, vehicle_inputs, road_inputs);
  cache_->vehicle_inputs = vehicle_inputs;
  cache_->road_inputs = road_inputs;
  cache_->road = e.road;
  cache_->final = run_blocks(w, e.vehicles, e.road, nullptr, &cache_->layers);
  const MatrixXd& x = cache_->final;
  cache_->out.target = head(w.out_w, w.out_b, x.row(0));
  cache_->out.aux.reserve(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) cache_->out.aux.push_back(head(w.aux_w, w.aux_b, x.row(i)));
}

ForwardPass::~ForwardPass() = default;
ForwardPass::ForwardPass(ForwardPass&&) noexcept = default;
ForwardPass& ForwardPass::operator=(ForwardPass&&) noexcept = default;

const ForwardOutput& ForwardPass::output() const { return cache_->out; }

void ForwardPass::backward(const MatrixXd& d_target, const std::vector<MatrixXd>& d_aux, ModelWeights& g) const {
  const ModelWeights& w = *w_;
  const MatrixXd& x = cache_->final;
  if (static_cast<Eigen::Index>(d_aux.size()) != x.rows()) {
    throw ShapeError("aux gradients: expected " + std::to_string(x.rows()) + " rows, got " +
                     std::to_string(d_aux.size()));
  }
  MatrixXd dx = MatrixXd::Zero(x.rows(), x.cols());
  {
    const Eigen::RowVectorXd go = head_grad(d_target);
    g.out_w.noalias() += x.row(0).transpose() * go;
    g.out_b.row(0) += go;
    dx.row(0) += go * w.out_w.transpose();
  }
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::RowVectorXd ga = head_grad(d_aux[i]);
    g.aux_w.noalias() += x.row(i).transpose() * ga;
    g.aux_b.row(0) += ga;
    dx.row(i) += ga * w.aux_w.transpose();
  }

  const int heads = w.cfg.heads;
  const std::size_t n_self = w.self_blocks.size();
  MatrixXd droad = MatrixXd::Zero(cache_->road.rows(), cache_->road.cols());
  for (std::size_t l = w.cross_blocks.size(); l-- > 0;) {
    dx = attention_layer_backward(w.cross_blocks[l], heads, cache_->layers[n_self + l], dx, g.cross_blocks[l], droad);
  }
  for (std::size_t l = n_self; l-- > 0;) {
    MatrixXd dkv = MatrixXd::Zero(dx.rows(), dx.cols());
    dx = attention_layer_backward(w.self_blocks[l], heads, cache_->layers[l], dx, g.self_blocks[l], dkv);
    dx += dkv;
  }
  g.vehicle_w.noalias() += cache_->vehicle_inputs.transpose() * dx;
  g.vehicle_b.row(0) += dx.colwise().sum();
  g.road_w.noalias() += cache_->road_inputs.transpose() * droad;
  g.road_b.row(0) += droad.colwise().sum();
}

Prediction predict(const ModelWeights& w, const Sample& s) {
  const Embeddings e = embed(w, s);
  const MatrixXd x = attention_forward(w, e.vehicles, e.road);
  Prediction p;
  p.target = from_matrix(head(w.out_w, w.out_b, x.row(0)));
  p.aux.reserve(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) p.aux.push_back(from_matrix(head(w.aux_w, w.aux_b, x.row(i))));
  return p;
}

}  // namespace mergebench
