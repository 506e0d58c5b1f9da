// Copyright 2026 The PCM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PCM_EMBED_HPP
#define PCM_EMBED_HPP

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcm/btl.hpp"
#include "pcm/core.hpp"
#include "pcm/edge_index.hpp"
#include "pcm/linalg.hpp"
#include "pcm/types.hpp"

namespace pcm::embed {

enum class Nonlinearity { ReLU, Tanh };
enum class HeadKind { LinearDifference, MlpDifference };
enum class DataMode { BtlMode, LlsMode };

struct ModelConfig {
  int d = 32;     // embedding dimension
  int layers = 2; // message-passing layers
  Nonlinearity nonlinearity = Nonlinearity::ReLU;
  HeadKind head = HeadKind::LinearDifference;
  int head_hidden = 0;  // MlpDifference hidden width; 0 means 2*d
  DataMode mode = DataMode::LlsMode;
  bool shared_weights = true;  // one W1/W2 pair reused across layers
  double lambda_triangle = 1.0;
  double lambda_reg = 1e-4;
  long long triangle_samples = -1;  // -1: min(10*|edges|, 200000)
  std::uint64_t seed = 0;

  int head_width() const { return head_hidden > 0 ? head_hidden : 2 * d; }
  int weight_slots() const { return shared_weights ? 1 : layers; }
};

// Edge head parameters. The linear head scores v . (h_i - h_j); the MLP
// head antisymmetrizes a two-layer network: 0.5 * (f(h_i - h_j) - f(h_j - h_i)),
// so both predict t_ij = -t_ji by construction.
struct HeadParams {
  HeadKind kind = HeadKind::LinearDifference;
  std::vector<double> v;
  Matrix w_in;                // hidden x d
  std::vector<double> b_in;   // hidden
  std::vector<double> w_out;  // hidden
  double b_out = 0.0;
};

struct EmbeddingModel {
  ModelConfig config;
  Matrix h0;               // n x d initial embeddings
  std::vector<Matrix> w1;  // weight_slots entries
  std::vector<Matrix> w2;
  HeadParams head;

  int n() const { return h0.rows; }
  const Matrix& layer_w1(int l) const {
    return w1[config.shared_weights ? 0 : l];
  }
  const Matrix& layer_w2(int l) const {
    return w2[config.shared_weights ? 0 : l];
  }
};

struct LossBreakdown {
  double data_loss = 0.0;
  double triangle_loss = 0.0;
  double reg_loss = 0.0;
  double total = 0.0;
};

struct Gradients {
  Matrix h0;
  std::vector<Matrix> w1, w2;
  std::vector<double> v;
  Matrix w_in;
  std::vector<double> b_in, w_out;
  double b_out = 0.0;
};

inline void validate_config(const ModelConfig& cfg) {
  if (cfg.d < 1 || cfg.layers < 1)
    throw std::invalid_argument("ModelConfig: d and layers must be >= 1");
  if (cfg.lambda_triangle < 0.0 || cfg.lambda_reg < 0.0)
    throw std::invalid_argument("ModelConfig: lambdas must be nonnegative");
}

// Initialization anchored to the small-embedding regime: W1 near identity,
// W2 near half identity, v near all-ones, plus small noise so gradient
// directions are not degenerate at step 0.
inline EmbeddingModel init_model(int n, const ModelConfig& cfg) {
  validate_config(cfg);
  EmbeddingModel m;
  m.config = cfg;
  Rng rng(cfg.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  m.h0 = Matrix(n, cfg.d);
  for (double& x : m.h0.data) x = 0.1 * unit(rng);

  for (int s = 0; s < cfg.weight_slots(); ++s) {
    Matrix a = Matrix::identity(cfg.d);
    Matrix b = Matrix::identity(cfg.d);
    for (auto& x : b.data) x *= 0.5;
    for (double& x : a.data) x += 0.01 * unit(rng);
    for (double& x : b.data) x += 0.01 * unit(rng);
    m.w1.push_back(std::move(a));
    m.w2.push_back(std::move(b));
  }

  m.head.kind = cfg.head;
  if (cfg.head == HeadKind::LinearDifference) {
    m.head.v.assign(cfg.d, 1.0);
    for (double& x : m.head.v) x += 0.01 * unit(rng);
  } else {
    const int h = cfg.head_width();
    m.head.w_in = Matrix(h, cfg.d);
    const double in_scale = std::sqrt(2.0 / (cfg.d + h));
    for (double& x : m.head.w_in.data) x = in_scale * unit(rng);
    m.head.b_in.assign(h, 0.0);
    m.head.w_out.assign(h, 0.0);
    const double out_scale = std::sqrt(2.0 / (h + 1));
    for (double& x : m.head.w_out) x = out_scale * unit(rng);
    m.head.b_out = 0.0;
  }
  return m;
}

inline Gradients zero_gradients(const EmbeddingModel& m) {
  Gradients g;
  g.h0 = Matrix(m.h0.rows, m.h0.cols);
  for (const Matrix& w : m.w1) g.w1.emplace_back(w.rows, w.cols);
  for (const Matrix& w : m.w2) g.w2.emplace_back(w.rows, w.cols);
  if (m.head.kind == HeadKind::LinearDifference) {
    g.v.assign(m.head.v.size(), 0.0);
  } else {
    g.w_in = Matrix(m.head.w_in.rows, m.head.w_in.cols);
    g.b_in.assign(m.head.b_in.size(), 0.0);
    g.w_out.assign(m.head.w_out.size(), 0.0);
    g.b_out = 0.0;
  }
  return g;
}

namespace detail {

inline double activate(Nonlinearity f, double z) {
  return f == Nonlinearity::ReLU ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// Subgradient at the ReLU kink is 0.
inline double activate_grad(Nonlinearity f, double z) {
  if (f == Nonlinearity::ReLU) return z > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

struct ForwardTrace {
  std::vector<Matrix> h;  // layers + 1
  std::vector<Matrix> z;  // preactivations per layer
  std::vector<Matrix> s;  // neighbor aggregates per layer
};

// h^(l+1) = phi(W1 h^(l) + W2 * sum_{j in N(i)} h_j^(l)) over the given
// (symmetrized) adjacency.
inline void forward_layers(const EmbeddingModel& model,
                           const scale::EdgeIndex& adj, Matrix h_in,
                           ForwardTrace& tr, unsigned long long* ops) {
  const ModelConfig& cfg = model.config;
  tr.h.clear();
  tr.z.clear();
  tr.s.clear();
  tr.h.push_back(std::move(h_in));
  for (int l = 0; l < cfg.layers; ++l) {
    const Matrix& h = tr.h.back();
    Matrix s = scale::sparse_aggregate(adj, h);
    Matrix z;
    apply_linear(h, model.layer_w1(l), z);
    apply_linear_add(s, model.layer_w2(l), z);
    Matrix next(z.rows, z.cols);
    for (std::size_t k = 0; k < z.data.size(); ++k)
      next.data[k] = activate(cfg.nonlinearity, z.data[k]);
    if (ops)
      *ops += 2ull * h.rows * cfg.d * cfg.d +
              static_cast<unsigned long long>(adj.edge_count()) * cfg.d;
    tr.s.push_back(std::move(s));
    tr.z.push_back(std::move(z));
    tr.h.push_back(std::move(next));
  }
}

// Row-major transpose copy (weights are d x d; the copy is negligible).
inline Matrix transpose_view(const Matrix& w) {
  Matrix t(w.cols, w.rows);
  for (int r = 0; r < w.rows; ++r)
    for (int c = 0; c < w.cols; ++c) t(c, r) = w(r, c);
  return t;
}

struct MlpPass {
  std::vector<double> act_pos, act_neg;  // tanh activations for +delta, -delta
  double f_pos = 0.0, f_neg = 0.0;
};

inline double mlp_head_forward(const HeadParams& head, const double* hi,
                               const double* hj, int d, MlpPass* pass) {
  const int hw = static_cast<int>(head.w_out.size());
  std::vector<double> delta(d);
  for (int c = 0; c < d; ++c) delta[c] = hi[c] - hj[c];
  std::vector<double> act_pos(hw), act_neg(hw);
  double f_pos = head.b_out, f_neg = head.b_out;
  for (int r = 0; r < hw; ++r) {
    const double* wr = head.w_in.row(r);
    double a = head.b_in[r], b = head.b_in[r];
    for (int c = 0; c < d; ++c) {
      a += wr[c] * delta[c];
      b -= wr[c] * delta[c];
    }
    act_pos[r] = std::tanh(a);
    act_neg[r] = std::tanh(b);
    f_pos += head.w_out[r] * act_pos[r];
    f_neg += head.w_out[r] * act_neg[r];
  }
  if (pass) {
    pass->act_pos = std::move(act_pos);
    pass->act_neg = std::move(act_neg);
    pass->f_pos = f_pos;
    pass->f_neg = f_neg;
  }
  return 0.5 * (f_pos - f_neg);
}

inline double head_forward(const HeadParams& head, const double* hi,
                           const double* hj, int d) {
  if (head.kind == HeadKind::LinearDifference) {
    double t = 0.0;
    for (int c = 0; c < d; ++c) t += head.v[c] * (hi[c] - hj[c]);
    return t;
  }
  return mlp_head_forward(head, hi, hj, d, nullptr);
}

// Adds g * dt/d(params) into grads and g * dt/dh into gh rows i and j.
inline void head_backward(const HeadParams& head, const double* hi,
                          const double* hj, int d, double g, Gradients& grads,
                          Matrix& gh, int li, int lj) {
  if (head.kind == HeadKind::LinearDifference) {
    double* gi = gh.row(li);
    double* gj = gh.row(lj);
    for (int c = 0; c < d; ++c) {
      grads.v[c] += g * (hi[c] - hj[c]);
      gi[c] += g * head.v[c];
      gj[c] -= g * head.v[c];
    }
    return;
  }
  MlpPass pass;
  mlp_head_forward(head, hi, hj, d, &pass);
  const int hw = static_cast<int>(head.w_out.size());
  double* gi = gh.row(li);
  double* gj = gh.row(lj);
  for (int r = 0; r < hw; ++r) {
    const double dp = 1.0 - pass.act_pos[r] * pass.act_pos[r];
    const double dn = 1.0 - pass.act_neg[r] * pass.act_neg[r];
    grads.w_out[r] += g * 0.5 * (pass.act_pos[r] - pass.act_neg[r]);
    grads.b_in[r] += g * 0.5 * head.w_out[r] * (dp - dn);
    const double wsum = 0.5 * head.w_out[r] * (dp + dn);
    const double* wr = head.w_in.row(r);
    double* gw = grads.w_in.row(r);
    for (int c = 0; c < d; ++c) {
      const double delta_c = hi[c] - hj[c];
      gw[c] += g * wsum * delta_c;
      gi[c] += g * wsum * wr[c];
      gj[c] -= g * wsum * wr[c];
    }
  }
  // b_out cancels in the antisymmetrization; its gradient through t is 0.
}

// Loss (and optionally gradients) on one graph view. All node ids are
// local to h_in / adj; data_edges carry ratios (LlsMode) or win counts
// (BtlMode); triples index local nodes.
inline LossBreakdown eval(const EmbeddingModel& model,
                          const scale::EdgeIndex& adj, const Matrix& h_in,
                          const std::vector<Edge>& data_edges,
                          const std::vector<std::array<int, 3>>& triples,
                          Gradients* grads, Matrix* final_h,
                          unsigned long long* ops = nullptr) {
  const ModelConfig& cfg = model.config;
  ForwardTrace tr;
  forward_layers(model, adj, h_in, tr, ops);
  const Matrix& h = tr.h.back();
  const int d = cfg.d;

  LossBreakdown out;
  Matrix gh;  // dL/dH at the final layer
  if (grads) gh = Matrix(h.rows, h.cols);

  // Data loss over observed edges.
  for (const Edge& e : data_edges) {
    const double t_hat = head_forward(model.head, h.row(e.i), h.row(e.j), d);
    double dldt = 0.0;
    if (cfg.mode == DataMode::LlsMode) {
      const double r = t_hat - std::log(e.value);
      out.data_loss += r * r;
      dldt = 2.0 * r;
    } else {
      if (e.value == 0.0) continue;
      out.data_loss += -e.value * btl::log_sigmoid(t_hat);
      dldt = -e.value * (1.0 - btl::sigmoid(t_hat));
    }
    if (grads)
      head_backward(model.head, h.row(e.i), h.row(e.j), d, dldt, *grads, gh,
                    e.i, e.j);
  }
  if (ops) *ops += 4ull * data_edges.size() * d;

  // Triangle loss: mean |t_ij + t_jk - t_ik| over the sampled triples.
  if (!triples.empty() && cfg.lambda_triangle > 0.0) {
    const double inv = 1.0 / static_cast<double>(triples.size());
    for (const auto& t : triples) {
      const auto [i, j, k] = t;
      const double tij = head_forward(model.head, h.row(i), h.row(j), d);
      const double tjk = head_forward(model.head, h.row(j), h.row(k), d);
      const double tik = head_forward(model.head, h.row(i), h.row(k), d);
      const double defect = tij + tjk - tik;
      out.triangle_loss += std::abs(defect) * inv;
      if (grads && defect != 0.0) {
        // Subgradient of |.| at 0 is 0.
        const double g = cfg.lambda_triangle * inv * (defect > 0.0 ? 1.0 : -1.0);
        head_backward(model.head, h.row(i), h.row(j), d, g, *grads, gh, i, j);
        head_backward(model.head, h.row(j), h.row(k), d, g, *grads, gh, j, k);
        head_backward(model.head, h.row(i), h.row(k), d, -g, *grads, gh, i, k);
      }
    }
    if (ops) *ops += 6ull * triples.size() * d;
  }

  // Weight regularizer (parameters, not embeddings; biases excluded).
  for (const Matrix& w : model.w1) out.reg_loss += w.frobenius_sq();
  for (const Matrix& w : model.w2) out.reg_loss += w.frobenius_sq();
  if (model.head.kind == HeadKind::LinearDifference) {
    out.reg_loss += dot(model.head.v, model.head.v);
  } else {
    out.reg_loss += model.head.w_in.frobenius_sq();
    out.reg_loss += dot(model.head.w_out, model.head.w_out);
  }
  out.total = out.data_loss + cfg.lambda_triangle * out.triangle_loss +
              cfg.lambda_reg * out.reg_loss;

  if (final_h) *final_h = h;
  if (!grads) return out;

  // Backward through the message-passing layers.
  Matrix gz(h.rows, h.cols);
  for (int l = cfg.layers - 1; l >= 0; --l) {
    const Matrix& z = tr.z[l];
    for (std::size_t k = 0; k < gz.data.size(); ++k)
      gz.data[k] = gh.data[k] * activate_grad(cfg.nonlinearity, z.data[k]);
    const int slot = cfg.shared_weights ? 0 : l;
    accumulate_outer(gz, tr.h[l], grads->w1[slot]);
    accumulate_outer(gz, tr.s[l], grads->w2[slot]);
    // dL/dh^(l) = gz W1 + A^T (gz) W2, with A symmetric.
    Matrix gh_prev;
    apply_linear(gz, transpose_view(model.layer_w1(l)), gh_prev);
    Matrix agg = scale::sparse_aggregate(adj, gz);
    apply_linear_add(agg, transpose_view(model.layer_w2(l)), gh_prev);
    gh = std::move(gh_prev);
    if (ops)
      *ops += 4ull * h.rows * d * d +
              static_cast<unsigned long long>(adj.edge_count()) * d;
  }
  grads->h0 = std::move(gh);

  // Regularizer gradients.
  for (int s = 0; s < cfg.weight_slots(); ++s) {
    for (std::size_t k = 0; k < model.w1[s].data.size(); ++k)
      grads->w1[s].data[k] += 2.0 * cfg.lambda_reg * model.w1[s].data[k];
    for (std::size_t k = 0; k < model.w2[s].data.size(); ++k)
      grads->w2[s].data[k] += 2.0 * cfg.lambda_reg * model.w2[s].data[k];
  }
  if (model.head.kind == HeadKind::LinearDifference) {
    for (std::size_t k = 0; k < model.head.v.size(); ++k)
      grads->v[k] += 2.0 * cfg.lambda_reg * model.head.v[k];
  } else {
    for (std::size_t k = 0; k < model.head.w_in.data.size(); ++k)
      grads->w_in.data[k] += 2.0 * cfg.lambda_reg * model.head.w_in.data[k];
    for (std::size_t k = 0; k < model.head.w_out.size(); ++k)
      grads->w_out[k] += 2.0 * cfg.lambda_reg * model.head.w_out[k];
  }
  return out;
}

inline std::vector<Edge> check_and_copy_obs(const ModelConfig& cfg,
                                            const ComparisonSet& obs) {
  if (obs.edges().empty())
    throw std::invalid_argument("embed: observation set is empty");
  if (cfg.mode == DataMode::BtlMode &&
      obs.mode() != ObservationMode::BinaryCounts)
    throw std::invalid_argument("embed: BtlMode requires win-count data");
  if (cfg.mode == DataMode::LlsMode && obs.mode() != ObservationMode::Cardinal)
    throw std::invalid_argument("embed: LlsMode requires cardinal ratios");
  return obs.edges();
}

}  // namespace detail

// Final embeddings after the configured number of layers over the
// undirected symmetrization of the comparison graph.
inline Matrix message_pass(const EmbeddingModel& model,
                           const ComparisonSet& graph) {
  const scale::EdgeIndex adj = scale::EdgeIndex::from_comparisons(graph, true);
  detail::ForwardTrace tr;
  detail::forward_layers(model, adj, model.h0, tr, nullptr);
  return std::move(tr.h.back());
}

inline double predict_log_ratio(const Matrix& h, int i, int j,
                                const HeadParams& head) {
  if (i == j) throw std::invalid_argument("predict_log_ratio: i == j");
  return detail::head_forward(head, h.row(i), h.row(j), h.cols);
}

inline LossBreakdown loss(const EmbeddingModel& model,
                          const ComparisonSet& graph, const ComparisonSet& obs,
                          const std::vector<std::array<int, 3>>& triples) {
  const std::vector<Edge> data = detail::check_and_copy_obs(model.config, obs);
  const scale::EdgeIndex adj = scale::EdgeIndex::from_comparisons(graph, true);
  return detail::eval(model, adj, model.h0, data, triples, nullptr, nullptr);
}

inline std::pair<LossBreakdown, Gradients> gradients(
    const EmbeddingModel& model, const ComparisonSet& graph,
    const ComparisonSet& obs, const std::vector<std::array<int, 3>>& triples) {
  const std::vector<Edge> data = detail::check_and_copy_obs(model.config, obs);
  const scale::EdgeIndex adj = scale::EdgeIndex::from_comparisons(graph, true);
  Gradients g = zero_gradients(model);
  LossBreakdown l =
      detail::eval(model, adj, model.h0, data, triples, &g, nullptr);
  return {l, std::move(g)};
}

struct OptimizerConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int epochs = 200;
  double lr_decay = 1.0;  // per-epoch learning-rate multiplier
};

struct TrainStats {
  int epochs_run = 0;
  long long steps = 0;
  unsigned long long ops = 0;
  double mean_subgraph_nodes = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  EmbeddingModel model;
  std::vector<LossBreakdown> trace;  // one row per epoch
  TrainStats stats;
};

namespace detail {

// First-moment/second-moment optimizer state for one parameter buffer.
struct AdamBuffer {
  std::vector<double> m, v;
  explicit AdamBuffer(std::size_t size) : m(size, 0.0), v(size, 0.0) {}
};

class Adam {
 public:
  Adam(const OptimizerConfig& cfg) : cfg_(cfg) {}

  int add_buffer(std::size_t size) {
    buffers_.emplace_back(size);
    return static_cast<int>(buffers_.size()) - 1;
  }

  void begin_step() { ++t_; }
  void set_learning_rate(double lr) { lr_ = lr; }

  void update(int buf, double* p, const double* g, std::size_t size,
              std::size_t offset = 0) {
    AdamBuffer& s = buffers_[buf];
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t k = 0; k < size; ++k) {
      double& m = s.m[offset + k];
      double& v = s.v[offset + k];
      m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g[k];
      v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g[k] * g[k];
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      p[k] -= lr_ * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }

 private:
  OptimizerConfig cfg_;
  double lr_ = 0.0;
  long long t_ = 0;
  std::vector<AdamBuffer> buffers_;
};

// Applies one Adam step to every parameter tensor of the model. h0 rows
// may be restricted (rows == nullptr means all rows).
struct ModelOptimizer {
  Adam adam;
  int buf_h0, buf_head;
  std::vector<int> buf_w1, buf_w2;

  ModelOptimizer(const EmbeddingModel& m, const OptimizerConfig& cfg)
      : adam(cfg) {
    buf_h0 = adam.add_buffer(m.h0.data.size());
    for (const Matrix& w : m.w1) buf_w1.push_back(adam.add_buffer(w.data.size()));
    for (const Matrix& w : m.w2) buf_w2.push_back(adam.add_buffer(w.data.size()));
    std::size_t head_size = m.head.kind == HeadKind::LinearDifference
        ? m.head.v.size()
        : m.head.w_in.data.size() + m.head.b_in.size() + m.head.w_out.size() + 1;
    buf_head = adam.add_buffer(head_size);
  }

  void step_shared(EmbeddingModel& m, const Gradients& g, double lr) {
    adam.begin_step();
    adam.set_learning_rate(lr);
    for (std::size_t s = 0; s < m.w1.size(); ++s)
      adam.update(buf_w1[s], m.w1[s].data.data(), g.w1[s].data.data(),
                  m.w1[s].data.size());
    for (std::size_t s = 0; s < m.w2.size(); ++s)
      adam.update(buf_w2[s], m.w2[s].data.data(), g.w2[s].data.data(),
                  m.w2[s].data.size());
    if (m.head.kind == HeadKind::LinearDifference) {
      adam.update(buf_head, m.head.v.data(), g.v.data(), m.head.v.size());
    } else {
      std::size_t off = 0;
      adam.update(buf_head, m.head.w_in.data.data(), g.w_in.data.data(),
                  m.head.w_in.data.size(), off);
      off += m.head.w_in.data.size();
      adam.update(buf_head, m.head.b_in.data(), g.b_in.data(),
                  m.head.b_in.size(), off);
      off += m.head.b_in.size();
      adam.update(buf_head, m.head.w_out.data(), g.w_out.data(),
                  m.head.w_out.size(), off);
      off += m.head.w_out.size();
      adam.update(buf_head, &m.head.b_out, &g.b_out, 1, off);
    }
  }

  void step_h0_all(EmbeddingModel& m, const Gradients& g) {
    adam.update(buf_h0, m.h0.data.data(), g.h0.data.data(), m.h0.data.size());
  }

  // g_rows holds one gradient row per entry of rows (local layout).
  void step_h0_rows(EmbeddingModel& m, const Matrix& g_rows,
                    const std::vector<int>& rows) {
    const int d = m.h0.cols;
    for (std::size_t k = 0; k < rows.size(); ++k)
      adam.update(buf_h0, m.h0.row(rows[k]), g_rows.row(static_cast<int>(k)),
                  static_cast<std::size_t>(d),
                  static_cast<std::size_t>(rows[k]) * d);
  }
};

inline std::vector<std::array<int, 3>> sample_uniform_triples(int n,
                                                              long long count,
                                                              Rng& rng) {
  std::vector<std::array<int, 3>> t;
  if (n < 3 || count <= 0) return t;
  t.reserve(static_cast<std::size_t>(count));
  std::uniform_int_distribution<int> pick(0, n - 1);
  while (static_cast<long long>(t.size()) < count) {
    const int i = pick(rng), j = pick(rng), k = pick(rng);
    if (i != j && j != k && i != k) t.push_back({i, j, k});
  }
  return t;
}

inline long long resolve_triangle_samples(const ModelConfig& cfg,
                                          std::size_t edge_count) {
  if (cfg.triangle_samples >= 0) return cfg.triangle_samples;
  return std::min<long long>(10ll * static_cast<long long>(edge_count), 200000ll);
}

}  // namespace detail

// Full-batch training: every epoch evaluates the loss on all observed
// edges with a fresh triangle sample, then applies one Adam step. Returns
// the parameter state with the best training loss seen.
inline TrainResult train(const ComparisonSet& obs, const ModelConfig& cfg,
                         const OptimizerConfig& opt) {
  const std::vector<Edge> data = detail::check_and_copy_obs(cfg, obs);
  const scale::EdgeIndex adj = scale::EdgeIndex::from_comparisons(obs, true);

  TrainResult result;
  result.model = init_model(obs.n(), cfg);
  EmbeddingModel& model = result.model;
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

  // The linear head satisfies the triangle identity exactly, so sampling
  // triples for it would only burn cycles on zeros.
  const long long want_triples = cfg.head == HeadKind::LinearDifference
      ? 0
      : detail::resolve_triangle_samples(cfg, data.size());

  detail::ModelOptimizer optimizer(model, opt);
  EmbeddingModel best = model;
  double best_total = std::numeric_limits<double>::infinity();
  double lr = opt.learning_rate;

  const auto t0 = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    const auto triples =
        detail::sample_uniform_triples(obs.n(), want_triples, rng);
    Gradients g = zero_gradients(model);
    const LossBreakdown l = detail::eval(model, adj, model.h0, data, triples,
                                         &g, nullptr, &result.stats.ops);
    if (!std::isfinite(l.total))
      throw ConvergenceError(
          "embed::train: non-finite loss at epoch " + std::to_string(epoch),
          l.total);
    result.trace.push_back(l);
    if (l.total < best_total) {
      best_total = l.total;
      best = model;
    }
    optimizer.step_shared(model, g, lr);
    optimizer.step_h0_all(model, g);
    lr *= opt.lr_decay;
    ++result.stats.steps;
  }
  result.stats.epochs_run = opt.epochs;
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  result.model = std::move(best);
  return result;
}

// All-pairs completion from a trained model: exp(t_ij) in LlsMode, clamped
// odds in BtlMode, then the geometric-mean reciprocal projection.
inline DensePcm ml_complete(const EmbeddingModel& model,
                            const ComparisonSet& graph) {
  const Matrix h = message_pass(model, graph);
  const int n = h.rows;
  DensePcm a(n);
  const double log_max = std::log(std::numeric_limits<double>::max());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double t = predict_log_ratio(h, i, j, model.head);
      if (model.config.mode == DataMode::LlsMode) {
        if (!(std::abs(t) < log_max))
          throw ScoreOverflowError("ml_complete: exp overflow at (" +
                                       std::to_string(i) + "," +
                                       std::to_string(j) + ")",
                                   i, j);
        a.set(i, j, std::exp(t));
      } else {
        double p = btl::sigmoid(t);
        p = std::min(1.0 - 1e-12, std::max(1e-12, p));
        a.set(i, j, p / (1.0 - p));
      }
    }
  }
  return reciprocal_projection(a);
}

}  // namespace pcm::embed

#endif  // PCM_EMBED_HPP
