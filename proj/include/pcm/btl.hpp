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

#ifndef PCM_BTL_HPP
#define PCM_BTL_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcm/linalg.hpp"
#include "pcm/types.hpp"

namespace pcm::btl {

enum class StepRule { FixedStep, Backtracking };

struct BtlFitConfig {
  int max_iter = 5000;
  double grad_tol = 1e-8;  // infinity norm of the gradient
  StepRule step_rule = StepRule::Backtracking;
  double l2_strength = 0.0;  // ridge on x; enables separable data
  double step_size = 1.0;    // fixed step, or initial backtracking step
};

inline double sigmoid(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(sigmoid(t)) without overflow for |t| up to ~745.
inline double log_sigmoid(double t) {
  if (t > 0.0) return -std::log1p(std::exp(-t));
  return t - std::log1p(std::exp(t));
}

inline void require_counts(const ComparisonSet& obs, const char* who) {
  if (obs.mode() != ObservationMode::BinaryCounts)
    throw std::invalid_argument(std::string(who) +
                                ": requires win counts, not cardinal ratios");
}

// l(x) = sum over observed ordered pairs of c_ij * log(sigmoid(x_i - x_j)).
inline double log_likelihood(const ScoreVector& x, const ComparisonSet& obs) {
  require_counts(obs, "btl::log_likelihood");
  double ll = 0.0;
  for (const Edge& e : obs.edges()) {
    if (e.value == 0.0) continue;
    ll += e.value * log_sigmoid(x.scores[e.i] - x.scores[e.j]);
  }
  return ll;
}

// d l / d x_i = sum_j (c_ij - (c_ij + c_ji) * sigmoid(x_i - x_j)).
// Components always sum to 0: the likelihood is translation invariant.
inline std::vector<double> gradient(const ScoreVector& x,
                                    const ComparisonSet& obs) {
  require_counts(obs, "btl::gradient");
  std::vector<double> g(x.n(), 0.0);
  for (const Edge& e : obs.edges()) {
    if (e.value == 0.0) continue;
    const double gain = e.value * (1.0 - sigmoid(x.scores[e.i] - x.scores[e.j]));
    g[e.i] += gain;
    g[e.j] -= gain;
  }
  return g;
}

namespace detail {

// Strongly connected components of the positive-count win digraph,
// iterative Tarjan. Returns component id per node.
inline std::vector<int> strongly_connected(int n,
                                           const std::vector<std::vector<int>>& out) {
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int next_index = 0, next_comp = 0;
  struct Frame {
    int v;
    std::size_t child;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.child < out[f.v].size()) {
        const int w = out[f.v][f.child++];
        if (index[w] < 0) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          while (true) {
            const int w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp[w] = next_comp;
            if (w == f.v) break;
          }
          ++next_comp;
        }
        const int v = f.v;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      }
    }
  }
  return comp;
}

// The MLE exists iff the win digraph is strongly connected within each
// undirected component. Returns -1 when it exists, else an item whose
// comparisons are fully one-sided (a witness node).
inline int separability_witness(const ComparisonSet& obs) {
  const int n = obs.n();
  std::vector<std::vector<int>> out(n);
  DisjointSets dsu(n);
  for (const Edge& e : obs.edges()) {
    if (e.value > 0.0) {
      dsu.unite(e.i, e.j);
      out[e.i].push_back(e.j);
    }
  }
  const std::vector<int> comp = dsu.labels();
  const std::vector<int> scc = strongly_connected(n, out);
  // Within one undirected component, >1 SCC means some score diverges.
  // Witness: a node in an SCC with no incoming arc from the rest of its
  // component (it never loses inside that component).
  std::vector<bool> scc_has_in(n, false);
  for (int v = 0; v < n; ++v)
    for (int w : out[v])
      if (scc[v] != scc[w]) scc_has_in[scc[w]] = true;
  std::vector<int> sccs_in_comp(n, 0);
  std::vector<int> seen_comp_scc(n, -1);
  for (int v = 0; v < n; ++v) {
    if (seen_comp_scc[scc[v]] != comp[v]) {
      seen_comp_scc[scc[v]] = comp[v];
      ++sccs_in_comp[comp[v]];
    }
  }
  for (int v = 0; v < n; ++v)
    if (sccs_in_comp[comp[v]] > 1 && !scc_has_in[scc[v]]) return v;
  return -1;
}

}  // namespace detail

// Maximum-likelihood scores by gradient ascent. Backtracking line search
// (Armijo c = 1e-4, shrink 0.5) keeps the ascent monotone. Scores come
// back zero-mean per component.
inline ScoreVector fit(const ComparisonSet& obs, const BtlFitConfig& cfg = {}) {
  require_counts(obs, "btl::fit");
  if (cfg.max_iter < 1 || !(cfg.grad_tol > 0.0))
    throw std::invalid_argument("btl::fit: bad config");
  const int n = obs.n();

  if (cfg.l2_strength <= 0.0) {
    const int witness = detail::separability_witness(obs);
    if (witness >= 0)
      throw MleDoesNotExistError(
          "btl::fit: MLE does not exist; item " + std::to_string(witness) +
              " is on the winning side of every comparison reaching it "
              "(set l2_strength > 0 to regularize)",
          witness);
  }

  DisjointSets dsu(n);
  for (const Edge& e : obs.edges())
    if (e.value > 0.0) dsu.unite(e.i, e.j);
  const std::vector<int> labels = dsu.labels();

  ScoreVector x;
  x.scores.assign(n, 0.0);
  x.gauge = Gauge::ZeroMeanPerComponent;

  auto objective = [&](const ScoreVector& s) {
    double obj = log_likelihood(s, obs);
    if (cfg.l2_strength > 0.0)
      obj -= 0.5 * cfg.l2_strength * dot(s.scores, s.scores);
    return obj;
  };
  auto full_gradient = [&](const ScoreVector& s) {
    std::vector<double> g = gradient(s, obs);
    if (cfg.l2_strength > 0.0)
      for (int i = 0; i < n; ++i) g[i] -= cfg.l2_strength * s.scores[i];
    return g;
  };

  double obj = objective(x);
  ScoreVector trial = x;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const std::vector<double> g = full_gradient(x);
    if (norm_inf(g) <= cfg.grad_tol) {
      zero_mean_per_group(x.scores, labels);
      return x;
    }
    if (cfg.step_rule == StepRule::FixedStep) {
      for (int i = 0; i < n; ++i) x.scores[i] += cfg.step_size * g[i];
      const double next = objective(x);
      if (!std::isfinite(next))
        throw ConvergenceError("btl::fit: diverged with fixed step", next);
      obj = next;
      continue;
    }
    const double gg = dot(g, g);
    double step = cfg.step_size;
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      for (int i = 0; i < n; ++i) trial.scores[i] = x.scores[i] + step * g[i];
      const double next = objective(trial);
      if (std::isfinite(next) && next >= obj + 1e-4 * step * gg) {
        x.scores.swap(trial.scores);
        obj = next;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // The objective can no longer resolve the remaining ascent in
      // double precision; grad_tol was set below what the data scale
      // allows.
      throw ConvergenceError(
          "btl::fit: line search underflow at gradient norm " +
              std::to_string(norm_inf(g)),
          norm_inf(g));
    }
  }
  const double gnorm = norm_inf(full_gradient(x));
  if (gnorm <= cfg.grad_tol) {
    zero_mean_per_group(x.scores, labels);
    return x;
  }
  throw ConvergenceError("btl::fit: gradient norm " + std::to_string(gnorm) +
                             " after max_iter iterations",
                         gnorm);
}

}  // namespace pcm::btl

#endif  // PCM_BTL_HPP
