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

#ifndef PCM_LLS_HPP
#define PCM_LLS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pcm/core.hpp"
#include "pcm/linalg.hpp"
#include "pcm/types.hpp"

namespace pcm::lls {

// Normal equations L x = b of the log-least-squares problem, stored as
// symmetric triplets plus per-node connected-component labels.
struct LaplacianSystem {
  int n = 0;
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<double> values;
  std::vector<double> rhs;
  std::vector<int> component_labels;

  int component_count() const {
    int c = 0;
    for (int l : component_labels) c = std::max(c, l + 1);
    return c;
  }

  std::vector<int> component_sizes() const {
    std::vector<int> sizes(component_count(), 0);
    for (int l : component_labels) ++sizes[l];
    return sizes;
  }

  // y = L x
  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n, 0.0);
    for (std::size_t t = 0; t < values.size(); ++t)
      y[rows[t]] += values[t] * x[cols[t]];
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(n, 0.0);
    for (std::size_t t = 0; t < values.size(); ++t)
      if (rows[t] == cols[t]) d[rows[t]] += values[t];
    return d;
  }
};

// Builds L and b from cardinal observations. A pair observed in both
// directions collapses to one undirected constraint whose target is the
// log of the geometric mean of a_ij and 1/a_ji.
inline LaplacianSystem assemble(const ComparisonSet& obs) {
  if (obs.mode() != ObservationMode::Cardinal)
    throw std::invalid_argument(
        "lls::assemble: requires cardinal ratios; fit win counts with btl::fit");
  const int n = obs.n();

  // Merge ordered pairs into undirected constraints keyed by (min, max).
  // Target sign is oriented from the smaller id to the larger.
  std::map<std::pair<int, int>, std::pair<double, int>> merged;
  for (const Edge& e : obs.edges()) {
    const bool flip = e.i > e.j;
    const int a = flip ? e.j : e.i;
    const int b = flip ? e.i : e.j;
    const double y = flip ? -std::log(e.value) : std::log(e.value);
    auto [it, inserted] = merged.try_emplace({a, b}, std::pair<double, int>{y, 1});
    if (!inserted) {
      it->second.first += y;
      ++it->second.second;
    }
  }

  LaplacianSystem sys;
  sys.n = n;
  sys.rhs.assign(n, 0.0);
  std::vector<double> diag(n, 0.0);
  DisjointSets dsu(n);
  for (const auto& [key, acc] : merged) {
    const auto [i, j] = key;
    const double y = acc.first / acc.second;
    diag[i] += 1.0;
    diag[j] += 1.0;
    sys.rows.push_back(i);
    sys.cols.push_back(j);
    sys.values.push_back(-1.0);
    sys.rows.push_back(j);
    sys.cols.push_back(i);
    sys.values.push_back(-1.0);
    sys.rhs[i] += y;
    sys.rhs[j] -= y;
    dsu.unite(i, j);
  }
  for (int i = 0; i < n; ++i) {
    sys.rows.push_back(i);
    sys.cols.push_back(i);
    sys.values.push_back(diag[i]);
  }
  sys.component_labels = dsu.labels();
  return sys;
}

// Jacobi-preconditioned conjugate gradient on the zero-mean subspace of
// each component. Isolated nodes stay at 0. The returned scores have zero
// mean per gauge group.
inline ScoreVector solve(const LaplacianSystem& sys, Gauge gauge,
                         double tol = 1e-10, int max_iter = 0) {
  const int n = sys.n;
  if (!(tol > 0.0)) throw std::invalid_argument("lls::solve: tol must be > 0");
  if (max_iter <= 0) max_iter = 20 * n;

  ScoreVector result;
  result.scores.assign(n, 0.0);
  result.gauge =
      sys.component_count() > 1 ? Gauge::ZeroMeanPerComponent : gauge;

  auto project = [&](std::vector<double>& v) {
    zero_mean_per_group(v, sys.component_labels);
  };

  std::vector<double> b = sys.rhs;
  project(b);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return result;

  std::vector<double> inv_diag = sys.diagonal();
  for (double& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

  std::vector<double>& x = result.scores;
  std::vector<double> r = b;
  std::vector<double> z(n), q(n);
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  project(z);
  std::vector<double> p = z;
  double rz = dot(r, z);

  double rnorm = norm2(r);
  for (int iter = 0; iter < max_iter && rnorm > tol * bnorm; ++iter) {
    sys.multiply(p, q);
    const double pq = dot(p, q);
    if (pq <= 0.0) break;  // numerical breakdown; PSD so pq > 0 on the range
    const double alpha = rz / pq;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rnorm = norm2(r);
    if (rnorm <= tol * bnorm) break;
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    project(z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (rnorm > tol * bnorm)
    throw ConvergenceError("lls::solve: conjugate gradient stalled at residual " +
                               std::to_string(rnorm / bnorm),
                           rnorm / bnorm);
  project(x);
  return result;
}

// assemble + solve + complete_from_scores.
inline std::pair<ScoreVector, DensePcm> lls_complete(
    const ComparisonSet& obs, Gauge gauge = Gauge::ZeroMeanGlobal) {
  const LaplacianSystem sys = assemble(obs);
  ScoreVector x = solve(sys, gauge);
  DensePcm completed = complete_from_scores(x);
  return {std::move(x), std::move(completed)};
}

}  // namespace pcm::lls

#endif  // PCM_LLS_HPP
