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

#ifndef PCM_EDGE_INDEX_HPP
#define PCM_EDGE_INDEX_HPP

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pcm/linalg.hpp"
#include "pcm/types.hpp"

namespace pcm::scale {

// Edge-list graph in CSR order: arrays sorted by (source, target) with
// per-node offsets for O(1) neighbor slices. No duplicate ordered pairs.
struct EdgeIndex {
  int n = 0;
  std::vector<int> sources;
  std::vector<int> targets;
  std::vector<double> values;
  std::vector<std::size_t> csr_offsets;  // size n + 1

  std::size_t edge_count() const { return sources.size(); }

  // Neighbor slice of node v: targets[begin(v) .. end(v)).
  std::size_t begin(int v) const { return csr_offsets[v]; }
  std::size_t end(int v) const { return csr_offsets[v + 1]; }
  int degree(int v) const { return static_cast<int>(end(v) - begin(v)); }

  static EdgeIndex from_triplets(int n, std::vector<int> src,
                                 std::vector<int> dst, std::vector<double> val) {
    if (src.size() != dst.size() || src.size() != val.size())
      throw std::invalid_argument("EdgeIndex: array length mismatch");
    const std::size_t m = src.size();
    std::vector<std::size_t> order(m);
    for (std::size_t k = 0; k < m; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (src[a] != src[b]) return src[a] < src[b];
      return dst[a] < dst[b];
    });
    EdgeIndex e;
    e.n = n;
    e.sources.resize(m);
    e.targets.resize(m);
    e.values.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      e.sources[k] = src[order[k]];
      e.targets[k] = dst[order[k]];
      e.values[k] = val[order[k]];
      if (k > 0 && e.sources[k] == e.sources[k - 1] && e.targets[k] == e.targets[k - 1])
        throw std::invalid_argument("EdgeIndex: duplicate ordered pair");
    }
    e.csr_offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t k = 0; k < m; ++k) ++e.csr_offsets[e.sources[k] + 1];
    for (int v = 0; v < n; ++v) e.csr_offsets[v + 1] += e.csr_offsets[v];
    return e;
  }

  // Directed index of the observed comparisons, or the undirected
  // symmetrization (both arc directions, value kept from the generating
  // edge) used for message passing and random walks.
  static EdgeIndex from_comparisons(const ComparisonSet& obs, bool symmetrize) {
    std::vector<int> src, dst;
    std::vector<double> val;
    if (!symmetrize) {
      src.reserve(obs.edge_count());
      dst.reserve(obs.edge_count());
      val.reserve(obs.edge_count());
      for (const Edge& e : obs.edges()) {
        src.push_back(e.i);
        dst.push_back(e.j);
        val.push_back(e.value);
      }
      return from_triplets(obs.n(), std::move(src), std::move(dst), std::move(val));
    }
    const auto adj = obs.undirected_adjacency();
    for (int v = 0; v < obs.n(); ++v) {
      for (int w : adj[v]) {
        src.push_back(v);
        dst.push_back(w);
        val.push_back(1.0);
      }
    }
    return from_triplets(obs.n(), std::move(src), std::move(dst), std::move(val));
  }
};

// out row i = sum of X rows over N(i). Linear in |edges| * d; equals the
// dense adjacency product when the edge list is a full adjacency.
inline Matrix sparse_aggregate(const EdgeIndex& edges, const Matrix& x) {
  Matrix out(x.rows, x.cols, 0.0);
  for (std::size_t k = 0; k < edges.edge_count(); ++k) {
    const double* src_row = x.row(edges.targets[k]);
    double* dst_row = out.row(edges.sources[k]);
    for (int c = 0; c < x.cols; ++c) dst_row[c] += src_row[c];
  }
  return out;
}

}  // namespace pcm::scale

#endif  // PCM_EDGE_INDEX_HPP
