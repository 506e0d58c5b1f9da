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

#ifndef PCM_LINALG_HPP
#define PCM_LINALG_HPP

#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

namespace pcm {

using Rng = std::mt19937_64;

// Small dense row-major matrix. Sized for embedding tables (n x d) and
// layer weights (d x d); not a general linear-algebra type.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(int r, int c) {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  double operator()(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const {
    return data.data() + static_cast<std::size_t>(r) * cols;
  }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  double frobenius_sq() const {
    double s = 0.0;
    for (double v : data) s += v * v;
    return s;
  }
};

// out_i = W * in_i for every row: out = in * W^T, with in (n x d), W (k x d).
inline void apply_linear(const Matrix& in, const Matrix& w, Matrix& out) {
  assert(in.cols == w.cols);
  out.rows = in.rows;
  out.cols = w.rows;
  out.data.assign(static_cast<std::size_t>(out.rows) * out.cols, 0.0);
  for (int i = 0; i < in.rows; ++i) {
    const double* x = in.row(i);
    double* y = out.row(i);
    for (int r = 0; r < w.rows; ++r) {
      const double* wr = w.row(r);
      double acc = 0.0;
      for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
      y[r] = acc;
    }
  }
}

// Same as apply_linear but accumulates into out (which must be sized).
inline void apply_linear_add(const Matrix& in, const Matrix& w, Matrix& out) {
  assert(in.cols == w.cols && out.rows == in.rows && out.cols == w.rows);
  for (int i = 0; i < in.rows; ++i) {
    const double* x = in.row(i);
    double* y = out.row(i);
    for (int r = 0; r < w.rows; ++r) {
      const double* wr = w.row(r);
      double acc = 0.0;
      for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
      y[r] += acc;
    }
  }
}

// grad_w += sum_i g_i (outer) x_i, with g (n x k), x (n x d), grad_w (k x d).
inline void accumulate_outer(const Matrix& g, const Matrix& x, Matrix& grad_w) {
  assert(g.rows == x.rows && grad_w.rows == g.cols && grad_w.cols == x.cols);
  for (int i = 0; i < g.rows; ++i) {
    const double* gi = g.row(i);
    const double* xi = x.row(i);
    for (int r = 0; r < g.cols; ++r) {
      double* wr = grad_w.row(r);
      const double gr = gi[r];
      if (gr == 0.0) continue;
      for (int c = 0; c < x.cols; ++c) wr[c] += gr * xi[c];
    }
  }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Union-find over node ids; used for connected-component labeling.
class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

  // Dense labels 0..k-1 in order of first appearance.
  std::vector<int> labels() {
    std::vector<int> lab(parent_.size(), -1);
    int next = 0;
    for (std::size_t v = 0; v < parent_.size(); ++v) {
      const int r = find(static_cast<int>(v));
      if (lab[r] < 0) lab[r] = next++;
      lab[v] = lab[r];
    }
    return lab;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

// Subtracts the mean of v over each label group, in place.
inline void zero_mean_per_group(std::vector<double>& v,
                                const std::vector<int>& labels) {
  assert(v.size() == labels.size());
  int groups = 0;
  for (int l : labels) groups = std::max(groups, l + 1);
  std::vector<double> sum(groups, 0.0);
  std::vector<int> count(groups, 0);
  for (std::size_t k = 0; k < v.size(); ++k) {
    sum[labels[k]] += v[k];
    ++count[labels[k]];
  }
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] -= sum[labels[k]] / count[labels[k]];
}

}  // namespace pcm

#endif  // PCM_LINALG_HPP
