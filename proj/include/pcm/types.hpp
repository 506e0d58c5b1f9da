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

#ifndef PCM_TYPES_HPP
#define PCM_TYPES_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace pcm {

// Thrown when an iterative solver fails to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Thrown by the BTL fitter when the likelihood has no finite maximizer.
class MleDoesNotExistError : public std::runtime_error {
 public:
  MleDoesNotExistError(const std::string& what, int item)
      : std::runtime_error(what), item_(item) {}
  int item() const { return item_; }

 private:
  int item_;
};

// Thrown when exponentiating a score difference would overflow a double.
class ScoreOverflowError : public std::runtime_error {
 public:
  ScoreOverflowError(const std::string& what, int i, int j)
      : std::runtime_error(what), i_(i), j_(j) {}
  int i() const { return i_; }
  int j() const { return j_; }

 private:
  int i_;
  int j_;
};

// Thrown by the CSV readers; carries the 1-based offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

struct Edge {
  int i = 0;
  int j = 0;
  double value = 1.0;
};

enum class ObservationMode { Cardinal, BinaryCounts };

// The observed sparse comparison data. In Cardinal mode edge values are
// positive ratios a_ij; in BinaryCounts mode they are win counts c_ij.
// Invariants are enforced at construction: ids in [0, n), no self loops,
// at most one entry per ordered pair, values positive/finite (Cardinal)
// or nonnegative integral (BinaryCounts).
class ComparisonSet {
 public:
  ComparisonSet(int n, std::vector<Edge> edges, ObservationMode mode)
      : n_(n), edges_(std::move(edges)), mode_(mode) {
    if (n_ < 1) throw std::invalid_argument("ComparisonSet: n must be >= 1");
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges_.size() * 2);
    for (const Edge& e : edges_) {
      if (e.i < 0 || e.i >= n_ || e.j < 0 || e.j >= n_)
        throw std::invalid_argument("ComparisonSet: node id out of range: (" +
                                    std::to_string(e.i) + "," +
                                    std::to_string(e.j) + ")");
      if (e.i == e.j)
        throw std::invalid_argument("ComparisonSet: self comparison at node " +
                                    std::to_string(e.i));
      const std::uint64_t key =
          (static_cast<std::uint64_t>(e.i) << 32) | static_cast<std::uint32_t>(e.j);
      if (!seen.insert(key).second)
        throw std::invalid_argument("ComparisonSet: duplicate ordered pair (" +
                                    std::to_string(e.i) + "," +
                                    std::to_string(e.j) + ")");
      if (!std::isfinite(e.value))
        throw std::invalid_argument("ComparisonSet: non-finite value at (" +
                                    std::to_string(e.i) + "," +
                                    std::to_string(e.j) + ")");
      if (mode_ == ObservationMode::Cardinal) {
        if (e.value <= 0.0)
          throw std::invalid_argument(
              "ComparisonSet: cardinal ratio must be positive at (" +
              std::to_string(e.i) + "," + std::to_string(e.j) + ")");
      } else {
        if (e.value < 0.0 || std::floor(e.value) != e.value)
          throw std::invalid_argument(
              "ComparisonSet: win count must be a nonnegative integer at (" +
              std::to_string(e.i) + "," + std::to_string(e.j) + ")");
      }
    }
  }

  static ComparisonSet cardinal(int n, std::vector<Edge> edges) {
    return ComparisonSet(n, std::move(edges), ObservationMode::Cardinal);
  }
  static ComparisonSet binary_counts(int n, std::vector<Edge> edges) {
    return ComparisonSet(n, std::move(edges), ObservationMode::BinaryCounts);
  }

  int n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  ObservationMode mode() const { return mode_; }
  std::size_t edge_count() const { return edges_.size(); }

  // Undirected adjacency lists (symmetrized, deduplicated).
  std::vector<std::vector<int>> undirected_adjacency() const {
    std::vector<std::vector<int>> adj(n_);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges_.size() * 2);
    for (const Edge& e : edges_) {
      const int a = e.i < e.j ? e.i : e.j;
      const int b = e.i < e.j ? e.j : e.i;
      const std::uint64_t key =
          (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
      if (seen.insert(key).second) {
        adj[a].push_back(b);
        adj[b].push_back(a);
      }
    }
    return adj;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  ObservationMode mode_;
};

enum class Gauge { ZeroMeanGlobal, ZeroMeanPerComponent };

// Latent log-scores, the common output of all solvers. Scores are
// dimensionless; the additive gauge freedom is fixed to zero mean over
// each gauge group.
struct ScoreVector {
  std::vector<double> scores;
  Gauge gauge = Gauge::ZeroMeanGlobal;

  int n() const { return static_cast<int>(scores.size()); }
};

// A dense positive matrix with unit diagonal. The diagonal is forced to 1
// at construction and on writes; reciprocity is a property of particular
// instances (see validate/reciprocal_projection).
class DensePcm {
 public:
  explicit DensePcm(int n) : n_(n), entries_(static_cast<std::size_t>(n) * n, 1.0) {
    if (n < 1) throw std::invalid_argument("DensePcm: n must be >= 1");
  }

  int n() const { return n_; }

  double operator()(int i, int j) const {
    return entries_[static_cast<std::size_t>(i) * n_ + j];
  }

  void set(int i, int j, double v) {
    if (i == j) return;  // diagonal pinned to 1
    entries_[static_cast<std::size_t>(i) * n_ + j] = v;
  }

  const std::vector<double>& entries() const { return entries_; }

 private:
  int n_;
  std::vector<double> entries_;
};

}  // namespace pcm

#endif  // PCM_TYPES_HPP
