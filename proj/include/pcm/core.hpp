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

#ifndef PCM_CORE_HPP
#define PCM_CORE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "pcm/linalg.hpp"
#include "pcm/types.hpp"

namespace pcm {

struct Violation {
  enum class Kind { NonPositive, Diagonal, Reciprocity };
  Kind kind;
  int i = 0;
  int j = 0;
  double value = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool valid() const { return violations.empty(); }
};

// Saaty consistency diagnostics for one matrix.
struct ConsistencyReport {
  double lambda_max = 1.0;
  double ci = 0.0;
  double cr = 0.0;  // NaN when no random-index value exists for this n
  int n = 0;
  double ri_used = 0.0;  // NaN when unavailable
  double max_triangle_residual = 0.0;
};

// Checks positivity, unit diagonal and reciprocity (|a_ij*a_ji - 1| <= tol,
// relative). Diagnostic only: always returns, never throws.
inline ValidationReport validate(const DensePcm& a, double tol = 1e-9) {
  ValidationReport report;
  const int n = a.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = a(i, j);
      if (!(v > 0.0) || !std::isfinite(v))
        report.violations.push_back({Violation::Kind::NonPositive, i, j, v});
    }
    if (a(i, i) != 1.0)
      report.violations.push_back({Violation::Kind::Diagonal, i, i, a(i, i)});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = a(i, j) * a(j, i);
      if (!(std::abs(p - 1.0) <= tol))
        report.violations.push_back({Violation::Kind::Reciprocity, i, j, p});
    }
  }
  return report;
}

// Principal eigenpair by power iteration from the uniform vector. Positive
// matrices converge to the Perron pair; w is normalized to sum 1.
inline std::pair<double, std::vector<double>> principal_eigen(
    const DensePcm& a, int max_iter = 10000, double tol = 1e-10) {
  const int n = a.n();
  std::vector<double> w(n, 1.0 / n);
  std::vector<double> aw(n, 0.0);
  double lambda = 1.0;
  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= max_iter; ++iter) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += a(i, j) * w[j];
      aw[i] = s;
    }
    // Estimate under sum-1 normalization: lambda = 1^T A w.
    double sum = 0.0;
    for (double v : aw) sum += v;
    lambda = sum;
    residual = 0.0;
    for (int i = 0; i < n; ++i)
      residual = std::max(residual, std::abs(aw[i] - lambda * w[i]));
    if (residual <= tol * lambda) return {lambda, w};
    for (int i = 0; i < n; ++i) w[i] = aw[i] / sum;
  }
  throw ConvergenceError(
      "principal_eigen: power iteration did not converge, residual " +
          std::to_string(residual),
      residual);
}

// Random-index table, indexed by n (0 and 1 unused). RI(3) = 0.58; the rest
// are the commonly cited Saaty values through n = 15.
inline double random_index(int n) {
  static constexpr std::array<double, 16> kRi = {
      0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32,
      1.41, 1.45, 1.49, 1.51, 1.48, 1.56, 1.57, 1.59};
  if (n < 1 || n > 15) return std::numeric_limits<double>::quiet_NaN();
  return kRi[static_cast<std::size_t>(n)];
}

// Residual |log a_ij + log a_jk - log a_ik| for each requested triple.
inline std::vector<double> triangle_residuals(
    const DensePcm& a, const std::vector<std::tuple<int, int, int>>& triples) {
  std::vector<double> out;
  out.reserve(triples.size());
  for (const auto& [i, j, k] : triples)
    out.push_back(std::abs(std::log(a(i, j)) + std::log(a(j, k)) - std::log(a(i, k))));
  return out;
}

// All distinct ordered triples for small n; a fixed-seed sample otherwise.
inline std::vector<std::tuple<int, int, int>> sample_triples(int n,
                                                             std::size_t budget,
                                                             std::uint64_t seed = 0) {
  std::vector<std::tuple<int, int, int>> t;
  const std::size_t total = n >= 3
      ? static_cast<std::size_t>(n) * (n - 1) * (n - 2)
      : 0;
  if (total == 0) return t;
  if (total <= budget) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          if (i != j && j != k && i != k) t.emplace_back(i, j, k);
    return t;
  }
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  while (t.size() < budget) {
    const int i = pick(rng), j = pick(rng), k = pick(rng);
    if (i != j && j != k && i != k) t.emplace_back(i, j, k);
  }
  return t;
}

// CI/CR per the Saaty formulas. For n > 15 the CR is unavailable (NaN);
// the CI is still reported.
inline ConsistencyReport consistency_report(const DensePcm& a) {
  ConsistencyReport r;
  r.n = a.n();
  auto [lambda, w] = principal_eigen(a);
  (void)w;
  r.lambda_max = lambda;
  r.ci = r.n <= 2 ? 0.0 : (lambda - r.n) / (r.n - 1);
  r.ri_used = random_index(r.n);
  if (std::isnan(r.ri_used) || r.ri_used == 0.0) {
    r.cr = r.n <= 2 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  } else {
    r.cr = r.ci / r.ri_used;
  }
  const auto triples = sample_triples(r.n, 4096);
  double worst = 0.0;
  for (double v : triangle_residuals(a, triples)) worst = std::max(worst, v);
  r.max_triangle_residual = worst;
  return r;
}

// a_ij = exp(x_i - x_j): exactly reciprocal and multiplicatively consistent.
inline DensePcm complete_from_scores(const ScoreVector& x) {
  const int n = x.n();
  DensePcm a(n);
  const double log_max = std::log(std::numeric_limits<double>::max());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double diff = x.scores[i] - x.scores[j];
      if (!(std::abs(diff) < log_max))
        throw ScoreOverflowError("complete_from_scores: exp(x_" +
                                     std::to_string(i) + " - x_" +
                                     std::to_string(j) + ") overflows",
                                 i, j);
      a.set(i, j, std::exp(diff));
    }
  }
  return a;
}

// Geometric-mean projection onto exactly reciprocal matrices; idempotent.
inline DensePcm reciprocal_projection(const DensePcm& a) {
  const int n = a.n();
  DensePcm out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!(a(i, j) > 0.0) || !(a(j, i) > 0.0))
        throw std::invalid_argument(
            "reciprocal_projection: nonpositive entry at (" + std::to_string(i) +
            "," + std::to_string(j) + ")");
      const double v = std::sqrt(a(i, j) / a(j, i));
      out.set(i, j, v);
      out.set(j, i, 1.0 / v);
    }
  }
  return out;
}

}  // namespace pcm

#endif  // PCM_CORE_HPP
