// Copyright 2026 The embshape Authors
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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/core.h>

#include "embshape/evaluate.h"

namespace embshape {

namespace {

Matrix kmeans_plus_plus(const Matrix& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  Matrix centers(k, x.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = x.row(pick(rng));
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i) = (x.row(i) - centers.row(0)).squaredNorm();
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      double r = unit(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (r < acc && d2(i) > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(c) = x.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2(i) = std::min(d2(i), (x.row(i) - centers.row(c)).squaredNorm());
    }
  }
  return centers;
}

}  // namespace

std::vector<int> kmeans(const Matrix& x, int k, std::uint64_t seed,
                        const KMeansOptions& options) {
  if (k < 1) throw InvalidArgument("kmeans: k must be at least 1");
  if (x.rows() < k) {
    throw InvalidArgument(
        fmt::format("kmeans: {} points cannot form {} clusters", x.rows(), k));
  }
  if (!x.allFinite()) throw InvalidArgument("kmeans: non-finite input");
  std::mt19937_64 rng(seed);
  Matrix centers = kmeans_plus_plus(x, k, rng);
  const Eigen::Index n = x.rows();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  Vector dist(n);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        double d = (x.row(i) - centers.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      labels[static_cast<std::size_t>(i)] = arg;
      dist(i) = best;
    }
    Matrix next = Matrix::Zero(k, x.cols());
    std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int c = labels[static_cast<std::size_t>(i)];
      next.row(c) += x.row(i);
      ++sizes[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        next.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
        continue;
      }
      Eigen::Index far = 0;
      dist.maxCoeff(&far);
      next.row(c) = x.row(far);
      dist(far) = -1.0;
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      shift = std::max(shift, (next.row(c) - centers.row(c)).norm());
    }
    centers = std::move(next);
    if (shift < options.tolerance) break;
  }
  return labels;
}

std::vector<int> max_weight_assignment(const Matrix& weights) {
  if (weights.rows() != weights.cols()) {
    throw InvalidArgument("assignment: weight matrix must be square");
  }
  const int n = static_cast<int>(weights.rows());
  if (n == 0) return {};
  const double top = weights.maxCoeff();
  // Kuhn-Munkres with row/column potentials on cost = top - weight.
  // Index 0 is a sentinel; rows and columns are 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = match[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cost = top - weights(i0 - 1, j - 1);
        double cur = cost - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), 0);
  for (int j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

double hungarian_accuracy(std::span<const int> predicted,
                          std::span<const int> gold) {
  if (predicted.size() != gold.size()) {
    throw InvalidArgument("hungarian_accuracy: label lists differ in length");
  }
  if (gold.empty()) throw InvalidArgument("hungarian_accuracy: no items");
  int k = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] < 0 || gold[i] < 0) {
      throw InvalidArgument("hungarian_accuracy: negative label");
    }
    k = std::max({k, predicted[i] + 1, gold[i] + 1});
  }
  Matrix counts = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    counts(predicted[i], gold[i]) += 1.0;
  }
  std::vector<int> map = max_weight_assignment(counts);
  double matched = 0.0;
  for (int c = 0; c < k; ++c) matched += counts(c, map[static_cast<std::size_t>(c)]);
  return matched / static_cast<double>(gold.size());
}

EvalReport eval_clustering(std::span<const int> gold, const Matrix& vectors,
                           int runs, std::uint64_t base_seed, int workers,
                           std::string task) {
  if (runs < 1) throw InvalidArgument("clustering: runs must be at least 1");
  if (static_cast<std::size_t>(vectors.rows()) != gold.size()) {
    throw InvalidArgument(fmt::format("clustering: {} vectors for {} labels",
                                      vectors.rows(), gold.size()));
  }
  if (gold.empty()) throw InvalidArgument("clustering: no items");
  int k = *std::max_element(gold.begin(), gold.end()) + 1;
  std::vector<double> acc(static_cast<std::size_t>(runs));
  parallel_for(acc.size(), workers, [&](std::size_t r) {
    std::vector<int> labels = kmeans(vectors, k, base_seed + r);
    acc[r] = hungarian_accuracy(labels, gold);
  });
  EvalReport report;
  report.task = std::move(task);
  report.metric = MetricKind::kClusterAccuracy;
  report.runs = runs;
  double mean = 0.0;
  for (double a : acc) mean += a;
  mean /= static_cast<double>(runs);
  double var = 0.0;
  for (double a : acc) var += (a - mean) * (a - mean);
  report.value = mean;
  report.stddev = std::sqrt(var / static_cast<double>(runs));
  for (int r = 0; r < runs; ++r) report.seeds.push_back(base_seed + static_cast<std::uint64_t>(r));
  return report;
}

}  // namespace embshape
