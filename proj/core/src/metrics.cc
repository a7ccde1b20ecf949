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
#include <numeric>

#include <fmt/core.h>

#include "embshape/evaluate.h"

namespace embshape {

namespace {

constexpr std::pair<MetricKind, std::string_view> kMetricNames[] = {
    {MetricKind::kSpearman, "spearman"},
    {MetricKind::kClusterAccuracy, "cluster_accuracy"},
    {MetricKind::kClassifyAccuracy, "classify_accuracy"},
    {MetricKind::kIsoScore, "isoscore"},
    {MetricKind::kAlignment, "alignment"},
    {MetricKind::kUniformity, "uniformity"},
};

Matrix unit_rows(const Matrix& x, std::string_view what) {
  Matrix out = x;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    double norm = out.row(i).norm();
    if (norm == 0.0) {
      throw InvalidArgument(
          fmt::format("{}: row {} is a zero vector and has no direction", what,
                      i));
    }
    out.row(i) /= norm;
  }
  return out;
}

}  // namespace

std::string_view metric_name(MetricKind kind) {
  for (const auto& [k, name] : kMetricNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

MetricKind parse_metric(std::string_view name) {
  for (const auto& [k, n] : kMetricNames) {
    if (n == name) return k;
  }
  throw ConfigError(fmt::format("unknown metric '{}'", name));
}

void EvalReport::validate() const {
  if (runs < 1) throw InvalidArgument("report: runs must be at least 1");
  if (std::isnan(value)) {
    throw InvalidArgument(fmt::format("report {}: value is NaN", task));
  }
  auto in = [&](double lo, double hi) {
    // Rounding can push a perfect correlation a few ulps past 1.
    constexpr double kSlack = 1e-12;
    if (value < lo - kSlack || value > hi + kSlack) {
      throw InvalidArgument(fmt::format("report {}: {} = {} outside [{}, {}]",
                                        task, metric_name(metric), value, lo,
                                        hi));
    }
  };
  switch (metric) {
    case MetricKind::kSpearman:
      in(-1.0, 1.0);
      break;
    case MetricKind::kClusterAccuracy:
    case MetricKind::kClassifyAccuracy:
    case MetricKind::kIsoScore:
      in(0.0, 1.0);
      break;
    case MetricKind::kAlignment:
      in(0.0, 4.0);
      break;
    case MetricKind::kUniformity:
      in(-8.0, 0.0);
      break;
  }
}

double cosine(const Eigen::Ref<const Vector>& u,
              const Eigen::Ref<const Vector>& v, Warnings* warnings) {
  if (u.size() != v.size()) {
    throw InvalidArgument(fmt::format("cosine: dimensions {} and {} differ",
                                      u.size(), v.size()));
  }
  double nu = u.norm();
  double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    warn(warnings, "cosine: zero vector, similarity set to 0");
    return 0.0;
  }
  return u.dot(v) / (nu * nv);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 hold equal values; 1-based mean position.
    double rank = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InvalidArgument(
        fmt::format("spearman: lengths {} and {} differ", x.size(), y.size()));
  }
  if (x.size() < 2) throw InvalidArgument("spearman: needs at least 2 values");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) {
      throw InvalidArgument("spearman: NaN input");
    }
  }
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  // Average ranks always sum to n(n+1)/2.
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    double a = rx[i] - mean;
    double b = ry[i] - mean;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw InvalidArgument("spearman: constant input, correlation undefined");
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> pair_cosines(const SentencePairSet& pairs,
                                 const Matrix& vectors, Warnings* warnings) {
  std::vector<double> out;
  out.reserve(pairs.pairs.size());
  std::size_t zero = 0;
  for (const SentencePair& p : pairs.pairs) {
    auto rows = static_cast<std::size_t>(vectors.rows());
    if (p.first >= rows || p.second >= rows) {
      throw InvalidArgument(fmt::format(
          "sts: pair references sentence {} but only {} vectors given",
          std::max(p.first, p.second), rows));
    }
    Warnings local;
    out.push_back(cosine(vectors.row(static_cast<Eigen::Index>(p.first)).transpose(),
                         vectors.row(static_cast<Eigen::Index>(p.second)).transpose(),
                         &local));
    zero += local.empty() ? 0 : 1;
  }
  if (zero > 0) {
    warn(warnings,
         fmt::format("sts: {} pair(s) involve a zero vector, cosine set to 0",
                     zero));
  }
  return out;
}

EvalReport eval_sts(const SentencePairSet& pairs, const Matrix& vectors,
                    std::string task) {
  EvalReport report;
  report.task = std::move(task);
  report.metric = MetricKind::kSpearman;
  Warnings warnings;
  std::vector<double> sims = pair_cosines(pairs, vectors, &warnings);
  std::vector<double> gold;
  gold.reserve(pairs.pairs.size());
  for (const SentencePair& p : pairs.pairs) gold.push_back(p.score);
  report.value = spearman(gold, sims);
  report.warnings = std::move(warnings.messages);
  return report;
}

double alignment(const Matrix& a, const Matrix& b, bool normalize) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("alignment: pair matrices differ in shape");
  }
  if (a.rows() == 0) throw InvalidArgument("alignment: no positive pairs");
  Matrix ua = normalize ? unit_rows(a, "alignment") : a;
  Matrix ub = normalize ? unit_rows(b, "alignment") : b;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ua.rows(); ++i) {
    sum += (ua.row(i) - ub.row(i)).squaredNorm();
  }
  return sum / static_cast<double>(ua.rows());
}

double uniformity(const Matrix& x, bool normalize) {
  if (x.rows() < 2) throw InvalidArgument("uniformity: needs at least 2 rows");
  Matrix u = normalize ? unit_rows(x, "uniformity") : x;
  bool distinct = false;
  for (Eigen::Index i = 1; i < u.rows() && !distinct; ++i) {
    distinct = u.row(i) != u.row(0);
  }
  if (!distinct) {
    throw InvalidArgument("uniformity: needs at least 2 distinct points");
  }
  const Eigen::Index n = u.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      sum += std::exp(-2.0 * (u.row(i) - u.row(j)).squaredNorm());
    }
  }
  double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return std::log(sum / pairs);
}

std::pair<Matrix, Matrix> positive_pairs(const SentencePairSet& pairs,
                                         const Matrix& vectors) {
  std::vector<const SentencePair*> pos;
  for (const SentencePair& p : pairs.pairs) {
    if (p.score == 5.0) pos.push_back(&p);
  }
  if (pos.empty()) {
    throw InvalidArgument("alignment: no pair has similarity 5.0");
  }
  Matrix a(static_cast<Eigen::Index>(pos.size()), vectors.cols());
  Matrix b(static_cast<Eigen::Index>(pos.size()), vectors.cols());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) =
        vectors.row(static_cast<Eigen::Index>(pos[i]->first));
    b.row(static_cast<Eigen::Index>(i)) =
        vectors.row(static_cast<Eigen::Index>(pos[i]->second));
  }
  return {std::move(a), std::move(b)};
}

}  // namespace embshape
