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
#include <deque>
#include <random>

#include <fmt/core.h>

#include "embshape/evaluate.h"

namespace embshape {

namespace {

// Row-wise softmax of logits, in place.
void softmax_rows(Matrix& logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double top = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - top).exp();
    logits.row(i) /= logits.row(i).sum();
  }
}

struct Problem {
  const Matrix& x;
  const Matrix& targets;
  double l2;

  Eigen::Index dim() const { return x.cols(); }
  Eigen::Index classes() const { return targets.cols(); }
  Eigen::Index size() const { return dim() * classes() + classes(); }

  // Parameters are W (dim x classes, column-major) followed by the bias.
  double value_and_gradient(const Vector& theta, Vector& grad) const {
    const Eigen::Index d = dim();
    const Eigen::Index c = classes();
    Eigen::Map<const Matrix> w(theta.data(), d, c);
    auto b = theta.tail(c);
    Matrix logits = x * w;
    logits.rowwise() += b.transpose();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      double top = logits.row(i).maxCoeff();
      double lse = top + std::log((logits.row(i).array() - top).exp().sum());
      loss -= targets.row(i).dot(logits.row(i)) - lse * targets.row(i).sum();
    }
    softmax_rows(logits);
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    Matrix residual = (logits - targets) * inv_n;
    grad.resize(size());
    Eigen::Map<Matrix> gw(grad.data(), d, c);
    gw = x.transpose() * residual + l2 * w;
    grad.tail(c) = residual.colwise().sum().transpose();
    return loss * inv_n + 0.5 * l2 * w.squaredNorm();
  }
};

}  // namespace

std::vector<std::pair<int, double>> soft_bin(double score) {
  if (!(score >= 0.0 && score <= 5.0)) {
    throw InvalidArgument(fmt::format("soft_bin: score {} outside [0, 5]", score));
  }
  double f = std::floor(score);
  int cls = static_cast<int>(f);
  double frac = score - f;
  if (frac == 0.0) return {{cls, 1.0}};
  return {{cls, 1.0 - frac}, {cls + 1, frac}};
}

Matrix one_hot(std::span<const int> labels, int classes) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw InvalidArgument(
          fmt::format("one_hot: label {} outside [0, {})", labels[i], classes));
    }
    out(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return out;
}

SoftmaxClassifier SoftmaxClassifier::fit(const Matrix& x, const Matrix& targets,
                                         const SoftmaxOptions& options) {
  if (x.rows() != targets.rows() || x.rows() == 0) {
    throw InvalidArgument("softmax: features and targets differ in rows");
  }
  if (targets.cols() < 2) throw InvalidArgument("softmax: needs 2 classes");
  if (!x.allFinite()) throw InvalidArgument("softmax: non-finite features");
  Problem problem{x, targets, options.l2};
  const Eigen::Index m = problem.size();
  Vector theta = Vector::Zero(m);
  Vector grad;
  double f = problem.value_and_gradient(theta, grad);

  std::deque<Vector> s_hist;
  std::deque<Vector> y_hist;
  std::deque<double> rho_hist;
  int iter = 0;
  Vector next_grad;
  while (iter < options.max_iterations &&
         grad.norm() >= options.gradient_tolerance) {
    // Two-loop recursion for the quasi-Newton direction.
    Vector q = grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    double gamma = s_hist.empty()
                       ? 1.0 / std::max(grad.norm(), 1.0)
                       : s_hist.back().dot(y_hist.back()) /
                             y_hist.back().squaredNorm();
    q *= gamma;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Vector dir = -q;
    double slope = grad.dot(dir);
    if (slope >= 0.0) {
      // Stale curvature pairs; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -grad / std::max(grad.norm(), 1.0);
      slope = grad.dot(dir);
    }
    double step = 1.0;
    Vector candidate;
    double f_next = 0.0;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      candidate = theta + step * dir;
      f_next = problem.value_and_gradient(candidate, next_grad);
      if (f_next <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++iter;
    if (!accepted) break;
    Vector s = candidate - theta;
    Vector y = next_grad - grad;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    theta = std::move(candidate);
    grad = next_grad;
    f = f_next;
  }

  SoftmaxClassifier model;
  model.weights_ = Eigen::Map<const Matrix>(theta.data(), x.cols(), targets.cols());
  model.bias_ = theta.tail(targets.cols());
  model.iterations_ = iter;
  model.gradient_norm_ = grad.norm();
  return model;
}

Matrix SoftmaxClassifier::probabilities(const Matrix& x) const {
  if (x.cols() != weights_.rows()) {
    throw InvalidArgument("softmax: feature dimension differs from the fit");
  }
  Matrix logits = x * weights_;
  logits.rowwise() += bias_.transpose();
  softmax_rows(logits);
  return logits;
}

std::vector<int> SoftmaxClassifier::predict(const Matrix& x) const {
  if (x.cols() != weights_.rows()) {
    throw InvalidArgument("softmax: feature dimension differs from the fit");
  }
  Matrix logits = x * weights_;
  logits.rowwise() += bias_.transpose();
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return out;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds,
                                  std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("cross-validation: folds must be >= 2");
  if (labels.size() < static_cast<std::size_t>(folds)) {
    throw InvalidArgument(fmt::format(
        "cross-validation: {} items cannot fill {} folds", labels.size(), folds));
  }
  int classes = 0;
  for (int l : labels) {
    if (l < 0) throw InvalidArgument("cross-validation: negative label");
    classes = std::max(classes, l + 1);
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<int> fold(labels.size(), 0);
  std::size_t next = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i : members) {
      fold[i] = static_cast<int>(next % static_cast<std::size_t>(folds));
      ++next;
    }
  }
  return fold;
}

namespace {

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

double split_accuracy(const Matrix& x, std::span<const int> labels,
                      const Matrix& targets,
                      const std::vector<std::size_t>& train,
                      const std::vector<std::size_t>& test,
                      const SoftmaxOptions& options) {
  if (train.empty() || test.empty()) {
    throw InvalidArgument("classification: empty train or test split");
  }
  int first = labels[train.front()];
  bool varied = std::any_of(train.begin(), train.end(),
                            [&](std::size_t i) { return labels[i] != first; });
  if (!varied) {
    throw InvalidArgument("classification: training split has a single class");
  }
  SoftmaxClassifier model =
      SoftmaxClassifier::fit(select_rows(x, train), select_rows(targets, train),
                             options);
  std::vector<int> pred = model.predict(select_rows(x, test));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    hits += pred[i] == labels[test[i]] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

std::vector<int> argmax_labels(const Matrix& targets) {
  std::vector<int> out(static_cast<std::size_t>(targets.rows()));
  for (Eigen::Index i = 0; i < targets.rows(); ++i) {
    Eigen::Index arg = 0;
    targets.row(i).maxCoeff(&arg);
    out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return out;
}

}  // namespace

double cross_validate(const Matrix& x, std::span<const int> labels,
                      const Matrix& targets, int folds, std::uint64_t seed,
                      const SoftmaxOptions& options, int workers,
                      double* stddev) {
  if (static_cast<std::size_t>(x.rows()) != labels.size() ||
      targets.rows() != x.rows()) {
    throw InvalidArgument("cross-validation: row counts differ");
  }
  std::vector<int> fold = stratified_folds(labels, folds, seed);
  std::vector<double> acc(static_cast<std::size_t>(folds));
  parallel_for(acc.size(), workers, [&](std::size_t f) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < fold.size(); ++i) {
      (static_cast<std::size_t>(fold[i]) == f ? test : train).push_back(i);
    }
    acc[f] = split_accuracy(x, labels, targets, train, test, options);
  });
  double mean = 0.0;
  for (double a : acc) mean += a;
  mean /= static_cast<double>(folds);
  if (stddev != nullptr) {
    double var = 0.0;
    for (double a : acc) var += (a - mean) * (a - mean);
    *stddev = std::sqrt(var / static_cast<double>(folds));
  }
  return mean;
}

EvalReport eval_classification(const LabeledTextSet& set, const Matrix& vectors,
                               int folds, std::uint64_t seed,
                               const SoftmaxOptions& options, int workers,
                               std::string task) {
  if (static_cast<std::size_t>(vectors.rows()) != set.labels.size()) {
    throw InvalidArgument(fmt::format("classification: {} vectors for {} texts",
                                      vectors.rows(), set.labels.size()));
  }
  Matrix targets = one_hot(set.labels, set.class_count());
  EvalReport report;
  report.task = std::move(task);
  report.metric = MetricKind::kClassifyAccuracy;
  if (set.has_splits()) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < set.splits.size(); ++i) {
      if (set.splits[i] == Split::kTrain) train.push_back(i);
      if (set.splits[i] == Split::kTest) test.push_back(i);
    }
    report.value = split_accuracy(vectors, set.labels, targets, train, test,
                                  options);
  } else {
    report.value = cross_validate(vectors, set.labels, targets, folds, seed,
                                  options, workers, &report.stddev);
    report.runs = folds;
    report.seeds.push_back(seed);
  }
  return report;
}

Matrix pair_features(const SentencePairSet& pairs, const Matrix& vectors) {
  const Eigen::Index d = vectors.cols();
  Matrix out(static_cast<Eigen::Index>(pairs.pairs.size()), 2 * d);
  for (std::size_t i = 0; i < pairs.pairs.size(); ++i) {
    const SentencePair& p = pairs.pairs[i];
    if (p.first >= static_cast<std::size_t>(vectors.rows()) ||
        p.second >= static_cast<std::size_t>(vectors.rows())) {
      throw InvalidArgument("pair features: pair references a missing vector");
    }
    auto u = vectors.row(static_cast<Eigen::Index>(p.first));
    auto v = vectors.row(static_cast<Eigen::Index>(p.second));
    auto row = static_cast<Eigen::Index>(i);
    out.block(row, 0, 1, d) = (u - v).cwiseAbs();
    out.block(row, d, 1, d) = u.cwiseProduct(v);
  }
  return out;
}

EvalReport eval_pair_classification(const SentencePairSet& pairs,
                                    const Matrix& vectors, int folds,
                                    std::uint64_t seed,
                                    const SoftmaxOptions& options, int workers,
                                    std::string task) {
  Matrix x = pair_features(pairs, vectors);
  Matrix targets = Matrix::Zero(x.rows(), kScoreClasses);
  bool has_train = false;
  bool has_test = false;
  for (std::size_t i = 0; i < pairs.pairs.size(); ++i) {
    for (auto [cls, w] : soft_bin(pairs.pairs[i].score)) {
      targets(static_cast<Eigen::Index>(i), cls) = w;
    }
    has_train = has_train || pairs.pairs[i].subset == "train";
    has_test = has_test || pairs.pairs[i].subset == "test";
  }
  std::vector<int> labels = argmax_labels(targets);
  EvalReport report;
  report.task = std::move(task);
  report.metric = MetricKind::kClassifyAccuracy;
  if (has_train && has_test) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < pairs.pairs.size(); ++i) {
      if (pairs.pairs[i].subset == "train") train.push_back(i);
      if (pairs.pairs[i].subset == "test") test.push_back(i);
    }
    report.value = split_accuracy(x, labels, targets, train, test, options);
  } else {
    report.value = cross_validate(x, labels, targets, folds, seed, options,
                                  workers, &report.stddev);
    report.runs = folds;
    report.seeds.push_back(seed);
  }
  return report;
}

}  // namespace embshape
