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

// Scoring of sentence-vector matrices: STS correlation, clustering accuracy,
// linear-probe classification and geometry diagnostics.

#ifndef EMBSHAPE_EVALUATE_H_
#define EMBSHAPE_EVALUATE_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "embshape/common.h"
#include "embshape/store.h"

namespace embshape {

enum class MetricKind {
  kSpearman,
  kClusterAccuracy,
  kClassifyAccuracy,
  kIsoScore,
  kAlignment,
  kUniformity,
};

std::string_view metric_name(MetricKind kind);
MetricKind parse_metric(std::string_view name);

struct EvalReport {
  std::string task;
  MetricKind metric = MetricKind::kSpearman;
  double value = 0.0;
  double stddev = 0.0;
  int runs = 1;
  std::vector<std::uint64_t> seeds;
  std::string provenance;
  std::vector<std::string> warnings;

  // Throws InvalidArgument when value lies outside the metric's range.
  void validate() const;
};

// --- similarity ---

// dot(u, v) / (|u| |v|); 0 with a warning when either vector is zero.
double cosine(const Eigen::Ref<const Vector>& u,
              const Eigen::Ref<const Vector>& v, Warnings* warnings = nullptr);

// Ranks starting at 1; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks. Throws InvalidArgument on unequal
// lengths, fewer than 2 values, or a constant argument.
double spearman(std::span<const double> x, std::span<const double> y);

// Cosine of each pair's sentence rows.
std::vector<double> pair_cosines(const SentencePairSet& pairs,
                                 const Matrix& vectors,
                                 Warnings* warnings = nullptr);

// Single Spearman over all subsets together.
EvalReport eval_sts(const SentencePairSet& pairs, const Matrix& vectors,
                    std::string task = "sts");

// --- clustering ---

struct KMeansOptions {
  int max_iterations = 300;
  double tolerance = 1e-6;  // largest centroid shift
};

// k-means++ seeding followed by Lloyd iterations. Empty clusters are
// re-seeded with the point farthest from its centroid. Throws
// InvalidArgument if k < 1 or rows < k.
std::vector<int> kmeans(const Matrix& x, int k, std::uint64_t seed,
                        const KMeansOptions& options = {});

// Row-to-column assignment maximizing the summed weight of a square matrix.
std::vector<int> max_weight_assignment(const Matrix& weights);

// Fraction of items matched under the best one-to-one cluster-to-class map.
double hungarian_accuracy(std::span<const int> predicted,
                          std::span<const int> gold);

// Mean and standard deviation of accuracy over `runs` k-means runs with
// seeds base_seed, base_seed + 1, ...
EvalReport eval_clustering(std::span<const int> gold, const Matrix& vectors,
                           int runs = 10, std::uint64_t base_seed = 0,
                           int workers = 1, std::string task = "cluster");

// --- classification ---

inline constexpr int kScoreClasses = 6;  // scores 0..5

// Splits a [0, 5] score between floor(s) and floor(s) + 1 by distance;
// integer scores (including 5) map wholly to one class.
std::vector<std::pair<int, double>> soft_bin(double score);

struct SoftmaxOptions {
  double l2 = 1e-4;  // on the mean cross-entropy, bias excluded
  int max_iterations = 1000;
  double gradient_tolerance = 1e-5;
  int history = 10;
};

// Multinomial logistic regression fitted by limited-memory BFGS.
class SoftmaxClassifier {
 public:
  // `targets` holds one class distribution per row of `x`.
  static SoftmaxClassifier fit(const Matrix& x, const Matrix& targets,
                               const SoftmaxOptions& options = {});

  Matrix probabilities(const Matrix& x) const;
  std::vector<int> predict(const Matrix& x) const;

  const Matrix& weights() const { return weights_; }  // dim x classes
  const Vector& bias() const { return bias_; }
  int iterations() const { return iterations_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  Matrix weights_;
  Vector bias_;
  int iterations_ = 0;
  double gradient_norm_ = 0.0;
};

// One-hot rows for hard labels.
Matrix one_hot(std::span<const int> labels, int classes);

// Fold index per item; each class is dealt round-robin across folds after a
// seeded shuffle. Throws InvalidArgument if folds < 2 or exceeds the item
// count.
std::vector<int> stratified_folds(std::span<const int> labels, int folds,
                                  std::uint64_t seed);

// Mean test accuracy of argmax predictions over the folds. `labels` drive
// stratification and scoring; `targets` are the training distributions.
double cross_validate(const Matrix& x, std::span<const int> labels,
                      const Matrix& targets, int folds, std::uint64_t seed,
                      const SoftmaxOptions& options = {}, int workers = 1,
                      double* stddev = nullptr);

// Uses the train/test split when the set has one, else stratified CV.
EvalReport eval_classification(const LabeledTextSet& set, const Matrix& vectors,
                               int folds = 10, std::uint64_t seed = 0,
                               const SoftmaxOptions& options = {},
                               int workers = 1,
                               std::string task = "classify");

// [|u - v|, u * v] per pair.
Matrix pair_features(const SentencePairSet& pairs, const Matrix& vectors);

// Similarity pairs as a classification task with soft-binned targets.
// Pairs tagged "train"/"test" in the subset column use that split.
EvalReport eval_pair_classification(const SentencePairSet& pairs,
                                    const Matrix& vectors, int folds = 10,
                                    std::uint64_t seed = 0,
                                    const SoftmaxOptions& options = {},
                                    int workers = 1,
                                    std::string task = "classify_pairs");

// --- geometry ---

// Uniformity of variance across principal directions, in [0, 1]. Throws
// InvalidArgument when fewer than 2 rows or 2 columns, or all rows equal.
double iso_score(const Matrix& x);

// Mean squared distance between matching rows of a and b.
double alignment(const Matrix& a, const Matrix& b, bool normalize = true);

// log mean over unordered distinct row pairs of exp(-2 |x - y|^2). Throws
// InvalidArgument on fewer than 2 distinct rows.
double uniformity(const Matrix& x, bool normalize = true);

// Row pairs with gold score equal to 5.
std::pair<Matrix, Matrix> positive_pairs(const SentencePairSet& pairs,
                                         const Matrix& vectors);

}  // namespace embshape

#endif  // EMBSHAPE_EVALUATE_H_
