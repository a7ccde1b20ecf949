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


#include <fstream>
#include <map>

#include <gtest/gtest.h>

#include "embshape/evaluate.h"
#include "test_util.h"

namespace embshape {
namespace {

using testing::gaussian_matrix;

TEST(SoftBinTest, Examples) {
  auto b = soft_bin(3.6);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].first, 3);
  EXPECT_NEAR(b[0].second, 0.4, 1e-12);
  EXPECT_EQ(b[1].first, 4);
  EXPECT_NEAR(b[1].second, 0.6, 1e-12);
  EXPECT_EQ(soft_bin(2.0), (std::vector<std::pair<int, double>>{{2, 1.0}}));
  EXPECT_EQ(soft_bin(5.0), (std::vector<std::pair<int, double>>{{5, 1.0}}));
  EXPECT_EQ(soft_bin(0.0), (std::vector<std::pair<int, double>>{{0, 1.0}}));
  EXPECT_THROW(soft_bin(5.1), InvalidArgument);
  EXPECT_THROW(soft_bin(-0.1), InvalidArgument);
}

TEST(SoftmaxTest, MatchesReferenceFit) {
  std::ifstream in(testing::data_path("softmax_reference.txt"));
  int n = 0;
  int d = 0;
  int c = 0;
  double l2 = 0;
  in >> n >> d >> c >> l2;
  Matrix x(n, d);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    in >> labels[i];
    for (int j = 0; j < d; ++j) in >> x(i, j);
  }
  Matrix ref_w(d, c);
  Vector ref_b(c);
  for (int k = 0; k < c; ++k) {
    in >> ref_b(k);
    for (int j = 0; j < d; ++j) in >> ref_w(j, k);
  }
  ASSERT_TRUE(in);

  SoftmaxOptions opts;
  opts.l2 = l2;
  opts.gradient_tolerance = 1e-8;
  SoftmaxClassifier model = SoftmaxClassifier::fit(x, one_hot(labels, c), opts);
  EXPECT_LT(model.gradient_norm(), opts.gradient_tolerance);
  EXPECT_LT((model.weights() - ref_w).cwiseAbs().maxCoeff(), 1e-4);

  Matrix logits = (x * ref_w).rowwise() + ref_b.transpose();
  Matrix ref_p = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp();
  ref_p = ref_p.array().colwise() / ref_p.rowwise().sum().array();
  EXPECT_LT((model.probabilities(x) - ref_p).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(SoftmaxTest, SoftTargetsMoveTowardTheirMix) {
  Matrix x = Matrix::Zero(4, 1);
  Matrix t(4, 2);
  t << 0.25, 0.75, 0.25, 0.75, 0.25, 0.75, 0.25, 0.75;
  SoftmaxClassifier model = SoftmaxClassifier::fit(x, t);
  Matrix p = model.probabilities(x);
  EXPECT_NEAR(p(0, 1), 0.75, 1e-6);
}

TEST(FoldsTest, StratifiedAndBalanced) {
  std::vector<int> labels;
  for (int i = 0; i < 37; ++i) labels.push_back(i % 3 == 0 ? 0 : 1);
  std::vector<int> fold = stratified_folds(labels, 10, 4);
  std::map<int, std::map<int, int>> counts;
  std::vector<int> sizes(10, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    counts[labels[i]][fold[i]]++;
    sizes[fold[i]]++;
  }
  for (auto& [label, per_fold] : counts) {
    int lo = 1 << 30;
    int hi = 0;
    for (int f = 0; f < 10; ++f) {
      lo = std::min(lo, per_fold[f]);
      hi = std::max(hi, per_fold[f]);
    }
    EXPECT_LE(hi - lo, 1) << "label " << label;
  }
  auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
  EXPECT_LE(*mx - *mn, 1);
  EXPECT_EQ(stratified_folds(labels, 10, 4), fold);
  EXPECT_THROW(stratified_folds(labels, 1, 0), InvalidArgument);
}

LabeledTextSet labeled(const std::vector<int>& labels) {
  LabeledTextSet set;
  for (int l : labels) {
    set.texts.push_back("t");
    set.labels.push_back(l);
    set.splits.push_back(Split::kNone);
  }
  return set;
}

TEST(EvalClassificationTest, SeparableBlobsScoreHigh) {
  std::vector<int> labels;
  Matrix x = gaussian_matrix(200, 4, 5);
  for (int i = 0; i < 200; ++i) {
    labels.push_back(i % 2);
    x(i, 0) += i % 2 == 0 ? -4.0 : 4.0;
  }
  EvalReport r = eval_classification(labeled(labels), x, 10, 1);
  EXPECT_GE(r.value, 0.99);
  EXPECT_EQ(r.metric, MetricKind::kClassifyAccuracy);
  EXPECT_EQ(r.value, eval_classification(labeled(labels), x, 10, 1, {}, 4).value);
}

TEST(EvalClassificationTest, HonorsOfficialSplit) {
  LabeledTextSet set = labeled({0, 1, 0, 1, 0, 1});
  set.splits = {Split::kTrain, Split::kTrain, Split::kTrain, Split::kTrain,
                Split::kTest, Split::kTest};
  Matrix x(6, 1);
  x << -1, 1, -2, 2, -3, 3;
  EvalReport r = eval_classification(set, x);
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.runs, 1);
}

TEST(PairClassificationTest, FeaturesAreAbsDiffAndProduct) {
  SentencePairSet set;
  set.sentences = {"a", "b"};
  set.pairs.push_back({0, 1, 3.6, ""});
  Matrix v(2, 2);
  v << 1, -2, 3, 5;
  Matrix f = pair_features(set, v);
  ASSERT_EQ(f.cols(), 4);
  EXPECT_EQ(f(0, 0), 2);
  EXPECT_EQ(f(0, 1), 7);
  EXPECT_EQ(f(0, 2), 3);
  EXPECT_EQ(f(0, 3), -10);
}

TEST(PairClassificationTest, LearnsScoreFromDistance) {
  SentencePairSet set;
  Matrix v(240, 3);
  Matrix noise = gaussian_matrix(240, 3, 6, 0.05);
  for (int i = 0; i < 120; ++i) {
    double score = (i % 3) * 2.0;  // classes 0, 2, 4
    set.sentences.push_back("a");
    set.sentences.push_back("b");
    set.pairs.push_back({std::size_t(2 * i), std::size_t(2 * i + 1), score, ""});
    v.row(2 * i) = noise.row(2 * i);
    v.row(2 * i + 1) = noise.row(2 * i + 1);
    v(2 * i + 1, 0) += 4.0 - score;
  }
  EvalReport r = eval_pair_classification(set, v, 5, 2);
  EXPECT_GT(r.value, 0.95);
}

}  // namespace
}  // namespace embshape
