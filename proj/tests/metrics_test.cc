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


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "embshape/evaluate.h"
#include "oracles.h"
#include "test_util.h"

namespace embshape {
namespace {

using testing::gaussian_matrix;

TEST(CosineTest, Examples) {
  Eigen::Vector2d a(1, 0);
  Eigen::Vector2d b(0, 1);
  EXPECT_EQ(cosine(a, a), 1.0);
  EXPECT_EQ(cosine(a, b), 0.0);
  EXPECT_EQ(cosine(a, Eigen::Vector2d(-1, 0)), -1.0);
}

TEST(CosineTest, ZeroVectorIsZeroWithWarning) {
  Warnings w;
  EXPECT_EQ(cosine(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), &w), 0.0);
  EXPECT_EQ(w.messages.size(), 1u);
}

TEST(SpearmanTest, Examples) {
  std::vector<double> x = {1, 2, 3};
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{10, 20, 30}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{3, 2, 1}), -1.0);
  EXPECT_EQ(average_ranks(std::vector<double>{5, 1, 5, 2}),
            (std::vector<double>{3.5, 1, 3.5, 2}));
}

TEST(SpearmanTest, ConstantInputIsAnError) {
  std::vector<double> x = {1, 1, 1};
  std::vector<double> y = {1, 2, 3};
  EXPECT_THROW(spearman(x, y), InvalidArgument);
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{2}), InvalidArgument);
}

TEST(SpearmanTest, MatchesDefinitionWithTies) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> coarse(0, 9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(50);
    std::vector<double> y(50);
    for (int i = 0; i < 50; ++i) {
      x[i] = coarse(rng);
      y[i] = coarse(rng) * 0.5 + x[i];
    }
    EXPECT_NEAR(spearman(x, y), oracle::spearman(x, y), 1e-12);
  }
}

TEST(SpearmanTest, InvariantUnderIncreasingMaps) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> x(40);
  std::vector<double> y(40);
  for (int i = 0; i < 40; ++i) {
    x[i] = g(rng);
    y[i] = x[i] + g(rng);
  }
  double base = spearman(x, y);
  std::vector<double> ex(40);
  std::vector<double> ay(40);
  for (int i = 0; i < 40; ++i) {
    ex[i] = std::exp(x[i]);
    ay[i] = y[i] * 10 + 3;
  }
  EXPECT_EQ(spearman(ex, y), base);
  EXPECT_EQ(spearman(x, ay), base);
}

SentencePairSet pair_set(const std::vector<double>& scores) {
  SentencePairSet set;
  for (double s : scores) {
    SentencePair p;
    p.first = set.sentences.size();
    set.sentences.push_back("a");
    p.second = set.sentences.size();
    set.sentences.push_back("b");
    p.score = s;
    set.pairs.push_back(p);
  }
  return set;
}

TEST(EvalStsTest, PerfectOrderGivesOne) {
  SentencePairSet set = pair_set({0.5, 2.0, 4.5});
  Matrix v(6, 2);
  // cosines: 0, 0.6, 1
  v << 1, 0, 0, 1, 1, 0, 0.6, 0.8, 1, 0, 1, 0;
  EvalReport r = eval_sts(set, v, "toy");
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_EQ(r.metric, MetricKind::kSpearman);
  EXPECT_EQ(r.task, "toy");
}

TEST(EvalStsTest, InvariantUnderRowNormalization) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 5);
  std::vector<double> scores(100);
  for (double& s : scores) s = u(rng);
  SentencePairSet set = pair_set(scores);
  Matrix v = gaussian_matrix(200, 8, 4);
  Matrix n = v.rowwise().normalized();
  EXPECT_EQ(eval_sts(set, v).value, eval_sts(set, n).value);
}

TEST(ReportTest, ValidatesRanges) {
  EvalReport r;
  r.metric = MetricKind::kSpearman;
  r.value = 1.5;
  EXPECT_THROW(r.validate(), InvalidArgument);
  r.metric = MetricKind::kUniformity;
  r.value = -2;
  EXPECT_NO_THROW(r.validate());
  r.runs = 0;
  EXPECT_THROW(r.validate(), InvalidArgument);
  EXPECT_EQ(parse_metric(metric_name(MetricKind::kClusterAccuracy)),
            MetricKind::kClusterAccuracy);
}

}  // namespace
}  // namespace embshape
