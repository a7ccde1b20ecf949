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

#include "embshape/random_embed.h"
#include "embshape/stats.h"
#include "oracles.h"

namespace embshape {
namespace {

TEST(StatsTest, TwoDocumentIdf) {
  std::vector<std::vector<TokenId>> docs = {{1, 2, 2}, {2, 3}};
  TokenStats s = compute_stats(docs, 5, "toy");
  EXPECT_EQ(s.doc_count, 2u);
  EXPECT_EQ(s.df[2], 2u);
  EXPECT_DOUBLE_EQ(s.idf[1], std::log(2.0));
  EXPECT_EQ(s.idf[2], 0.0);
  EXPECT_DOUBLE_EQ(s.idf[4], std::log(2.0));  // unseen: ln N
  EXPECT_DOUBLE_EQ(s.idf_of(99), std::log(2.0));
  EXPECT_EQ(s.tag, "toy");
}

TEST(StatsTest, MatchesSetCountingOracle) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<TokenId> id(0, 40);
  std::vector<std::vector<TokenId>> docs(60);
  for (auto& d : docs) {
    for (int i = 0; i < 12; ++i) d.push_back(id(rng));
  }
  TokenStats s = compute_stats(docs, 41, "");
  std::vector<double> expected = oracle::idf(docs, 41);
  for (TokenId t = 0; t < 41; ++t) EXPECT_DOUBLE_EQ(s.idf[t], expected[t]) << t;
}

TEST(StatsTest, RejectsEmptyCorpus) {
  EXPECT_THROW(compute_stats({}, 3, ""), InvalidArgument);
}

TEST(RandomEmbedTest, CoordinateMomentsMatchDistribution) {
  double sum = 0;
  double sq = 0;
  const int n = 100000;
  for (TokenId id = 0; id < 100; ++id) {
    for (float x : random_token_vector(17, id, n / 100)) {
      sum += x;
      sq += static_cast<double>(x) * x;
    }
  }
  double mean = sum / n;
  double stddev = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(mean, 0.0, 0.002);
  EXPECT_NEAR(stddev, 0.1, 0.002);
}

TEST(RandomEmbedTest, DeterministicPerSeedAndPositionIndependent) {
  EXPECT_EQ(random_token_vector(3, 42, 16), random_token_vector(3, 42, 16));
  EXPECT_NE(random_token_vector(3, 42, 16), random_token_vector(4, 42, 16));
  EXPECT_NE(random_token_vector(3, 42, 16), random_token_vector(3, 43, 16));

  std::vector<std::vector<TokenId>> sents = {{7, 8, 7}, {8}};
  EmbeddingTensor t = random_embed(sents, {}, 5, 6);
  EXPECT_EQ(t.layers(), (std::vector<int>{kStaticLayer}));
  const auto& a = t.sentence(0).layers[0];
  const auto& b = t.sentence(1).layers[0];
  EXPECT_TRUE(a.row(0) == a.row(2));
  EXPECT_TRUE(a.row(1) == b.row(0));
  EXPECT_TRUE(random_embed(sents, {}, 5, 6) == t);
}

}  // namespace
}  // namespace embshape
