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
#include <random>
#include <sstream>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "embshape/evaluate.h"
#include "embshape/postprocess.h"
#include "test_util.h"

namespace embshape {
namespace {

using testing::gaussian_matrix;

Matrix population_cov(const Matrix& x) {
  Matrix c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows());
}

// Correlated, shifted, non-Gaussian data.
Matrix skewed(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Matrix g = gaussian_matrix(n, d, seed);
  Matrix mix = gaussian_matrix(d, d, 1000 + d);
  Matrix x = g * mix;
  for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = std::exp(x(i, 0) / 3.0);
  return x.rowwise() + Eigen::RowVectorXd::LinSpaced(d, 1.0, 5.0);
}

Matrix random_rotation(Eigen::Index d, std::uint64_t seed) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(d, d, seed));
  return qr.householderQ();
}

TEST(PostChainTest, ParsesAndFormats) {
  auto chain = parse_post_chain("whiten^W,abtt:3,normalize");
  ASSERT_EQ(chain.size(), 3u);
  EXPECT_EQ(chain[0].source, FitSource::kCorpus);
  EXPECT_EQ(chain[1].components, 3);
  EXPECT_EQ(format_post_chain(chain), "whiten^W,abtt:3,normalize");
  EXPECT_TRUE(parse_post_chain("none").empty());
  EXPECT_THROW(parse_post_chain("normalize^W"), ConfigError);
  EXPECT_THROW(parse_post_chain("abtt:-1"), ConfigError);
  EXPECT_THROW(parse_post_chain("pca"), ConfigError);
}

TEST(ZScoreTest, SmallExample) {
  Matrix x(2, 2);
  x << 1, 3, 3, 5;
  Transform t = Transform::fit(TransformKind::kZScore, x);
  EXPECT_EQ(t.mean(), Eigen::Vector2d(2, 4));
  EXPECT_EQ(t.stddev(), Eigen::Vector2d(1, 1));
  Matrix y = t.apply(x);
  EXPECT_EQ(y(0, 0), -1);
  EXPECT_EQ(y(1, 1), 1);
}

TEST(ZScoreTest, OutputHasZeroMeanUnitStd) {
  Matrix y = Transform::fit(TransformKind::kZScore, skewed(500, 6, 3)).apply(skewed(500, 6, 3));
  Eigen::RowVectorXd mean = y.colwise().mean();
  Eigen::RowVectorXd var = (y.rowwise() - mean).colwise().squaredNorm() / 500.0;
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((var.array().sqrt() - 1.0).abs().maxCoeff(), 1e-8);
}

TEST(ZScoreTest, ConstantColumnIsFlooredWithWarning) {
  Matrix x(3, 2);
  x << 1, 7, 2, 7, 3, 7;
  Warnings w;
  Transform t = Transform::fit(TransformKind::kZScore, x, &w);
  EXPECT_EQ(t.stddev()(1), kStddevFloor);
  EXPECT_EQ(w.messages.size(), 1u);
}

TEST(ZScoreTest, CorpusFitOnTargetEqualsTargetFit) {
  Matrix x = skewed(100, 4, 8);
  TransformStep step{TransformKind::kZScore, FitSource::kCorpus, std::nullopt};
  EXPECT_TRUE(fit_on_corpus(step, x, x, "same") ==
              Transform::fit(TransformKind::kZScore, x).apply(x));
}

TEST(WhitenTest, CovarianceIsIdentity) {
  Matrix x = skewed(200, 5, 1);
  Matrix y = Transform::fit(TransformKind::kWhiten, x).apply(x);
  EXPECT_LT((population_cov(y) - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(WhitenTest, RankDeficientInputWarns) {
  Matrix x = gaussian_matrix(50, 2, 3);
  Matrix wide(50, 3);
  wide << x, x.col(0) + x.col(1);
  Warnings w;
  Transform::fit(TransformKind::kWhiten, wide, &w);
  EXPECT_FALSE(w.empty());
}

TEST(QuantileTest, MiddleOfThreeIsHalf) {
  Matrix ref(3, 1);
  ref << 1, 2, 3;
  Transform t = Transform::fit(TransformKind::kQuantileUniform, ref);
  Matrix probe(4, 1);
  probe << 2, 0, 9, 2.5;
  Matrix y = t.apply(probe);
  EXPECT_EQ(y(0, 0), 0.5);
  EXPECT_EQ(y(1, 0), 0.0);
  EXPECT_EQ(y(2, 0), 1.0);
  EXPECT_EQ(y(3, 0), 0.75);
}

TEST(QuantileTest, TiesMapToAveragePosition) {
  Matrix ref(4, 1);
  ref << 1, 2, 2, 3;
  Matrix probe(1, 1);
  probe << 2;
  EXPECT_EQ(Transform::fit(TransformKind::kQuantileUniform, ref).apply(probe)(0, 0), 0.5);
}

TEST(QuantileTest, HeldOutSampleIsUniform) {
  const int n = 1000;
  Matrix ref = skewed(20000, 2, 5);
  Matrix probe = skewed(n, 2, 99);
  Matrix y = Transform::fit(TransformKind::kQuantileUniform, ref).apply(probe);
  for (Eigen::Index j = 0; j < 2; ++j) {
    std::vector<double> u(y.col(j).begin(), y.col(j).end());
    std::sort(u.begin(), u.end());
    double ks = 0;
    for (int i = 0; i < n; ++i) {
      ks = std::max({ks, std::abs((i + 1.0) / n - u[i]), std::abs(u[i] - i / double(n))});
    }
    EXPECT_LT(ks, 2.0 / std::sqrt(n)) << "column " << j;
  }
}

TEST(AbttTest, ZeroComponentsIsCentering) {
  Matrix x = skewed(60, 4, 2);
  TransformStep abtt0{TransformKind::kAbtt, FitSource::kTarget, 0};
  EXPECT_TRUE(Transform::fit(abtt0, x).apply(x) ==
              Transform::fit(TransformKind::kCenter, x).apply(x));
}

TEST(AbttTest, RemovesTopDirections) {
  Matrix x = skewed(300, 8, 6);
  TransformStep step{TransformKind::kAbtt, FitSource::kTarget, 2};
  Transform t = Transform::fit(step, x);
  Matrix y = t.apply(x);
  Matrix proj = y * t.components().transpose();
  EXPECT_LT(proj.cwiseAbs().maxCoeff(), 1e-8);
  Matrix centered = proj.rowwise() - proj.colwise().mean();
  EXPECT_LT(centered.colwise().squaredNorm().maxCoeff() / 300.0, 1e-10);
  EXPECT_LT((t.components() * t.components().transpose() - Matrix::Identity(2, 2))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(AbttTest, DefaultComponentCount) {
  EXPECT_EQ(Transform::fit(TransformKind::kAbtt, gaussian_matrix(20, 10, 1)).components().rows(), 1);
  EXPECT_EQ(Transform::fit(TransformKind::kAbtt, gaussian_matrix(300, 250, 1)).components().rows(), 3);
}

TEST(AbttTest, RotationEquivariant) {
  Matrix x = skewed(200, 6, 7);
  Matrix r = random_rotation(6, 70);
  TransformStep step{TransformKind::kAbtt, FitSource::kTarget, 2};
  Matrix a = Transform::fit(step, x).apply(x) * r;
  Matrix xr = x * r;
  Matrix b = Transform::fit(step, xr).apply(xr);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(AbttTest, TooManyComponentsIsRejected) {
  TransformStep step{TransformKind::kAbtt, FitSource::kTarget, 5};
  EXPECT_THROW(Transform::fit(step, gaussian_matrix(10, 4, 1)), InvalidArgument);
}

TEST(NormalizeTest, UnitRowsAndZeroRowsKept) {
  Matrix x(2, 2);
  x << 3, 4, 0, 0;
  Warnings w;
  Matrix y = Transform::fit(TransformKind::kNormalize, x).apply(x, &w);
  EXPECT_DOUBLE_EQ(y(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(y(0, 1), 0.8);
  EXPECT_EQ(y(1, 0), 0.0);
  EXPECT_EQ(w.messages.size(), 1u);

  Matrix z = Transform::fit(TransformKind::kNormalize, x).apply(skewed(50, 7, 4));
  EXPECT_LT((z.rowwise().norm().array() - 1.0).abs().maxCoeff(), 1e-10);
}

TEST(NormalizeTest, PreservesCosine) {
  Matrix x = skewed(40, 5, 12);
  Matrix y = Transform::fit(TransformKind::kNormalize, x).apply(x);
  for (Eigen::Index i = 0; i + 1 < x.rows(); ++i) {
    Vector a = x.row(i).transpose();
    Vector b = x.row(i + 1).transpose();
    Vector c = y.row(i).transpose();
    Vector d = y.row(i + 1).transpose();
    EXPECT_NEAR(cosine(a, b), cosine(c, d), 1e-15);
  }
}

TEST(TransformTest, DimensionMismatchIsRejected) {
  Transform t = Transform::fit(TransformKind::kCenter, gaussian_matrix(5, 3, 1));
  EXPECT_THROW(t.apply(gaussian_matrix(2, 4, 1)), InvalidArgument);
  EXPECT_THROW(Transform::fit(TransformKind::kCenter, gaussian_matrix(1, 3, 1)),
               InvalidArgument);
}

TEST(TransformTest, SerializationRoundTrip) {
  Matrix x = skewed(80, 4, 13);
  for (const char* name : {"center", "zscore", "quantile-u", "whiten^W", "abtt:2", "normalize"}) {
    Transform t = Transform::fit(parse_post_chain(name)[0], x);
    t.set_corpus_label("wiki");
    std::stringstream buf;
    t.write(buf);
    Transform back = Transform::read(buf);
    EXPECT_EQ(back.name(), t.name());
    EXPECT_EQ(back.corpus_label(), "wiki");
    EXPECT_TRUE(back.apply(x) == t.apply(x)) << name;
  }
}

TEST(ChainTest, CorpusStepsFitOnCorpusAndCarryIt) {
  Matrix target = skewed(30, 3, 1);
  Matrix corpus = skewed(300, 3, 2);
  Matrix out = run_post_chain(parse_post_chain("center^W,zscore^W"), target, &corpus);
  Transform c = Transform::fit(TransformKind::kCenter, corpus);
  Matrix centered_corpus = c.apply(corpus);
  Transform z = Transform::fit(TransformKind::kZScore, centered_corpus);
  EXPECT_LT((out - z.apply(c.apply(target))).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(run_post_chain(parse_post_chain("whiten^W"), target, nullptr), ConfigError);
}

}  // namespace
}  // namespace embshape
