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


#include <cstring>
#include <sstream>

#include <gtest/gtest.h>

#include "embshape/models.h"
#include "test_util.h"

namespace embshape {
namespace {

using testing::gaussian_matrix;
using testing::random_tensor;

SentenceRecord record(std::vector<TokenId> ids, std::vector<std::vector<float>> rows) {
  SentenceRecord r;
  r.text = "s";
  r.token_ids = std::move(ids);
  FloatRows m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  r.layers.push_back(m);
  return r;
}

TEST(AvgTableTest, AveragesOccurrences) {
  EmbeddingTensor t(2, {12},
                    {record({7, 8}, {{1, 0}, {5, 5}}), record({7}, {{3, 2}})});
  StaticTable table = build_avg_table(t, std::vector<int>{12});
  ASSERT_EQ(table.size(), 2u);
  EXPECT_EQ(table.find(7)->vector, Eigen::Vector2d(2, 1));
  EXPECT_EQ(table.find(7)->count, 2u);
  EXPECT_EQ(table.find(8)->count, 1u);
  EXPECT_EQ(table.layer_tag, "12");
  EXPECT_EQ(table.find(9), nullptr);
}

TEST(AvgTableTest, LayerSetAveragesLayersFirst) {
  SentenceRecord r = record({7}, {{2, 0}});
  FloatRows second(1, 2);
  second << 0, 4;
  r.layers.push_back(second);
  EmbeddingTensor t(2, {1, 12}, {r});
  StaticTable table = build_avg_table(t, std::vector<int>{1, 12});
  EXPECT_EQ(table.find(7)->vector, Eigen::Vector2d(1, 2));
  EXPECT_THROW(build_avg_table(t, std::vector<int>{5}), ConfigError);
}

TEST(AvgTableTest, SentenceOrderDoesNotMatter) {
  EmbeddingTensor t = random_tensor(30, 4, {12}, 4, 5, 15);
  std::vector<SentenceRecord> reversed(t.sentences().rbegin(), t.sentences().rend());
  EmbeddingTensor r(4, {12}, reversed);
  StaticTable a = build_avg_table(t, std::vector<int>{12});
  StaticTable b = build_avg_table(r, std::vector<int>{12});
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [id, e] : a.entries()) {
    EXPECT_LT((e.vector - b.find(id)->vector).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(e.count, b.find(id)->count);
  }
}

TEST(AvgTableTest, MergeOfHalvesEqualsWhole) {
  EmbeddingTensor t = random_tensor(40, 3, {12}, 5, 5, 25);
  std::vector<SentenceRecord> first(t.sentences().begin(), t.sentences().begin() + 17);
  std::vector<SentenceRecord> second(t.sentences().begin() + 17, t.sentences().end());
  StaticTable whole = build_avg_table(t, std::vector<int>{12});
  StaticTable merged = merge_tables(build_avg_table(EmbeddingTensor(3, {12}, first), std::vector<int>{12}),
                                    build_avg_table(EmbeddingTensor(3, {12}, second), std::vector<int>{12}));
  AvgTableBuilder a(3, {12});
  AvgTableBuilder b(3, {12});
  a.add(EmbeddingTensor(3, {12}, first));
  b.add(EmbeddingTensor(3, {12}, second));
  a.merge(b);
  StaticTable built = a.finish();
  ASSERT_EQ(merged.size(), whole.size());
  for (const auto& [id, e] : whole.entries()) {
    EXPECT_LT((e.vector - merged.find(id)->vector).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((e.vector - built.find(id)->vector).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(e.count, merged.find(id)->count);
  }
}

TEST(StaticTableTest, InsertValidates) {
  StaticTable t(2);
  EXPECT_THROW(t.insert(1, Vector::Zero(3), 1), InvalidArgument);
  EXPECT_THROW(t.insert(1, Vector::Zero(2), 0), InvalidArgument);
  EXPECT_THROW(t.insert(1, Eigen::Vector2d(NAN, 0), 1), InvalidArgument);
}

TEST(EmbedWithTableTest, LooksUpKnownTokens) {
  StaticTable table(2);
  table.insert(5, Eigen::Vector2d(1, 2), 3);
  table.insert(6, Eigen::Vector2d(0, 4), 1);
  std::vector<std::vector<TokenId>> sents = {{5, 9, 6}, {9}};
  Warnings w;
  EmbeddingTensor t = embed_with_table(sents, {}, table, &w);
  EXPECT_EQ(t.sentence(0).token_ids, (std::vector<TokenId>{5, 6}));
  EXPECT_EQ(t.sentence(0).layers[0](1, 1), 4.0f);
  EXPECT_EQ(t.sentence(1).layers[0].rows(), 1);
  EXPECT_EQ(t.sentence(1).layers[0](0, 0), 0.0f);
  EXPECT_EQ(w.messages.size(), 1u);
  EXPECT_THROW(embed_with_table(sents, {}, StaticTable(2)), InvalidArgument);
}

TEST(CombineTest, Examples) {
  Matrix a(1, 2);
  a << 1, 0;
  Matrix b(1, 2);
  b << 0, 1;
  Matrix half(1, 2);
  half << 0.5, 0.5;
  EXPECT_EQ(combine(a, b, 0.5), half);
  Matrix extrapolated(1, 2);
  extrapolated << 2, -1;
  EXPECT_EQ(combine(a, b, -1.0), extrapolated);
  EXPECT_THROW(combine(a, Matrix::Zero(2, 2), 0.5), InvalidArgument);
}

TEST(CombineTest, EndpointsAreExactCopies) {
  Matrix a = gaussian_matrix(20, 5, 1);
  Matrix b = gaussian_matrix(20, 5, 2);
  a(0, 0) = -0.0;
  b(0, 0) = -0.0;
  Matrix at0 = combine(a, b, 0.0);
  Matrix at1 = combine(a, b, 1.0);
  EXPECT_EQ(std::memcmp(at0.data(), a.data(), sizeof(double) * a.size()), 0);
  EXPECT_EQ(std::memcmp(at1.data(), b.data(), sizeof(double) * b.size()), 0);
}

TEST(Word2VecTest, ParsesWithPseudoCounts) {
  std::istringstream in("3 2\nthe 0.5 1\nman -1 2.25\nsings 0 0\n");
  StaticTable t = read_word2vec_text(in);
  ASSERT_TRUE(t.is_word_level());
  EXPECT_EQ(t.words()->token(1), "man");
  EXPECT_EQ(t.find(1)->vector, Eigen::Vector2d(-1, 2.25));
  EXPECT_EQ(t.find(0)->count, 3u);
  EXPECT_EQ(t.find(2)->count, 1u);
}

TEST(Word2VecTest, RejectsMalformedInput) {
  std::istringstream short_row("1 3\nthe 1 2\n");
  EXPECT_THROW(read_word2vec_text(short_row), FormatError);
  std::istringstream long_row("1 1\nthe 1 2\n");
  EXPECT_THROW(read_word2vec_text(long_row), FormatError);
  std::istringstream missing("2 1\nthe 1\n");
  EXPECT_THROW(read_word2vec_text(missing), FormatError);
  std::istringstream header("x\n");
  EXPECT_THROW(read_word2vec_text(header), FormatError);
}

TEST(Stt1Test, Word2VecRoundTripWithinFloatPrecision) {
  std::istringstream in("2 3\nthe 0.1 -0.2 0.3\nman 1.7 2.9 -3.3\n");
  StaticTable t = read_word2vec_text(in);
  std::stringstream buf;
  write_stt1(t, buf);
  StaticTable back = read_stt1(buf);
  ASSERT_EQ(back.size(), 2u);
  for (const auto& [id, e] : t.entries()) {
    EXPECT_LT((e.vector - back.find(id)->vector).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_EQ(e.count, back.find(id)->count);
  }
}

TEST(Stt1Test, ReadsGoldenFileWrittenByPython) {
  StaticTable t = load_static_table(testing::data_path("golden.stt"), TableFormat::kStt1);
  ASSERT_EQ(t.dim(), 3u);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.find(3)->count, 5u);
  EXPECT_EQ(t.find(7)->vector, Eigen::Vector3d(3.5, 4.5, 5.5));
  std::stringstream buf;
  write_stt1(t, buf);
  EXPECT_EQ(buf.str(), testing::read_file(testing::data_path("golden.stt")));
}

TEST(Stt1Test, RejectsBadMagicAndRepeatedIds) {
  std::istringstream bad("STT2");
  EXPECT_THROW(read_stt1(bad), FormatError);
  std::string bytes = testing::read_file(testing::data_path("golden.stt"));
  // Second entry starts after magic, header and one entry (4 + 8 + 24).
  bytes[36] = 3;
  std::istringstream repeated(bytes);
  EXPECT_THROW(read_stt1(repeated), FormatError);
}

TEST(FilterTest, DropsMostFrequent) {
  StaticTable t(1);
  t.insert(1, Vector::Constant(1, 1.0), 5);
  t.insert(2, Vector::Constant(1, 2.0), 2);
  t.insert(3, Vector::Constant(1, 3.0), 1);
  EXPECT_EQ(filter_top_frequent(t, 0).size(), 3u);
  StaticTable f = filter_top_frequent(t, 1);
  EXPECT_EQ(f.size(), 2u);
  EXPECT_EQ(f.find(1), nullptr);
  EXPECT_THROW(filter_top_frequent(t, 3), InvalidArgument);
}

TEST(FilterTest, TiesBreakByLowerId) {
  StaticTable t(1);
  t.insert(9, Vector::Constant(1, 1.0), 4);
  t.insert(4, Vector::Constant(1, 1.0), 4);
  t.insert(1, Vector::Constant(1, 1.0), 1);
  StaticTable f = filter_top_frequent(t, 1);
  EXPECT_EQ(f.find(4), nullptr);
  EXPECT_NE(f.find(9), nullptr);
}

}  // namespace
}  // namespace embshape
