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


#include <sstream>

#include <gtest/gtest.h>

#include "embshape/store.h"
#include "test_util.h"

namespace embshape {
namespace {

using testing::data_path;
using testing::random_tensor;

std::string dump_bytes(const EmbeddingTensor& t) {
  std::ostringstream out;
  write_dump(t, out);
  return out.str();
}

EmbeddingTensor from_bytes(const std::string& bytes) {
  std::istringstream in(bytes);
  return read_dump(in);
}

TEST(DumpTest, RoundTripIsExact) {
  EmbeddingTensor t = random_tensor(7, 5, {-1, 0, 12}, 11);
  EXPECT_TRUE(from_bytes(dump_bytes(t)) == t);
}

TEST(DumpTest, RewriteIsByteIdentical) {
  std::string bytes = dump_bytes(random_tensor(4, 3, {1, 12}, 2));
  EXPECT_EQ(dump_bytes(from_bytes(bytes)), bytes);
}

TEST(DumpTest, ReadsGoldenFileWrittenByPython) {
  EmbeddingTensor t = read_dump_file(data_path("golden.ted"));
  ASSERT_EQ(t.dim(), 4u);
  ASSERT_EQ(t.layers(), (std::vector<int>{-1, 12}));
  ASSERT_EQ(t.sentence_count(), 3u);
  EXPECT_EQ(t.sentence(1).text, "h\xc3\xa9llo");
  EXPECT_EQ(t.sentence(0).token_ids, (std::vector<TokenId>{2, 37, 56, 3}));
  for (std::size_t s = 0; s < 3; ++s) {
    const SentenceRecord& r = t.sentence(s);
    for (std::size_t l = 0; l < 2; ++l) {
      for (Eigen::Index n = 0; n < r.layers[l].rows(); ++n) {
        for (Eigen::Index j = 0; j < 4; ++j) {
          EXPECT_EQ(r.layers[l](n, j), s + l / 2.0 + n / 4.0 + j / 8.0);
        }
      }
    }
  }
  EXPECT_EQ(dump_bytes(t), testing::read_file(data_path("golden.ted")));
}

TEST(DumpTest, StreamingReaderMatchesWholeFileReader) {
  EmbeddingTensor t = random_tensor(5, 2, {3}, 8);
  std::istringstream in(dump_bytes(t));
  DumpReader reader(in);
  EXPECT_EQ(reader.sentence_count(), 5u);
  std::size_t i = 0;
  while (auto rec = reader.next()) {
    EXPECT_EQ(rec->token_ids, t.sentence(i).token_ids);
    EXPECT_TRUE(rec->layers[0] == t.sentence(i).layers[0]);
    ++i;
  }
  EXPECT_EQ(i, 5u);
}

TEST(DumpTest, RejectsEmptySentenceList) {
  EXPECT_THROW(EmbeddingTensor(4, {12}, {}), FormatError);
}

TEST(DumpTest, RejectsRowCountMismatch) {
  SentenceRecord r;
  r.text = "x";
  r.token_ids = {5, 6};
  r.layers.push_back(FloatRows::Zero(3, 4));
  EXPECT_THROW(EmbeddingTensor(4, {12}, {r}), FormatError);
}

TEST(DumpTest, RejectsOtherVersionMagic) {
  std::string bytes = dump_bytes(random_tensor(2, 2, {1}, 1));
  bytes[3] = '2';
  try {
    from_bytes(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(DumpTest, TruncationNamesRecord) {
  std::string bytes = dump_bytes(random_tensor(3, 2, {1}, 1));
  bytes.resize(bytes.size() - 3);
  try {
    from_bytes(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("record 2"), std::string::npos) << e.what();
  }
}

TEST(DumpTest, MissingLayerIsConfigError) {
  EmbeddingTensor t = random_tensor(1, 2, {1, 12}, 1);
  EXPECT_EQ(t.require_slot(12), 1u);
  EXPECT_THROW(t.require_slot(7), ConfigError);
}

TEST(PairTsvTest, ParsesScoreAndInterleavesSentences) {
  std::istringstream in("5.0\tA man is singing.\tA man sings.\n"
                        "1.5\tx\ty\ttest\n");
  SentencePairSet set = read_pair_tsv(in);
  ASSERT_EQ(set.pairs.size(), 2u);
  EXPECT_EQ(set.pairs[0].score, 5.0);
  EXPECT_EQ(set.sentences[set.pairs[0].first], "A man is singing.");
  EXPECT_EQ(set.sentences[set.pairs[0].second], "A man sings.");
  EXPECT_EQ(set.pairs[1].first, 2u);
  EXPECT_EQ(set.pairs[1].subset, "test");
}

TEST(PairTsvTest, RejectsBadRows) {
  std::istringstream two_cols("3\tonly one\n");
  EXPECT_THROW(read_pair_tsv(two_cols), FormatError);
  std::istringstream out_of_range("5.5\ta\tb\n");
  EXPECT_THROW(read_pair_tsv(out_of_range), FormatError);
  std::istringstream not_number("high\ta\tb\n");
  EXPECT_THROW(read_pair_tsv(not_number), FormatError);
}

TEST(LabeledTsvTest, ParsesLabelsAndSplits) {
  std::istringstream in("3\tsome text\n0\tother\n1\tmore\n2\tlast\n");
  LabeledTextSet set = read_labeled_tsv(in);
  EXPECT_EQ(set.labels[0], 3);
  EXPECT_EQ(set.texts[0], "some text");
  EXPECT_EQ(set.class_count(), 4);
  EXPECT_FALSE(set.has_splits());

  std::istringstream split("0\ta\ttrain\n1\tb\ttest\n");
  EXPECT_TRUE(read_labeled_tsv(split).has_splits());
}

TEST(LabeledTsvTest, RejectsSparseLabelsAndUnknownSplit) {
  std::istringstream sparse("0\ta\n2\tb\n");
  EXPECT_THROW(read_labeled_tsv(sparse), FormatError);
  std::istringstream split("0\ta\tholdout\n");
  EXPECT_THROW(read_labeled_tsv(split), FormatError);
}

TEST(CorpusTest, SplitsSentencesAndDropsHeadings) {
  std::istringstream in(" = Title = \n"
                        " The cat sat . It ran 1 @,@ 000 miles ! ok \n");
  auto s = read_corpus_sentences(in, 3);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], "The cat sat .");
  EXPECT_EQ(s[1], "It ran 1,000 miles !");
}

}  // namespace
}  // namespace embshape
