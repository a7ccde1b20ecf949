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
#include <sstream>

#include <gtest/gtest.h>

#include "embshape/tokenize.h"
#include "test_util.h"

namespace embshape {
namespace {

using testing::small_vocab;

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out += static_cast<char>(c);
  } else if (c < 0x800) {
    out += static_cast<char>(0xC0 | (c >> 6));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else if (c < 0x10000) {
    out += static_cast<char>(0xE0 | (c >> 12));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (c >> 18));
    out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  }
}

// Decodes Python's unicode_escape output back to UTF-8.
std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    char k = s[++i];
    std::size_t width = k == 'x' ? 2 : k == 'u' ? 4 : k == 'U' ? 8 : 0;
    if (width > 0) {
      append_utf8(out, static_cast<char32_t>(std::stoul(s.substr(i + 1, width), nullptr, 16)));
      i += width;
    } else if (k == 't') {
      out += '\t';
    } else if (k == 'n') {
      out += '\n';
    } else if (k == 'r') {
      out += '\r';
    } else {
      out += k;
    }
  }
  return out;
}

std::vector<std::string> pieces(const std::string& text, const Vocabulary& v) {
  std::vector<std::string> out;
  for (TokenId id : tokenize(text, v)) out.push_back(v.token(id));
  return out;
}

TEST(TokenizeTest, MatchesReferenceTokenizer) {
  Vocabulary vocab = small_vocab();
  std::ifstream in(testing::data_path("tokenizer_golden.tsv"));
  std::string line;
  int cases = 0;
  while (std::getline(in, line)) {
    std::size_t tab = line.find('\t');
    std::string text = unescape(line.substr(0, tab));
    std::vector<TokenId> expected;
    std::istringstream ids(line.substr(tab + 1));
    for (TokenId id; ids >> id;) expected.push_back(id);
    EXPECT_EQ(tokenize(text, vocab), expected) << line;
    ++cases;
  }
  EXPECT_GE(cases, 20);
}

TEST(TokenizeTest, SplitsSuffixes) {
  Vocabulary vocab = small_vocab();
  EXPECT_EQ(pieces("walking", vocab), (std::vector<std::string>{"walk", "##ing"}));
  EXPECT_EQ(pieces("HELLO", vocab), (std::vector<std::string>{"hello"}));
}

TEST(TokenizeTest, WrapAddsFraming) {
  Vocabulary vocab = small_vocab();
  auto ids = tokenize("hello", vocab, true);
  ASSERT_EQ(ids.size(), 3u);
  EXPECT_EQ(ids.front(), *vocab.specials().cls);
  EXPECT_EQ(ids.back(), *vocab.specials().sep);
}

TEST(TokenizeTest, OverlongWordIsUnknown) {
  Vocabulary vocab = small_vocab();
  EXPECT_EQ(tokenize(std::string(kMaxCharsPerWord + 1, 'x'), vocab),
            (std::vector<TokenId>{vocab.unk_id()}));
}

TEST(TokenizeTest, RejectsEmptyInput) {
  EXPECT_THROW(tokenize("", small_vocab()), InvalidArgument);
}

TEST(VocabularyTest, RequiresSpecialsAndUniqueTokens) {
  EXPECT_THROW(Vocabulary::wordpiece({"[PAD]", "[UNK]", "[CLS]", "[SEP]"}),
               FormatError);
  EXPECT_THROW(Vocabulary::wordpiece(
                   {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "a", "a"}),
               FormatError);
}

TEST(VocabularyTest, WordLevelSplitsOnWhitespaceOnly) {
  Vocabulary words = Vocabulary::words({"hello", "world"});
  EXPECT_EQ(tokenize_words("Hello  world unknown", words),
            (std::vector<TokenId>{0, 1}));
}

TEST(TemplateTest, BuiltinMaskCounts) {
  EXPECT_EQ(builtin_template("T0").mask_count(), 1u);
  EXPECT_EQ(builtin_template("T1").mask_count(), 2u);
  EXPECT_EQ(builtin_template("T4").mask_count(), 3u);
  EXPECT_EQ(builtin_templates().size(), 5u);
  EXPECT_THROW(builtin_template("T9"), ConfigError);
}

TEST(TemplateTest, RejectsBadSlots) {
  EXPECT_THROW((TemplateSpec{"x", "no payload [MASK]"}.validate()), ConfigError);
  EXPECT_THROW((TemplateSpec{"x", "[X] twice [X] [MASK]"}.validate()), ConfigError);
  EXPECT_THROW((TemplateSpec{"x", "[X] without mask"}.validate()), ConfigError);
}

TEST(TemplateTest, MarksPayloadAndMasks) {
  Vocabulary vocab = small_vocab();
  TemplatedSequence seq =
      apply_template(builtin_template("T0"), "a man sings", vocab);
  EXPECT_EQ(seq.ids.front(), *vocab.specials().cls);
  EXPECT_EQ(seq.ids.back(), *vocab.specials().sep);
  ASSERT_EQ(seq.mask_positions.size(), 1u);
  EXPECT_EQ(seq.ids[seq.mask_positions[0]], vocab.mask_id());
  std::vector<TokenId> payload(seq.ids.begin() + seq.payload_begin,
                               seq.ids.begin() + seq.payload_end);
  EXPECT_EQ(payload, tokenize("a man sings", vocab));
  EXPECT_THROW(apply_template(builtin_template("T0"), "", vocab), InvalidArgument);
}

TEST(TemplateTest, LiteralTokensDoNotDependOnPayload) {
  Vocabulary vocab = small_vocab();
  for (const TemplateSpec& spec : builtin_templates()) {
    TemplatedSequence a = apply_template(spec, "hello", vocab);
    TemplatedSequence b = apply_template(spec, "the dog runs playing", vocab);
    std::vector<TokenId> a_lit(a.ids.begin(), a.ids.begin() + a.payload_begin);
    std::vector<TokenId> b_lit(b.ids.begin(), b.ids.begin() + b.payload_begin);
    EXPECT_EQ(a_lit, b_lit) << spec.id;
    EXPECT_EQ(std::vector<TokenId>(a.ids.begin() + a.payload_end, a.ids.end()),
              std::vector<TokenId>(b.ids.begin() + b.payload_end, b.ids.end()))
        << spec.id;
    EXPECT_EQ(a.mask_positions.size(), spec.mask_count());
  }
}

TEST(TokenClassTest, ClassifiesSubwordsPunctuationAndFrequent) {
  Vocabulary vocab = small_vocab();
  TokenStats stats;
  stats.doc_count = 3;
  stats.df.assign(vocab.size(), 0);
  TokenId the = *vocab.find("the");
  stats.df[the] = 3;
  stats.df[*vocab.specials().cls] = 3;
  TokenClassFlags flags = classify_tokens(vocab, stats, 1);
  EXPECT_TRUE(flags.at(*vocab.find("##ing")).is_subword);
  EXPECT_TRUE(flags.at(*vocab.find(",")).is_punctuation);
  EXPECT_FALSE(flags.at(*vocab.find("dog")).is_punctuation);
  EXPECT_TRUE(flags.at(the).is_frequent);
  EXPECT_FALSE(flags.at(*vocab.specials().cls).is_frequent);
  EXPECT_TRUE(flags.is_bias(the));
  EXPECT_FALSE(flags.is_bias(*vocab.find("dog")));
  EXPECT_THROW(classify_tokens(vocab, stats, vocab.size() + 1), InvalidArgument);
}

TEST(TokenClassTest, StoplistMarksFrequent) {
  Vocabulary vocab = small_vocab();
  TokenClassFlags flags = classify_tokens_with_stoplist(vocab, {"of", "absent"});
  EXPECT_TRUE(flags.at(*vocab.find("of")).is_frequent);
  EXPECT_FALSE(flags.at(*vocab.find("to")).is_frequent);
}

}  // namespace
}  // namespace embshape
