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

// Uncased WordPiece tokenization, prompt templates and token classes.

#ifndef EMBSHAPE_TOKENIZE_H_
#define EMBSHAPE_TOKENIZE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "embshape/common.h"
#include "embshape/stats.h"

namespace embshape {

struct SpecialTokens {
  std::optional<TokenId> cls;
  std::optional<TokenId> sep;
  std::optional<TokenId> mask;
  std::optional<TokenId> unk;
  std::optional<TokenId> pad;

  // Sequence framing tokens that never take part in averaging.
  bool is_framing(TokenId id) const {
    return id == cls || id == sep || id == pad;
  }
  bool is_special(TokenId id) const {
    return is_framing(id) || id == mask || id == unk;
  }
};

// Token strings indexed by id. WordPiece vocabularies carry the five special
// tokens; word-level vocabularies (static word-vector tables) carry none.
class Vocabulary {
 public:
  // vocab.txt layout: one token per line, line number = id. Throws
  // FormatError if a special token is missing or a token is duplicated.
  static Vocabulary load_wordpiece(const std::string& path);
  static Vocabulary wordpiece(std::vector<std::string> tokens);
  static Vocabulary words(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> find(std::string_view token) const;
  const SpecialTokens& specials() const { return specials_; }
  bool is_wordpiece() const { return wordpiece_; }

  // Requires the special token to exist.
  TokenId mask_id() const;
  TokenId unk_id() const;

 private:
  Vocabulary(std::vector<std::string> tokens, bool wordpiece);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  SpecialTokens specials_;
  bool wordpiece_;
};

// Cleans, lowercases, strips accents and splits on whitespace and
// punctuation. Also the word tokenizer used for word-level tables.
std::vector<std::string> basic_tokenize(std::string_view text);

inline constexpr std::size_t kMaxCharsPerWord = 100;

// Basic tokenization followed by greedy longest-match WordPiece. Words longer
// than kMaxCharsPerWord code points, or that cannot be covered by vocabulary
// pieces, become the unknown token. With `wrap`, the sequence is framed by
// the sequence-start and separator tokens. Throws InvalidArgument on an
// empty string.
std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab,
                              bool wrap = false);

// Word-level lookup for tables keyed by whole words: words missing from the
// vocabulary are dropped.
std::vector<TokenId> tokenize_words(std::string_view text,
                                    const Vocabulary& vocab);

// --- prompt templates ---

inline constexpr std::string_view kPayloadSlot = "[X]";
inline constexpr std::string_view kMaskSlot = "[MASK]";

struct TemplateSpec {
  std::string id;
  std::string text;  // one "[X]" and at least one "[MASK]"

  std::size_t mask_count() const;
  // Throws ConfigError unless the slot counts are valid.
  void validate() const;
};

// T0..T4. Throws ConfigError for unknown ids.
TemplateSpec builtin_template(std::string_view id);
std::vector<TemplateSpec> builtin_templates();

struct TemplatedSequence {
  std::vector<TokenId> ids;
  std::vector<std::size_t> mask_positions;
  std::size_t payload_begin = 0;  // [begin, end) into ids
  std::size_t payload_end = 0;
};

// Literal segments are tokenized around the payload; mask slots become the
// mask token. Throws InvalidArgument if the payload yields no tokens.
TemplatedSequence apply_template(const TemplateSpec& spec,
                                 std::string_view payload,
                                 const Vocabulary& vocab, bool wrap = true);

// --- token classes ---

struct TokenClass {
  bool is_punctuation = false;  // no alphanumeric code point
  bool is_subword = false;      // starts with "##"
  bool is_frequent = false;     // on the stoplist / among the top-k by df
  bool is_special = false;
};

class TokenClassFlags {
 public:
  TokenClassFlags() = default;
  TokenClassFlags(std::vector<TokenClass> classes, SpecialTokens specials)
      : classes_(std::move(classes)), specials_(specials) {}

  // Ids outside the table (e.g. from a larger vocabulary) have no flags.
  TokenClass at(TokenId id) const {
    return id < classes_.size() ? classes_[id] : TokenClass{};
  }
  const SpecialTokens& specials() const { return specials_; }
  std::size_t size() const { return classes_.size(); }

  // Dropped by the bias filter.
  bool is_bias(TokenId id) const {
    TokenClass c = at(id);
    return c.is_frequent || c.is_punctuation || c.is_subword;
  }

 private:
  std::vector<TokenClass> classes_;
  SpecialTokens specials_;
};

inline constexpr std::size_t kDefaultFrequentTokens = 33;

// is_frequent marks the k non-special tokens with the highest document
// frequency (ties by ascending id). Throws InvalidArgument if k exceeds the
// vocabulary size.
TokenClassFlags classify_tokens(const Vocabulary& vocab,
                                const TokenStats& frequency_source,
                                std::size_t k = kDefaultFrequentTokens);

// As classify_tokens, but is_frequent comes from an explicit stoplist
// (one token string per line). Unknown stoplist entries are ignored.
TokenClassFlags classify_tokens_with_stoplist(
    const Vocabulary& vocab, const std::vector<std::string>& stoplist);

std::vector<std::string> read_stoplist_file(const std::string& path);

}  // namespace embshape

#endif  // EMBSHAPE_TOKENIZE_H_
