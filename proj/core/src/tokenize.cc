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

#include "embshape/tokenize.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <fmt/core.h>

#include "unicode_text.h"

namespace embshape {

// --- Vocabulary ---

Vocabulary::Vocabulary(std::vector<std::string> tokens, bool wordpiece)
    : tokens_(std::move(tokens)), wordpiece_(wordpiece) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw FormatError(fmt::format("vocabulary line {}: duplicate token '{}'",
                                    i + 1, tokens_[i]));
    }
  }
  if (!wordpiece_) return;
  auto require = [&](std::string_view name) {
    auto id = find(name);
    if (!id) {
      throw FormatError(
          fmt::format("vocabulary: special token {} is missing", name));
    }
    return *id;
  };
  specials_.cls = require("[CLS]");
  specials_.sep = require("[SEP]");
  specials_.mask = require("[MASK]");
  specials_.unk = require("[UNK]");
  specials_.pad = require("[PAD]");
}

Vocabulary Vocabulary::load_wordpiece(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary '" + path + "'", 0);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens), /*wordpiece=*/true);
}

Vocabulary Vocabulary::wordpiece(std::vector<std::string> tokens) {
  return Vocabulary(std::move(tokens), /*wordpiece=*/true);
}

Vocabulary Vocabulary::words(std::vector<std::string> tokens) {
  return Vocabulary(std::move(tokens), /*wordpiece=*/false);
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::mask_id() const {
  if (!specials_.mask) throw ConfigError("vocabulary has no mask token");
  return *specials_.mask;
}

TokenId Vocabulary::unk_id() const {
  if (!specials_.unk) throw ConfigError("vocabulary has no unknown token");
  return *specials_.unk;
}

// --- basic tokenization ---

namespace {

bool splits_words(char32_t c) {
  return unicode::is_whitespace(c) || c == 0x2028 || c == 0x2029;
}

std::u32string clean_text(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (c == 0 || c == 0xFFFD || unicode::is_control(c)) continue;
    out.push_back(unicode::is_whitespace(c) ? U' ' : c);
  }
  return out;
}

std::vector<std::u32string> split_whitespace(std::u32string_view text) {
  std::vector<std::u32string> out;
  std::u32string current;
  for (char32_t c : text) {
    if (splits_words(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<std::u32string> basic_tokenize_u32(std::string_view text) {
  std::u32string cleaned = unicode::nfc(clean_text(unicode::decode_utf8(text)));
  std::vector<std::u32string> out;
  for (const std::u32string& word : split_whitespace(cleaned)) {
    std::u32string token = unicode::strip_accents(unicode::to_lower(word));
    std::u32string current;
    for (char32_t c : token) {
      if (unicode::is_punctuation(c)) {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
        out.push_back(std::u32string(1, c));
      } else {
        current.push_back(c);
      }
    }
    if (!current.empty()) out.push_back(std::move(current));
  }
  // Lowercasing or accent removal can introduce separators.
  std::vector<std::u32string> result;
  for (auto& t : out) {
    for (auto& piece : split_whitespace(t)) result.push_back(std::move(piece));
  }
  return result;
}

void wordpiece_word(const std::u32string& word, const Vocabulary& vocab,
                    std::vector<TokenId>& out) {
  if (word.size() > kMaxCharsPerWord) {
    out.push_back(vocab.unk_id());
    return;
  }
  std::vector<TokenId> pieces;
  std::size_t start = 0;
  while (start < word.size()) {
    std::size_t end = word.size();
    std::optional<TokenId> found;
    while (start < end) {
      std::string candidate =
          unicode::encode_utf8(std::u32string_view(word).substr(start, end - start));
      if (start > 0) candidate.insert(0, "##");
      found = vocab.find(candidate);
      if (found) break;
      --end;
    }
    if (!found) {
      out.push_back(vocab.unk_id());
      return;
    }
    pieces.push_back(*found);
    start = end;
  }
  out.insert(out.end(), pieces.begin(), pieces.end());
}

void wordpiece_span(std::string_view text, const Vocabulary& vocab,
                    std::vector<TokenId>& ids) {
  for (const std::u32string& word : basic_tokenize_u32(text)) {
    wordpiece_word(word, vocab, ids);
  }
}

// Tokenizes possibly-empty text without framing. Special token strings
// ("[MASK]", ...) in the text are kept whole, case-sensitively.
std::vector<TokenId> wordpiece_ids(std::string_view text,
                                   const Vocabulary& vocab) {
  static constexpr std::string_view kSpecials[] = {"[PAD]", "[UNK]", "[CLS]",
                                                   "[SEP]", "[MASK]"};
  std::vector<TokenId> ids;
  while (!text.empty()) {
    std::size_t at = std::string_view::npos;
    std::string_view hit;
    for (std::string_view s : kSpecials) {
      std::size_t pos = text.find(s);
      if (pos < at && vocab.find(s)) {
        at = pos;
        hit = s;
      }
    }
    wordpiece_span(text.substr(0, at), vocab, ids);
    if (at == std::string_view::npos) break;
    ids.push_back(*vocab.find(hit));
    text.remove_prefix(at + hit.size());
  }
  return ids;
}

}  // namespace

std::vector<std::string> basic_tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& w : basic_tokenize_u32(text)) {
    out.push_back(unicode::encode_utf8(w));
  }
  return out;
}

std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab,
                              bool wrap) {
  if (text.empty()) throw InvalidArgument("tokenize: empty text");
  if (!vocab.is_wordpiece()) {
    throw InvalidArgument("tokenize: vocabulary is not a WordPiece vocabulary");
  }
  std::vector<TokenId> ids;
  if (wrap) ids.push_back(*vocab.specials().cls);
  std::vector<TokenId> body = wordpiece_ids(text, vocab);
  ids.insert(ids.end(), body.begin(), body.end());
  if (wrap) ids.push_back(*vocab.specials().sep);
  return ids;
}

std::vector<TokenId> tokenize_words(std::string_view text,
                                    const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  for (const std::string& word : basic_tokenize(text)) {
    if (auto id = vocab.find(word)) ids.push_back(*id);
  }
  return ids;
}

// --- templates ---

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view what) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(what); pos != std::string_view::npos;
       pos = text.find(what, pos + what.size())) {
    ++n;
  }
  return n;
}

}  // namespace

std::size_t TemplateSpec::mask_count() const {
  return count_occurrences(text, kMaskSlot);
}

void TemplateSpec::validate() const {
  if (count_occurrences(text, kPayloadSlot) != 1) {
    throw ConfigError(fmt::format("template {}: needs exactly one {}", id,
                                  kPayloadSlot));
  }
  if (mask_count() == 0) {
    throw ConfigError(
        fmt::format("template {}: needs at least one {}", id, kMaskSlot));
  }
}

std::vector<TemplateSpec> builtin_templates() {
  return {
      {"T0", R"(This sentence: "[X]" means [MASK].)"},
      {"T1", R"(This sentence: "[X]" means [MASK][MASK].)"},
      {"T2", R"(This sentence: "[X]" means "[MASK][MASK]" and is about [MASK].)"},
      {"T3",
       R"(This sentence from the paraphrase dictionary: "[X]" means "[MASK]", which is about [MASK].)"},
      {"T4",
       R"(This sentence from the dictionary: "[X]" means "[MASK]" and is about [MASK], which is a synonym for [MASK].)"},
  };
}

TemplateSpec builtin_template(std::string_view id) {
  for (auto& spec : builtin_templates()) {
    if (spec.id == id) return spec;
  }
  throw ConfigError(fmt::format("unknown template '{}'", id));
}

TemplatedSequence apply_template(const TemplateSpec& spec,
                                 std::string_view payload,
                                 const Vocabulary& vocab, bool wrap) {
  spec.validate();
  if (payload.empty()) throw InvalidArgument("apply_template: empty payload");
  std::vector<TokenId> payload_ids = wordpiece_ids(payload, vocab);
  if (payload_ids.empty()) {
    throw InvalidArgument("apply_template: payload yields no tokens");
  }
  TemplatedSequence seq;
  if (wrap) seq.ids.push_back(*vocab.specials().cls);
  std::string_view rest = spec.text;
  while (!rest.empty()) {
    std::size_t x = rest.find(kPayloadSlot);
    std::size_t m = rest.find(kMaskSlot);
    std::size_t next = std::min(x, m);
    std::vector<TokenId> literal = wordpiece_ids(rest.substr(0, next), vocab);
    seq.ids.insert(seq.ids.end(), literal.begin(), literal.end());
    if (next == std::string_view::npos) break;
    if (next == x) {
      seq.payload_begin = seq.ids.size();
      seq.ids.insert(seq.ids.end(), payload_ids.begin(), payload_ids.end());
      seq.payload_end = seq.ids.size();
      rest.remove_prefix(x + kPayloadSlot.size());
    } else {
      seq.mask_positions.push_back(seq.ids.size());
      seq.ids.push_back(vocab.mask_id());
      rest.remove_prefix(m + kMaskSlot.size());
    }
  }
  if (wrap) seq.ids.push_back(*vocab.specials().sep);
  return seq;
}

// --- token classes ---

namespace {

TokenClass intrinsic_class(const Vocabulary& vocab, TokenId id) {
  const std::string& token = vocab.token(id);
  TokenClass c;
  c.is_special = vocab.specials().is_special(id);
  c.is_subword = token.starts_with("##");
  std::u32string cps = unicode::decode_utf8(token);
  c.is_punctuation =
      !cps.empty() && std::none_of(cps.begin(), cps.end(), [](char32_t ch) {
        return unicode::is_alphanumeric(ch);
      });
  return c;
}

}  // namespace

TokenClassFlags classify_tokens(const Vocabulary& vocab,
                                const TokenStats& frequency_source,
                                std::size_t k) {
  if (k > vocab.size()) {
    throw InvalidArgument(fmt::format(
        "classify_tokens: k={} exceeds vocabulary size {}", k, vocab.size()));
  }
  std::vector<TokenClass> classes(vocab.size());
  std::vector<TokenId> order;
  order.reserve(vocab.size());
  for (TokenId id = 0; id < vocab.size(); ++id) {
    classes[id] = intrinsic_class(vocab, id);
    if (!classes[id].is_special) order.push_back(id);
  }
  std::stable_sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
    return frequency_source.df_of(a) > frequency_source.df_of(b);
  });
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
    classes[order[i]].is_frequent = true;
  }
  return TokenClassFlags(std::move(classes), vocab.specials());
}

TokenClassFlags classify_tokens_with_stoplist(
    const Vocabulary& vocab, const std::vector<std::string>& stoplist) {
  std::vector<TokenClass> classes(vocab.size());
  for (TokenId id = 0; id < vocab.size(); ++id) {
    classes[id] = intrinsic_class(vocab, id);
  }
  for (const std::string& token : stoplist) {
    auto id = vocab.find(token);
    if (id && !classes[*id].is_special) classes[*id].is_frequent = true;
  }
  return TokenClassFlags(std::move(classes), vocab.specials());
}

std::vector<std::string> read_stoplist_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stoplist '" + path + "'", 0);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace embshape
