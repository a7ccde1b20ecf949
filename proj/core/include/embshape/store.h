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

// Layered token embeddings, the TED1 dump format and the canonical TSV
// dataset readers.
//
// TED1 layout (all integers little-endian, reals IEEE-754 binary32 LE):
//
//   "TED1" | u32 version=1 | u32 dim | u32 layer_count
//   | layer_count x i32 layer index | u32 sentence_count
//   then per sentence:
//     u32 text_bytes | UTF-8 text | u32 token_count | token_count x u32 id
//     | for each header layer: token_count x dim x f32, row-major

#ifndef EMBSHAPE_STORE_H_
#define EMBSHAPE_STORE_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "embshape/common.h"

namespace embshape {

// Layer -1 holds static token embeddings, layer 0 the input embeddings and
// 1..L the transformer block outputs.
inline constexpr int kStaticLayer = -1;

struct SentenceRecord {
  std::string text;
  std::vector<TokenId> token_ids;
  // One token_count x dim matrix per tensor layer, in tensor layer order.
  std::vector<FloatRows> layers;

  std::size_t token_count() const { return token_ids.size(); }
};

// Immutable per-sentence, per-layer token vectors. The constructor enforces
// every structural invariant, so a constructed tensor is always writable.
class EmbeddingTensor {
 public:
  EmbeddingTensor(std::size_t dim, std::vector<int> layers,
                  std::vector<SentenceRecord> sentences);

  std::size_t dim() const { return dim_; }
  std::size_t sentence_count() const { return sentences_.size(); }
  const std::vector<int>& layers() const { return layers_; }
  const SentenceRecord& sentence(std::size_t i) const { return sentences_[i]; }
  const std::vector<SentenceRecord>& sentences() const { return sentences_; }

  bool has_layer(int layer) const { return slot_of(layer).has_value(); }
  // Position of `layer` inside layers(), or nullopt when absent.
  std::optional<std::size_t> slot_of(int layer) const;
  // As slot_of, but throws ConfigError naming the missing layer.
  std::size_t require_slot(int layer) const;

  // Element-exact comparison, including float bit patterns.
  friend bool operator==(const EmbeddingTensor& a, const EmbeddingTensor& b);

 private:
  std::size_t dim_;
  std::vector<int> layers_;
  std::vector<SentenceRecord> sentences_;
};

// Validates a dump header plus sentence records and throws FormatError
// naming the offending field. Used by the tensor constructor and the reader.
void validate_tensor_parts(std::size_t dim, const std::vector<int>& layers,
                           const std::vector<SentenceRecord>& sentences);

void write_dump(const EmbeddingTensor& tensor, std::ostream& out);
void write_dump_file(const EmbeddingTensor& tensor, const std::string& path);

EmbeddingTensor read_dump(std::istream& in);
EmbeddingTensor read_dump_file(const std::string& path);

// Streams one sentence at a time, for dumps larger than memory allows.
class DumpReader {
 public:
  explicit DumpReader(std::istream& in);

  std::size_t dim() const { return dim_; }
  const std::vector<int>& layers() const { return layers_; }
  std::size_t sentence_count() const { return sentence_count_; }

  // Next record, or nullopt after the last one.
  std::optional<SentenceRecord> next();

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
  std::size_t dim_ = 0;
  std::vector<int> layers_;
  std::size_t sentence_count_ = 0;
  std::size_t read_ = 0;

  void read_bytes(char* dst, std::size_t n, const char* field);
  std::uint32_t read_u32(const char* field);
  std::int32_t read_i32(const char* field);
};

// --- Canonical TSV datasets ---

struct SentencePair {
  std::size_t first;   // index into SentencePairSet::sentences
  std::size_t second;
  double score;        // gold similarity in [0, 5]
  std::string subset;  // optional tag, empty when the file has 3 columns
};

// Sentences are stored interleaved: pair i owns sentences 2i and 2i+1, which
// is also the order expected from a dump of the same file.
struct SentencePairSet {
  std::vector<std::string> sentences;
  std::vector<SentencePair> pairs;
};

enum class Split { kNone, kTrain, kDev, kTest };

struct LabeledTextSet {
  std::vector<std::string> texts;
  std::vector<int> labels;
  std::vector<Split> splits;  // kNone everywhere when the file has no splits

  int class_count() const;
  bool has_splits() const;
};

// "score<TAB>sentence1<TAB>sentence2[<TAB>subset]"
SentencePairSet read_pair_tsv(std::istream& in);
SentencePairSet read_pair_tsv_file(const std::string& path);

// "label<TAB>text[<TAB>train|dev|test]"
LabeledTextSet read_labeled_tsv(std::istream& in);
LabeledTextSet read_labeled_tsv_file(const std::string& path);

// One text per line; lines shorter than `min_chars` bytes (after trimming)
// are dropped. Wikitext "@-@"-style escapes are undone and paragraph lines
// are split into sentences at " . ", " ? " and " ! ".
std::vector<std::string> read_corpus_sentences(std::istream& in,
                                               std::size_t min_chars);
std::vector<std::string> read_corpus_sentences_file(const std::string& path,
                                                    std::size_t min_chars);

}  // namespace embshape

#endif  // EMBSHAPE_STORE_H_
