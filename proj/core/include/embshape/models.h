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

// Static token tables: averaged contextual vectors, externally trained word
// vectors, and the contextual/static mixture.
//
// STT1 layout (little-endian): "STT1" | u32 dim | u32 entry_count, then per
// entry: u32 token id | u64 occurrence count | dim x f32.

#ifndef EMBSHAPE_MODELS_H_
#define EMBSHAPE_MODELS_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "embshape/common.h"
#include "embshape/store.h"
#include "embshape/tokenize.h"

namespace embshape {

class StaticTable {
 public:
  struct Entry {
    Vector vector;
    std::uint64_t count = 0;
  };

  StaticTable() = default;
  explicit StaticTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Throws InvalidArgument on dimension mismatch, zero count or
  // non-finite values.
  void insert(TokenId id, Vector vector, std::uint64_t count);
  const Entry* find(TokenId id) const;
  // Ascending id order.
  const std::map<TokenId, Entry>& entries() const { return entries_; }

  // Word-level tables (loaded from word2vec text) carry their word list; ids
  // are positions in that list.
  const std::optional<Vocabulary>& words() const { return words_; }
  void set_words(Vocabulary words) { words_ = std::move(words); }
  bool is_word_level() const { return words_.has_value(); }

  std::string layer_tag;
  std::string corpus_tag;

 private:
  std::size_t dim_ = 0;
  std::map<TokenId, Entry> entries_;
  std::optional<Vocabulary> words_;
};

// Accumulates per-token sums of layer-averaged vectors. Shards can be built
// independently and merged; the result does not depend on sentence order.
class AvgTableBuilder {
 public:
  AvgTableBuilder(std::size_t dim, std::vector<int> layers);

  // Throws ConfigError if the record lacks a requested layer.
  void add(const SentenceRecord& record, std::span<const int> tensor_layers);
  void add(const EmbeddingTensor& tensor);
  void merge(const AvgTableBuilder& other);
  // Throws InvalidArgument if nothing was added.
  StaticTable finish(std::string corpus_tag = {}) const;

 private:
  struct Sum {
    Vector total;
    std::uint64_t count = 0;
  };
  std::size_t dim_;
  std::vector<int> layers_;
  std::map<TokenId, Sum> sums_;
};

// Mean over all occurrences of each token of its layer-averaged vector.
StaticTable build_avg_table(const EmbeddingTensor& dump,
                            std::span<const int> layers);

// Count-weighted average of two tables over the union of their ids.
StaticTable merge_tables(const StaticTable& a, const StaticTable& b);

// Looks every token up in the table, producing a single-layer
// (kStaticLayer) tensor so aggregation applies unchanged. Tokens missing
// from the table are skipped; a sentence with no known token becomes one
// zero row and is reported through `warnings`.
EmbeddingTensor embed_with_table(std::span<const std::vector<TokenId>> sentences,
                                 std::span<const std::string> texts,
                                 const StaticTable& table,
                                 Warnings* warnings = nullptr);

// (1 - w) * contextual + w * averaged. w = 0 and w = 1 return the matching
// input unchanged. Throws InvalidArgument on shape mismatch.
Matrix combine(const Matrix& contextual, const Matrix& averaged, double w);

enum class TableFormat { kStt1, kWord2VecText };

StaticTable load_static_table(const std::string& path, TableFormat format);
StaticTable read_stt1(std::istream& in);
void write_stt1(const StaticTable& table, std::ostream& out);
void write_stt1_file(const StaticTable& table, const std::string& path);

// word2vec text: "count dim" header then "word v1 ... vd" per line. Files
// list words by descending frequency, so the entry on line i (0-based after
// the header) gets count = entry_count - i.
StaticTable read_word2vec_text(std::istream& in);

// Drops the m highest-count entries, ties broken by ascending id. Throws
// InvalidArgument unless m < size().
StaticTable filter_top_frequent(const StaticTable& table, std::size_t m);

}  // namespace embshape

#endif  // EMBSHAPE_MODELS_H_
