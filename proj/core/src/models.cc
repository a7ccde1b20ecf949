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

#include "embshape/models.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/core.h>

#include "byte_io.h"
#include "embshape/aggregate.h"

namespace embshape {

// --- StaticTable ---

void StaticTable::insert(TokenId id, Vector vector, std::uint64_t count) {
  if (static_cast<std::size_t>(vector.size()) != dim_) {
    throw InvalidArgument(fmt::format("static table: entry {} has dim {}, "
                                      "table has {}",
                                      id, vector.size(), dim_));
  }
  if (count == 0) {
    throw InvalidArgument(fmt::format("static table: entry {} has count 0", id));
  }
  if (!vector.allFinite()) {
    throw InvalidArgument(
        fmt::format("static table: entry {} is not finite", id));
  }
  entries_[id] = Entry{std::move(vector), count};
}

const StaticTable::Entry* StaticTable::find(TokenId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

// --- Avg. tables ---

AvgTableBuilder::AvgTableBuilder(std::size_t dim, std::vector<int> layers)
    : dim_(dim), layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("avg table: empty layer set");
}

void AvgTableBuilder::add(const SentenceRecord& record,
                          std::span<const int> tensor_layers) {
  std::vector<std::size_t> slots;
  for (int layer : layers_) {
    auto it = std::find(tensor_layers.begin(), tensor_layers.end(), layer);
    if (it == tensor_layers.end()) {
      throw ConfigError(
          fmt::format("layer {} is not present in the embedding dump", layer));
    }
    slots.push_back(static_cast<std::size_t>(it - tensor_layers.begin()));
  }
  const double inv_layers = 1.0 / static_cast<double>(slots.size());
  for (std::size_t n = 0; n < record.token_ids.size(); ++n) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_));
    for (std::size_t slot : slots) {
      v += record.layers[slot]
               .row(static_cast<Eigen::Index>(n))
               .transpose()
               .cast<double>();
    }
    Sum& sum = sums_[record.token_ids[n]];
    if (sum.count == 0) sum.total = Vector::Zero(static_cast<Eigen::Index>(dim_));
    sum.total += v * inv_layers;
    ++sum.count;
  }
}

void AvgTableBuilder::add(const EmbeddingTensor& tensor) {
  if (tensor.dim() != dim_) {
    throw InvalidArgument("avg table: dump dimension differs from builder");
  }
  for (const SentenceRecord& rec : tensor.sentences()) add(rec, tensor.layers());
}

void AvgTableBuilder::merge(const AvgTableBuilder& other) {
  if (other.dim_ != dim_ || other.layers_ != layers_) {
    throw InvalidArgument("avg table: merging builders of different shape");
  }
  for (const auto& [id, s] : other.sums_) {
    Sum& mine = sums_[id];
    if (mine.count == 0) {
      mine = s;
    } else {
      mine.total += s.total;
      mine.count += s.count;
    }
  }
}

StaticTable AvgTableBuilder::finish(std::string corpus_tag) const {
  if (sums_.empty()) throw InvalidArgument("avg table: empty corpus");
  StaticTable table(dim_);
  for (const auto& [id, s] : sums_) {
    table.insert(id, s.total / static_cast<double>(s.count), s.count);
  }
  table.layer_tag = format_layers(layers_);
  table.corpus_tag = std::move(corpus_tag);
  return table;
}

StaticTable build_avg_table(const EmbeddingTensor& dump,
                            std::span<const int> layers) {
  AvgTableBuilder builder(dump.dim(), {layers.begin(), layers.end()});
  builder.add(dump);
  return builder.finish();
}

StaticTable merge_tables(const StaticTable& a, const StaticTable& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument("merge_tables: dimensions differ");
  }
  StaticTable out(a.dim());
  out.layer_tag = a.layer_tag;
  out.corpus_tag = a.corpus_tag;
  for (const auto& [id, e] : a.entries()) {
    const StaticTable::Entry* other = b.find(id);
    if (other == nullptr) {
      out.insert(id, e.vector, e.count);
      continue;
    }
    std::uint64_t total = e.count + other->count;
    Vector mixed = (e.vector * static_cast<double>(e.count) +
                    other->vector * static_cast<double>(other->count)) /
                   static_cast<double>(total);
    out.insert(id, std::move(mixed), total);
  }
  for (const auto& [id, e] : b.entries()) {
    if (a.find(id) == nullptr) out.insert(id, e.vector, e.count);
  }
  return out;
}

EmbeddingTensor embed_with_table(std::span<const std::vector<TokenId>> sentences,
                                 std::span<const std::string> texts,
                                 const StaticTable& table, Warnings* warnings) {
  if (table.empty()) throw InvalidArgument("embed_with_table: empty table");
  if (!texts.empty() && texts.size() != sentences.size()) {
    throw InvalidArgument("embed_with_table: texts and sentences differ");
  }
  const auto dim = static_cast<Eigen::Index>(table.dim());
  std::vector<SentenceRecord> records;
  records.reserve(sentences.size());
  std::size_t empty_sentences = 0;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    SentenceRecord rec;
    if (!texts.empty()) rec.text = texts[s];
    std::vector<const StaticTable::Entry*> found;
    for (TokenId id : sentences[s]) {
      if (const auto* e = table.find(id)) {
        rec.token_ids.push_back(id);
        found.push_back(e);
      }
    }
    FloatRows m;
    if (found.empty()) {
      ++empty_sentences;
      rec.token_ids.push_back(sentences[s].empty() ? 0 : sentences[s].front());
      m = FloatRows::Zero(1, dim);
    } else {
      m.resize(static_cast<Eigen::Index>(found.size()), dim);
      for (std::size_t n = 0; n < found.size(); ++n) {
        m.row(static_cast<Eigen::Index>(n)) =
            found[n]->vector.transpose().cast<float>();
      }
    }
    rec.layers.push_back(std::move(m));
    records.push_back(std::move(rec));
  }
  if (empty_sentences > 0) {
    warn(warnings, fmt::format("static table: {} sentence(s) had no known "
                               "token and embed as zero vectors",
                               empty_sentences));
  }
  return EmbeddingTensor(table.dim(), {kStaticLayer}, std::move(records));
}

Matrix combine(const Matrix& contextual, const Matrix& averaged, double w) {
  if (contextual.rows() != averaged.rows() ||
      contextual.cols() != averaged.cols()) {
    throw InvalidArgument(fmt::format(
        "combine: shapes {}x{} and {}x{} differ", contextual.rows(),
        contextual.cols(), averaged.rows(), averaged.cols()));
  }
  if (w == 0.0) return contextual;
  if (w == 1.0) return averaged;
  return contextual * (1.0 - w) + averaged * w;
}

// --- file formats ---

namespace {

constexpr char kTableMagic[4] = {'S', 'T', 'T', '1'};

}  // namespace

StaticTable read_stt1(std::istream& in) {
  ByteReader r(in, "STT1");
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kTableMagic, 4) != 0) {
    throw FormatError("STT1: bad magic");
  }
  std::uint32_t dim = r.u32("dim");
  if (dim == 0) throw FormatError("STT1: dim must be at least 1");
  std::uint32_t count = r.u32("entry_count");
  StaticTable table(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    TokenId id = r.u32("token id");
    std::uint64_t occurrences = r.u64("occurrence count");
    Vector v(dim);
    for (std::uint32_t j = 0; j < dim; ++j) v(j) = r.f32("vector");
    if (table.find(id) != nullptr) {
      throw FormatError(fmt::format("STT1: entry {} repeats token id {}", i, id));
    }
    try {
      table.insert(id, std::move(v), occurrences);
    } catch (const InvalidArgument& e) {
      throw FormatError(fmt::format("STT1: entry {}: {}", i, e.what()));
    }
  }
  return table;
}

void write_stt1(const StaticTable& table, std::ostream& out) {
  ByteWriter w(out);
  w.bytes(kTableMagic, 4);
  w.u32(static_cast<std::uint32_t>(table.dim()));
  w.u32(static_cast<std::uint32_t>(table.size()));
  for (const auto& [id, e] : table.entries()) {
    w.u32(id);
    w.u64(e.count);
    for (Eigen::Index j = 0; j < e.vector.size(); ++j) {
      w.f32(static_cast<float>(e.vector(j)));
    }
  }
  w.flush();
}

void write_stt1_file(const StaticTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing", 0);
  write_stt1(table, out);
}

StaticTable read_word2vec_text(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) {
    throw FormatError("word2vec line 1: missing header");
  }
  std::size_t count = 0;
  std::size_t dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> count >> dim) || dim == 0) {
      throw FormatError("word2vec line 1: expected 'count dim'");
    }
  }
  StaticTable table(dim);
  std::vector<std::string> words;
  words.reserve(count);
  while (words.size() < count && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t space = line.find(' ');
    if (space == std::string::npos || space == 0) {
      throw FormatError(fmt::format("word2vec line {}: no vector", line_no));
    }
    std::string word = line.substr(0, space);
    Vector v(static_cast<Eigen::Index>(dim));
    const char* p = line.data() + space;
    const char* end = line.data() + line.size();
    for (std::size_t j = 0; j < dim; ++j) {
      while (p < end && *p == ' ') ++p;
      double value = 0;
      auto [next, ec] = std::from_chars(p, end, value);
      if (ec != std::errc()) {
        throw FormatError(fmt::format(
            "word2vec line {}: component {} is not a number", line_no, j + 1));
      }
      v(static_cast<Eigen::Index>(j)) = value;
      p = next;
    }
    while (p < end && *p == ' ') ++p;
    if (p != end) {
      throw FormatError(fmt::format(
          "word2vec line {}: more than {} components", line_no, dim));
    }
    auto id = static_cast<TokenId>(words.size());
    try {
      table.insert(id, std::move(v), count - words.size());
    } catch (const InvalidArgument& e) {
      throw FormatError(fmt::format("word2vec line {}: {}", line_no, e.what()));
    }
    words.push_back(std::move(word));
  }
  if (words.size() != count) {
    throw FormatError(fmt::format("word2vec: header announces {} entries, "
                                  "found {}",
                                  count, words.size()));
  }
  try {
    table.set_words(Vocabulary::words(std::move(words)));
  } catch (const FormatError& e) {
    throw FormatError(std::string("word2vec: ") + e.what());
  }
  return table;
}

StaticTable load_static_table(const std::string& path, TableFormat format) {
  std::ifstream in(path, format == TableFormat::kStt1 ? std::ios::binary
                                                      : std::ios::in);
  if (!in) throw IoError("cannot open static table '" + path + "'", 0);
  StaticTable table = format == TableFormat::kStt1 ? read_stt1(in)
                                                   : read_word2vec_text(in);
  table.corpus_tag = path;
  return table;
}

StaticTable filter_top_frequent(const StaticTable& table, std::size_t m) {
  if (m >= table.size()) {
    throw InvalidArgument(fmt::format(
        "filter_top_frequent: m={} must be below the entry count {}", m,
        table.size()));
  }
  std::vector<std::pair<std::uint64_t, TokenId>> order;
  order.reserve(table.size());
  for (const auto& [id, e] : table.entries()) order.emplace_back(e.count, id);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::map<TokenId, bool> drop;
  for (std::size_t i = 0; i < m; ++i) drop[order[i].second] = true;
  StaticTable out(table.dim());
  out.layer_tag = table.layer_tag;
  out.corpus_tag = table.corpus_tag;
  for (const auto& [id, e] : table.entries()) {
    if (!drop.contains(id)) out.insert(id, e.vector, e.count);
  }
  if (table.words()) out.set_words(*table.words());
  return out;
}

}  // namespace embshape
