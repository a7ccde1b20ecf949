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

#include "embshape/store.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "byte_io.h"

namespace embshape {

namespace {

constexpr char kMagic[4] = {'T', 'E', 'D', '1'};
constexpr std::uint32_t kVersion = 1;

bool bit_equal(const FloatRows& a, const FloatRows& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(float) * a.size()) == 0;
}

}  // namespace

void validate_tensor_parts(std::size_t dim, const std::vector<int>& layers,
                           const std::vector<SentenceRecord>& sentences) {
  if (dim == 0) throw FormatError("dim: must be at least 1");
  if (layers.empty()) throw FormatError("layer_count: must be at least 1");
  std::set<int> seen;
  for (int layer : layers) {
    if (layer < kStaticLayer) {
      throw FormatError(fmt::format("layer index {}: below -1", layer));
    }
    if (!seen.insert(layer).second) {
      throw FormatError(fmt::format("layer index {}: duplicated", layer));
    }
  }
  if (sentences.empty()) {
    throw FormatError("sentence_count: at least one sentence is required");
  }
  if (sentences.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError("sentence_count: exceeds u32");
  }
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const SentenceRecord& rec = sentences[s];
    if (rec.token_ids.empty()) {
      throw FormatError(fmt::format("sentence {}: token_count is 0", s));
    }
    if (rec.layers.size() != layers.size()) {
      throw FormatError(fmt::format(
          "sentence {}: has {} layer matrices, header lists {}", s,
          rec.layers.size(), layers.size()));
    }
    for (std::size_t l = 0; l < rec.layers.size(); ++l) {
      const FloatRows& m = rec.layers[l];
      if (static_cast<std::size_t>(m.rows()) != rec.token_ids.size()) {
        throw FormatError(fmt::format(
            "sentence {} layer {}: {} rows for {} tokens", s, layers[l],
            m.rows(), rec.token_ids.size()));
      }
      if (static_cast<std::size_t>(m.cols()) != dim) {
        throw FormatError(fmt::format("sentence {} layer {}: dim {} != {}", s,
                                      layers[l], m.cols(), dim));
      }
    }
  }
}

EmbeddingTensor::EmbeddingTensor(std::size_t dim, std::vector<int> layers,
                                 std::vector<SentenceRecord> sentences)
    : dim_(dim), layers_(std::move(layers)), sentences_(std::move(sentences)) {
  validate_tensor_parts(dim_, layers_, sentences_);
}

std::optional<std::size_t> EmbeddingTensor::slot_of(int layer) const {
  auto it = std::find(layers_.begin(), layers_.end(), layer);
  if (it == layers_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - layers_.begin());
}

std::size_t EmbeddingTensor::require_slot(int layer) const {
  auto slot = slot_of(layer);
  if (!slot) {
    throw ConfigError(
        fmt::format("layer {} is not present in the embedding dump", layer));
  }
  return *slot;
}

bool operator==(const EmbeddingTensor& a, const EmbeddingTensor& b) {
  if (a.dim_ != b.dim_ || a.layers_ != b.layers_ ||
      a.sentences_.size() != b.sentences_.size()) {
    return false;
  }
  for (std::size_t s = 0; s < a.sentences_.size(); ++s) {
    const SentenceRecord& x = a.sentences_[s];
    const SentenceRecord& y = b.sentences_[s];
    if (x.text != y.text || x.token_ids != y.token_ids) return false;
    for (std::size_t l = 0; l < x.layers.size(); ++l) {
      if (!bit_equal(x.layers[l], y.layers[l])) return false;
    }
  }
  return true;
}

// --- writer ---

void write_dump(const EmbeddingTensor& tensor, std::ostream& out) {
  ByteWriter w(out);
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(tensor.dim()));
  w.u32(static_cast<std::uint32_t>(tensor.layers().size()));
  for (int layer : tensor.layers()) w.i32(layer);
  w.u32(static_cast<std::uint32_t>(tensor.sentence_count()));
  for (const SentenceRecord& rec : tensor.sentences()) {
    w.u32(static_cast<std::uint32_t>(rec.text.size()));
    w.bytes(rec.text.data(), rec.text.size());
    w.u32(static_cast<std::uint32_t>(rec.token_ids.size()));
    for (TokenId id : rec.token_ids) w.u32(id);
    for (const FloatRows& m : rec.layers) {
      w.f32s(std::span<const float>(m.data(), static_cast<std::size_t>(m.size())));
    }
  }
  w.flush();
}

void write_dump_file(const EmbeddingTensor& tensor, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing", 0);
  write_dump(tensor, out);
}

// --- reader ---

DumpReader::DumpReader(std::istream& in) : in_(in) {
  char magic[4];
  read_bytes(magic, 4, "magic");
  if (std::memcmp(magic, "TED", 3) == 0 && magic[3] != '1') {
    throw FormatError(fmt::format("magic: unsupported version 'TED{}'",
                                  magic[3]));
  }
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("magic: not a TED1 dump");
  }
  std::uint32_t version = read_u32("version");
  if (version != kVersion) {
    throw FormatError(fmt::format("version: unsupported version {}", version));
  }
  dim_ = read_u32("dim");
  std::uint32_t layer_count = read_u32("layer_count");
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    layers_.push_back(read_i32("layer index"));
  }
  sentence_count_ = read_u32("sentence_count");
  // Header-level invariants; record-level ones are checked per record.
  if (dim_ == 0) throw FormatError("dim: must be at least 1");
  if (layers_.empty()) throw FormatError("layer_count: must be at least 1");
  if (sentence_count_ == 0) {
    throw FormatError("sentence_count: at least one sentence is required");
  }
  std::set<int> seen;
  for (int layer : layers_) {
    if (layer < kStaticLayer || !seen.insert(layer).second) {
      throw FormatError(fmt::format("layer index {}: invalid", layer));
    }
  }
}

void DumpReader::read_bytes(char* dst, std::size_t n, const char* field) {
  in_.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) {
    if (read_ < sentence_count_ && sentence_count_ > 0) {
      throw FormatError(fmt::format("truncated in record {}: {} at byte {}",
                                    read_, field, offset_ + in_.gcount()));
    }
    throw FormatError(fmt::format("truncated header: {} at byte {}", field,
                                  offset_ + in_.gcount()));
  }
  offset_ += n;
}

std::uint32_t DumpReader::read_u32(const char* field) {
  unsigned char b[4];
  read_bytes(reinterpret_cast<char*>(b), 4, field);
  return decode_u32(b);
}

std::int32_t DumpReader::read_i32(const char* field) {
  return static_cast<std::int32_t>(read_u32(field));
}

std::optional<SentenceRecord> DumpReader::next() {
  if (read_ >= sentence_count_) return std::nullopt;
  SentenceRecord rec;
  std::uint32_t text_bytes = read_u32("text length");
  rec.text.resize(text_bytes);
  read_bytes(rec.text.data(), text_bytes, "text");
  std::uint32_t token_count = read_u32("token_count");
  if (token_count == 0) {
    throw FormatError(fmt::format("record {}: token_count is 0", read_));
  }
  rec.token_ids.resize(token_count);
  for (auto& id : rec.token_ids) id = read_u32("token id");
  std::vector<unsigned char> raw(sizeof(float) * token_count * dim_);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    read_bytes(reinterpret_cast<char*>(raw.data()), raw.size(), "layer data");
    FloatRows m(token_count, dim_);
    decode_f32s(raw.data(), std::span<float>(m.data(), raw.size() / 4));
    rec.layers.push_back(std::move(m));
  }
  ++read_;
  return rec;
}

EmbeddingTensor read_dump(std::istream& in) {
  DumpReader reader(in);
  std::vector<SentenceRecord> sentences;
  sentences.reserve(reader.sentence_count());
  while (auto rec = reader.next()) sentences.push_back(std::move(*rec));
  return EmbeddingTensor(reader.dim(), reader.layers(), std::move(sentences));
}

EmbeddingTensor read_dump_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'", 0);
  return read_dump(in);
}

// --- TSV readers ---

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

template <typename T>
bool parse_number(std::string_view s, T& value) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

SentencePairSet read_pair_tsv(std::istream& in) {
  SentencePairSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 3 && cols.size() != 4) {
      throw FormatError(fmt::format(
          "line {}: expected 3 or 4 tab-separated columns, found {}", line_no,
          cols.size()));
    }
    double score = 0;
    if (!parse_number(cols[0], score) || !std::isfinite(score)) {
      throw FormatError(fmt::format("line {}: score '{}' is not a number",
                                    line_no, cols[0]));
    }
    if (score < 0.0 || score > 5.0) {
      throw FormatError(
          fmt::format("line {}: score {} outside [0, 5]", line_no, score));
    }
    SentencePair pair;
    pair.first = set.sentences.size();
    set.sentences.emplace_back(cols[1]);
    pair.second = set.sentences.size();
    set.sentences.emplace_back(cols[2]);
    pair.score = score;
    if (cols.size() == 4) pair.subset = std::string(cols[3]);
    set.pairs.push_back(std::move(pair));
  }
  return set;
}

SentencePairSet read_pair_tsv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'", 0);
  return read_pair_tsv(in);
}

int LabeledTextSet::class_count() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

bool LabeledTextSet::has_splits() const {
  return std::any_of(splits.begin(), splits.end(),
                     [](Split s) { return s != Split::kNone; });
}

LabeledTextSet read_labeled_tsv(std::istream& in) {
  LabeledTextSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 2 && cols.size() != 3) {
      throw FormatError(fmt::format(
          "line {}: expected 2 or 3 tab-separated columns, found {}", line_no,
          cols.size()));
    }
    int label = 0;
    if (!parse_number(cols[0], label) || label < 0) {
      throw FormatError(fmt::format(
          "line {}: label '{}' is not a non-negative integer", line_no,
          cols[0]));
    }
    Split split = Split::kNone;
    if (cols.size() == 3) {
      if (cols[2] == "train") {
        split = Split::kTrain;
      } else if (cols[2] == "dev") {
        split = Split::kDev;
      } else if (cols[2] == "test") {
        split = Split::kTest;
      } else {
        throw FormatError(fmt::format("line {}: unknown split '{}'", line_no,
                                      cols[2]));
      }
    }
    set.labels.push_back(label);
    set.texts.emplace_back(cols[1]);
    set.splits.push_back(split);
  }
  // Class ids must be dense in [0, C).
  std::vector<bool> present(set.class_count(), false);
  for (int label : set.labels) present[label] = true;
  for (std::size_t c = 0; c < present.size(); ++c) {
    if (!present[c]) {
      throw FormatError(fmt::format(
          "labels are not dense: class {} of {} never occurs", c,
          present.size()));
    }
  }
  return set;
}

LabeledTextSet read_labeled_tsv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'", 0);
  return read_labeled_tsv(in);
}

// --- plain text corpora ---

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

bool is_heading(const std::string& line) {
  return line.size() >= 2 && line.front() == '=' && line.back() == '=';
}

}  // namespace

std::vector<std::string> read_corpus_sentences(std::istream& in,
                                               std::size_t min_chars) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    replace_all(line, " @-@ ", "-");
    replace_all(line, " @,@ ", ",");
    replace_all(line, " @.@ ", ".");
    std::string paragraph = trim(line);
    if (paragraph.empty() || is_heading(paragraph)) continue;
    std::size_t start = 0;
    for (std::size_t i = 0; i < paragraph.size(); ++i) {
      char c = paragraph[i];
      bool boundary = (c == '.' || c == '?' || c == '!') && i > 0 &&
                      paragraph[i - 1] == ' ' &&
                      (i + 1 == paragraph.size() || paragraph[i + 1] == ' ');
      if (boundary) {
        std::string sentence = trim(
            std::string_view(paragraph).substr(start, i + 1 - start));
        if (sentence.size() >= min_chars) out.push_back(std::move(sentence));
        start = i + 1;
      }
    }
    std::string rest = trim(std::string_view(paragraph).substr(
        std::min(start, paragraph.size())));
    if (!rest.empty() && rest.size() >= min_chars) out.push_back(rest);
  }
  return out;
}

std::vector<std::string> read_corpus_sentences_file(const std::string& path,
                                                    std::size_t min_chars) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'", 0);
  return read_corpus_sentences(in, min_chars);
}

}  // namespace embshape
