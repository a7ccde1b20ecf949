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

#include "embshape/aggregate.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>
#include <set>

#include <fmt/core.h>

namespace embshape {

TokenStats compute_stats(std::span<const std::vector<TokenId>> corpus,
                         std::size_t vocab_size, std::string tag) {
  if (corpus.empty()) throw InvalidArgument("compute_stats: empty corpus");
  TokenStats stats;
  stats.doc_count = corpus.size();
  stats.tag = std::move(tag);
  stats.df.assign(vocab_size, 0);
  std::vector<std::size_t> last_doc(vocab_size, static_cast<std::size_t>(-1));
  for (std::size_t doc = 0; doc < corpus.size(); ++doc) {
    for (TokenId id : corpus[doc]) {
      if (id >= stats.df.size()) {
        stats.df.resize(id + 1, 0);
        last_doc.resize(id + 1, static_cast<std::size_t>(-1));
      }
      if (last_doc[id] != doc) {
        last_doc[id] = doc;
        ++stats.df[id];
      }
    }
  }
  const double n = static_cast<double>(stats.doc_count);
  stats.idf.resize(stats.df.size());
  for (std::size_t t = 0; t < stats.df.size(); ++t) {
    stats.idf[t] = std::log(n / std::max<double>(stats.df[t], 1.0));
  }
  return stats;
}

// --- spec ---

void AggregationSpec::validate() const {
  if (mask_only && exclude_mask) {
    throw ConfigError("aggregation: mask-only and exclude-mask are exclusive");
  }
  if (weighting == Weighting::kIdf && stats_source == StatsSource::kNone) {
    throw ConfigError("aggregation: idf weighting needs a stats source");
  }
  if (layers.empty()) throw ConfigError("aggregation: empty layer set");
  std::set<int> unique(layers.begin(), layers.end());
  if (unique.size() != layers.size()) {
    throw ConfigError("aggregation: duplicated layer in layer set");
  }
}

std::string AggregationSpec::method_name() const {
  std::vector<std::string> parts;
  if (weighting == Weighting::kIdf) {
    parts.push_back(stats_source == StatsSource::kCorpus ? "idf^W" : "idf^T");
  }
  if (bias_filter) parts.push_back("biases");
  if (mask_only) parts.push_back("mask");
  if (exclude_mask) parts.push_back("nomask");
  if (parts.empty()) return "avg";
  std::string out = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) out += "+" + parts[i];
  return out;
}

AggregationSpec parse_aggregation(std::string_view text) {
  AggregationSpec spec;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t plus = text.find('+', start);
    std::string_view part = text.substr(
        start, plus == std::string_view::npos ? std::string_view::npos
                                              : plus - start);
    if (part == "avg" || part == "uniform") {
      spec.weighting = Weighting::kUniform;
    } else if (part == "idf^W") {
      spec.weighting = Weighting::kIdf;
      spec.stats_source = StatsSource::kCorpus;
    } else if (part == "idf^T") {
      spec.weighting = Weighting::kIdf;
      spec.stats_source = StatsSource::kTarget;
    } else if (part == "biases" || part == "-biases") {
      spec.bias_filter = true;
    } else if (part == "mask") {
      spec.mask_only = true;
    } else if (part == "nomask") {
      spec.exclude_mask = true;
    } else {
      throw ConfigError(fmt::format("aggregation: unknown term '{}' in '{}'",
                                    part, text));
    }
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  spec.validate();
  return spec;
}

std::vector<int> parse_layers(std::string_view text) {
  std::vector<int> layers;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string_view part = text.substr(
        start, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - start);
    int value = 0;
    auto [ptr, ec] =
        std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw ConfigError(fmt::format("layers: cannot parse '{}'", text));
    }
    layers.push_back(value);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return layers;
}

std::string format_layers(std::span<const int> layers) {
  std::string out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(layers[i]);
  }
  return out;
}

// --- weights ---

TokenWeights token_weights(std::span<const TokenId> ids,
                           const AggregationSpec& spec, const TokenStats* stats,
                           const TokenClassFlags& flags) {
  if (spec.weighting == Weighting::kIdf && stats == nullptr) {
    throw ConfigError("token_weights: idf weighting without token stats");
  }
  const SpecialTokens& sp = flags.specials();
  TokenWeights out;
  out.weights.assign(ids.size(), 0.0);
  std::vector<bool> keep(ids.size(), false);
  std::size_t kept = 0;
  for (std::size_t n = 0; n < ids.size(); ++n) {
    TokenId id = ids[n];
    bool is_mask = id == sp.mask;
    bool k = !sp.is_framing(id);
    if (k && spec.mask_only) k = is_mask;
    if (k && spec.exclude_mask) k = !is_mask;
    if (k && spec.bias_filter && !is_mask) k = !flags.is_bias(id);
    keep[n] = k;
    kept += k ? 1 : 0;
  }
  if (kept == 0) {
    out.fallback = true;
    for (std::size_t n = 0; n < ids.size(); ++n) {
      keep[n] = !sp.is_framing(ids[n]);
      kept += keep[n] ? 1 : 0;
    }
    if (kept == 0) std::fill(keep.begin(), keep.end(), true);
  }
  double sum = 0.0;
  for (std::size_t n = 0; n < ids.size(); ++n) {
    if (!keep[n]) continue;
    out.weights[n] =
        spec.weighting == Weighting::kIdf ? stats->idf_of(ids[n]) : 1.0;
    sum += out.weights[n];
  }
  if (!(sum > 0.0)) {
    // Every surviving token occurs in every stats document (idf 0).
    out.fallback = true;
    sum = 0.0;
    for (std::size_t n = 0; n < ids.size(); ++n) {
      out.weights[n] = keep[n] ? 1.0 : 0.0;
      sum += out.weights[n];
    }
  }
  for (double& w : out.weights) w /= sum;
  return out;
}

// --- aggregation ---

Vector aggregate_sentence(const SentenceRecord& record,
                          std::span<const std::size_t> slots,
                          const TokenWeights& weights) {
  const Eigen::Index dim = record.layers.front().cols();
  Vector acc = Vector::Zero(dim);
  for (std::size_t slot : slots) {
    const FloatRows& m = record.layers[slot];
    for (Eigen::Index n = 0; n < m.rows(); ++n) {
      double w = weights.weights[static_cast<std::size_t>(n)];
      if (w == 0.0) continue;
      acc += w * m.row(n).transpose().cast<double>();
    }
  }
  acc /= static_cast<double>(slots.size());
  return acc;
}

Matrix aggregate(const EmbeddingTensor& tensor, const AggregationSpec& spec,
                 const TokenStats* stats, const TokenClassFlags& flags,
                 Warnings* warnings, int workers) {
  spec.validate();
  std::vector<std::size_t> slots;
  for (int layer : spec.layers) slots.push_back(tensor.require_slot(layer));
  Matrix out(static_cast<Eigen::Index>(tensor.sentence_count()),
             static_cast<Eigen::Index>(tensor.dim()));
  std::vector<char> fell_back(tensor.sentence_count(), 0);
  parallel_for(tensor.sentence_count(), workers, [&](std::size_t s) {
    const SentenceRecord& rec = tensor.sentence(s);
    TokenWeights w = token_weights(rec.token_ids, spec, stats, flags);
    fell_back[s] = w.fallback ? 1 : 0;
    out.row(static_cast<Eigen::Index>(s)) =
        aggregate_sentence(rec, slots, w).transpose();
  });
  std::size_t fallbacks = 0;
  for (char f : fell_back) fallbacks += f;
  if (fallbacks > 0) {
    warn(warnings, fmt::format("{}: {} sentence(s) fell back to uniform "
                               "weights after filtering",
                               spec.method_name(), fallbacks));
  }
  return out;
}

}  // namespace embshape
