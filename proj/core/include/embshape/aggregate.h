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

// Reduction of per-token, per-layer vectors to one vector per sentence.

#ifndef EMBSHAPE_AGGREGATE_H_
#define EMBSHAPE_AGGREGATE_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embshape/common.h"
#include "embshape/stats.h"
#include "embshape/store.h"
#include "embshape/tokenize.h"

namespace embshape {

enum class Weighting { kUniform, kIdf };

struct AggregationSpec {
  Weighting weighting = Weighting::kUniform;
  StatsSource stats_source = StatsSource::kNone;
  bool bias_filter = false;   // drop frequent, punctuation and subword tokens
  bool mask_only = false;     // keep only mask tokens
  bool exclude_mask = false;  // drop mask tokens
  std::vector<int> layers = {kStaticLayer};  // mean over these layers

  // Throws ConfigError on contradictory settings.
  void validate() const;
  // Canonical method name, e.g. "idf^T+biases"; layers are not included.
  std::string method_name() const;
};

// Parses "avg", "idf^W", "idf^T", "biases", "mask", "nomask" joined by '+',
// e.g. "idf^T+biases". Layers keep their default.
AggregationSpec parse_aggregation(std::string_view text);

// "1,12" <-> {1, 12}
std::vector<int> parse_layers(std::string_view text);
std::string format_layers(std::span<const int> layers);

struct TokenWeights {
  std::vector<double> weights;  // non-negative, sums to 1
  bool fallback = false;        // every token was filtered out
};

// Per-token weights for one sentence. Framing tokens (sequence start,
// separator, padding) always get weight 0. If nothing survives filtering the
// weights fall back to uniform over the non-framing tokens. `stats` may be
// null unless `spec` uses idf weighting.
TokenWeights token_weights(std::span<const TokenId> ids,
                           const AggregationSpec& spec, const TokenStats* stats,
                           const TokenClassFlags& flags);

// S x dim matrix: per sentence the weighted token sum of every requested
// layer, averaged over the layers. Throws ConfigError for absent layers.
Matrix aggregate(const EmbeddingTensor& tensor, const AggregationSpec& spec,
                 const TokenStats* stats, const TokenClassFlags& flags,
                 Warnings* warnings = nullptr, int workers = 1);

// One sentence; `slots` are tensor layer positions of spec.layers.
Vector aggregate_sentence(const SentenceRecord& record,
                          std::span<const std::size_t> slots,
                          const TokenWeights& weights);

}  // namespace embshape

#endif  // EMBSHAPE_AGGREGATE_H_
