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

#ifndef EMBSHAPE_STATS_H_
#define EMBSHAPE_STATS_H_

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "embshape/common.h"

namespace embshape {

// Where document frequencies were counted: an external reference corpus
// ("W") or the sentences of the task being evaluated ("T").
enum class StatsSource { kNone, kCorpus, kTarget };

// Document frequencies over a corpus where every sentence is one document.
struct TokenStats {
  std::size_t doc_count = 0;
  std::vector<std::uint32_t> df;  // indexed by token id
  std::vector<double> idf;        // natural log, same indexing
  std::string tag;

  // ln(N / df); tokens never seen in the corpus are treated as df = 1.
  double idf_of(TokenId id) const {
    if (id < idf.size()) return idf[id];
    return std::log(static_cast<double>(doc_count));
  }
  std::uint32_t df_of(TokenId id) const { return id < df.size() ? df[id] : 0; }
};

// `vocab_size` sizes the tables; ids beyond it grow them. Throws
// InvalidArgument on an empty corpus.
TokenStats compute_stats(std::span<const std::vector<TokenId>> corpus,
                         std::size_t vocab_size, std::string tag);

}  // namespace embshape

#endif  // EMBSHAPE_STATS_H_
