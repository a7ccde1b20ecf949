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

#include "embshape/random_embed.h"

#include <random>
#include <unordered_map>

namespace embshape {

std::vector<float> random_token_vector(std::uint64_t seed, TokenId id,
                                       std::size_t dim) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  std::mt19937_64 gen(seq);
  std::normal_distribution<double> normal(0.0, kRandomEmbeddingStddev);
  std::vector<float> v(dim);
  for (float& x : v) x = static_cast<float>(normal(gen));
  return v;
}

EmbeddingTensor random_embed(std::span<const std::vector<TokenId>> sentences,
                             std::span<const std::string> texts,
                             std::uint64_t seed, std::size_t dim) {
  if (dim == 0) throw InvalidArgument("random_embed: dim must be at least 1");
  if (!texts.empty() && texts.size() != sentences.size()) {
    throw InvalidArgument("random_embed: texts and sentences differ in length");
  }
  std::unordered_map<TokenId, std::vector<float>> cache;
  std::vector<SentenceRecord> records;
  records.reserve(sentences.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    SentenceRecord rec;
    if (!texts.empty()) rec.text = texts[s];
    rec.token_ids = sentences[s];
    FloatRows m(rec.token_ids.size(), dim);
    for (std::size_t n = 0; n < rec.token_ids.size(); ++n) {
      TokenId id = rec.token_ids[n];
      auto it = cache.find(id);
      if (it == cache.end()) {
        it = cache.emplace(id, random_token_vector(seed, id, dim)).first;
      }
      m.row(static_cast<Eigen::Index>(n)) =
          Eigen::Map<const Eigen::RowVectorXf>(it->second.data(),
                                               static_cast<Eigen::Index>(dim));
    }
    rec.layers.push_back(std::move(m));
    records.push_back(std::move(rec));
  }
  return EmbeddingTensor(dim, {kStaticLayer}, std::move(records));
}

}  // namespace embshape
