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

// Random token embeddings: every vocabulary id gets a fixed N(0, 0.1^2)
// vector drawn from a generator keyed by (seed, id).

#ifndef EMBSHAPE_RANDOM_EMBED_H_
#define EMBSHAPE_RANDOM_EMBED_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embshape/common.h"
#include "embshape/store.h"

namespace embshape {

inline constexpr double kRandomEmbeddingStddev = 0.1;

// Independent of the order in which tokens are requested.
std::vector<float> random_token_vector(std::uint64_t seed, TokenId id,
                                       std::size_t dim);

// Single-layer (kStaticLayer) tensor. `texts` may be empty; otherwise it
// must match `sentences` in length and is stored alongside the ids.
EmbeddingTensor random_embed(std::span<const std::vector<TokenId>> sentences,
                             std::span<const std::string> texts,
                             std::uint64_t seed, std::size_t dim);

}  // namespace embshape

#endif  // EMBSHAPE_RANDOM_EMBED_H_
