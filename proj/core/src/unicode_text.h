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

#ifndef EMBSHAPE_SRC_UNICODE_TEXT_H_
#define EMBSHAPE_SRC_UNICODE_TEXT_H_

#include <string>
#include <string_view>

namespace embshape::unicode {

// Invalid UTF-8 sequences decode to U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

bool is_whitespace(char32_t c);
bool is_control(char32_t c);
// ASCII symbol ranges count as punctuation too, matching the reference
// tokenizer ("$", "^", "`" ...).
bool is_punctuation(char32_t c);
bool is_alphanumeric(char32_t c);

// Full Unicode lowercase mapping.
std::u32string to_lower(std::u32string_view text);
// Canonical decomposition with combining marks (Mn) removed.
std::u32string strip_accents(std::u32string_view text);
// Canonical composition, applied before splitting.
std::u32string nfc(std::u32string_view text);

}  // namespace embshape::unicode

#endif  // EMBSHAPE_SRC_UNICODE_TEXT_H_
