/* Copyright 2026 The Cascade Attack Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CASCADE_ENCODER_TOKENIZER_HPP_
#define CASCADE_ENCODER_TOKENIZER_HPP_

#include <cstddef>
#include <string_view>
#include <vector>

namespace cascade::encoder {

inline constexpr std::size_t kVocabSize = 4096;

struct TextTokens {
  std::vector<std::size_t> ids;  // each in [0, kVocabSize)

  friend bool operator==(const TextTokens&, const TextTokens&) = default;
};

// ASCII lower-casing, split on runs of non-alphanumeric bytes, each token
// hashed with 64-bit FNV-1a and reduced mod kVocabSize. Text without any
// token maps to the reserved bucket 0.
TextTokens tokenize(std::string_view text);

}  // namespace cascade::encoder

#endif  // CASCADE_ENCODER_TOKENIZER_HPP_
