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

#include "cascade/encoder/tokenizer.hpp"

#include <string>

#include "cascade/numcore/hash.hpp"

namespace cascade::encoder {

namespace {

bool is_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char lower(unsigned char c) {
  return static_cast<char>((c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c);
}

}  // namespace

TextTokens tokenize(std::string_view text) {
  TextTokens out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    out.ids.push_back(static_cast<std::size_t>(numcore::fnv1a(token) % kVocabSize));
    token.clear();
  };
  for (unsigned char c : text) {
    if (is_alnum(c)) {
      token.push_back(lower(c));
    } else {
      flush();
    }
  }
  flush();
  if (out.ids.empty()) out.ids.push_back(0);
  return out;
}

}  // namespace cascade::encoder
