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

#ifndef CASCADE_NUMCORE_HASH_HPP_
#define CASCADE_NUMCORE_HASH_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace cascade::numcore {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

// 64-bit FNV-1a. `state` lets callers chain several buffers.
constexpr std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = kFnvOffset) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

std::uint64_t fnv1a_bytes(std::span<const unsigned char> bytes,
                          std::uint64_t state = kFnvOffset);

std::string to_hex(std::uint64_t value);

}  // namespace cascade::numcore

#endif  // CASCADE_NUMCORE_HASH_HPP_
