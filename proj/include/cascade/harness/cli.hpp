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

#ifndef CASCADE_HARNESS_CLI_HPP_
#define CASCADE_HARNESS_CLI_HPP_

#include <ostream>

namespace cascade::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Subcommands: attack, gen-dataset, eval, grad-check, synth-corpus.
// Global flags: --config <json>, --seed <u64>, --out <dir>.
int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err);

}  // namespace cascade::harness

#endif  // CASCADE_HARNESS_CLI_HPP_
