// Copyright 2026 The usersim Authors.
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

#ifndef USERSIM_TEXT_H_
#define USERSIM_TEXT_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace usersim {

using Tokens = std::vector<std::string>;

// The one tokenizer used everywhere: lowercase, whitespace split, with
// leading and trailing punctuation peeled off as separate tokens. Inner
// punctuation survives, so "12:15" and "i'm" stay whole.
Tokens tokenize(std::string_view text);
std::string join(const Tokens& tokens, std::string_view sep = " ");
// tokenize() then join(): the canonical stored form of an utterance.
std::string canonical(std::string_view text);

// 64-bit FNV-1a. Stable across platforms, used for derived seeds, config
// hashes and booking references.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// Deterministic child seed for a named sub-stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 random bits; identical on every
// platform, unlike std::uniform_real_distribution.
double uniform01(Rng& rng);
// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace usersim

#endif  // USERSIM_TEXT_H_
