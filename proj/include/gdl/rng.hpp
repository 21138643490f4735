/*
 * Copyright 2026 the gan-detect-lab authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GDL_RNG_HPP_
#define GDL_RNG_HPP_

#include <cstdint>
#include <random>

namespace gdl {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; decorrelates nearby seed values.
constexpr uint64_t hash_mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Named sub-streams derived from one experiment seed. Every consumer of
/// randomness owns a stream tag so adding a consumer never shifts the draws
/// seen by another.
enum class Stream : uint64_t {
  split = 1,
  shuffle = 2,
  augment = 3,
  init = 4,
  dropout = 5,
  synth = 6,
  minmax = 7,
};

constexpr uint64_t derive_seed(uint64_t seed, Stream stream, uint64_t a = 0,
                               uint64_t b = 0) {
  uint64_t h = hash_mix(seed);
  h = hash_mix(h ^ static_cast<uint64_t>(stream));
  h = hash_mix(h ^ a);
  h = hash_mix(h ^ b);
  return h;
}

inline Rng make_rng(uint64_t seed, Stream stream, uint64_t a = 0,
                    uint64_t b = 0) {
  return Rng(derive_seed(seed, stream, a, b));
}

}  // namespace gdl

#endif  // GDL_RNG_HPP_
