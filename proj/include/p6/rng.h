// Copyright 2026 The P6 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef P6_RNG_H_
#define P6_RNG_H_

#include <cstdint>
#include <random>

namespace p6 {

// Seeded random stream. Every random draw in the tool goes through this
// class, and every campaign derives its own stream with Rng::substream, so
// runs replay bit-exactly regardless of scheduling.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Unbiased draw in [0, bound). bound must be > 0.
  uint64_t below(uint64_t bound) {
    // Rejection sampling; the loop body runs once in almost all cases.
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double real01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Derives a decorrelated seed for stream number `stream` under `seed`.
  // splitmix64 finalizer; stable across platforms.
  static uint64_t substream(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace p6

#endif  // P6_RNG_H_
