// Copyright 2026 The spr Authors
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

#ifndef SPR_RNG_HPP
#define SPR_RNG_HPP

#include <cstdint>

namespace spr {

// SplitMix64. 64-bit state, fixed update rule, so streams are reproducible
// bit-for-bit across platforms and standard library versions. Fixture files
// and synthetic datasets depend on this staying frozen.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1). Uses the top 53 bits; the scale is exact in IEEE
  // double, so results are portable.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t below(uint64_t n) { return next_u64() % n; }

  // Derive an independent stream for a substream index. Used so that scene i
  // of a dataset does not depend on how many draws scene i-1 consumed.
  static SplitMix64 fork(uint64_t seed, uint64_t index) {
    SplitMix64 mixer(seed ^ (0xA0761D6478BD642FULL * (index + 1)));
    return SplitMix64(mixer.next_u64());
  }

 private:
  uint64_t state_;
};

// Uniform point in the unit disc (2D) or unit ball (3D) by rejection.
// Only +,-,*,comparisons are used, so the stream stays portable.
inline void unit_disc(SplitMix64& rng, double& x, double& y) {
  for (;;) {
    x = rng.uniform(-1.0, 1.0);
    y = rng.uniform(-1.0, 1.0);
    if (x * x + y * y <= 1.0) return;
  }
}

inline void unit_ball(SplitMix64& rng, double& x, double& y, double& z) {
  for (;;) {
    x = rng.uniform(-1.0, 1.0);
    y = rng.uniform(-1.0, 1.0);
    z = rng.uniform(-1.0, 1.0);
    if (x * x + y * y + z * z <= 1.0) return;
  }
}

}  // namespace spr

#endif  // SPR_RNG_HPP
