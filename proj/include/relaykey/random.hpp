// Copyright 2026 The relaykey Authors
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

// Deterministic random streams. Every consumer derives its own generator from
// (master seed, stream tag, index) so results do not depend on call order.

#ifndef RELAYKEY_RANDOM_HPP_
#define RELAYKEY_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <span>

namespace relaykey {

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Stream : std::uint64_t {
  kOptimizerRestart = 1,
  kCodebookUser1 = 2,
  kCodebookUser2 = 3,
  kCodebookRelay = 4,
  kTrial = 5,
  kZPartition = 6,
  kSelftest = 7,
};

inline std::uint64_t DeriveSeed(std::uint64_t master, Stream stream,
                                std::uint64_t index = 0) {
  return SplitMix64(SplitMix64(master ^ SplitMix64(static_cast<std::uint64_t>(stream))) +
                    index);
}

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits.
inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, bound).
inline std::uint64_t UniformBelow(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

// Inverse-CDF draw from a probability vector. Zero-mass symbols are never
// returned.
inline std::size_t SampleIndex(Rng& rng, std::span<const double> probs) {
  const double u = UniformUnit(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

}  // namespace relaykey

#endif  // RELAYKEY_RANDOM_HPP_
