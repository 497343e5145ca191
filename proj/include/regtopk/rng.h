/*
 * Copyright 2026 The RegTop-k Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef REGTOPK_RNG_H_
#define REGTOPK_RNG_H_

#include <cstdint>
#include <string_view>

namespace regtopk {

// Counter-based generator: the i-th output of a stream is
// SplitMix64Finalize(key + (i + 1) * kGamma). Streams are keyed by
// (seed, worker index, purpose tag), so draws never depend on scheduling.
//
// Normal and uniform conversions are implemented here rather than through
// <random> distributions, whose output is implementation-defined.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  // Substream for (seed, index, tag).
  static CounterRng Substream(std::uint64_t seed, std::uint64_t index,
                              std::string_view tag);

  std::uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double NextUniform();
  // Uniform on the open interval (0, 1).
  double NextOpenUniform();
  // Standard normal via Marsaglia's polar method.
  double NextNormal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t SplitMix64Finalize(std::uint64_t z);

// 64-bit FNV-1a, used for stream tags and config hashes.
std::uint64_t Fnv1a64(std::string_view bytes);

// Seed of the r-th repeat derived from a base seed.
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t repeat);

}  // namespace regtopk

#endif  // REGTOPK_RNG_H_
