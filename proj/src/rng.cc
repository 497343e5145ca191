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

#include "regtopk/rng.h"

#include <cmath>

namespace regtopk {

std::uint64_t SplitMix64Finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

CounterRng CounterRng::Substream(std::uint64_t seed, std::uint64_t index,
                                 std::string_view tag) {
  std::uint64_t key = SplitMix64Finalize(seed ^ 0x6A09E667F3BCC909ULL);
  key = SplitMix64Finalize(key + index * kGamma);
  key = SplitMix64Finalize(key ^ Fnv1a64(tag));
  return CounterRng(key);
}

std::uint64_t CounterRng::NextU64() {
  ++counter_;
  return SplitMix64Finalize(key_ + counter_ * kGamma);
}

double CounterRng::NextUniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double CounterRng::NextOpenUniform() {
  // (m + 0.5) / 2^53 never hits 0 or 1.
  return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::NextNormal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * NextUniform() - 1.0;
    v = 2.0 * NextUniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t repeat) {
  return SplitMix64Finalize(base + (repeat + 1) * CounterRng::kGamma);
}

}  // namespace regtopk
