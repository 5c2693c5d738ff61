// tdsv/rng.h

// Copyright 2026  The tdsv Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TDSV_RNG_H_
#define TDSV_RNG_H_

#include <cstdint>

namespace tdsv {

/// xoshiro256** seeded through SplitMix64.  The generator, the seeding and the
/// Gaussian transform are all spelled out here rather than taken from
/// <random>, whose distributions are not reproducible across standard
/// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t NextU64();
  /// Uniform in [0, 1) with 53 random bits.
  double Uniform();
  /// Uniform integer in [lo, hi] (inclusive).
  int UniformInt(int lo, int hi);
  /// Standard normal via Box-Muller; the second variate is cached.
  double Normal();

  /// Derives an independent stream from a seed and a tag, so that e.g. the
  /// parameters of speaker 3 do not depend on how many speakers precede it.
  static std::uint64_t Derive(std::uint64_t seed, std::uint64_t tag);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t SplitMix64(std::uint64_t *state);

}  // namespace tdsv

#endif  // TDSV_RNG_H_
