/* Copyright 2026 The LSR Authors. All Rights Reserved.

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

#ifndef LSR_RNG_HPP_
#define LSR_RNG_HPP_

#include <cstdint>

namespace lsr {

// Counter-based generator. Draw i (0-based) is the SplitMix64 finalizer
// applied to seed + (i + 1) * 0x9E3779B97F4A7C15, so a stream is fully
// determined by (seed, counter) on every platform. Derived floating-point
// draws only use IEEE arithmetic and std::log/std::cos/std::sqrt.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t NextU64();
  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n), rejection-sampled so there is no modulo bias.
  std::uint64_t UniformInt(std::uint64_t n);
  // Inclusive range.
  int UniformInt(int lo, int hi);
  // Standard normal via Box-Muller; consumes exactly two draws.
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }
  bool Bernoulli(double p) { return Uniform() < p; }

  // Independent child stream keyed by `stream`; does not advance this one.
  Rng Fork(std::uint64_t stream) const;

  static std::uint64_t Mix(std::uint64_t z);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace lsr

#endif  // LSR_RNG_HPP_
