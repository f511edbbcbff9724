// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace paircorr {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the k-th draw of a stream is a pure function of
/// (key, k). Substreams are keyed by (seed, index), so sample i is
/// reproducible regardless of which thread draws it or in which order.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  constexpr explicit CounterRng(std::uint64_t key) noexcept : key_(mix64(key)) {}

  static constexpr CounterRng substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return CounterRng(mix64(seed) ^ mix64(index * kGolden + 0x632be59bd9b4e019ULL));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept { return mix64(key_ + (++counter_) * kGolden); }

  /// Uniform double in [0,1) with 53 random bits.
  constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace paircorr
