// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Pair correlation of alpha n^theta mod 1 for a few alpha drawn from mu.

#include <cstdio>

#include "paircorr/paircorr.hpp"

int main() {
  const double theta = 0.5;
  const std::int64_t N = 100000;
  const double s_values[] = {0.5, 1.0, 2.0};
  const auto f = paircorr::canonical_f(), h = paircorr::canonical_h();
  std::printf("smoothed limit %.6f\n", paircorr::poisson_limit(f, h));
  for (double alpha : paircorr::MuMeasure(theta).samples(3, 42)) {
    const auto ps = paircorr::dyadic_window(theta, alpha, N);
    std::printf("alpha = %.6f\n", alpha);
    for (const auto& e : paircorr::pair_corr_counts(ps, s_values))
      std::printf("  s = %.2f  R = %.4f  (Poisson %.2f)\n", e.s, e.normalized, e.poisson_ref);
    std::printf("  smoothed %.6f\n", paircorr::pair_corr_smooth({theta, alpha, 1 << 14}, f, h));
  }
}
