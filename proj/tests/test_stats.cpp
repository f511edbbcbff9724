// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "paircorr/stats.hpp"

namespace paircorr {
namespace {

std::int64_t brute_count(const std::vector<double>& p, double r) {
  std::int64_t c = 0;
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = 0; b < p.size(); ++b) {
      if (a == b) continue;
      const double d = std::abs(p[a] - p[b]);
      if (std::min(d, 1.0 - d) <= r) ++c;
    }
  return c;
}

PointSet from(std::vector<double> v) { return {std::move(v), "test"}; }

TEST(FractionalParts, Examples) {
  const auto ps = fractional_parts(0.5, 1.0, 1, 4);
  ASSERT_EQ(ps.N(), 4u);
  EXPECT_NEAR(ps.points[1], 0.41421356237309504880, 1e-15);
  EXPECT_EQ(ps.points[3], 0.0);
  const auto sq = fractional_parts(0.5, 1.0, 1, 10, true);
  EXPECT_EQ(sq.N(), 7u);  // 1, 4, 9 removed
  EXPECT_THROW(fractional_parts(1.0, 1.0, 1, 10), argument_error);
  EXPECT_THROW(fractional_parts(0.5, 1.0, 5, 4), argument_error);
}

TEST(FractionalParts, ExtendedPrecisionReduction) {
  // sqrt(n^2 + 1) - n = 1/(sqrt(n^2+1) + n), with n^2 + 1 near 10^7
  const std::int64_t n = 3000;
  const auto ps = fractional_parts(0.5, 1.0, n * n + 1, n * n + 1);
  const double expect = 1.0 / (std::sqrt(static_cast<double>(n * n + 1)) + static_cast<double>(n));
  EXPECT_NEAR(ps.points[0], expect, 1e-15);
  for (double p : fractional_parts(0.37, 1.9, 1, 5000).points) {
    EXPECT_GE(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(FractionalParts, Squares) {
  EXPECT_TRUE(is_perfect_square(0));
  EXPECT_TRUE(is_perfect_square(4000000000000LL));
  EXPECT_FALSE(is_perfect_square(4000000000001LL));
  EXPECT_FALSE(is_perfect_square(3999999999999LL));
}

TEST(PairCorrCount, HandExamples) {
  const auto a = pair_corr_count(from({0.1, 0.2}), 0.5);
  EXPECT_EQ(a.count, 2);
  EXPECT_DOUBLE_EQ(a.normalized, 1.0);
  EXPECT_DOUBLE_EQ(a.poisson_ref, 1.0);
  EXPECT_EQ(pair_corr_count(from({0.0, 0.5}), 0.5).count, 0);
  // torus wrap: 0.95 and 0.02 are 0.07 apart
  EXPECT_EQ(pair_corr_count(from({0.95, 0.02, 0.5}), 0.3).count, 2);
  EXPECT_THROW(pair_corr_count(from({0.1}), 0.0), argument_error);
}

TEST(PairCorrCount, MatchesBruteForce) {
  std::mt19937_64 gen(42);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + gen() % 1999;
    std::vector<double> p(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // half of the trials cluster the points to create many close pairs
    const bool clustered = trial % 2 == 1;
    for (auto& x : p) x = clustered ? std::fmod(0.9 + 0.2 * u(gen) * u(gen), 1.0) : u(gen);
    const double s = std::ldexp(u(gen), static_cast<int>(gen() % 8));
    const auto est = pair_corr_count(from(p), s);
    EXPECT_EQ(est.count, brute_count(p, s / static_cast<double>(n))) << n << " " << s;
  }
}

TEST(PairCorrCount, LargeRadiusCountsAllPairs) {
  const auto est = pair_corr_count(from({0.1, 0.4, 0.8}), 3.0);
  EXPECT_EQ(est.count, 6);
}

TEST(PairCorrCount, TranslationInvariance) {
  // dyadic points and shift keep the arithmetic exact
  std::mt19937_64 gen(9);
  std::vector<double> p(3000), q(3000);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::ldexp(static_cast<double>(gen() % (1u << 20)), -20);
    q[i] = std::fmod(p[i] + 0.375, 1.0);
  }
  for (double s : {0.1, 0.5, 1.0, 3.0}) EXPECT_EQ(pair_corr_count(from(p), s).count, pair_corr_count(from(q), s).count);
  const auto hp = gap_distribution(from(p), 64), hq = gap_distribution(from(q), 64);
  EXPECT_EQ(hp.counts, hq.counts);
  EXPECT_EQ(hp.overflow, hq.overflow);
}

TEST(PairCorrCount, UniformIsPoissonian) {
  const double s_values[] = {0.5, 1.0, 2.0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto est = pair_corr_counts(uniform_points(100000, seed), s_values);
    for (const auto& e : est) EXPECT_NEAR(e.normalized, e.poisson_ref, 0.05 * e.poisson_ref) << seed << " " << e.s;
  }
}

TEST(Gaps, SumToOne) {
  const auto g = circular_gaps(fractional_parts(0.5, 1.3, 1, 100000));
  double s = 0.0;
  for (double x : g) s += x;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_THROW(circular_gaps(from({0.3})), argument_error);
}

TEST(Gaps, EquallySpacedIsASpike) {
  std::vector<double> p(1024);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::ldexp(static_cast<double>(i), -10);
  const auto h = gap_distribution(from(p), 40);
  // rescaled gaps are all exactly 1, the left edge of bin 10
  EXPECT_EQ(h.counts[10], 1024);
  EXPECT_EQ(h.overflow, 0);
}

TEST(Gaps, UniformMatchesExponential) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto h = gap_distribution(uniform_points(100000, seed), 80);
    for (std::size_t i = 0; i < 10; ++i) {
      const double mid = h.edge(i) + 0.5 * h.width();
      EXPECT_NEAR(h.density(i), std::exp(-mid), 0.05) << seed << " " << mid;
    }
    EXPECT_NEAR(static_cast<double>(h.overflow) / 100000.0, std::exp(-4.0), 0.01);
  }
}

TEST(Gaps, MeanDensityNeedsAlignedRange) {
  const auto h = gap_distribution(uniform_points(1000, 3), 40);
  EXPECT_NO_THROW(h.mean_density(0.0, 0.5));
  EXPECT_THROW(h.mean_density(0.0, 0.55), argument_error);
  EXPECT_THROW(gap_distribution(from({0.2}), 10), argument_error);
}

}  // namespace
}  // namespace paircorr
