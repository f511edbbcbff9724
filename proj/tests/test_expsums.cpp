// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "paircorr/expsums.hpp"

namespace paircorr {
namespace {

constexpr double kPi = std::numbers::pi;

// Plain O(N) evaluation with long double phases; no sharing of
// precomputed data with DirectSums.
complex naive_direct(double theta, double alpha, std::int64_t N, std::int64_t j, const TestKernel& h) {
  long double re = 0, im = 0;
  for (std::int64_t y = 1; y <= 3 * N; ++y) {
    const double w = h(static_cast<double>(y) / static_cast<double>(N));
    if (w == 0.0) continue;
    long double ph = static_cast<long double>(alpha) * j * std::pow(static_cast<long double>(y), static_cast<long double>(theta));
    ph -= std::floor(ph);
    re += w * std::cos(2 * std::numbers::pi_v<long double> * ph);
    im += w * std::sin(2 * std::numbers::pi_v<long double> * ph);
  }
  return {static_cast<double>(re), static_cast<double>(im)};
}

// The stationary-phase sum written straight from its definition, scanning m
// over a wide range and letting h select the window.
complex naive_bprocess(double theta, double alpha, std::int64_t N, std::int64_t j, const TestKernel& h) {
  const long double t = theta, T = 1.0L / (1.0L - t), a = alpha, lj = static_cast<long double>(j);
  const long double c2 = std::pow(t, T - 1) - std::pow(t, T);
  const complex c1 = std::polar(static_cast<double>(std::pow(t, T / 2) / std::sqrt(1 - t)), -kPi / 4);
  long double re = 0, im = 0;
  for (std::int64_t m = 1; m <= 4 * j + 10; ++m) {
    const long double lm = static_cast<long double>(m);
    const long double arg = std::pow(t * a * lj, T) / (static_cast<long double>(N) * std::pow(lm, T));
    const double hv = h(static_cast<double>(arg));
    if (hv == 0.0) continue;
    long double ph = c2 * std::pow(a * lj, T) / std::pow(lm, T - 1);
    ph -= std::floor(ph);
    const long double amp = std::pow(lm, -(T + 1) / 2) * hv;
    re += amp * std::cos(2 * std::numbers::pi_v<long double> * ph);
    im += amp * std::sin(2 * std::numbers::pi_v<long double> * ph);
  }
  return c1 * static_cast<double>(std::pow(a * lj, T / 2)) * complex(static_cast<double>(re), static_cast<double>(im));
}

// (1/N) sum_{x != y} h h F_N(alpha (x^theta - y^theta)), all pairs.
double naive_pair_corr(double theta, double alpha, std::int64_t N, const TestKernel& f, const TestKernel& h) {
  std::vector<long double> ph;
  std::vector<double> w;
  for (std::int64_t y = 1; y <= 3 * N; ++y) {
    const double v = h(static_cast<double>(y) / static_cast<double>(N));
    if (v == 0.0) continue;
    w.push_back(v);
    ph.push_back(static_cast<long double>(alpha) * std::pow(static_cast<long double>(y), static_cast<long double>(theta)));
  }
  long double s = 0;
  for (std::size_t a = 0; a < w.size(); ++a)
    for (std::size_t b = 0; b < w.size(); ++b)
      if (a != b) s += w[a] * w[b] * periodize(f, N, static_cast<double>(frac(ph[a] - ph[b])));
  return static_cast<double>(s) / static_cast<double>(N);
}

TEST(SequenceSpec, ValidatesAndDerivesTheta) {
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto s = SequenceSpec::make(t, 1.5, 10);
    EXPECT_GT(s.Theta(), 1.0);
    EXPECT_NEAR(1.0 - 1.0 / s.Theta(), t, 1e-15);
  }
  EXPECT_THROW(SequenceSpec::make(1.0, 1.5, 10), argument_error);
  EXPECT_THROW(SequenceSpec::make(0.5, 2.5, 10), argument_error);
  EXPECT_THROW(SequenceSpec::make(0.5, 1.5, 0), argument_error);
}

TEST(Constants, HalfTheta) {
  const auto c = bprocess_constants(0.5);
  EXPECT_NEAR(std::abs(c.c1), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::arg(c.c1), -kPi / 4, 1e-12);
  EXPECT_NEAR(static_cast<double>(c.c2), 0.25, 1e-15);
  EXPECT_NEAR(c.Theta, 2.0, 0.0);
}

TEST(Constants, ClosedFormsOnGrid) {
  for (int i = 1; i <= 9; ++i) {
    const double t = 0.1 * i;
    const auto c = bprocess_constants(t);
    const double T = 1.0 / (1.0 - t);
    EXPECT_GT(c.c2, 0.0L);
    EXPECT_NEAR(std::abs(c.c1), std::pow(t, 1.0 / (2.0 * (1.0 - t))) / std::sqrt(1.0 - t), 1e-12);
    EXPECT_NEAR(std::arg(c.c1), -kPi / 4, 1e-12);
    EXPECT_NEAR(c.c1_abs2, std::norm(c.c1), 1e-12 * c.c1_abs2);
    EXPECT_NEAR(c.c1_abs2 * (1.0 - t) / std::pow(t, T), 1.0, 1e-13);
  }
  EXPECT_THROW(bprocess_constants(0.0), argument_error);
  EXPECT_THROW(bprocess_constants(1.0), argument_error);
}

TEST(StationaryPoint, Examples) {
  const SequenceSpec s{0.5, 1.0, 100};
  EXPECT_NEAR(stationary_point(s, 10, 1), 25.0, 1e-12);
  EXPECT_NEAR(stationary_point(s, 10, 5), 1.0, 1e-14);
  EXPECT_THROW(stationary_point(s, 10, 0), argument_error);
}

TEST(StationaryPoint, SolvesDerivativeEquation) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> th(0.1, 0.9), al(1.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const SequenceSpec s{th(gen), al(gen), 1000};
    const std::int64_t j = 1 + static_cast<std::int64_t>(gen() % 5000);
    const std::int64_t m = 1 + static_cast<std::int64_t>(gen() % 50);
    const double x = stationary_point(s, j, m);
    const double deriv = s.theta * s.alpha * static_cast<double>(j) * std::pow(x, s.theta - 1.0);
    EXPECT_NEAR(deriv, static_cast<double>(m), 1e-10 * static_cast<double>(m));
  }
}

TEST(DirectSum, HandEnumeratedMicroCase) {
  // h(y/2) is nonzero only at y = 3, where it equals e^{-1}
  const auto e = exp_sum_direct({0.5, 1.0, 2}, canonical_h(), 1);
  const complex expect = std::exp(-1.0) * std::polar(1.0, kTwoPi * std::sqrt(3.0));
  EXPECT_NEAR(std::abs(e - expect), 0.0, 1e-15);
}

TEST(DirectSum, ZeroFrequencyIsMass) {
  const SequenceSpec s{0.5, 1.3, 1000};
  const auto e = exp_sum_direct(s, canonical_h(), 0);
  EXPECT_EQ(e.imag(), 0.0);
  EXPECT_NEAR(e.real() / 1000.0, kernel_integral(canonical_h()), 1e-9);
}

TEST(DirectSum, MatchesNaiveOracle) {
  const auto h = canonical_h();
  for (double theta : {0.3, 0.5, 0.7}) {
    for (std::int64_t j : {1, 17, 1000, 123456}) {
      const SequenceSpec s{theta, 1.37, 700};
      EXPECT_NEAR(std::abs(exp_sum_direct(s, h, j) - naive_direct(theta, 1.37, 700, j, h)), 0.0, 1e-9)
          << theta << " " << j;
    }
  }
  EXPECT_THROW(exp_sum_direct({0.5, 1.0, 10}, h, -1), argument_error);
}

TEST(DirectSum, ConjugateSymmetry) {
  const auto h = canonical_h();
  const SequenceSpec s{0.4, 1.61, 900};
  SequenceSpec neg = s;
  neg.alpha = -s.alpha;
  const DirectSums d(s, h), dn(neg, h);
  for (std::int64_t j : {1, 5, 333}) {
    EXPECT_NEAR(std::abs(d(j) - std::conj(dn(j))), 0.0, 1e-11);
    EXPECT_NEAR(std::abs(d(-j) - std::conj(d(j))), 0.0, 1e-11);
  }
}

TEST(DirectSum, RangeMatchesPointwise) {
  const DirectSums d({0.5, 1.21, 2000}, canonical_h());
  const auto e = d.range(1, 9000);
  for (std::int64_t j : {1, 2, 63, 64, 65, 4095, 4096, 4097, 9000}) {
    EXPECT_NEAR(std::abs(e[static_cast<std::size_t>(j - 1)] - d(j)), 0.0, 1e-10) << j;
  }
}

TEST(DirectSum, TrivialBound) {
  const DirectSums d({0.6, 1.9, 1500}, canonical_h());
  const auto e = d.range(1, 3000);
  for (const auto& v : e) EXPECT_LE(std::abs(v), d.mass() * (1 + 1e-14));
}

TEST(BProcess, EmptyWindowGivesZero) {
  const SequenceSpec s{0.5, 1.0, 10000};
  // theta alpha j N^{theta-1} = j / 200 < 1
  EXPECT_TRUE(stationary_window(s, canonical_h(), 150).empty());
  EXPECT_EQ(exp_sum_bprocess(s, canonical_h(), 150), complex(0.0, 0.0));
  const auto p = exp_sum_pair(s, canonical_h(), 150);
  EXPECT_TRUE(p.m_range.empty());
  EXPECT_EQ(p.short_sum, complex(0.0, 0.0));
}

TEST(BProcess, WindowEqualsSupportOracle) {
  const auto h = canonical_h();
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> al(1.0, 2.0);
  for (double theta : {0.3, 0.5, 0.7}) {
    for (int i = 0; i < 20; ++i) {
      const SequenceSpec s{theta, al(gen), 5000};
      const std::int64_t j = 1000 + static_cast<std::int64_t>(gen() % 20000);
      const auto w = stationary_window(s, h, j);
      std::int64_t lo = 0, hi = -1;
      for (std::int64_t m = 1; m <= 4 * j; ++m) {
        const double arg = std::pow(s.theta * s.alpha * j, s.Theta()) / (5000.0 * std::pow(double(m), s.Theta()));
        if (arg >= 1.0 && arg <= 2.0) {
          if (hi < lo) lo = m;
          hi = m;
        }
      }
      EXPECT_EQ(w.lo, lo);
      EXPECT_EQ(w.hi, hi);
    }
  }
}

TEST(BProcess, MatchesDefinitionOracle) {
  const auto h = canonical_h();
  for (double theta : {0.3, 0.5, 0.7}) {
    for (std::int64_t j : {800, 5000, 20000}) {
      const SequenceSpec s{theta, 1.44, 3000};
      const complex got = exp_sum_bprocess(s, h, j);
      const complex ref = naive_bprocess(theta, 1.44, 3000, j, h);
      EXPECT_NEAR(std::abs(got - ref), 0.0, 1e-9 * (1.0 + std::abs(ref))) << theta << " " << j;
    }
  }
}

TEST(BProcess, ApproximatesDirectSum) {
  const auto h = canonical_h();
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> al(1.0, 2.0);
  for (int i = 0; i < 5; ++i) {
    const auto s = SequenceSpec::make(0.5, al(gen), 10000);
    const auto p = exp_sum_pair(s, h, 10000);
    EXPECT_LE(p.ratio(), 10.0) << s.alpha;
  }
}

TEST(SSum, EmptyAndNonnegative) {
  const SequenceSpec s{0.5, 1.2, 300};
  EXPECT_EQ(s_sum(s, canonical_f(), canonical_h(), 0, false), 0.0);
  EXPECT_EQ(s_sum(s, make_zero(-1, 1), canonical_h(), 100, false), 0.0);
  // f^ of the bump is positive on [0, 1], so every term is nonnegative
  EXPECT_GE(s_sum(s, canonical_f(), canonical_h(), 300, false), 0.0);
  EXPECT_GE(s_sum(s, canonical_f(), canonical_h(), 300, true), 0.0);
}

TEST(SSum, ShortRouteMatchesPerTermSum) {
  const SequenceSpec s{0.5, 1.5, 400};
  const auto f = canonical_f(), h = canonical_h();
  double ref = 0.0;
  for (std::int64_t j = 1; j <= 500; ++j) ref += fourier(f, j / 400.0).real() * std::norm(exp_sum_bprocess(s, h, j));
  EXPECT_NEAR(s_sum(s, f, h, 500, true), 2.0 * ref / (400.0 * 400.0), 1e-12);
}

TEST(PairCorr, SweepMatchesAllPairs) {
  const auto f = canonical_f(), h = canonical_h();
  for (double theta : {0.3, 0.5, 0.8}) {
    for (std::int64_t N : {1, 3, 50, 300}) {
      const SequenceSpec s{theta, 1.73, N};
      EXPECT_NEAR(pair_corr_smooth(s, f, h), naive_pair_corr(theta, 1.73, N, f, h), 1e-12) << theta << " " << N;
    }
  }
}

TEST(PairCorr, ZeroKernels) {
  const SequenceSpec s{0.5, 1.2, 100};
  EXPECT_EQ(pair_corr_smooth(s, make_zero(-1, 1), canonical_h()), 0.0);
  EXPECT_EQ(pair_corr_smooth(s, canonical_f(), make_zero(1, 2)), 0.0);
}

TEST(PairCorr, TwoRouteIdentity) {
  const auto f = canonical_f(), h = canonical_h();
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> al(1.0, 2.0);
  for (std::int64_t N : {64, 256, 512}) {
    const SequenceSpec s{0.5, al(gen), N};
    const double direct = pair_corr_smooth(s, f, h);
    const double fourier_side = pair_corr_fourier(s, f, h, 40 * N);
    EXPECT_NEAR(fourier_side, direct, 1e-6 * std::abs(direct)) << N;
  }
}

TEST(PairCorr, RelatingRAndS) {
  const auto f = canonical_f(), h = canonical_h();
  const SequenceSpec s{0.5, 1.618, 256};
  const double direct = pair_corr_smooth(s, f, h);
  const double ih2 = kernel_integral_of_square(h);
  const double via_s = s_sum(s, f, h, 4096, false) + poisson_limit(f, h) - f(0.0) * ih2;
  EXPECT_NEAR(via_s, direct, 1e-6);
}

TEST(ROff, VanishesWithoutOffDiagonalPairs) {
  const auto f = canonical_f(), h = canonical_h();
  const SequenceSpec s{0.5, 1.0, 4};
  for (std::int64_t j = 1; j <= j_window(4, 0.05).hi; ++j) EXPECT_LE(stationary_window(s, h, j).size(), 1);
  EXPECT_EQ(r_off(s, f, h), 0.0);
}

TEST(ROff, ExplicitAndFastRoutesAgree) {
  const auto f = canonical_f(), h = canonical_h();
  for (double theta : {0.3, 0.5, 0.7}) {
    const StationarySums sums(theta, 2048, f, h, 0.1);
    for (double alpha : {1.07, 1.5}) {
      const auto fast = sums.evaluate(alpha, false);
      const auto slow = sums.evaluate(alpha, true);
      EXPECT_NEAR(fast.r_off, slow.r_off, 1e-10 * (1.0 + std::abs(slow.r_off))) << theta;
      EXPECT_LT(std::abs(slow.r_off_imag), 1e-10 * (std::abs(slow.r_off) + 1.0));
    }
  }
  EXPECT_THROW(r_off({0.5, 1.2, 100}, f, h, 0.2), argument_error);
  EXPECT_THROW(r_off({0.5, 1.2, 100}, f, h, 0.0), argument_error);
}

TEST(ROff, DiagonalCancellation) {
  const auto f = canonical_f(), h = canonical_h();
  for (std::int64_t N : {256, 1024, 4096}) {
    const StationarySums sums(0.5, N, f, h);
    const auto d = sums.evaluate(1.31, true);
    // S~ computed from |E~|^2 minus its m = n part is the explicit m != n sum
    EXPECT_NEAR(d.s_tilde - d.diagonal, d.r_off, 1e-8) << N;
  }
}

TEST(ROff, ShortSumMatchesSTildeRoute) {
  // S~ equals s_sum over the short sums restricted to the j window
  const auto f = canonical_f(), h = canonical_h();
  const SequenceSpec s{0.5, 1.77, 1024};
  const StationarySums sums(0.5, 1024, f, h);
  const auto w = sums.j_range();
  const double expect = s_sum(s, f, h, w.hi, true) - s_sum(s, f, h, w.lo - 1, true);
  EXPECT_NEAR(sums.evaluate(s.alpha).s_tilde, expect, 1e-10 * (1.0 + expect));
}

TEST(ROff, PredictsPairCorrelation) {
  const auto f = canonical_f(), h = canonical_h();
  const double limit = poisson_limit(f, h);
  for (double alpha : {1.13, 1.52, 1.91}) {
    const SequenceSpec s{0.5, alpha, 4096};
    const double r = pair_corr_smooth(s, f, h);
    EXPECT_NEAR(r, limit + r_off(s, f, h), 0.05) << alpha;
  }
}

TEST(Diagonal, MainTermAtLargeW) {
  const auto h = canonical_h();
  // at theta = 0.7 the n-window [W/2, W]^{1/Theta} holds a single integer at W = 1000
  for (auto [theta, W] : {std::pair{0.3, 1e3}, {0.5, 1e3}, {0.7, 1e6}}) {
    // choose j so that W = (theta alpha j)^Theta / N
    const double T = 1.0 / (1.0 - theta);
    const std::int64_t N = 1000;
    const double j = std::pow(W * N, 1.0 / T) / theta;
    const SequenceSpec s{theta, j / std::floor(j), N};
    const auto d = diagonal_w_term(s, static_cast<std::int64_t>(std::floor(j)), h);
    EXPECT_NEAR(d.W, W, 1e-9 * W);
    EXPECT_FALSE(d.regime_warning);
    EXPECT_NEAR(d.sum / d.main_term, 1.0, 1e-2) << theta;
  }
}

TEST(Diagonal, DoublingWHalvesMainTerm) {
  const auto h = canonical_h();
  const SequenceSpec s{0.5, 1.0, 1000};
  // W = j^2 / 4000; j -> sqrt(2) j doubles W
  const auto a = diagonal_w_term(s, 2000, h);
  const auto b = diagonal_w_term({0.5, std::sqrt(2.0), 1000}, 2000, h);
  EXPECT_NEAR(b.W / a.W, 2.0, 1e-12);
  EXPECT_NEAR(b.main_term / a.main_term, 0.5, 1e-12);
  EXPECT_NEAR(b.sum / a.sum, 0.5, 0.5e-2);
}

TEST(Diagonal, ZeroKernelAndRegimeFlag) {
  const auto d = diagonal_w_term({0.5, 1.0, 1000}, 10, make_zero(1, 2));
  EXPECT_EQ(d.sum, 0.0);
  EXPECT_EQ(d.main_term, 0.0);
  EXPECT_TRUE(diagonal_w_term({0.5, 1.0, 1000}, 10, canonical_h()).regime_warning);
}

}  // namespace
}  // namespace paircorr
