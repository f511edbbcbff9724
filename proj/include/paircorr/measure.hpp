// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
//
// The averaging measure d mu(alpha) = Theta rho(alpha^Theta) d alpha / alpha,
// the oscillatory integrals against it, and Monte Carlo second moments.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

#include "paircorr/expsums.hpp"
#include "paircorr/kernels.hpp"
#include "paircorr/numeric.hpp"
#include "paircorr/parallel.hpp"
#include "paircorr/rng.hpp"

namespace paircorr {

/// d mu on alpha; under beta = alpha^Theta it is rho(beta) d beta / beta.
class MuMeasure {
 public:
  explicit MuMeasure(double theta, TestKernel rho = canonical_rho(), std::uint64_t seed = 0)
      : theta_(theta), Theta_(1.0 / (1.0 - theta)), rho_(std::move(rho)), seed_(seed) {
    if (!(theta > 0.0 && theta < 1.0)) throw argument_error("MuMeasure: theta must lie in (0,1)");
    if (!(rho_.support_lo() > 0.0)) throw argument_error("MuMeasure: rho must be supported in (0, inf)");
    // envelope of rho(beta)/beta, with a margin over the sampled maximum
    const double lo = rho_.support_lo(), w = rho_.width();
    double sup = 0.0;
    for (int i = 0; i <= (1 << 16); ++i) {
      const double b = lo + w * std::ldexp(static_cast<double>(i), -16);
      sup = std::max(sup, rho_(b) / b);
    }
    if (!(sup > 0.0)) throw degenerate_input_error("MuMeasure: rho vanishes identically");
    envelope_ = sup * (1.0 + 1e-6);
    // cumulative mass on a beta grid, one Gauss-Legendre panel per cell
    const PanelRule cell(0.0, w / kCdfCells, 1);
    cdf_.assign(kCdfCells + 1, 0.0);
    CompensatedSum<double> acc;
    for (std::size_t c = 0; c < kCdfCells; ++c) {
      const double a = lo + w * static_cast<double>(c) / kCdfCells;
      acc.add(cell.integrate([&](double t) { return rho_(a + t) / (a + t); }));
      cdf_[c + 1] = acc.value();
    }
  }

  double theta() const noexcept { return theta_; }
  double Theta() const noexcept { return Theta_; }
  const TestKernel& rho() const noexcept { return rho_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Support of mu in alpha: [lo^{1/Theta}, hi^{1/Theta}].
  double alpha_lo() const { return std::pow(rho_.support_lo(), 1.0 / Theta_); }
  double alpha_hi() const { return std::pow(rho_.support_hi(), 1.0 / Theta_); }

  /// Density in alpha: Theta rho(alpha^Theta) / alpha.
  double density(double alpha) const {
    if (!(alpha > 0.0)) return 0.0;
    return Theta_ * rho_(std::pow(alpha, Theta_)) / alpha;
  }

  /// int g(alpha) d mu(alpha), computed in beta.
  template <typename G>
  double expectation(G&& g) const {
    return kernel_integral(rho_, [&](double b) { return g(std::pow(b, 1.0 / Theta_)) / b; });
  }

  double total_mass() const { return expectation([](double) { return 1.0; }); }

  /// mu((-inf, alpha]).
  double cdf(double alpha) const {
    if (!(alpha > 0.0)) return 0.0;
    const double b = std::pow(alpha, Theta_);
    const double pos = (b - rho_.support_lo()) / rho_.width() * kCdfCells;
    if (pos <= 0.0) return 0.0;
    if (pos >= kCdfCells) return cdf_.back();
    const auto i = static_cast<std::size_t>(pos);
    const double t = pos - static_cast<double>(i);
    return (1.0 - t) * cdf_[i] + t * cdf_[i + 1];
  }

  /// One draw: beta by rejection from rho(beta)/beta, then alpha = beta^{1/Theta}.
  double sample(CounterRng& rng) const {
    const double lo = rho_.support_lo(), w = rho_.width();
    for (;;) {
      const double b = lo + w * rng.uniform();
      if (rng.uniform() * envelope_ <= rho_(b) / b) return std::pow(b, 1.0 / Theta_);
    }
  }

  /// Draw i of the stream keyed by seed; independent of evaluation order.
  double sample_at(std::uint64_t seed, std::uint64_t i) const {
    auto rng = CounterRng::substream(seed, i);
    return sample(rng);
  }

  /// The next draw of this measure's own stream.
  double sample_alpha() { return sample_at(seed_, draws_++); }

  std::vector<double> samples(std::size_t count, std::uint64_t seed) const {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = sample_at(seed, i);
    return out;
  }

 private:
  static constexpr std::size_t kCdfCells = 4096;
  double theta_, Theta_;
  TestKernel rho_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  double envelope_ = 0.0;
  std::vector<double> cdf_;
};

inline double sample_alpha(MuMeasure& mu) { return mu.sample_alpha(); }

//---------------------------------------------------------------------------//
// Oscillatory integrals
//---------------------------------------------------------------------------//

namespace detail {

/// (theta j)^Theta / (N m^Theta), the h-argument at beta = 1.
inline long double x_arg(long double theta, long double Theta, std::int64_t N, std::int64_t j, std::int64_t m) {
  return std::exp(Theta * (std::log(theta * static_cast<long double>(j)) - std::log(static_cast<long double>(m))) -
                  std::log(static_cast<long double>(N)));
}

/// m^{1-Theta} - n^{1-Theta}.
inline long double z_value(long double Theta, std::int64_t m, std::int64_t n) {
  return std::pow(static_cast<long double>(m), 1.0L - Theta) - std::pow(static_cast<long double>(n), 1.0L - Theta);
}

/// Range of beta with every beta * x inside the support of h, intersected with [lo, hi].
inline std::pair<double, double> overlap(double lo, double hi, const TestKernel& h, std::initializer_list<double> xs) {
  for (double x : xs) {
    lo = std::max(lo, h.support_lo() / x);
    hi = std::min(hi, h.support_hi() / x);
  }
  return {lo, hi};
}

/// int weight(beta) e(freq beta) d beta over [lo, hi], with panels spanning at
/// most 1/8 period of the phase.
template <typename W>
complex fourier_in_beta(double lo, double hi, long double freq, W&& weight, double panel_scale = 1.0) {
  if (!(hi > lo)) return {0.0, 0.0};
  const auto panels = static_cast<std::size_t>(
      std::ceil(panel_scale * static_cast<double>(kernel_panels(hi - lo, static_cast<double>(freq)))));
  const PanelRule rule(lo, hi, panels);
  CompensatedSum<complex> acc;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double b = rule.nodes[i];
    const double w = weight(b);
    if (w == 0.0) continue;
    acc.add(rule.weights[i] * w * unit_phase(freq * static_cast<long double>(b)));
  }
  return acc.value();
}

}  // namespace detail

/// The frequency c2 j^Theta (m^{1-Theta} - n^{1-Theta}) of the single-frequency
/// integral in beta.
inline double osc_frequency(double theta, std::int64_t j, std::int64_t m, std::int64_t n) {
  const auto c = bprocess_constants(theta);
  return static_cast<double>(c.c2 * std::pow(static_cast<long double>(j), c.Theta) * detail::z_value(c.Theta, m, n));
}

/// I(j,m,n,N) = int alpha^Theta h(x_m alpha^Theta) h(x_n alpha^Theta) e(c2 (alpha j)^Theta (m^{1-Theta} - n^{1-Theta})) d mu
///            = int rho(beta) h(beta x_m) h(beta x_n) e(beta c2 j^Theta z) d beta.
inline complex osc_integral_single(double theta, std::int64_t N, std::int64_t j, std::int64_t m, std::int64_t n,
                                   const MuMeasure& mu, const TestKernel& h = canonical_h(),
                                   double panel_scale = 1.0) {
  if (m < 1 || n < 1 || j < 1 || N < 1) throw argument_error("osc_integral_single: indices must be >= 1");
  const auto c = bprocess_constants(theta);
  const auto xm = static_cast<double>(detail::x_arg(theta, c.Theta, N, j, m));
  const auto xn = static_cast<double>(detail::x_arg(theta, c.Theta, N, j, n));
  const long double freq = c.c2 * std::pow(static_cast<long double>(j), c.Theta) * detail::z_value(c.Theta, m, n);
  const TestKernel& rho = mu.rho();
  if (h.is_zero()) return {0.0, 0.0};
  const auto [lo, hi] = detail::overlap(rho.support_lo(), rho.support_hi(), h, {xm, xn});
  return detail::fourier_in_beta(
      lo, hi, freq, [&](double b) { return rho(b) * h(b * xm) * h(b * xn); }, panel_scale);
}

/// j1^Theta z1 - j2^Theta z2 with z_r = m_r^{1-Theta} - n_r^{1-Theta}.
inline double osc_vec_frequency(double theta, std::int64_t j1, std::int64_t j2, std::int64_t m1, std::int64_t n1,
                                std::int64_t m2, std::int64_t n2) {
  const long double T = 1.0L / (1.0L - static_cast<long double>(theta));
  return static_cast<double>(std::pow(static_cast<long double>(j1), T) * detail::z_value(T, m1, n1) -
                             std::pow(static_cast<long double>(j2), T) * detail::z_value(T, m2, n2));
}

/// The four-factor integral
///   int e(c2 alpha^Theta Y) prod_r h(x^{(r)}_{m_r} alpha^Theta) h(x^{(r)}_{n_r} alpha^Theta) alpha^{2 Theta} d mu
/// with Y = j1^Theta z1 - j2^Theta z2 and z_r = m_r^{1-Theta} - n_r^{1-Theta}; in beta the weight is beta rho(beta).
inline complex osc_integral_vec(double theta, std::int64_t N, std::int64_t j1, std::int64_t j2, std::int64_t m1,
                                std::int64_t n1, std::int64_t m2, std::int64_t n2, const MuMeasure& mu,
                                const TestKernel& h = canonical_h(), double panel_scale = 1.0) {
  if (std::min({j1, j2, m1, n1, m2, n2, N}) < 1) throw argument_error("osc_integral_vec: indices must be >= 1");
  const auto c = bprocess_constants(theta);
  const double x1m = static_cast<double>(detail::x_arg(theta, c.Theta, N, j1, m1));
  const double x1n = static_cast<double>(detail::x_arg(theta, c.Theta, N, j1, n1));
  const double x2m = static_cast<double>(detail::x_arg(theta, c.Theta, N, j2, m2));
  const double x2n = static_cast<double>(detail::x_arg(theta, c.Theta, N, j2, n2));
  const long double freq = c.c2 * static_cast<long double>(osc_vec_frequency(theta, j1, j2, m1, n1, m2, n2));
  const TestKernel& rho = mu.rho();
  if (h.is_zero()) return {0.0, 0.0};
  const auto [lo, hi] = detail::overlap(rho.support_lo(), rho.support_hi(), h, {x1m, x1n, x2m, x2n});
  return detail::fourier_in_beta(
      lo, hi, freq,
      [&](double b) { return b * rho(b) * h(b * x1m) * h(b * x1n) * h(b * x2m) * h(b * x2n); }, panel_scale);
}

//---------------------------------------------------------------------------//
// Monte Carlo second moments
//---------------------------------------------------------------------------//

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;  ///< sample standard deviation / sqrt(samples)
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Mean and standard error of g(alpha_i) over draws i < samples of (mu, seed).
template <typename G>
MomentEstimate monte_carlo(const MuMeasure& mu, std::int64_t samples, std::uint64_t seed, G&& g) {
  if (samples < 1) throw argument_error("monte_carlo: need at least one sample");
  constexpr std::int64_t kChunk = 16;
  const auto chunks = static_cast<std::size_t>((samples + kChunk - 1) / kChunk);
  const auto vals = parallel::map_chunks<std::vector<double>>(chunks, [&](std::size_t c) {
    std::vector<double> out;
    const std::int64_t lo = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t hi = std::min(samples, lo + kChunk);
    for (std::int64_t i = lo; i < hi; ++i) out.push_back(g(mu.sample_at(seed, static_cast<std::uint64_t>(i))));
    return out;
  });
  CompensatedSum<double> sum;
  for (const auto& v : vals)
    for (double x : v) sum.add(x);
  const double n = static_cast<double>(samples);
  const double mean = sum.value() / n;
  CompensatedSum<double> sq;
  for (const auto& v : vals)
    for (double x : v) sq.add((x - mean) * (x - mean));
  const double sd = samples > 1 ? std::sqrt(sq.value() / (n - 1.0)) : 0.0;
  return {mean, sd / std::sqrt(n), samples, seed};
}

}  // namespace detail

struct TildeEMoment {
  MomentEstimate full;      ///< E |E~_{N,j}|^2
  MomentEstimate diagonal;  ///< E of the m = n part |c1|^2 (alpha j)^Theta sum |u_m|^2
};

/// Monte Carlo second moment of E~_{N,j} under mu, with its diagonal part.
inline TildeEMoment second_moment_tilde_e_split(double theta, std::int64_t N, std::int64_t j, const MuMeasure& mu,
                                                std::int64_t samples, std::uint64_t seed,
                                                const TestKernel& h = canonical_h()) {
  if (j < 1 || static_cast<double>(j) >= static_cast<double>(N) * static_cast<double>(N))
    throw argument_error("second_moment_tilde_e: need 1 <= j < N^2");
  const auto c = bprocess_constants(theta);
  auto full = detail::monte_carlo(mu, samples, seed, [&](double alpha) {
    return std::norm(exp_sum_bprocess({theta, alpha, N}, h, j));
  });
  auto diag = detail::monte_carlo(mu, samples, seed, [&](double alpha) {
    std::vector<complex> u;
    detail::bprocess_terms({theta, alpha, N}, h, c, j, u);
    CompensatedSum<double> d;
    for (const auto& v : u) d.add(std::norm(v));
    return c.c1_abs2 * std::pow(alpha * static_cast<double>(j), static_cast<double>(c.Theta)) * d.value();
  });
  return {full, diag};
}

inline MomentEstimate second_moment_tilde_e(double theta, std::int64_t N, std::int64_t j, const MuMeasure& mu,
                                            std::int64_t samples, std::uint64_t seed,
                                            const TestKernel& h = canonical_h()) {
  if (j < 1 || static_cast<double>(j) >= static_cast<double>(N) * static_cast<double>(N))
    throw argument_error("second_moment_tilde_e: need 1 <= j < N^2");
  return detail::monte_carlo(mu, samples, seed, [&](double alpha) {
    return std::norm(exp_sum_bprocess({theta, alpha, N}, h, j));
  });
}

/// Monte Carlo second moment of R_off(N)(alpha) under mu.
inline MomentEstimate second_moment_roff(double theta, std::int64_t N, const TestKernel& f, const TestKernel& h,
                                         double eps, const MuMeasure& mu, std::int64_t samples, std::uint64_t seed) {
  if (samples < 100) throw argument_error("second_moment_roff: need at least 100 samples");
  const StationarySums sums(theta, N, f, h, eps);
  return detail::monte_carlo(mu, samples, seed, [&](double alpha) {
    const double r = sums.r_off(alpha);
    return r * r;
  });
}

}  // namespace paircorr
