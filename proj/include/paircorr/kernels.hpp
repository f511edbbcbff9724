// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Smooth compactly supported test functions, their Fourier transforms,
// the 1-periodisation at scale 1/N, and the Beurling-Selberg cut-off
// (a function supported in [-1,1] whose transform majorizes the tent).
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paircorr/numeric.hpp"

namespace paircorr {

//---------------------------------------------------------------------------//
// TestKernel
//---------------------------------------------------------------------------//

/// A nonnegative function supported in [lo, hi].
///
/// Evaluation is exactly zero outside the open interval (lo, hi); inside it
/// defers to the shape function. Kernels are cheap to copy (the shape is
/// shared) and immutable.
class TestKernel {
 public:
  using Shape = std::function<double(double)>;

  TestKernel() : TestKernel(0.0, 1.0, [](double) { return 0.0; }, -1, true) {}

  TestKernel(double lo, double hi, Shape shape, int smoothness_budget = -1, bool zero = false)
      : lo_(lo), hi_(hi), shape_(std::make_shared<Shape>(std::move(shape))),
        smoothness_(smoothness_budget), zero_(zero) {
    if (!(lo < hi)) throw argument_error("TestKernel: support must satisfy lo < hi");
  }

  double operator()(double x) const { return (x > lo_ && x < hi_) ? scale_ * (*shape_)(x) : 0.0; }
  double eval(double x) const { return (*this)(x); }

  double support_lo() const noexcept { return lo_; }
  double support_hi() const noexcept { return hi_; }
  double width() const noexcept { return hi_ - lo_; }
  int smoothness_budget() const noexcept { return smoothness_; }
  bool is_zero() const noexcept { return zero_ || scale_ == 0.0; }
  double scale() const noexcept { return scale_; }

  /// c * kernel, for c >= 0.
  TestKernel scaled(double c) const {
    if (!(c >= 0.0)) throw argument_error("TestKernel::scaled: factor must be nonnegative");
    TestKernel k = *this;
    k.scale_ *= c;
    return k;
  }

 private:
  double lo_, hi_;
  std::shared_ptr<const Shape> shape_;
  double scale_ = 1.0;
  int smoothness_;
  bool zero_;
};

/// Panels of the default kernel quadrature: 2^12 nodes per unit of support.
inline std::size_t kernel_panels(double width, double frequency = 0.0, std::size_t nodes_per_unit = 4096) {
  const auto base = static_cast<std::size_t>(std::ceil(width * static_cast<double>(nodes_per_unit) / kGaussOrder));
  // each panel spans at most 1/8 of a period of e(frequency * y)
  const auto osc = static_cast<std::size_t>(std::ceil(8.0 * std::abs(frequency) * width));
  return std::max<std::size_t>({base, osc, 1});
}

/// Integral of g(x) * k(x) over the support of k.
template <typename G>
double kernel_integral(const TestKernel& k, G&& g, std::size_t nodes_per_unit = 4096) {
  if (k.is_zero()) return 0.0;
  return integrate(k.support_lo(), k.support_hi(), kernel_panels(k.width(), 0.0, nodes_per_unit),
                   [&](double x) { return k(x) * g(x); });
}

inline double kernel_integral(const TestKernel& k) {
  return kernel_integral(k, [](double) { return 1.0; });
}

inline double kernel_integral_of_square(const TestKernel& k) {
  return kernel_integral(k, [&](double x) { return k(x); });
}

/// exp(-1/(1-u^2)) with u = (2x-lo-hi)/(hi-lo), vanishing outside (lo,hi).
inline TestKernel make_bump(double lo, double hi) {
  if (!(lo < hi)) throw argument_error("make_bump: need lo < hi");
  const double mid = 0.5 * (lo + hi);
  const double inv_half = 2.0 / (hi - lo);
  return TestKernel(
      lo, hi,
      [mid, inv_half](double x) {
        const double u = (x - mid) * inv_half;
        const double s = 1.0 - u * u;
        return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
      },
      /*smoothness_budget=*/100);
}

/// The identically zero kernel on [lo, hi].
inline TestKernel make_zero(double lo, double hi) {
  return TestKernel(lo, hi, [](double) { return 0.0; }, 100, true);
}

/// Rescales a kernel supported in (0, inf) so that its integral against dx/x is 1.
inline TestKernel normalize_rho(const TestKernel& kernel) {
  if (!(kernel.support_lo() > 0.0)) throw argument_error("normalize_rho: kernel must be supported in (0, inf)");
  const double mass = kernel_integral(kernel, [](double x) { return 1.0 / x; });
  if (!(mass > 0.0) || !std::isfinite(mass)) throw degenerate_input_error("normalize_rho: kernel has zero integral");
  return kernel.scaled(1.0 / mass);
}

/// The even weight f on [-1,1].
inline TestKernel canonical_f() { return make_bump(-1.0, 1.0); }
/// The sampling window h on [1,2].
inline TestKernel canonical_h() { return make_bump(1.0, 2.0); }
/// The density rho on [1,2], normalized against dx/x.
inline TestKernel canonical_rho() { return normalize_rho(make_bump(1.0, 2.0)); }

//---------------------------------------------------------------------------//
// Fourier transforms
//---------------------------------------------------------------------------//

/// f^(x) = int f(y) e(-x y) dy by composite Gauss-Legendre quadrature.
inline complex fourier(const TestKernel& f, double x, std::size_t nodes_per_unit = 4096) {
  if (f.is_zero()) return {0.0, 0.0};
  const PanelRule rule(f.support_lo(), f.support_hi(), kernel_panels(f.width(), x, nodes_per_unit));
  CompensatedSum<complex> acc;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double y = rule.nodes[i];
    const double a = -kTwoPi * x * y;
    acc.add(rule.weights[i] * f(y) * complex(std::cos(a), std::sin(a)));
  }
  return acc.value();
}

/// Precomputed transform values on a fixed frequency set. Frequencies outside
/// the set fall back to fourier(). Immutable after construction.
class FourierTable {
 public:
  FourierTable(TestKernel kernel, std::vector<double> frequencies, std::size_t nodes_per_unit = 4096)
      : kernel_(std::move(kernel)), nodes_per_unit_(nodes_per_unit) {
    std::sort(frequencies.begin(), frequencies.end());
    frequencies.erase(std::unique(frequencies.begin(), frequencies.end()), frequencies.end());
    freqs_ = std::move(frequencies);
    values_.reserve(freqs_.size());
    for (double x : freqs_) values_.push_back(fourier(kernel_, x, nodes_per_unit_));
  }

  /// Table on the progression 0, step, 2 step, ..., count*step. Uses a single
  /// node set fine enough for the largest frequency and rotates e(-step y)
  /// along the progression, resynchronising every 64 steps.
  static FourierTable progression(TestKernel kernel, double step, std::size_t count,
                                  std::size_t nodes_per_unit = 4096) {
    FourierTable t(std::move(kernel), nodes_per_unit);
    t.freqs_.resize(count + 1);
    for (std::size_t j = 0; j <= count; ++j) t.freqs_[j] = step * static_cast<double>(j);
    t.values_.assign(count + 1, complex{});
    if (t.kernel_.is_zero()) return t;
    const double top = step * static_cast<double>(count);
    const PanelRule rule(t.kernel_.support_lo(), t.kernel_.support_hi(),
                         kernel_panels(t.kernel_.width(), top, nodes_per_unit));
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double y = rule.nodes[i];
      const double wf = rule.weights[i] * t.kernel_(y);
      if (wf == 0.0) continue;
      const double a = -kTwoPi * step * y;
      const complex rot(std::cos(a), std::sin(a));
      complex cur(1.0, 0.0);
      for (std::size_t j = 0; j <= count; ++j) {
        if (j % 64 == 0) {
          const double aj = a * static_cast<double>(j);
          cur = complex(std::cos(aj), std::sin(aj));
        }
        t.values_[j] += wf * cur;
        cur *= rot;
      }
    }
    return t;
  }

  complex operator()(double x) const {
    const auto it = std::lower_bound(freqs_.begin(), freqs_.end(), x);
    if (it != freqs_.end() && *it == x) return values_[static_cast<std::size_t>(it - freqs_.begin())];
    return fourier(kernel_, x, nodes_per_unit_);
  }

  /// Value at index i of the stored frequency list.
  complex at(std::size_t i) const { return values_.at(i); }
  std::span<const double> frequencies() const noexcept { return freqs_; }
  const TestKernel& kernel() const noexcept { return kernel_; }

 private:
  FourierTable(TestKernel kernel, std::size_t nodes_per_unit)
      : kernel_(std::move(kernel)), nodes_per_unit_(nodes_per_unit) {}

  TestKernel kernel_;
  std::size_t nodes_per_unit_;
  std::vector<double> freqs_;
  std::vector<complex> values_;
};

/// F_N(x) = sum_k f(N (x + k)); only the finitely many k with N(x+k) in the support.
inline double periodize(const TestKernel& f, std::int64_t N, double x) {
  if (N < 1) throw argument_error("periodize: N must be >= 1");
  const double n = static_cast<double>(N);
  const auto k_lo = static_cast<std::int64_t>(std::ceil(f.support_lo() / n - x));
  const auto k_hi = static_cast<std::int64_t>(std::floor(f.support_hi() / n - x));
  double s = 0.0;
  for (std::int64_t k = k_lo; k <= k_hi; ++k) s += f(n * (x + static_cast<double>(k)));
  return s;
}

//---------------------------------------------------------------------------//
// Beurling's function
//---------------------------------------------------------------------------//

namespace detail {

/// Midpoint estimate of sum_{n>K} 1/(n-x)^2 - sum_{n>K} 1/(n+x)^2.
inline double beurling_tail(double x, int cutoff) {
  const double k = cutoff + 0.5;
  return 1.0 / (k - x) - 1.0 / (k + x);
}

/// 2/x + sum_{n=0}^K (x-n)^-2 - sum_{n=1}^K (x+n)^-2 + tail, skipping the term
/// that is singular at the integer `skip_pole` (pass a non-integer to keep all).
inline double beurling_bracket(double x, int cutoff, double skip_pole) {
  CompensatedSum<double> acc;
  for (int n = cutoff; n >= 0; --n) {
    if (x - n == 0.0 || static_cast<double>(n) == skip_pole) continue;
    const double d = x - n;
    acc.add(1.0 / (d * d));
  }
  for (int n = cutoff; n >= 1; --n) {
    if (static_cast<double>(-n) == skip_pole) continue;
    const double d = x + n;
    acc.add(-1.0 / (d * d));
  }
  if (skip_pole != 0.0) acc.add(2.0 / x);
  acc.add(beurling_tail(x, cutoff));
  return acc.value();
}

}  // namespace detail

/// Beurling's majorant of sgn(x):
///   B(x) = (sin(pi x)/pi)^2 (2/x + sum_{n>=0} (x-n)^-2 - sum_{n>=1} (x+n)^-2),
/// with both sums cut at n = cutoff plus an integral tail estimate. Within
/// 1e-6 of an integer the removable singularity is expanded to second order.
inline double beurling_B(double x, int cutoff = 10000) {
  if (cutoff < 1) throw argument_error("beurling_B: cutoff must be >= 1");
  if (!(std::abs(x) < 0.5 * cutoff)) throw argument_error("beurling_B: |x| must be below cutoff/2");
  constexpr double pi = std::numbers::pi;
  const double n0 = std::nearbyint(x);
  const double d = x - n0;
  if (std::abs(d) < 1e-6) {
    const double s = n0 >= 0.0 ? 1.0 : -1.0;
    // regular part of the bracket at the integer; zero at the origin by symmetry
    const double reg = n0 == 0.0 ? 0.0 : detail::beurling_bracket(n0, cutoff, n0);
    return s + (n0 == 0.0 ? 2.0 * d : 0.0) + d * d * (reg - s * pi * pi / 3.0);
  }
  const double sn = std::sin(pi * d) / pi;
  return sn * sn * detail::beurling_bracket(x, cutoff, 0.5);
}

namespace detail {

/// B(offset + k/p) for k in [kmin, kmax], with integer offset and p steps per
/// unit. Each residue class mod p is evaluated once with the full series and
/// then slid by whole units: moving x -> x+1 adds 2/(x+1)^2 and drops the
/// terms at n = K and n = K+1 from the two truncated sums.
inline std::vector<double> beurling_B_grid(double offset, std::int64_t p, std::int64_t kmin, std::int64_t kmax,
                                           int cutoff) {
  constexpr double pi = std::numbers::pi;
  std::vector<double> out(static_cast<std::size_t>(kmax - kmin + 1));
  const double K = cutoff;
  for (std::int64_t k0 = kmin; k0 < kmin + p && k0 <= kmax; ++k0) {
    const bool on_integer = ((k0 % p) + p) % p == 0;
    double x = offset + static_cast<double>(k0) / static_cast<double>(p);
    CompensatedSum<double> bracket;  // sums without the 2/x and tail terms
    if (!on_integer) {
      for (int n = cutoff; n >= 0; --n) {
        const double d = x - n;
        bracket.add(1.0 / (d * d));
      }
      for (int n = cutoff; n >= 1; --n) {
        const double d = x + n;
        bracket.add(-1.0 / (d * d));
      }
    }
    for (std::int64_t k = k0; k <= kmax; k += p) {
      double& slot = out[static_cast<std::size_t>(k - kmin)];
      if (on_integer) {
        slot = x >= 0.0 ? 1.0 : -1.0;
      } else {
        const double d = x - std::nearbyint(x);
        const double sn = std::sin(pi * d) / pi;
        slot = sn * sn * (bracket.value() + 2.0 / x + beurling_tail(x, cutoff));
        const double a = x + 1.0, b = x - K, c = x + K + 1.0;
        bracket.add(2.0 / (a * a));
        bracket.add(-1.0 / (b * b));
        bracket.add(-1.0 / (c * c));
      }
      x += 1.0;
    }
  }
  return out;
}

}  // namespace detail

//---------------------------------------------------------------------------//
// Beurling-Selberg cut-off
//---------------------------------------------------------------------------//

struct BeurlingSelbergOptions {
  int cutoff = 10000;                   ///< truncation of the n-sums in B
  double x_max = 200.0;                 ///< |x| range of the tabulated psi_hat
  int grid_log2 = 10;                   ///< psi_hat / phi_hat grid spacing 2^-grid_log2
  int inverse_stride = 8;               ///< subsampling of the grid for the inverse transform
  double phi_table_halfwidth = 1.25;    ///< phi tabulated on |t| <= this
  double phi_hat_table_halfwidth = 3.0; ///< phi_hat tabulated on |x| <= this
  double tolerance = 1e-3;
};

/// One verified property of the cut-off function.
struct BeurlingSelbergProperty {
  std::string name;
  double worst;     ///< worst sampled value of the checked quantity
  double bound;     ///< the bound it is compared against
  bool pass;
};

/// psi_hat(x) = (B(1-x) + B(1+x))/2 majorizes the indicator of [-1,1] and has
/// transform psi_plus supported in [-1,1]. phi = psi_plus^2 is then supported
/// in [-1,1], nonnegative, and phi_hat = psi_hat * psi_hat dominates the tent
/// max(2-|x|, 0).
class BeurlingSelberg {
 public:
  static BeurlingSelberg build(const BeurlingSelbergOptions& opt = {}) {
    if (opt.cutoff < 1000) throw argument_error("build_beurling_selberg: cutoff must be >= 1000");
    if (!(opt.x_max >= 50.0)) throw argument_error("build_beurling_selberg: x_max must be >= 50");
    if (opt.grid_log2 < 1 || opt.grid_log2 > 20 || opt.inverse_stride < 1)
      throw argument_error("build_beurling_selberg: bad grid");
    BeurlingSelberg bs(opt);
    bs.tabulate();
    for (const auto& p : bs.check_properties(bs.default_t_samples(), bs.default_x_samples())) {
      if (!p.pass) throw construction_error("build_beurling_selberg: property violated: " + p.name);
    }
    return bs;
  }

  int series_cutoff() const noexcept { return opt_.cutoff; }
  double x_max() const noexcept { return opt_.x_max; }
  double spacing() const noexcept { return h_; }
  const BeurlingSelbergOptions& options() const noexcept { return opt_; }

  /// psi_hat from the B formula directly (independent of the tables).
  double psi_hat(double x) const {
    return 0.5 * (beurling_B(1.0 - x, opt_.cutoff) + beurling_B(1.0 + x, opt_.cutoff));
  }

  /// Tabulated psi_hat at grid index k (x = k * spacing), |k| <= x_max/spacing.
  double psi_hat_grid(std::int64_t k) const {
    const auto a = static_cast<std::size_t>(std::abs(k));
    return a < psi_hat_.size() ? psi_hat_[a] : 0.0;
  }

  /// psi_plus(t) = int_{|x|<=x_max} psi_hat(x) e(x t) dx (trapezoid, even integrand).
  double psi_plus(double t) const {
    const std::int64_t stride = opt_.inverse_stride;
    const double hs = h_ * static_cast<double>(stride);
    const auto kmax = static_cast<std::int64_t>(psi_hat_.size() - 1) / stride;
    const double a = kTwoPi * hs * t;
    const complex rot(std::cos(a), std::sin(a));
    complex cur = rot;
    CompensatedSum<double> acc(0.5 * psi_hat_[0]);
    for (std::int64_t k = 1; k <= kmax; ++k) {
      if (k % 64 == 0) cur = complex(std::cos(a * static_cast<double>(k)), std::sin(a * static_cast<double>(k)));
      const double w = (k == kmax) ? 0.5 : 1.0;
      acc.add(w * psi_hat_[static_cast<std::size_t>(k * stride)] * cur.real());
      cur *= rot;
    }
    return 2.0 * hs * acc.value();
  }

  /// phi(t) = psi_plus(t)^2.
  double phi(double t) const {
    const double at = std::abs(t);
    if (at <= opt_.phi_table_halfwidth) {
      const double pos = at / h_;
      const auto i = static_cast<std::size_t>(pos);
      const double w = pos - static_cast<double>(i);
      const double p = (i + 1 < psi_plus_.size()) ? (1 - w) * psi_plus_[i] + w * psi_plus_[i + 1] : psi_plus_[i];
      return p * p;
    }
    const double p = psi_plus(at);
    return p * p;
  }

  /// phi_hat(x) = (psi_hat * psi_hat)(x) by grid convolution, linearly
  /// interpolated between grid points.
  double phi_hat(double x) const {
    const double ax = std::abs(x);
    const double pos = ax / h_;
    const auto i = static_cast<std::int64_t>(pos);
    const double w = pos - static_cast<double>(i);
    const double lo = phi_hat_grid(i);
    return w == 0.0 ? lo : (1 - w) * lo + w * phi_hat_grid(i + 1);
  }

  /// phi_hat at grid index k (x = k * spacing).
  double phi_hat_grid(std::int64_t k) const {
    const auto a = static_cast<std::size_t>(std::abs(k));
    if (a < phi_hat_.size()) return phi_hat_[a];
    return convolve_at(static_cast<std::int64_t>(a));
  }

  std::vector<double> default_t_samples() const {
    std::vector<double> t;
    for (double v = -2.0; v <= 2.0 + 1e-12; v += 1.0 / 256) t.push_back(v);
    return t;
  }
  std::vector<double> default_x_samples() const {
    std::vector<double> x;
    const int n = 10000;
    for (int i = 0; i < n; ++i) x.push_back(-3.0 + 6.0 * i / (n - 1));
    return x;
  }

  /// The four cut-off properties plus the tent majorant, on the given samples.
  std::vector<BeurlingSelbergProperty> check_properties(std::span<const double> t_samples,
                                                        std::span<const double> x_samples) const {
    const double tol = opt_.tolerance;
    double min_phi = INFINITY, max_outside = 0.0, min_phi_hat = INFINITY;
    double min_tent_gap = INFINITY, min_unit = INFINITY;
    for (double t : t_samples) {
      const double v = phi(t);
      min_phi = std::min(min_phi, v);
      if (std::abs(t) > 1.0) max_outside = std::max(max_outside, std::abs(v));
    }
    for (double x : x_samples) {
      const double v = phi_hat(x);
      min_phi_hat = std::min(min_phi_hat, v);
      min_tent_gap = std::min(min_tent_gap, v - std::max(2.0 - std::abs(x), 0.0));
      if (std::abs(x) <= 1.0) min_unit = std::min(min_unit, v);
    }
    return {
        {"phi_support_in_unit_interval", max_outside, tol, max_outside <= tol},
        {"phi_nonnegative", min_phi, 0.0, min_phi >= 0.0},
        {"phi_hat_nonnegative", min_phi_hat, 0.0, min_phi_hat >= 0.0},
        {"phi_hat_at_least_one_on_unit_interval", min_unit, 1.0 - tol, min_unit >= 1.0 - tol},
        {"phi_hat_majorizes_tent", min_tent_gap, -tol, min_tent_gap >= -tol},
    };
  }

 private:
  explicit BeurlingSelberg(const BeurlingSelbergOptions& opt)
      : opt_(opt), h_(std::ldexp(1.0, -opt.grid_log2)) {}

  void tabulate() {
    const std::int64_t p = std::int64_t{1} << opt_.grid_log2;
    const auto K = static_cast<std::int64_t>(std::llround(opt_.x_max * static_cast<double>(p)));
    // B(1 + k h) for k in [-K, K]; psi_hat(k h) = (B(1 - k h) + B(1 + k h)) / 2
    const auto b = detail::beurling_B_grid(1.0, p, -K, K, opt_.cutoff);
    psi_hat_.resize(static_cast<std::size_t>(K + 1));
    for (std::int64_t k = 0; k <= K; ++k)
      psi_hat_[static_cast<std::size_t>(k)] =
          0.5 * (b[static_cast<std::size_t>(K - k)] + b[static_cast<std::size_t>(K + k)]);
    full_.resize(static_cast<std::size_t>(2 * K + 1));
    for (std::int64_t k = -K; k <= K; ++k) full_[static_cast<std::size_t>(k + K)] = psi_hat_grid(k);

    const auto nx = static_cast<std::int64_t>(std::ceil(opt_.phi_hat_table_halfwidth / h_)) + 1;
    phi_hat_.resize(static_cast<std::size_t>(nx + 1));
    for (std::int64_t k = 0; k <= nx; ++k) phi_hat_[static_cast<std::size_t>(k)] = convolve_at(k);

    const auto nt = static_cast<std::int64_t>(std::ceil(opt_.phi_table_halfwidth / h_)) + 1;
    psi_plus_.resize(static_cast<std::size_t>(nt + 1));
    for (std::int64_t i = 0; i <= nt; ++i) psi_plus_[static_cast<std::size_t>(i)] = psi_plus(h_ * static_cast<double>(i));
  }

  /// h * sum_i psi_hat(i h) psi_hat((i - k) h), k >= 0.
  double convolve_at(std::int64_t k) const {
    const auto n = static_cast<std::int64_t>(full_.size());
    if (k >= n) return 0.0;
    return h_ * unrolled_dot(full_.data() + k, full_.data(), static_cast<std::size_t>(n - k));
  }

  BeurlingSelbergOptions opt_;
  double h_;
  std::vector<double> psi_hat_;   // k >= 0
  std::vector<double> full_;      // k in [-K, K]
  std::vector<double> phi_hat_;   // k >= 0, up to the table half-width
  std::vector<double> psi_plus_;  // t = i h >= 0, up to the table half-width
};

/// build_beurling_selberg(cutoff, X_max, grid spacing 2^-grid_log2).
inline BeurlingSelberg build_beurling_selberg(int cutoff = 10000, double x_max = 200.0, int grid_log2 = 10) {
  BeurlingSelbergOptions opt;
  opt.cutoff = cutoff;
  opt.x_max = x_max;
  opt.grid_log2 = grid_log2;
  return BeurlingSelberg::build(opt);
}

}  // namespace paircorr
