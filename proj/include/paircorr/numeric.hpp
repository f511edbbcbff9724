// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Shared numerical plumbing: error types, compensated accumulation,
// extended-precision phase reduction and Gauss-Legendre panel rules.
#pragma once

#ifdef __FAST_MATH__
#error fast math enabled, this would negate compensated summation.
#endif

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace paircorr {

static_assert(std::numeric_limits<long double>::digits >= 64,
              "phase reduction needs a long double with a 64-bit mantissa");

using complex = std::complex<double>;

/// Invalid argument or violated precondition.
class argument_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input that is well-formed but degenerate (zero mass kernel etc).
class degenerate_input_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerically constructed object failed its post-construction checks.
class construction_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An enumeration would exceed its size guard.
class resource_error : public std::runtime_error {
 public:
  resource_error(const std::string& what, double estimated_size)
      : std::runtime_error(what + " (estimated size " + std::to_string(estimated_size) + ")"),
        estimated_size_(estimated_size) {}
  double estimated_size() const noexcept { return estimated_size_; }

 private:
  double estimated_size_;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

//---------------------------------------------------------------------------//
// Compensated accumulation
//---------------------------------------------------------------------------//

/// Neumaier's variant of Kahan summation. Works for double and complex<double>.
template <typename T>
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(T init) { add(init); }

  void add(T x) noexcept {
    if constexpr (std::is_same_v<T, complex>) {
      re_.add(x.real());
      im_.add(x.imag());
    } else {
      const T t = sum_ + x;
      if (std::abs(sum_) >= std::abs(x)) {
        comp_ += (sum_ - t) + x;
      } else {
        comp_ += (x - t) + sum_;
      }
      sum_ = t;
    }
  }
  CompensatedSum& operator+=(T x) noexcept {
    add(x);
    return *this;
  }

  T value() const noexcept {
    if constexpr (std::is_same_v<T, complex>) {
      return {re_.value(), im_.value()};
    } else {
      return sum_ + comp_;
    }
  }

 private:
  struct Empty {};
  T sum_{};
  T comp_{};
  // complex sums are kept as two independent real accumulators
  std::conditional_t<std::is_same_v<T, complex>, CompensatedSum<double>, Empty> re_{}, im_{};
};

/// Deterministic pairwise (tree) reduction of a sequence of partial sums.
template <typename T>
T pairwise_sum(std::span<const T> parts) {
  if (parts.empty()) return T{};
  if (parts.size() == 1) return parts[0];
  const auto half = parts.size() / 2;
  return pairwise_sum(parts.subspan(0, half)) + pairwise_sum(parts.subspan(half));
}

//---------------------------------------------------------------------------//
// Phase reduction
//---------------------------------------------------------------------------//

/// Fractional part in [0,1) of an extended-precision value.
inline long double frac(long double x) noexcept { return x - std::floor(x); }

/// Fractional part rounded to double; values that round up to 1 wrap to 0.
inline double frac_to_double(long double x) noexcept {
  const double r = static_cast<double>(frac(x));
  return r >= 1.0 ? 0.0 : r;
}

/// e(phase) = exp(2 pi i phase), reducing the phase mod 1 in extended precision.
inline complex unit_phase(long double phase) noexcept {
  const double a = kTwoPi * static_cast<double>(frac(phase));
  return {std::cos(a), std::sin(a)};
}

//---------------------------------------------------------------------------//
// Gauss-Legendre panels
//---------------------------------------------------------------------------//

inline constexpr unsigned kGaussOrder = 16;

/// Nodes and weights of a composite Gauss-Legendre rule on [a,b].
struct PanelRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  PanelRule() = default;
  PanelRule(double a, double b, std::size_t panels) {
    using gauss = boost::math::quadrature::gauss<double, kGaussOrder>;
    const auto& xs = gauss::abscissa();
    const auto& ws = gauss::weights();
    if (panels == 0 || !(b > a)) return;
    nodes.reserve(panels * kGaussOrder);
    weights.reserve(panels * kGaussOrder);
    const double width = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double lo = a + width * static_cast<double>(p);
      const double mid = lo + 0.5 * width;
      const double half = 0.5 * width;
      for (std::size_t i = xs.size(); i-- > 0;) {
        nodes.push_back(mid - half * xs[i]);
        weights.push_back(half * ws[i]);
      }
      for (std::size_t i = (kGaussOrder % 2 == 1) ? 1 : 0; i < xs.size(); ++i) {
        nodes.push_back(mid + half * xs[i]);
        weights.push_back(half * ws[i]);
      }
    }
  }

  std::size_t size() const noexcept { return nodes.size(); }

  template <typename F>
  auto integrate(F&& fn) const {
    using R = std::decay_t<decltype(fn(0.0))>;
    CompensatedSum<R> acc;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc.add(weights[i] * fn(nodes[i]));
    return acc.value();
  }
};

/// Composite Gauss-Legendre integral of fn over [a,b] with a fixed panel count.
template <typename F>
auto integrate(double a, double b, std::size_t panels, F&& fn) {
  return PanelRule(a, b, panels).integrate(std::forward<F>(fn));
}

/// Dot product with several independent accumulators (vectorizes without reassociation flags).
inline double unrolled_dot(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
    s4 += a[i + 4] * b[i + 4];
    s5 += a[i + 5] * b[i + 5];
    s6 += a[i + 6] * b[i + 6];
    s7 += a[i + 7] * b[i + 7];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
}

/// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw argument_error("fit_slope: need >= 2 paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace paircorr
