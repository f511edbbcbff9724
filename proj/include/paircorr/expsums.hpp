// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Weyl sums E_{N,j}(alpha) = sum_y h(y/N) e(alpha j y^theta), their
// stationary-phase replacements, and the Fourier-side assemblies of the
// smoothed pair correlation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "paircorr/kernels.hpp"
#include "paircorr/numeric.hpp"
#include "paircorr/parallel.hpp"

namespace paircorr {

/// The sequence alpha n^theta sampled at scale N.
///
/// The struct itself accepts any values so that internal callers can use
/// e.g. negative alpha; make() enforces theta in (0,1), alpha in [1,2], N >= 1.
struct SequenceSpec {
  double theta = 0.5;
  double alpha = 1.0;
  std::int64_t N = 1;

  double Theta() const noexcept { return 1.0 / (1.0 - theta); }

  static SequenceSpec make(double theta, double alpha, std::int64_t N) {
    if (!(theta > 0.0 && theta < 1.0)) throw argument_error("SequenceSpec: theta must lie in (0,1)");
    if (!(alpha >= 1.0 && alpha <= 2.0)) throw argument_error("SequenceSpec: alpha must lie in [1,2]");
    if (N < 1) throw argument_error("SequenceSpec: N must be >= 1");
    return {theta, alpha, N};
  }
};

struct BProcessConstants {
  double theta;
  long double Theta;
  complex c1;       ///< theta^{Theta/2} / sqrt(1-theta) * e(-1/8)
  double c1_abs2;   ///< |c1|^2 = theta^Theta / (1-theta)
  long double c2;   ///< theta^{Theta-1} - theta^Theta
};

inline BProcessConstants bprocess_constants(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw argument_error("bprocess_constants: theta must lie in (0,1)");
  const long double t = theta;
  const long double T = 1.0L / (1.0L - t);
  const double mod = static_cast<double>(std::pow(t, T / 2) / std::sqrt(1.0L - t));
  const double arg = -kTwoPi / 8.0;
  return {theta,
          T,
          std::polar(mod, arg),
          static_cast<double>(std::pow(t, T) / (1.0L - t)),
          std::pow(t, T - 1.0L) - std::pow(t, T)};
}

/// x_m = (theta alpha j / m)^Theta, the solution of phi'(x) = m for phi(x) = alpha j x^theta.
inline double stationary_point(const SequenceSpec& s, std::int64_t j, std::int64_t m) {
  if (m < 1 || j < 1) throw argument_error("stationary_point: need m >= 1 and j >= 1");
  const long double base = static_cast<long double>(s.theta) * s.alpha * static_cast<long double>(j) /
                           static_cast<long double>(m);
  return static_cast<double>(std::pow(base, static_cast<long double>(s.Theta())));
}

/// Closed integer interval; empty when hi < lo.
struct IntRange {
  std::int64_t lo = 1;
  std::int64_t hi = 0;
  bool empty() const noexcept { return hi < lo; }
  std::int64_t size() const noexcept { return empty() ? 0 : hi - lo + 1; }
};

/// Integers m with x_m / N in the support of h, i.e.
/// m in [theta alpha j (hi N)^{theta-1}, theta alpha j (lo N)^{theta-1}].
inline IntRange stationary_window(const SequenceSpec& s, const TestKernel& h, std::int64_t j) {
  if (j < 1 || h.support_lo() <= 0.0) return {};
  const long double base = static_cast<long double>(s.theta) * s.alpha * static_cast<long double>(j);
  const long double n = static_cast<long double>(s.N);
  const long double e = static_cast<long double>(s.theta) - 1.0L;
  const long double top = base * std::pow(static_cast<long double>(h.support_lo()) * n, e);
  const long double bottom = base * std::pow(static_cast<long double>(h.support_hi()) * n, e);
  IntRange r{static_cast<std::int64_t>(std::ceil(bottom)), static_cast<std::int64_t>(std::floor(top))};
  r.lo = std::max<std::int64_t>(r.lo, 1);
  return r;
}

/// Hard frequency cut-offs [ceil(N^{1-eps}), ceil(N^{1+eps})].
inline IntRange j_window(std::int64_t N, double eps) {
  if (!(eps > 0.0 && eps < 0.2)) throw argument_error("j_window: eps must lie in (0, 0.2)");
  const double n = static_cast<double>(N);
  return {static_cast<std::int64_t>(std::ceil(std::pow(n, 1.0 - eps))),
          static_cast<std::int64_t>(std::ceil(std::pow(n, 1.0 + eps)))};
}

//---------------------------------------------------------------------------//
// Direct sums
//---------------------------------------------------------------------------//

/// Weights h(y/N) and reduced phases frac(alpha y^theta) for one (spec, h),
/// so that many frequencies j can share them.
class DirectSums {
 public:
  DirectSums(const SequenceSpec& s, const TestKernel& h) : spec_(s) {
    const double n = static_cast<double>(s.N);
    const auto y_lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(h.support_lo() * n)));
    const auto y_hi = static_cast<std::int64_t>(std::ceil(h.support_hi() * n));
    const long double a = s.alpha;
    const long double th = s.theta;
    CompensatedSum<double> mass, mass_sq;
    for (std::int64_t y = y_lo; y <= y_hi; ++y) {
      const double w = h(static_cast<double>(y) / n);
      if (w == 0.0) continue;
      const long double ly = static_cast<long double>(y);
      const long double p = th == 0.5L ? a * std::sqrt(ly) : a * std::pow(ly, th);
      weights_.push_back(w);
      phases_.push_back(frac(p));
      mass.add(w);
      mass_sq.add(w * w);
    }
    mass_ = mass.value();
    mass_sq_ = mass_sq.value();
  }

  /// E_{N,j}(alpha) for any integer j.
  complex operator()(std::int64_t j) const {
    CompensatedSum<complex> acc;
    const long double lj = static_cast<long double>(j);
    for (std::size_t i = 0; i < weights_.size(); ++i) acc.add(weights_[i] * unit_phase(lj * phases_[i]));
    return acc.value();
  }

  /// E_{N,j} for j in [j0, j1], rotating e(j r_y) along j and resynchronising every 64 steps.
  std::vector<complex> range(std::int64_t j0, std::int64_t j1) const {
    if (j1 < j0) return {};
    const auto count = static_cast<std::size_t>(j1 - j0 + 1);
    constexpr std::size_t kBlock = 4096;
    const std::size_t blocks = (count + kBlock - 1) / kBlock;
    auto parts = parallel::map_chunks<std::vector<complex>>(blocks, [&](std::size_t b) {
      const std::size_t lo = b * kBlock;
      const std::size_t len = std::min(kBlock, count - lo);
      std::vector<double> sum_re(len), sum_im(len), comp_re(len), comp_im(len);
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double w = weights_[i];
        const long double r = phases_[i];
        const complex rot = unit_phase(r);
        complex cur;
        for (std::size_t k = 0; k < len; ++k) {
          if (k % 64 == 0) cur = unit_phase(static_cast<long double>(j0 + static_cast<std::int64_t>(lo + k)) * r);
          neumaier(sum_re[k], comp_re[k], w * cur.real());
          neumaier(sum_im[k], comp_im[k], w * cur.imag());
          cur *= rot;
        }
      }
      std::vector<complex> out(len);
      for (std::size_t k = 0; k < len; ++k) out[k] = {sum_re[k] + comp_re[k], sum_im[k] + comp_im[k]};
      return out;
    });
    std::vector<complex> out;
    out.reserve(count);
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  }

  /// E_{N,0} = sum_y h(y/N).
  double mass() const noexcept { return mass_; }
  /// sum_y h(y/N)^2.
  double mass_sq() const noexcept { return mass_sq_; }
  std::size_t size() const noexcept { return weights_.size(); }
  const SequenceSpec& spec() const noexcept { return spec_; }

 private:
  static void neumaier(double& s, double& c, double x) noexcept {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }

  SequenceSpec spec_;
  std::vector<double> weights_;
  std::vector<long double> phases_;
  double mass_ = 0.0, mass_sq_ = 0.0;
};

inline complex exp_sum_direct(const SequenceSpec& s, const TestKernel& h, std::int64_t j) {
  if (j < 0) throw argument_error("exp_sum_direct: j must be >= 0");
  return DirectSums(s, h)(j);
}

//---------------------------------------------------------------------------//
// Stationary-phase sums
//---------------------------------------------------------------------------//

namespace detail {

/// Fills u_m = m^{-(Theta+1)/2} h((theta alpha j)^Theta / (N m^Theta)) e(c2 (alpha j)^Theta / m^{Theta-1})
/// for m in the stationary window and returns the window.
inline IntRange bprocess_terms(const SequenceSpec& s, const TestKernel& h, const BProcessConstants& c,
                               std::int64_t j, std::vector<complex>& u) {
  const IntRange w = stationary_window(s, h, j);
  u.clear();
  if (w.empty()) return w;
  const long double T = c.Theta;
  const long double log_aj = std::log(static_cast<long double>(s.alpha) * static_cast<long double>(j));
  const long double log_taj = std::log(static_cast<long double>(s.theta)) + log_aj;
  const long double log_n = std::log(static_cast<long double>(s.N));
  u.reserve(static_cast<std::size_t>(w.size()));
  for (std::int64_t m = w.lo; m <= w.hi; ++m) {
    const long double lm = std::log(static_cast<long double>(m));
    const double arg = static_cast<double>(std::exp(T * (log_taj - lm) - log_n));
    const double hv = h(arg);
    if (hv == 0.0) {
      u.emplace_back(0.0, 0.0);
      continue;
    }
    const double amp = static_cast<double>(std::exp(-(T + 1.0L) / 2.0L * lm)) * hv;
    const long double phase = c.c2 * std::exp(T * log_aj - (T - 1.0L) * lm);
    u.push_back(amp * unit_phase(phase));
  }
  return w;
}

}  // namespace detail

/// E~_{N,j} = c1 (alpha j)^{Theta/2} sum_m u_m over the stationary window.
inline complex exp_sum_bprocess(const SequenceSpec& s, const TestKernel& h, std::int64_t j) {
  if (j < 1) throw argument_error("exp_sum_bprocess: j must be >= 1");
  const auto c = bprocess_constants(s.theta);
  std::vector<complex> u;
  if (detail::bprocess_terms(s, h, c, j, u).empty()) return {0.0, 0.0};
  CompensatedSum<complex> acc;
  for (const auto& v : u) acc.add(v);
  const double pre = std::pow(s.alpha * static_cast<double>(j), static_cast<double>(c.Theta) / 2.0);
  return c.c1 * pre * acc.value();
}

struct ExpSumPair {
  std::int64_t j;
  complex direct;
  complex short_sum;
  double error_ref;  ///< N^{1-theta/2} / j^{1/2}
  IntRange m_range;

  /// |direct - short| / error_ref
  double ratio() const { return std::abs(direct - short_sum) / error_ref; }
};

inline ExpSumPair exp_sum_pair(const SequenceSpec& s, const TestKernel& h, std::int64_t j) {
  if (j < 1) throw argument_error("exp_sum_pair: j must be >= 1");
  return {j, exp_sum_direct(s, h, j), exp_sum_bprocess(s, h, j),
          std::pow(static_cast<double>(s.N), 1.0 - s.theta / 2.0) / std::sqrt(static_cast<double>(j)),
          stationary_window(s, h, j)};
}

//---------------------------------------------------------------------------//
// Fourier-side assemblies
//---------------------------------------------------------------------------//

/// S(f,h;N) = (2/N^2) sum_{1<=j<=j_max} f^(j/N) |E_{N,j}|^2, with the direct
/// sums or their stationary-phase replacements.
inline double s_sum(const SequenceSpec& s, const TestKernel& f, const TestKernel& h, std::int64_t j_max,
                    bool use_short) {
  if (j_max < 1 || f.is_zero() || h.is_zero()) return 0.0;
  const double n = static_cast<double>(s.N);
  const auto fhat = FourierTable::progression(f, 1.0 / n, static_cast<std::size_t>(j_max));
  double total = 0.0;
  if (!use_short) {
    const auto e = DirectSums(s, h).range(1, j_max);
    total = parallel::sum<double>(1, j_max + 1, [&](std::int64_t j) {
      return fhat.at(static_cast<std::size_t>(j)).real() * std::norm(e[static_cast<std::size_t>(j - 1)]);
    });
  } else {
    total = parallel::sum<double>(1, j_max + 1, [&](std::int64_t j) {
      return fhat.at(static_cast<std::size_t>(j)).real() * std::norm(exp_sum_bprocess(s, h, j));
    });
  }
  return 2.0 * total / (n * n);
}

/// The exact Fourier-side form of the smoothed pair correlation:
/// (1/N^2) sum_{|j|<=j_max} f^(j/N) |E_{N,j}|^2 - F_N(0) (1/N) sum_y h(y/N)^2.
inline double pair_corr_fourier(const SequenceSpec& s, const TestKernel& f, const TestKernel& h,
                                std::int64_t j_max) {
  if (f.is_zero() || h.is_zero()) return 0.0;
  const double n = static_cast<double>(s.N);
  const DirectSums d(s, h);
  const double zero = fourier(f, 0.0).real() * d.mass() * d.mass() / (n * n);
  return zero + s_sum(s, f, h, j_max, false) - periodize(f, s.N, 0.0) * d.mass_sq() / n;
}

/// int f * (int h)^2, the Poissonian value of the smoothed pair correlation.
inline double poisson_limit(const TestKernel& f, const TestKernel& h) {
  const double ih = kernel_integral(h);
  return kernel_integral(f) * ih * ih;
}

namespace detail {

struct Swept {
  double phase;
  double weight;
};

inline std::vector<Swept> sorted_phases(const SequenceSpec& s, const TestKernel& h) {
  const double n = static_cast<double>(s.N);
  const auto y_lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(h.support_lo() * n)));
  const auto y_hi = static_cast<std::int64_t>(std::ceil(h.support_hi() * n));
  std::vector<Swept> pts;
  for (std::int64_t y = y_lo; y <= y_hi; ++y) {
    const double w = h(static_cast<double>(y) / n);
    if (w == 0.0) continue;
    const long double ly = static_cast<long double>(y);
    const long double p = s.theta == 0.5 ? s.alpha * std::sqrt(ly)
                                         : static_cast<long double>(s.alpha) * std::pow(ly, static_cast<long double>(s.theta));
    pts.push_back({frac_to_double(p), w});
  }
  std::sort(pts.begin(), pts.end(), [](const Swept& a, const Swept& b) { return a.phase < b.phase; });
  return pts;
}

}  // namespace detail

/// R_{f,h}(N) = (1/N) sum_{x != y} h(x/N) h(y/N) F_N(alpha (x^theta - y^theta)).
///
/// F_N vanishes unless the phases are within radius/N on the circle, so the
/// points are sorted by phase and only neighbours inside that window are visited.
inline double pair_corr_smooth(const SequenceSpec& s, const TestKernel& f, const TestKernel& h) {
  if (f.is_zero() || h.is_zero()) return 0.0;
  const auto pts = detail::sorted_phases(s, h);
  const double n = static_cast<double>(s.N);
  const double radius = std::max(std::abs(f.support_lo()), std::abs(f.support_hi())) / n;
  const std::size_t count = pts.size();
  if (count < 2) return 0.0;
  CompensatedSum<double> total;
  if (radius >= 0.5) {
    for (std::size_t a = 0; a < count; ++a)
      for (std::size_t b = 0; b < count; ++b)
        if (a != b) total.add(pts[a].weight * pts[b].weight * periodize(f, s.N, pts[a].phase - pts[b].phase));
    return total.value() / n;
  }
  // ordered pairs (a, b) and (b, a) contribute equally since f is even; visit b after a
  // cyclically and double
  for (std::size_t a = 0; a < count; ++a) {
    for (std::size_t step = 1; step < count; ++step) {
      const std::size_t b = (a + step) % count;
      const double gap = pts[b].phase - pts[a].phase + (a + step >= count ? 1.0 : 0.0);
      if (gap >= radius) break;
      total.add(pts[a].weight * pts[b].weight * (f(n * gap) + f(-n * gap)));
    }
  }
  return total.value() / n;
}

//---------------------------------------------------------------------------//
// Diagonal and off-diagonal parts of the stationary-phase second moment
//---------------------------------------------------------------------------//

struct StationaryDecomposition {
  double s_tilde = 0.0;   ///< (2/N^2) sum_j f^(j/N) |E~_{N,j}|^2
  double diagonal = 0.0;  ///< the m = n part of s_tilde
  double r_off = 0.0;     ///< the m != n part
  double r_off_imag = 0.0;///< imaginary part of the explicit m != n sum (zero for the fast route)
};

/// The j-window, f^ values and constants shared by every alpha at fixed (theta, N, f, h, eps).
class StationarySums {
 public:
  StationarySums(double theta, std::int64_t N, TestKernel f, TestKernel h, double eps = 0.05)
      : theta_(theta), N_(N), f_(std::move(f)), h_(std::move(h)), eps_(eps),
        c_(bprocess_constants(theta)), window_(j_window(N, eps)) {
    if (N < 1) throw argument_error("StationarySums: N must be >= 1");
    const auto table = FourierTable::progression(f_, 1.0 / static_cast<double>(N),
                                                 static_cast<std::size_t>(window_.hi));
    fhat_.resize(static_cast<std::size_t>(window_.size()));
    for (std::int64_t j = window_.lo; j <= window_.hi; ++j)
      fhat_[static_cast<std::size_t>(j - window_.lo)] = table.at(static_cast<std::size_t>(j)).real();
  }

  /// S~, its diagonal and R_off at alpha. The explicit route sums u_m conj(u_n)
  /// over m != n term by term; the fast route uses |sum u|^2 - sum |u|^2.
  StationaryDecomposition evaluate(double alpha, bool explicit_off_diagonal = false) const {
    const SequenceSpec s{theta_, alpha, N_};
    struct Part {
      double full = 0, diag = 0, off = 0, off_im = 0;
    };
    constexpr std::int64_t kChunk = 512;
    const auto chunks = static_cast<std::size_t>((window_.size() + kChunk - 1) / kChunk);
    const auto parts = parallel::map_chunks<Part>(chunks, [&](std::size_t ci) {
      const std::int64_t lo = window_.lo + static_cast<std::int64_t>(ci) * kChunk;
      const std::int64_t hi = std::min(window_.hi, lo + kChunk - 1);
      CompensatedSum<double> full, diag, off, off_im;
      std::vector<complex> u;
      for (std::int64_t j = lo; j <= hi; ++j) {
        const double fh = fhat_[static_cast<std::size_t>(j - window_.lo)];
        if (fh == 0.0) continue;
        if (detail::bprocess_terms(s, h_, c_, j, u).empty()) continue;
        const double wj = fh * std::pow(static_cast<double>(j), static_cast<double>(c_.Theta));
        CompensatedSum<complex> a;
        CompensatedSum<double> d;
        for (const auto& v : u) {
          a.add(v);
          d.add(std::norm(v));
        }
        const double sq = std::norm(a.value());
        full.add(wj * sq);
        diag.add(wj * d.value());
        if (explicit_off_diagonal) {
          CompensatedSum<complex> o;
          for (std::size_t m = 0; m < u.size(); ++m)
            for (std::size_t k = 0; k < u.size(); ++k)
              if (m != k) o.add(u[m] * std::conj(u[k]));
          off.add(wj * o.value().real());
          off_im.add(wj * o.value().imag());
        } else {
          off.add(wj * (sq - d.value()));
        }
      }
      return Part{full.value(), diag.value(), off.value(), off_im.value()};
    });
    Part total;
    for (const auto& p : parts) {
      total.full += p.full;
      total.diag += p.diag;
      total.off += p.off;
      total.off_im += p.off_im;
    }
    const double n = static_cast<double>(N_);
    const double pre = 2.0 * c_.c1_abs2 * std::pow(alpha, static_cast<double>(c_.Theta)) / (n * n);
    return {pre * total.full, pre * total.diag, pre * total.off, pre * total.off_im};
  }

  double r_off(double alpha) const { return evaluate(alpha).r_off; }

  const IntRange& j_range() const noexcept { return window_; }
  const BProcessConstants& constants() const noexcept { return c_; }
  double fhat(std::int64_t j) const { return fhat_.at(static_cast<std::size_t>(j - window_.lo)); }
  const TestKernel& h() const noexcept { return h_; }
  const TestKernel& f() const noexcept { return f_; }
  std::int64_t N() const noexcept { return N_; }
  double theta() const noexcept { return theta_; }
  double eps() const noexcept { return eps_; }

 private:
  double theta_;
  std::int64_t N_;
  TestKernel f_, h_;
  double eps_;
  BProcessConstants c_;
  IntRange window_;
  std::vector<double> fhat_;
};

/// R_off(N)(alpha): the m != n part of S~ over j in [N^{1-eps}, N^{1+eps}].
inline double r_off(const SequenceSpec& s, const TestKernel& f, const TestKernel& h, double eps = 0.05) {
  return StationarySums(s.theta, s.N, f, h, eps).r_off(s.alpha);
}

struct DiagonalTerm {
  double sum;        ///< sum_n n^{-(Theta+1)} h(W / n^Theta)^2
  double main_term;  ///< (1-theta)/W int h^2
  double W;
  bool regime_warning;  ///< W < 4
};

/// The m = n sum at frequency j, with W = (theta alpha j)^Theta / N.
inline DiagonalTerm diagonal_w_term(const SequenceSpec& s, std::int64_t j, const TestKernel& h) {
  if (j < 1) throw argument_error("diagonal_w_term: j must be >= 1");
  const double T = s.Theta();
  const double W = std::pow(s.theta * s.alpha * static_cast<double>(j), T) / static_cast<double>(s.N);
  if (h.is_zero()) return {0.0, 0.0, W, W < 4.0};
  // W / n^Theta in [lo, hi]  <=>  n in [(W/hi)^{1/Theta}, (W/lo)^{1/Theta}]
  const auto n_lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(std::pow(W / h.support_hi(), 1.0 / T))));
  const auto n_hi = static_cast<std::int64_t>(std::ceil(std::pow(W / h.support_lo(), 1.0 / T)));
  CompensatedSum<double> acc;
  for (std::int64_t n = n_lo; n <= n_hi; ++n) {
    const double dn = static_cast<double>(n);
    const double v = h(W / std::pow(dn, T));
    acc.add(v * v / std::pow(dn, T + 1.0));
  }
  return {acc.value(), (1.0 - s.theta) / W * kernel_integral_of_square(h), W, W < 4.0};
}

}  // namespace paircorr
