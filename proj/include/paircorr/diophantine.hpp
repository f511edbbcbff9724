// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Counting problems behind the variance bound: the multiset Z_{u,q}, the
// counts D_{u,q} and Z_{u,q,diag}, the Robert-Sargos quadruple count, and the
// Dirichlet polynomials whose twisted second moment dominates D_{u,q}.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "paircorr/expsums.hpp"
#include "paircorr/kernels.hpp"
#include "paircorr/numeric.hpp"

namespace paircorr {

namespace detail {

/// ceil(e^x), treating values within 1e-9 relative of an integer as that integer
/// (u is often the log of an integer).
inline std::int64_t ceil_exp(long double x) {
  const long double v = std::exp(x);
  const long double r = std::round(v);
  if (std::abs(v - r) <= 1e-9L * v) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(v));
}

}  // namespace detail

/// One counting instance: j in j_range, m < n in mn_range with n - m in gap_range,
/// and a closeness threshold for the products j^Theta z.
struct DioInstance {
  double theta = 0.5;
  long double Theta = 2.0L;
  std::int64_t N = 1;
  double eps = 0.0;
  double u = 0.0, q = 0.0;
  IntRange j_range, mn_range, gap_range;
  double threshold = 1.0;
  bool scale_derived = false;

  double U() const { return (1.0 + eps) * std::log(static_cast<double>(N)); }
  double Q() const { return (theta + eps) * std::log(static_cast<double>(N)); }

  bool vacuous() const {
    return j_range.empty() || mn_range.empty() || gap_range.empty() || gap_range.lo > mn_range.hi - mn_range.lo;
  }

  /// j in [e^u, e^{u+1}), gaps in [e^q, e^{q+1}), threshold N^eps, and
  /// m, n in [theta 2^{theta-1} e^u N^{theta-1}, 2 theta e^{u+1} N^{theta-1}].
  static DioInstance from_scales(double theta, std::int64_t N, double eps, double u, double q) {
    if (!(theta > 0.0 && theta < 1.0)) throw argument_error("DioInstance: theta must lie in (0,1)");
    if (N < 2 || !(eps > 0.0)) throw argument_error("DioInstance: need N >= 2 and eps > 0");
    DioInstance d;
    d.theta = theta;
    d.Theta = 1.0L / (1.0L - static_cast<long double>(theta));
    d.N = N;
    d.eps = eps;
    d.u = u;
    d.q = q;
    if (u < 0.0 || q < 0.0 || u > d.U() + 1e-12 || q > d.Q() + 1e-12)
      throw argument_error("DioInstance: need 0 <= u <= U and 0 <= q <= Q");
    d.scale_derived = true;
    d.j_range = {detail::ceil_exp(u), detail::ceil_exp(u + 1.0L) - 1};
    d.gap_range = {detail::ceil_exp(q), detail::ceil_exp(q + 1.0L) - 1};
    const long double scale = std::pow(static_cast<long double>(N), static_cast<long double>(theta) - 1.0L);
    const long double lo = theta * std::pow(2.0L, static_cast<long double>(theta) - 1.0L) * std::exp(static_cast<long double>(u)) * scale;
    const long double hi = 2.0L * theta * std::exp(static_cast<long double>(u) + 1.0L) * scale;
    d.mn_range = {std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(lo))),
                  static_cast<std::int64_t>(std::floor(hi))};
    d.threshold = std::pow(static_cast<double>(N), eps);
    return d;
  }

  static DioInstance explicit_ranges(double theta, IntRange j, IntRange mn, IntRange gap, double threshold) {
    if (!(theta > 0.0 && theta < 1.0)) throw argument_error("DioInstance: theta must lie in (0,1)");
    if (j.lo < 1 || mn.lo < 1 || gap.lo < 1) throw argument_error("DioInstance: ranges must start at >= 1");
    if (!(threshold >= 0.0)) throw argument_error("DioInstance: threshold must be >= 0");
    DioInstance d;
    d.theta = theta;
    d.Theta = 1.0L / (1.0L - static_cast<long double>(theta));
    d.j_range = j;
    d.mn_range = mn;
    d.gap_range = gap;
    d.threshold = threshold;
    d.u = std::log(static_cast<double>(j.lo));
    d.q = std::log(static_cast<double>(gap.lo));
    return d;
  }
};

struct ZEntry {
  long double z;  ///< m^{1-Theta} - n^{1-Theta} > 0
  std::int64_t m, n;
};

/// Z_{u,q} with multiplicity, sorted by z.
struct ZMultiset {
  std::vector<ZEntry> entries;
  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
};

inline ZMultiset build_zset(const DioInstance& inst, double max_size = 1e8) {
  ZMultiset zs;
  if (inst.vacuous()) return zs;
  const auto& r = inst.mn_range;
  const auto& g = inst.gap_range;
  const double est = static_cast<double>(r.size()) * static_cast<double>(g.size());
  if (est > max_size) throw resource_error("build_zset: too many (m, n) pairs", est);
  const long double e = 1.0L - inst.Theta;
  std::vector<long double> pw(static_cast<std::size_t>(r.size()));
  for (std::int64_t m = r.lo; m <= r.hi; ++m) pw[static_cast<std::size_t>(m - r.lo)] = std::pow(static_cast<long double>(m), e);
  for (std::int64_t m = r.lo; m <= r.hi; ++m)
    for (std::int64_t d = g.lo; d <= g.hi && m + d <= r.hi; ++d)
      zs.entries.push_back({pw[static_cast<std::size_t>(m - r.lo)] - pw[static_cast<std::size_t>(m + d - r.lo)], m, m + d});
  std::sort(zs.entries.begin(), zs.entries.end(), [](const ZEntry& a, const ZEntry& b) {
    return a.z != b.z ? a.z < b.z : a.m < b.m;
  });
  return zs;
}

namespace detail {

/// Relative size below which a difference from the bound is an exact tie.
inline constexpr double kTieTolerance = 1e-12;

/// Ordered pairs (a, b) of entries of sorted v with |v[b] - v[a]| within the
/// window, counting a == b; strict selects < over <=. Differences within
/// kTieTolerance * max|v| of the window count as equal to it.
template <typename T>
std::int64_t count_close_sorted(const std::vector<T>& v, T width, bool strict) {
  const auto n = static_cast<std::int64_t>(v.size());
  if (n == 0) return 0;
  if (strict && !(width > 0)) return 0;
  const T tie = static_cast<T>(kTieTolerance) * std::max(std::abs(v.front()), std::abs(v.back()));
  auto close = [&](T d) { return strict ? d < width - tie : d <= width + tie; };
  std::int64_t pairs = 0, k = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    k = std::max(k, i);
    while (k + 1 < n && close(v[static_cast<std::size_t>(k + 1)] - v[static_cast<std::size_t>(i)])) ++k;
    pairs += k - i;
  }
  return n + 2 * pairs;
}

/// Sorted products j^Theta z over j_range x zset.
inline std::vector<double> sorted_products(const DioInstance& inst, const ZMultiset& zs, double max_size) {
  const double est = static_cast<double>(inst.j_range.size()) * static_cast<double>(zs.size());
  if (est > max_size) throw resource_error("count_duq: enumeration too large", est);
  std::vector<double> p;
  p.reserve(static_cast<std::size_t>(est));
  for (std::int64_t j = inst.j_range.lo; j <= inst.j_range.hi; ++j) {
    const long double jT = std::pow(static_cast<long double>(j), inst.Theta);
    for (const auto& e : zs.entries) p.push_back(static_cast<double>(jT * e.z));
  }
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace detail

/// #{(j1, z1, j2, z2) : |j1^Theta z1 - j2^Theta z2| <= threshold}, by sorting the
/// products and sweeping a window of width threshold.
inline std::int64_t count_duq(const DioInstance& inst, const ZMultiset& zs, double max_size = 1e9) {
  if (zs.empty() || inst.j_range.empty()) return 0;
  return detail::count_close_sorted(detail::sorted_products(inst, zs, max_size), inst.threshold, false);
}

inline std::int64_t count_duq(const DioInstance& inst, double max_size = 1e9) {
  if (inst.vacuous()) return 0;
  return count_duq(inst, build_zset(inst), max_size);
}

/// The quadratic loop over pairs of products.
inline std::int64_t count_duq_naive(const DioInstance& inst, double max_pairs = 1e10) {
  if (inst.vacuous()) return 0;
  const auto zs = build_zset(inst);
  const auto p = detail::sorted_products(inst, zs, 1e9);
  const double est = static_cast<double>(p.size()) * static_cast<double>(p.size());
  if (est > max_pairs) throw resource_error("count_duq_naive: too many pairs", est);
  const double tie = detail::kTieTolerance * std::max(std::abs(p.front()), std::abs(p.back()));
  std::int64_t c = 0;
  for (double a : p)
    for (double b : p) c += std::abs(a - b) <= inst.threshold + tie;
  return c;
}

/// Ordered pairs (z1, z2) in zset with |z1 - z2| < tau.
inline std::int64_t count_zdiag(const ZMultiset& zs, double tau) {
  if (!(tau > 0.0)) throw argument_error("count_zdiag: tau must be positive");
  std::vector<long double> z;
  z.reserve(zs.size());
  for (const auto& e : zs.entries) z.push_back(e.z);
  std::sort(z.begin(), z.end());
  return detail::count_close_sorted(z, static_cast<long double>(tau), true);
}

/// #{(x1, y1, x2, y2) in [1, M]^4 : |x1^a - y1^a + x2^a - y2^a| < gamma M^a}, a = 1 - Theta.
inline std::int64_t robert_sargos_count(std::int64_t M, double one_minus_Theta, double gamma) {
  if (M < 1) throw argument_error("robert_sargos_count: M must be >= 1");
  if (one_minus_Theta == 0.0 || one_minus_Theta == 1.0)
    throw argument_error("robert_sargos_count: exponent must not be 0 or 1");
  if (!(gamma >= 0.0)) throw argument_error("robert_sargos_count: gamma must be >= 0");
  const double m4 = std::pow(static_cast<double>(M), 4.0);
  if (m4 > 1e9) throw resource_error("robert_sargos_count: M^4 exceeds 1e9", m4);
  const long double a = one_minus_Theta;
  std::vector<long double> pw(static_cast<std::size_t>(M));
  for (std::int64_t x = 1; x <= M; ++x) pw[static_cast<std::size_t>(x - 1)] = std::pow(static_cast<long double>(x), a);
  // the value is s(x1, x2) - s(y1, y2) with s(x, y) = x^a + y^a
  std::vector<long double> s;
  s.reserve(static_cast<std::size_t>(M * M));
  for (long double p : pw)
    for (long double r : pw) s.push_back(p + r);
  std::sort(s.begin(), s.end());
  return detail::count_close_sorted(s, static_cast<long double>(gamma) * std::pow(static_cast<long double>(M), a), true);
}

/// D_u(Theta t) = sum over e^u <= j < e^{u+1} of j^{2 pi i Theta t}.
inline complex dirichlet_D(double u, double Theta, double t) {
  const std::int64_t lo = detail::ceil_exp(u), hi = detail::ceil_exp(static_cast<long double>(u) + 1.0L) - 1;
  const long double f = static_cast<long double>(Theta) * static_cast<long double>(t);
  CompensatedSum<complex> acc;
  for (std::int64_t j = lo; j <= hi; ++j) acc.add(unit_phase(f * std::log(static_cast<long double>(j))));
  return acc.value();
}

/// P(t) = sum over z in zset of z^{2 pi i t}, with multiplicity.
inline complex dirichlet_P(const ZMultiset& zs, double t) {
  CompensatedSum<complex> acc;
  for (const auto& e : zs.entries) acc.add(unit_phase(static_cast<long double>(t) * std::log(e.z)));
  return acc.value();
}

struct TwistedMoment {
  double value = 0.0;  ///< (1/T) int |D_u(Theta t)|^2 |P(t)|^2 Phi(t/T) dt
  double low = 0.0;    ///< contribution of |t| <= e^u, also divided by T
  double high = 0.0;   ///< contribution of e^u < |t| <= T, also divided by T
  double T = 0.0;
  double spacing = 0.0;
  std::int64_t nodes = 0;
};

/// e^q N / N^eps.
inline double default_twist_T(const DioInstance& inst) {
  return std::exp(inst.q) * static_cast<double>(inst.N) / std::pow(static_cast<double>(inst.N), inst.eps);
}

/// Trapezoid rule on [0, T] (the integrand is even) with uniform nodes at
/// 1/16 of the shortest period of |D_u(Theta t)|^2 |P(t)|^2.
inline TwistedMoment twisted_second_moment(const DioInstance& inst, const BeurlingSelberg& bs, double T,
                                           double max_work = 2e10) {
  if (!(T > 0.0)) throw argument_error("twisted_second_moment: T must be positive");
  TwistedMoment out;
  out.T = T;
  const auto zs = build_zset(inst);
  if (zs.empty() || inst.j_range.empty()) return out;
  // log-frequencies in cycles per unit t
  std::vector<long double> freq;
  for (std::int64_t j = inst.j_range.lo; j <= inst.j_range.hi; ++j)
    freq.push_back(inst.Theta * std::log(static_cast<long double>(j)));
  const std::size_t nj = freq.size();
  for (const auto& e : zs.entries) freq.push_back(std::log(e.z));
  const long double span = inst.Theta * std::log(static_cast<long double>(inst.j_range.hi) / inst.j_range.lo) +
                           std::log(zs.entries.back().z / zs.entries.front().z);
  const double step = std::min(1.0 / (16.0 * std::max(1.0, static_cast<double>(span))), T / 256.0);
  const auto nodes = static_cast<std::int64_t>(std::ceil(T / step));
  const double h = T / static_cast<double>(nodes);
  const double work = static_cast<double>(nodes) * static_cast<double>(freq.size());
  if (work > max_work) throw resource_error("twisted_second_moment: too many node evaluations", work);
  out.spacing = h;
  out.nodes = nodes + 1;

  std::vector<complex> rot(freq.size()), cur(freq.size(), complex(1.0, 0.0));
  for (std::size_t k = 0; k < freq.size(); ++k) rot[k] = unit_phase(freq[k] * static_cast<long double>(h));
  const double split = std::exp(inst.u);
  CompensatedSum<double> low, high;
  for (std::int64_t i = 0; i <= nodes; ++i) {
    if (i % 64 == 0)
      for (std::size_t k = 0; k < freq.size(); ++k)
        cur[k] = unit_phase(freq[k] * static_cast<long double>(i) * static_cast<long double>(h));
    complex d(0.0, 0.0), p(0.0, 0.0);
    for (std::size_t k = 0; k < nj; ++k) d += cur[k];
    for (std::size_t k = nj; k < freq.size(); ++k) p += cur[k];
    const double t = h * static_cast<double>(i);
    const double w = (i == 0 || i == nodes) ? 0.5 : 1.0;
    const double v = w * std::norm(d) * std::norm(p) * bs.phi(t / T);
    (t <= split ? low : high).add(v);
    for (std::size_t k = 0; k < freq.size(); ++k) cur[k] *= rot[k];
  }
  // both halves of the line, divided by T
  out.low = 2.0 * h * low.value() / T;
  out.high = 2.0 * h * high.value() / T;
  out.value = out.low + out.high;
  return out;
}

/// The expanded form sum over (j1, z1, j2, z2) of Phi_hat(T log(j1^Theta z1 / (j2^Theta z2))).
/// Phi_hat outside its table costs a full grid convolution, so this is for small instances.
inline double twisted_pair_sum(const DioInstance& inst, const BeurlingSelberg& bs, double T, double max_pairs = 1e5) {
  const auto zs = build_zset(inst);
  if (zs.empty() || inst.j_range.empty()) return 0.0;
  const auto p = detail::sorted_products(inst, zs, 1e8);
  const double est = static_cast<double>(p.size()) * static_cast<double>(p.size());
  if (est > max_pairs) throw resource_error("twisted_pair_sum: too many pairs", est);
  std::vector<double> lp(p.size());
  std::transform(p.begin(), p.end(), lp.begin(), [](double x) { return std::log(x); });
  CompensatedSum<double> acc;
  for (double a : lp)
    for (double b : lp) acc.add(bs.phi_hat(T * (a - b)));
  return acc.value();
}

/// #{(j1, z1, j2, z2) : |T log(j1^Theta z1 / (j2^Theta z2))| < 1}.
inline std::int64_t count_log_close(const DioInstance& inst, double T) {
  if (!(T > 0.0)) throw argument_error("count_log_close: T must be positive");
  const auto zs = build_zset(inst);
  if (zs.empty() || inst.j_range.empty()) return 0;
  auto p = detail::sorted_products(inst, zs, 1e9);
  for (auto& x : p) x = std::log(x);
  return detail::count_close_sorted(p, 1.0 / T, true);
}

/// One (u, q) cell of the brute-force check of the D_{u,q} and Z_diag bounds.
struct DuqRow {
  double u = 0.0, q = 0.0;
  bool vacuous = false;
  std::int64_t j_count = 0, z_count = 0;
  std::int64_t duq = 0, zdiag = 0;
  double tau = 0.0;
  double duq_ref = 0.0;    ///< N^{1 + 3 theta}
  double zdiag_ref = 0.0;  ///< N^{2 theta}
  double duq_ratio = 0.0;  ///< duq / N^{1 + 3 theta + 3 eps}
  double zdiag_ratio = 0.0;  ///< zdiag / N^{2 theta + 3 eps}
  double z_size_ratio = 0.0;  ///< #Z / (e^u e^q / N^{1 - theta})
  double z_min_ratio = 0.0, z_max_ratio = 0.0, z_median_ratio = 0.0;  ///< z / (e^q N / e^{Theta u})
};

/// Grid u = (1 - eps) log N + k up to U, q = 0, 1, ... up to Q.
inline std::vector<DuqRow> duq_bound_check(double theta, std::int64_t N, double eps) {
  if (N < 2 || N > 512) throw argument_error("duq_bound_check: need 2 <= N <= 512");
  if (!(eps > 0.0 && eps < 1.0)) throw argument_error("duq_bound_check: eps must lie in (0,1)");
  const double logN = std::log(static_cast<double>(N));
  const double U = (1.0 + eps) * logN, Q = (theta + eps) * logN;
  const long double Theta = 1.0L / (1.0L - static_cast<long double>(theta));
  std::vector<DuqRow> rows;
  for (double u = (1.0 - eps) * logN; u <= U + 1e-12; u += 1.0) {
    for (double q = 0.0; q <= Q + 1e-12; q += 1.0) {
      const auto inst = DioInstance::from_scales(theta, N, eps, u, q);
      DuqRow r;
      r.u = u;
      r.q = q;
      r.tau = std::pow(static_cast<double>(N), 2.0 * eps) * static_cast<double>(std::exp(-Theta * u));
      r.duq_ref = std::pow(static_cast<double>(N), 1.0 + 3.0 * theta);
      r.zdiag_ref = std::pow(static_cast<double>(N), 2.0 * theta);
      r.j_count = inst.j_range.size();
      r.vacuous = inst.vacuous();
      if (!r.vacuous) {
        const auto zs = build_zset(inst);
        r.z_count = static_cast<std::int64_t>(zs.size());
        r.vacuous = zs.empty();
        if (!r.vacuous) {
          r.duq = count_duq(inst, zs);
          r.zdiag = count_zdiag(zs, r.tau);
          const double zref = std::exp(q) * static_cast<double>(N) / static_cast<double>(std::exp(Theta * u));
          r.z_min_ratio = static_cast<double>(zs.entries.front().z) / zref;
          r.z_max_ratio = static_cast<double>(zs.entries.back().z) / zref;
          r.z_median_ratio = static_cast<double>(zs.entries[zs.size() / 2].z) / zref;
          r.z_size_ratio = static_cast<double>(zs.size()) /
                           (std::exp(u + q) / std::pow(static_cast<double>(N), 1.0 - theta));
        }
      }
      r.duq_ratio = static_cast<double>(r.duq) / std::pow(static_cast<double>(N), 1.0 + 3.0 * theta + 3.0 * eps);
      r.zdiag_ratio = static_cast<double>(r.zdiag) / std::pow(static_cast<double>(N), 2.0 * theta + 3.0 * eps);
      rows.push_back(r);
    }
  }
  return rows;
}

}  // namespace paircorr
