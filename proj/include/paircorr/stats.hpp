// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Unsmoothed local statistics of point sets on R/Z: the pair-correlation
// counting function and the nearest-neighbour gap histogram.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "paircorr/numeric.hpp"
#include "paircorr/rng.hpp"

namespace paircorr {

/// Points in [0,1) together with the index window they came from.
struct PointSet {
  std::vector<double> points;
  std::string window;

  std::size_t N() const noexcept { return points.size(); }
};

inline bool is_perfect_square(std::int64_t n) {
  if (n < 0) return false;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r * r == n;
}

/// {alpha n^theta mod 1 : lo <= n <= hi}, optionally without perfect squares n.
inline PointSet fractional_parts(double theta, double alpha, std::int64_t lo, std::int64_t hi,
                                 bool exclude_squares = false) {
  if (!(theta > 0.0 && theta < 1.0)) throw argument_error("fractional_parts: theta must lie in (0,1)");
  if (lo < 1 || hi < lo) throw argument_error("fractional_parts: need 1 <= lo <= hi");
  PointSet ps;
  ps.window = "[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
  ps.points.reserve(static_cast<std::size_t>(hi - lo + 1));
  const long double a = alpha, t = theta;
  const bool half = theta == 0.5;
  for (std::int64_t n = lo; n <= hi; ++n) {
    if (exclude_squares && is_perfect_square(n)) continue;
    const long double ln = static_cast<long double>(n);
    ps.points.push_back(frac_to_double(a * (half ? std::sqrt(ln) : std::pow(ln, t))));
  }
  return ps;
}

/// fractional_parts over the window (N, 2N].
inline PointSet dyadic_window(double theta, double alpha, std::int64_t N, bool exclude_squares = false) {
  return fractional_parts(theta, alpha, N + 1, 2 * N, exclude_squares);
}

/// N i.i.d. uniform points from the counter-based stream (seed, 0).
inline PointSet uniform_points(std::size_t N, std::uint64_t seed) {
  PointSet ps;
  ps.window = "uniform";
  ps.points.resize(N);
  auto rng = CounterRng::substream(seed, 0);
  for (auto& p : ps.points) p = rng.uniform();
  return ps;
}

struct PairCorrEstimate {
  double s;
  std::int64_t count;  ///< ordered pairs x != y at torus distance <= s/N
  double normalized;   ///< count / N
  double poisson_ref;  ///< 2 s
};

namespace detail {

inline std::vector<double> sorted_points(const PointSet& ps) {
  std::vector<double> p = ps.points;
  std::sort(p.begin(), p.end());
  return p;
}

/// Ordered pairs at torus distance <= r among sorted points in [0,1).
inline std::int64_t count_within(const std::vector<double>& p, double r) {
  const auto n = static_cast<std::int64_t>(p.size());
  if (n < 2) return 0;
  if (r >= 0.5) return n * (n - 1);
  // forward gap from i to k (cyclic, k in (i, i+n)); each unordered pair is
  // seen once since r < 1/2
  auto at = [&](std::int64_t k) { return k < n ? p[static_cast<std::size_t>(k)] : p[static_cast<std::size_t>(k - n)] + 1.0; };
  std::int64_t pairs = 0;
  std::int64_t k = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    k = std::max(k, i);
    while (k + 1 < i + n && at(k + 1) - p[static_cast<std::size_t>(i)] <= r) ++k;
    pairs += k - i;
  }
  return 2 * pairs;
}

}  // namespace detail

/// #{x != y : ||p_x - p_y|| <= s/N} / N, ordered pairs, torus distance.
inline PairCorrEstimate pair_corr_count(const PointSet& ps, double s) {
  if (!(s > 0.0)) throw argument_error("pair_corr_count: s must be positive");
  const auto n = static_cast<double>(ps.N());
  const auto sorted = detail::sorted_points(ps);
  const std::int64_t c = ps.N() == 0 ? 0 : detail::count_within(sorted, s / n);
  return {s, c, ps.N() == 0 ? 0.0 : static_cast<double>(c) / n, 2.0 * s};
}

/// pair_corr_count at several s, sorting once.
inline std::vector<PairCorrEstimate> pair_corr_counts(const PointSet& ps, std::span<const double> s_values) {
  const auto n = static_cast<double>(ps.N());
  const auto sorted = detail::sorted_points(ps);
  std::vector<PairCorrEstimate> out;
  for (double s : s_values) {
    if (!(s > 0.0)) throw argument_error("pair_corr_counts: s must be positive");
    const std::int64_t c = ps.N() == 0 ? 0 : detail::count_within(sorted, s / n);
    out.push_back({s, c, ps.N() == 0 ? 0.0 : static_cast<double>(c) / n, 2.0 * s});
  }
  return out;
}

/// Gaps between circularly consecutive sorted points (they sum to 1).
inline std::vector<double> circular_gaps(const PointSet& ps) {
  if (ps.N() < 2) throw argument_error("circular_gaps: need at least two points");
  const auto p = detail::sorted_points(ps);
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i + 1 < p.size(); ++i) g[i] = p[i + 1] - p[i];
  g.back() = p.front() + 1.0 - p.back();
  return g;
}

struct GapHistogram {
  double lo = 0.0, hi = 4.0;
  std::vector<std::int64_t> counts;
  std::int64_t overflow = 0;  ///< rescaled gaps > hi
  std::int64_t total = 0;     ///< number of gaps (= N)

  double width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  double edge(std::size_t i) const { return lo + width() * static_cast<double>(i); }
  double density(std::size_t i) const {
    return static_cast<double>(counts[i]) / (static_cast<double>(total) * width());
  }
  /// Probability mass in [a, b] divided by b - a; a and b must be bin edges.
  double mean_density(double a, double b) const {
    const double w = width();
    const auto i0 = static_cast<std::size_t>(std::llround((a - lo) / w));
    const auto i1 = static_cast<std::size_t>(std::llround((b - lo) / w));
    if (std::abs(edge(i0) - a) > 1e-12 || std::abs(edge(i1) - b) > 1e-12 || i1 <= i0 || i1 > counts.size())
      throw argument_error("GapHistogram::mean_density: range must be aligned to bin edges");
    std::int64_t m = 0;
    for (std::size_t i = i0; i < i1; ++i) m += counts[i];
    return static_cast<double>(m) / (static_cast<double>(total) * (b - a));
  }
};

/// Histogram of the circular gaps rescaled by the mean gap 1/N, on [0, 4].
inline GapHistogram gap_distribution(const PointSet& ps, std::size_t bins) {
  if (ps.N() < 2) throw argument_error("gap_distribution: need N >= 2");
  if (bins == 0) throw argument_error("gap_distribution: need at least one bin");
  GapHistogram hg;
  hg.counts.assign(bins, 0);
  const double n = static_cast<double>(ps.N());
  const double scale = static_cast<double>(bins) / (hg.hi - hg.lo);
  for (double g : circular_gaps(ps)) {
    const double x = g * n;
    ++hg.total;
    if (x > hg.hi) {
      ++hg.overflow;
      continue;
    }
    const auto i = std::min(bins - 1, static_cast<std::size_t>((x - hg.lo) * scale));
    ++hg.counts[i];
  }
  return hg;
}

}  // namespace paircorr
