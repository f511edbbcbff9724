// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration, the experiment runners, and report/CSV output
// for the paircorr-lab tool.
#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "paircorr/diophantine.hpp"
#include "paircorr/expsums.hpp"
#include "paircorr/kernels.hpp"
#include "paircorr/measure.hpp"
#include "paircorr/stats.hpp"

namespace paircorr::lab {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"paircorr", "gaps",          "bprocess", "moments",
                                                 "roff-variance", "dio", "bs-check"};
  return names;
}

inline const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> tol = {
      {"paircorr", 0.10},  // relative deviation of the pair count from 2s
      {"smooth", 0.05},    // relative deviation of the smoothed statistic
      {"gaps_flat", 0.02}, // absolute deviation of the flat piece from 6/pi^2
      {"bprocess", 10.0},  // |E - E~| j^{1/2} / N^{1 - theta/2}
      {"prop23", 20.0},    // E|E~|^2 / N
      {"diag_factor", 2.0},
      {"osc_decay", 3.0},  // |I| <= N^{-osc_decay}
      {"roff_slope", -0.2},
      {"duq", 50.0},
      {"zdiag", 50.0},
      {"rs_constant", 32.0},
      {"rs_exponent", 0.2},
      {"bs", 1e-3},
  };
  return tol;
}

/// N_l = l^C for l in [ell_lo, ell_hi], ascending and deduplicated.
inline std::vector<std::int64_t> subsequence(std::int64_t C, std::int64_t ell_lo, std::int64_t ell_hi) {
  if (C < 1) throw argument_error("subsequence: C must be >= 1");
  if (ell_lo < 1 || ell_hi < ell_lo) throw argument_error("subsequence: need 1 <= ell_lo <= ell_hi");
  std::vector<std::int64_t> out;
  for (std::int64_t l = ell_lo; l <= ell_hi; ++l) {
    std::int64_t v = 1;
    for (std::int64_t k = 0; k < C; ++k)
      if (__builtin_mul_overflow(v, l, &v)) throw std::range_error("subsequence: l^C overflows 64 bits");
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  return out;
}

struct SubsequenceSpec {
  std::int64_t C = 2, ell_lo = 1, ell_hi = 1;
  bool operator==(const SubsequenceSpec&) const = default;
};

struct ExperimentConfig {
  std::string experiment;
  double theta = 0.5;
  std::string alpha_mode;  ///< "fixed" or "sample"; empty selects the experiment default
  double alpha = 1.0;
  std::int64_t alpha_samples = 5;
  std::vector<std::int64_t> N_list;
  std::optional<SubsequenceSpec> subsequence;
  std::optional<double> eps;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::map<std::string, double> tolerances;
  std::vector<double> s_values = {0.5, 1.0, 2.0};
  std::string window;  ///< "dyadic" (N, 2N] or "initial" [1, N]; empty selects the default
  bool exclude_squares = false;
  std::int64_t samples = 0;  ///< Monte Carlo draws; 0 selects the default
  std::int64_t bins = 40;

  bool operator==(const ExperimentConfig&) const = default;

  double tol(const std::string& key) const {
    const auto it = tolerances.find(key);
    return it != tolerances.end() ? it->second : default_tolerances().at(key);
  }
  double eps_or_default() const { return eps.value_or(experiment == "dio" ? 0.1 : 0.05); }
  std::string alpha_mode_or_default() const {
    if (!alpha_mode.empty()) return alpha_mode;
    return experiment == "gaps" ? "fixed" : "sample";
  }
  std::string window_or_default() const {
    if (!window.empty()) return window;
    return experiment == "gaps" ? "initial" : "dyadic";
  }
  std::int64_t samples_or_default() const {
    if (samples > 0) return samples;
    return experiment == "roff-variance" ? 500 : 2000;
  }
  std::vector<std::int64_t> Ns() const {
    if (subsequence) return lab::subsequence(subsequence->C, subsequence->ell_lo, subsequence->ell_hi);
    if (!N_list.empty()) return N_list;
    if (experiment == "paircorr") return {100000};
    if (experiment == "gaps") return {1000000};
    if (experiment == "bprocess") return {1000, 10000};
    if (experiment == "moments") return {10000};
    if (experiment == "roff-variance") return {1024, 4096, 16384};
    if (experiment == "dio") return {256};
    return {};
  }

  /// Throws argument_error on any invalid field.
  void validate() const {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end())
      throw argument_error("unknown experiment '" + experiment + "'");
    if (!(theta > 0.0 && theta < 1.0)) throw argument_error("theta must lie in (0,1)");
    const double e = eps_or_default();
    if (!(e > 0.0 && e < 0.2)) throw argument_error("eps must lie in (0, 0.2)");
    if (!alpha_mode.empty() && alpha_mode != "fixed" && alpha_mode != "sample")
      throw argument_error("alpha_mode must be 'fixed' or 'sample'");
    if (!(alpha > 0.0)) throw argument_error("alpha must be positive");
    if (alpha_samples < 1) throw argument_error("alpha_samples must be >= 1");
    if (subsequence && subsequence->C < 2) throw argument_error("subsequence C must be >= 2");
    if (subsequence && !N_list.empty()) throw argument_error("give either N_list or subsequence, not both");
    for (auto N : Ns())
      if (N < 2) throw argument_error("every N must be >= 2");
    if (!window.empty() && window != "dyadic" && window != "initial")
      throw argument_error("window must be 'dyadic' or 'initial'");
    for (double s : s_values)
      if (!(s > 0.0)) throw argument_error("s_values must be positive");
    if (samples < 0) throw argument_error("samples must be >= 0");
    if (experiment == "roff-variance" && samples_or_default() < 100)
      throw argument_error("roff-variance needs at least 100 samples");
    if (bins < 1) throw argument_error("bins must be >= 1");
    for (const auto& [k, v] : tolerances)
      if (!default_tolerances().contains(k)) throw argument_error("unknown tolerance '" + k + "'");
  }
};

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["theta"] = c.theta;
  j["alpha_mode"] = c.alpha_mode;
  j["alpha"] = c.alpha;
  j["alpha_samples"] = c.alpha_samples;
  j["N_list"] = c.N_list;
  if (c.subsequence) {
    j["subsequence"] = {{"C", c.subsequence->C}, {"ell_lo", c.subsequence->ell_lo}, {"ell_hi", c.subsequence->ell_hi}};
  } else {
    j["subsequence"] = nullptr;
  }
  j["eps"] = c.eps ? json(*c.eps) : json(nullptr);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["tolerances"] = json::object();
  for (const auto& [k, v] : c.tolerances) j["tolerances"][k] = v;
  j["s_values"] = c.s_values;
  j["window"] = c.window;
  j["exclude_squares"] = c.exclude_squares;
  j["samples"] = c.samples;
  j["bins"] = c.bins;
  return j;
}

/// Reads the fields present in j over c; unknown keys are an error.
inline void merge_json(ExperimentConfig& c, const json& j) {
  if (!j.is_object()) throw argument_error("config must be a JSON object");
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "experiment") c.experiment = v.get<std::string>();
      else if (k == "theta") c.theta = v.get<double>();
      else if (k == "alpha_mode") c.alpha_mode = v.get<std::string>();
      else if (k == "alpha") c.alpha = v.get<double>();
      else if (k == "alpha_samples") c.alpha_samples = v.get<std::int64_t>();
      else if (k == "N_list") c.N_list = v.get<std::vector<std::int64_t>>();
      else if (k == "subsequence") {
        if (v.is_null()) {
          c.subsequence.reset();
        } else {
          c.subsequence = SubsequenceSpec{v.at("C").get<std::int64_t>(), v.at("ell_lo").get<std::int64_t>(),
                                          v.at("ell_hi").get<std::int64_t>()};
        }
      } else if (k == "eps") {
        if (v.is_null()) c.eps.reset();
        else c.eps = v.get<double>();
      } else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "output_dir") c.output_dir = v.get<std::string>();
      else if (k == "tolerances") c.tolerances = v.get<std::map<std::string, double>>();
      else if (k == "s_values") c.s_values = v.get<std::vector<double>>();
      else if (k == "window") c.window = v.get<std::string>();
      else if (k == "exclude_squares") c.exclude_squares = v.get<bool>();
      else if (k == "samples") c.samples = v.get<std::int64_t>();
      else if (k == "bins") c.bins = v.get<std::int64_t>();
      else throw argument_error("unknown config key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw argument_error(std::string("bad config value: ") + e.what());
  }
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  merge_json(c, j);
  return c;
}

/// One result row; reference, ratio and pass are absent for informational rows.
struct ReportRow {
  std::string op;  ///< the operation that produced the value
  json inputs;
  double value = 0.0;
  std::optional<double> reference, ratio;
  std::optional<bool> pass;
  std::uint64_t seed = 0;

  bool operator==(const ReportRow& o) const {
    return op == o.op && inputs == o.inputs && same(value, o.value) && same(reference, o.reference) &&
           same(ratio, o.ratio) && pass == o.pass && seed == o.seed;
  }

 private:
  static bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }
  static bool same(const std::optional<double>& a, const std::optional<double>& b) {
    return a.has_value() == b.has_value() && (!a || same(*a, *b));
  }
};

namespace detail {

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
inline json number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }
inline std::optional<double> read_number(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace detail

inline json to_json(const ReportRow& r) {
  json j;
  j["op"] = r.op;
  j["inputs"] = r.inputs;
  j["value"] = detail::number(r.value);
  j["reference"] = detail::number(r.reference);
  j["ratio"] = detail::number(r.ratio);
  j["pass"] = r.pass ? json(*r.pass) : json(nullptr);
  j["seed"] = r.seed;
  return j;
}

inline ReportRow row_from_json(const json& j) {
  ReportRow r;
  r.op = j.at("op").get<std::string>();
  r.inputs = j.at("inputs");
  r.value = j.at("value").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("value").get<double>();
  r.reference = detail::read_number(j.at("reference"));
  r.ratio = detail::read_number(j.at("ratio"));
  if (!j.at("pass").is_null()) r.pass = j.at("pass").get<bool>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

/// A plot file with columns x, value, reference, ratio; absent entries are empty.
struct CsvTable {
  std::string name;
  std::vector<std::array<std::optional<double>, 4>> rows;

  void add(double x, double value, std::optional<double> reference) {
    std::optional<double> ratio;
    if (reference && *reference != 0.0) ratio = value / *reference;
    rows.push_back({x, value, reference, ratio});
  }
};

struct Report {
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  std::vector<CsvTable> tables;

  std::int64_t failed() const {
    return std::count_if(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass && !*r.pass; });
  }
  std::int64_t passed() const {
    return std::count_if(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass && *r.pass; });
  }
};

/// The deterministic part of the report; the timestamp field is added by write_report.
inline json to_json(const Report& rep) {
  json j;
  j["tool"] = "paircorr-lab";
  j["versions"] = {{"paircorr_lab", kVersion}, {"compiler", __VERSION__}, {"cplusplus", __cplusplus}};
  j["config"] = to_json(rep.config);
  j["rows"] = json::array();
  for (const auto& r : rep.rows) j["rows"].push_back(to_json(r));
  j["summary"] = {{"rows", rep.rows.size()}, {"passed", rep.passed()}, {"failed", rep.failed()}};
  j["files"] = json::array();
  for (const auto& t : rep.tables) j["files"].push_back(t.name);
  return j;
}

//---------------------------------------------------------------------------//
// Experiments
//---------------------------------------------------------------------------//

namespace detail {

inline std::vector<double> alphas(const ExperimentConfig& c) {
  if (c.alpha_mode_or_default() == "fixed") return {c.alpha};
  return MuMeasure(c.theta).samples(static_cast<std::size_t>(c.alpha_samples), c.seed);
}

inline constexpr double kMaxPoints = 2e8;
inline constexpr std::int64_t kMaxDioN = 512;

inline PointSet window_points(const ExperimentConfig& c, double alpha, std::int64_t N) {
  if (static_cast<double>(N) > kMaxPoints) throw resource_error("point set too large", static_cast<double>(N));
  if (c.window_or_default() == "dyadic") return dyadic_window(c.theta, alpha, N, c.exclude_squares);
  return fractional_parts(c.theta, alpha, 1, N, c.exclude_squares);
}

inline ReportRow make_row(const ExperimentConfig& c, std::string op, json inputs, double value,
                          std::optional<double> reference, std::optional<bool> pass) {
  ReportRow r;
  r.op = std::move(op);
  r.inputs = std::move(inputs);
  r.value = value;
  r.reference = reference;
  if (reference && *reference != 0.0) r.ratio = value / *reference;
  r.pass = pass;
  r.seed = c.seed;
  return r;
}

inline void run_paircorr(const ExperimentConfig& c, Report& rep) {
  const auto as = alphas(c);
  const double tol = c.tol("paircorr"), tol_s = c.tol("smooth");
  const auto f = canonical_f(), h = canonical_h();
  const double limit = poisson_limit(f, h);
  for (auto N : c.Ns()) {
    std::vector<double> mean(c.s_values.size(), 0.0);
    for (double a : as) {
      const auto ps = window_points(c, a, N);
      const auto est = pair_corr_counts(ps, c.s_values);
      for (std::size_t i = 0; i < est.size(); ++i) {
        const auto& e = est[i];
        mean[i] += e.normalized / static_cast<double>(as.size());
        rep.rows.push_back(make_row(c, "pair_corr_count",
                                    {{"N", N}, {"alpha", a}, {"s", e.s}, {"window", c.window_or_default()},
                                     {"exclude_squares", c.exclude_squares}, {"points", ps.N()}},
                                    e.normalized, e.poisson_ref,
                                    std::abs(e.normalized / e.poisson_ref - 1.0) <= tol));
      }
      if (N <= (std::int64_t{1} << 20)) {
        const double v = pair_corr_smooth({c.theta, a, N}, f, h);
        rep.rows.push_back(make_row(c, "pair_corr_smooth", {{"N", N}, {"alpha", a}}, v, limit,
                                    std::abs(v - limit) <= tol_s * limit));
      }
    }
    CsvTable t{"paircorr_N" + std::to_string(N) + ".csv", {}};
    for (std::size_t i = 0; i < c.s_values.size(); ++i) t.add(c.s_values[i], mean[i], 2.0 * c.s_values[i]);
    rep.tables.push_back(std::move(t));
  }
}

inline void run_gaps(const ExperimentConfig& c, Report& rep) {
  const auto as = alphas(c);
  const double flat = 6.0 / (std::numbers::pi * std::numbers::pi);
  for (auto N : c.Ns()) {
    std::vector<double> density(static_cast<std::size_t>(c.bins), 0.0);
    GapHistogram last;
    for (double a : as) {
      const auto ps = window_points(c, a, N);
      const auto hg = gap_distribution(ps, static_cast<std::size_t>(c.bins));
      for (std::size_t i = 0; i < density.size(); ++i) density[i] += hg.density(i) / static_cast<double>(as.size());
      json in = {{"N", N}, {"alpha", a}, {"window", c.window_or_default()}, {"bins", c.bins}};
      // the flat piece needs bins aligned to 1/2
      const bool aligned = (c.bins % 8) == 0;
      if (c.theta == 0.5 && a == 1.0 && !c.exclude_squares && aligned) {
        const double v = hg.mean_density(0.0, 0.5);
        rep.rows.push_back(make_row(c, "gap_distribution.flat_piece", in, v, flat, std::abs(v - flat) <= c.tol("gaps_flat")));
      }
      CompensatedSum<double> l1;
      for (std::size_t i = 0; i < hg.counts.size(); ++i)
        l1.add(std::abs(hg.density(i) - std::exp(-(hg.edge(i) + 0.5 * hg.width()))) * hg.width());
      rep.rows.push_back(make_row(c, "gap_distribution.l1_from_exponential", in, l1.value(), std::nullopt, std::nullopt));
      last = hg;
    }
    CsvTable t{"gaps_N" + std::to_string(N) + ".csv", {}};
    for (std::size_t i = 0; i < density.size(); ++i) {
      const double mid = last.edge(i) + 0.5 * last.width();
      t.add(mid, density[i], std::exp(-mid));
    }
    rep.tables.push_back(std::move(t));
  }
}

/// j = ceil(N^{1-theta}) 2^k up to N^{1+eps}, together with j = N.
inline std::vector<std::int64_t> bprocess_grid(double theta, std::int64_t N, double eps) {
  std::vector<std::int64_t> js;
  const double top = std::pow(static_cast<double>(N), 1.0 + eps);
  for (double j = std::ceil(std::pow(static_cast<double>(N), 1.0 - theta)); j <= top; j *= 2.0)
    js.push_back(static_cast<std::int64_t>(j));
  js.push_back(N);
  std::sort(js.begin(), js.end());
  js.erase(std::unique(js.begin(), js.end()), js.end());
  return js;
}

inline void run_bprocess(const ExperimentConfig& c, Report& rep) {
  const auto as = alphas(c);
  const auto h = canonical_h();
  const double tol = c.tol("bprocess");
  for (auto N : c.Ns()) {
    CsvTable t{"bprocess_N" + std::to_string(N) + ".csv", {}};
    for (auto j : bprocess_grid(c.theta, N, c.eps_or_default())) {
      double worst = 0.0, ref = 0.0;
      for (double a : as) {
        const auto p = exp_sum_pair({c.theta, a, N}, h, j);
        const double err = std::abs(p.direct - p.short_sum);
        ref = p.error_ref;
        worst = std::max(worst, err);
        rep.rows.push_back(make_row(c, "exp_sum_pair",
                                    {{"N", N}, {"alpha", a}, {"j", j}, {"m_lo", p.m_range.lo}, {"m_hi", p.m_range.hi}},
                                    err, p.error_ref, p.ratio() <= tol));
      }
      t.add(static_cast<double>(j), worst, ref);
    }
    rep.tables.push_back(std::move(t));
  }
}

inline void run_moments(const ExperimentConfig& c, Report& rep) {
  const MuMeasure mu(c.theta);
  const auto n = c.samples_or_default();
  for (auto N : c.Ns()) {
    CsvTable t{"moments_N" + std::to_string(N) + ".csv", {}};
    for (std::int64_t k : {1, 2, 4}) {
      const std::int64_t j = k * N;
      if (static_cast<double>(j) >= static_cast<double>(N) * static_cast<double>(N)) continue;
      const auto m = second_moment_tilde_e_split(c.theta, N, j, mu, n, c.seed);
      const json in = {{"N", N}, {"j", j}, {"samples", n}, {"stderr", m.full.std_error}};
      rep.rows.push_back(make_row(c, "second_moment_tilde_e", in, m.full.value, static_cast<double>(N),
                                  m.full.value / static_cast<double>(N) <= c.tol("prop23")));
      const double share = m.full.value > 0.0 ? m.diagonal.value / m.full.value : 0.0;
      const double fac = c.tol("diag_factor");
      rep.rows.push_back(make_row(c, "second_moment_tilde_e.diagonal", in, m.diagonal.value, m.full.value,
                                  share >= 1.0 / fac && share <= fac));
      t.add(static_cast<double>(j), m.full.value, static_cast<double>(N));
    }
    rep.tables.push_back(std::move(t));
  }
  // off-diagonal decay of the single-frequency integrals at N = 200
  const std::int64_t N = 200;
  const double Theta = 1.0 / (1.0 - c.theta);
  double worst = 0.0, diag_min = std::numeric_limits<double>::infinity(), diag_imag = 0.0;
  std::int64_t tuples = 0;
  for (std::int64_t j = N / 2; j <= 4 * N; j += 13) {
    const double base = c.theta * static_cast<double>(j) * std::pow(static_cast<double>(N), c.theta - 1.0);
    const auto lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(base * std::pow(2.0, c.theta - 1.0))));
    const auto hi = static_cast<std::int64_t>(std::ceil(base * std::pow(2.0, 1.0 / Theta)));
    for (std::int64_t m = lo; m <= hi; ++m)
      for (std::int64_t k = lo; k <= hi; ++k) {
        const auto I = osc_integral_single(c.theta, N, j, m, k, mu);
        if (m == k) {
          diag_min = std::min(diag_min, I.real());
          diag_imag = std::max(diag_imag, std::abs(I.imag()));
        } else {
          worst = std::max(worst, std::abs(I));
          ++tuples;
        }
      }
  }
  const double bound = std::pow(static_cast<double>(N), -c.tol("osc_decay"));
  rep.rows.push_back(make_row(c, "osc_integral_single.off_diagonal_max", {{"N", N}, {"tuples", tuples}}, worst, bound,
                              worst <= bound));
  rep.rows.push_back(make_row(c, "osc_integral_single.diagonal_min_real", {{"N", N}}, diag_min, 0.0,
                              diag_min >= 0.0 && diag_imag == 0.0));
}

inline void run_roff_variance(const ExperimentConfig& c, Report& rep) {
  const MuMeasure mu(c.theta);
  const auto n = c.samples_or_default();
  const double eps = c.eps_or_default();
  std::vector<double> x, y;
  std::vector<std::int64_t> Ns = c.Ns();
  bool decreasing = true;
  for (auto N : Ns) {
    const auto m = second_moment_roff(c.theta, N, canonical_f(), canonical_h(), eps, mu, n, c.seed);
    if (!y.empty() && !(m.value < std::exp(y.back()))) decreasing = false;
    rep.rows.push_back(make_row(c, "second_moment_roff", {{"N", N}, {"samples", n}, {"eps", eps}, {"stderr", m.std_error}},
                                m.value, std::nullopt, std::nullopt));
    x.push_back(std::log(static_cast<double>(N)));
    y.push_back(m.value > 0.0 ? std::log(m.value) : -std::numeric_limits<double>::infinity());
  }
  rep.rows.push_back(make_row(c, "second_moment_roff.strictly_decreasing", {{"N_list", Ns}}, decreasing ? 1.0 : 0.0,
                              std::nullopt, decreasing));
  if (Ns.size() >= 2 && std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
    const double slope = fit_slope(x, y);
    rep.rows.push_back(make_row(c, "second_moment_roff.loglog_slope", {{"N_list", Ns}}, slope, c.tol("roff_slope"),
                                slope <= c.tol("roff_slope")));
    CsvTable t{"roff_variance.csv", {}};
    for (std::size_t i = 0; i < Ns.size(); ++i)
      t.add(static_cast<double>(Ns[i]), std::exp(y[i]), std::exp(y[0] + c.tol("roff_slope") * (x[i] - x[0])));
    rep.tables.push_back(std::move(t));
  }
}

inline void run_dio(const ExperimentConfig& c, Report& rep) {
  const double eps = c.eps_or_default();
  // the hand-checked micro instance
  const auto micro = DioInstance::explicit_ranges(0.5, {4, 5}, {2, 4}, {1, 1}, 1.0);
  const double mc = static_cast<double>(count_duq(micro));
  rep.rows.push_back(make_row(c, "count_duq.micro", {{"j", {4, 5}}, {"mn", {2, 4}}, {"gap", 1}, {"threshold", 1.0}},
                              mc, 8.0, mc == 8.0 && count_duq_naive(micro) == 8));
  const double rc = c.tol("rs_constant"), re = c.tol("rs_exponent");
  // the envelope is recorded for Theta = 2
  for (std::int64_t M : {4, 8, 16, 32}) {
    const double m = static_cast<double>(M);
    for (double g : {0.0, 1.0 / (m * m), 1.0 / m, 1.0}) {
      const auto cnt = static_cast<double>(robert_sargos_count(M, -1.0, g));
      const double env = rc * std::pow(m, re) * (m * m + g * m * m * m * m);
      rep.rows.push_back(make_row(c, "robert_sargos_count", {{"M", M}, {"gamma", g}, {"Theta", 2}}, cnt, env, cnt <= env));
    }
  }
  for (auto N : c.Ns()) {
    if (N > kMaxDioN)
      throw resource_error("dio: brute-force counts need N <= 512",
                           std::pow(static_cast<double>(N), 1.0 + 3.0 * c.theta + 3.0 * eps));
    const auto rows = duq_bound_check(c.theta, N, eps);
    std::map<int, CsvTable> by_u;
    int k = 0;
    double last_u = -1.0;
    for (const auto& r : rows) {
      if (r.u != last_u) {
        last_u = r.u;
        ++k;
      }
      json in = {{"N", N}, {"eps", eps}, {"u", r.u}, {"q", r.q}, {"vacuous", r.vacuous},
                 {"j_count", r.j_count}, {"z_count", r.z_count}};
      if (r.vacuous) {
        rep.rows.push_back(make_row(c, "duq_bound_check.vacuous", in, 0.0, std::nullopt, std::nullopt));
        continue;
      }
      auto d = make_row(c, "count_duq", in, static_cast<double>(r.duq), r.duq_ref, r.duq_ratio <= c.tol("duq"));
      d.inputs["normalized"] = r.duq_ratio;
      rep.rows.push_back(d);
      in["tau"] = r.tau;
      auto z = make_row(c, "count_zdiag", in, static_cast<double>(r.zdiag), r.zdiag_ref, r.zdiag_ratio <= c.tol("zdiag"));
      z.inputs["normalized"] = r.zdiag_ratio;
      rep.rows.push_back(z);
      rep.rows.push_back(make_row(c, "build_zset.size_ratio", in, r.z_size_ratio, std::nullopt, std::nullopt));
      json zin = in;
      zin["min_ratio"] = r.z_min_ratio;
      zin["median_ratio"] = r.z_median_ratio;
      rep.rows.push_back(make_row(c, "build_zset.scale_max_ratio", zin, r.z_max_ratio, std::nullopt, std::nullopt));
      auto& t = by_u[k];
      if (t.name.empty()) t.name = "dio_N" + std::to_string(N) + "_u" + std::to_string(k) + ".csv";
      t.add(r.q, static_cast<double>(r.duq), r.duq_ref);
    }
    for (auto& [key, t] : by_u) rep.tables.push_back(std::move(t));
  }
}

inline void run_bs_check(const ExperimentConfig& c, Report& rep) {
  BeurlingSelbergOptions opt;
  opt.tolerance = c.tol("bs");
  try {
    const auto bs = BeurlingSelberg::build(opt);
    for (const auto& p : bs.check_properties(bs.default_t_samples(), bs.default_x_samples()))
      rep.rows.push_back(make_row(c, "beurling_selberg." + p.name,
                                  {{"cutoff", opt.cutoff}, {"x_max", opt.x_max}, {"grid_log2", opt.grid_log2}},
                                  p.worst, p.bound, p.pass));
    CsvTable ph{"bs_phi_hat.csv", {}};
    for (int i = 0; i <= 600; ++i) {
      const double x = -3.0 + 0.01 * i;
      ph.add(x, bs.phi_hat(x), std::max(2.0 - std::abs(x), 0.0));
    }
    rep.tables.push_back(std::move(ph));
    CsvTable p{"bs_phi.csv", {}};
    for (int i = 0; i <= 600; ++i) {
      const double t = -1.5 + 0.005 * i;
      p.add(t, bs.phi(t), std::nullopt);
    }
    rep.tables.push_back(std::move(p));
  } catch (const construction_error& e) {
    rep.rows.push_back(make_row(c, "build_beurling_selberg", {{"error", e.what()}}, 0.0, std::nullopt, false));
  }
}

}  // namespace detail

/// Runs the configured experiment; throws argument_error for invalid configs
/// and resource_error when a size guard trips.
inline Report run(const ExperimentConfig& c) {
  c.validate();
  Report rep;
  rep.config = c;
  const auto& e = c.experiment;
  if (e == "paircorr") detail::run_paircorr(c, rep);
  else if (e == "gaps") detail::run_gaps(c, rep);
  else if (e == "bprocess") detail::run_bprocess(c, rep);
  else if (e == "moments") detail::run_moments(c, rep);
  else if (e == "roff-variance") detail::run_roff_variance(c, rep);
  else if (e == "dio") detail::run_dio(c, rep);
  else detail::run_bs_check(c, rep);
  return rep;
}

//---------------------------------------------------------------------------//
// Output
//---------------------------------------------------------------------------//

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const CsvTable& t) {
  std::string s = "x,value,reference,ratio\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) s += ',';
      if (r[i] && std::isfinite(*r[i])) s += format_number(*r[i]);
    }
    s += '\n';
  }
  return s;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Writes report.json and the CSV tables into config.output_dir. The only
/// run-dependent field is "timestamp".
inline void write_outputs(const Report& rep, double wall_seconds) {
  namespace fs = std::filesystem;
  const fs::path dir(rep.config.output_dir);
  fs::create_directories(dir);
  auto j = to_json(rep);
  j["timestamp"] = {{"utc", utc_timestamp()}, {"wall_time_s", wall_seconds}};
  auto write = [&](const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << body;
  };
  write(dir / "report.json", j.dump(2) + "\n");
  for (const auto& t : rep.tables) write(dir / t.name, to_csv(t));
}

}  // namespace paircorr::lab
