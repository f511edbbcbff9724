// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
//
// paircorr-lab <experiment> [--config path] [--theta v] [--N v,...] [--seed v] [--eps v] [--out dir]
//
// Exit codes: 0 all rows pass, 1 some row failed, 2 config error, 3 resource guard.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "paircorr/lab.hpp"

namespace lab = paircorr::lab;

namespace {

constexpr int kOk = 0, kFailedRow = 1, kConfigError = 2, kResourceError = 3;

lab::ExperimentConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw paircorr::argument_error("cannot open config '" + path + "'");
  lab::json j;
  try {
    j = lab::json::parse(in);
  } catch (const lab::json::exception& e) {
    throw paircorr::argument_error(std::string("config is not valid JSON: ") + e.what());
  }
  return lab::config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for the pair correlation of alpha n^theta mod 1"};
  app.set_version_flag("--version", lab::kVersion);

  std::string experiment, config_path, out, subseq;
  std::optional<double> theta, eps, alpha;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> alpha_samples, samples;
  std::vector<std::int64_t> Ns;
  bool exclude_squares = false;

  app.add_option("experiment", experiment, "paircorr, gaps, bprocess, moments, roff-variance, dio or bs-check")
      ->required();
  app.add_option("--config", config_path, "JSON config file; flags override its fields");
  app.add_option("--theta", theta, "exponent theta in (0,1)");
  app.add_option("--N", Ns, "comma-separated list of N")->delimiter(',');
  app.add_option("--seed", seed, "64-bit seed");
  app.add_option("--eps", eps, "eps in (0, 0.2)");
  app.add_option("--out", out, "output directory");
  app.add_option("--alpha", alpha, "fixed alpha (implies alpha_mode fixed)");
  app.add_option("--alpha-samples", alpha_samples, "number of alpha draws from mu (implies alpha_mode sample)");
  app.add_option("--samples", samples, "Monte Carlo draws for the moment experiments");
  app.add_option("--subsequence", subseq, "C:ell_lo:ell_hi for N = ell^C");
  app.add_flag("--exclude-squares", exclude_squares, "drop perfect squares n");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  lab::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = load(config_path);
    cfg.experiment = experiment;
    if (theta) cfg.theta = *theta;
    if (eps) cfg.eps = *eps;
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.output_dir = out;
    if (!Ns.empty()) {
      cfg.N_list = Ns;
      cfg.subsequence.reset();
    }
    if (alpha) {
      cfg.alpha = *alpha;
      cfg.alpha_mode = "fixed";
    }
    if (alpha_samples) {
      cfg.alpha_samples = *alpha_samples;
      cfg.alpha_mode = "sample";
    }
    if (samples) cfg.samples = *samples;
    if (exclude_squares) cfg.exclude_squares = true;
    if (!subseq.empty()) {
      lab::SubsequenceSpec sp;
      if (std::sscanf(subseq.c_str(), "%ld:%ld:%ld", &sp.C, &sp.ell_lo, &sp.ell_hi) != 3)
        throw paircorr::argument_error("--subsequence expects C:ell_lo:ell_hi");
      cfg.subsequence = sp;
      cfg.N_list.clear();
    }
    cfg.validate();
    (void)cfg.Ns();
  } catch (const std::exception& e) {
    std::cerr << "paircorr-lab: config error: " << e.what() << "\n";
    return kConfigError;
  }

  lab::Report rep;
  const auto start = std::chrono::steady_clock::now();
  try {
    rep = lab::run(cfg);
  } catch (const paircorr::resource_error& e) {
    std::cerr << "paircorr-lab: resource guard: " << e.what() << "\n";
    return kResourceError;
  } catch (const paircorr::argument_error& e) {
    std::cerr << "paircorr-lab: config error: " << e.what() << "\n";
    return kConfigError;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  try {
    lab::write_outputs(rep, wall);
  } catch (const std::exception& e) {
    std::cerr << "paircorr-lab: " << e.what() << "\n";
    return kConfigError;
  }

  std::cout << cfg.experiment << ": " << rep.rows.size() << " rows, " << rep.passed() << " passed, " << rep.failed()
            << " failed (" << wall << " s) -> " << cfg.output_dir << "/report.json\n";
  for (const auto& r : rep.rows)
    if (r.pass && !*r.pass) std::cout << "  FAIL " << r.op << " " << r.inputs.dump() << " value=" << r.value << "\n";
  return rep.failed() > 0 ? kFailedRow : kOk;
}
