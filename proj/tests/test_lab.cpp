// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "paircorr/lab.hpp"

using namespace paircorr;
using namespace paircorr::lab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("paircorr_lab_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PAIRCORR_LAB_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig base(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  return c;
}

}  // namespace

TEST(Subsequence, Examples) {
  EXPECT_EQ(subsequence(3, 2, 4), (std::vector<std::int64_t>{8, 27, 64}));
  EXPECT_EQ(subsequence(1, 5, 9), (std::vector<std::int64_t>{5, 6, 7, 8, 9}));
  EXPECT_EQ(subsequence(4, 1, 1), (std::vector<std::int64_t>{1}));
}

TEST(Subsequence, ConsecutiveRatioTendsToOne) {
  const auto v = subsequence(3, 100, 101);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0], 1000000);
  EXPECT_EQ(v[1], 1030301);
  EXPECT_LE(static_cast<double>(v[1]) / static_cast<double>(v[0]), 1.04);
  const auto w = subsequence(3, 1, 400);
  for (std::size_t i = 1; i < w.size(); ++i) EXPECT_GT(w[i], w[i - 1]);
}

TEST(Subsequence, Errors) {
  EXPECT_THROW(subsequence(0, 1, 3), argument_error);
  EXPECT_THROW(subsequence(2, 3, 2), argument_error);
  EXPECT_THROW(subsequence(2, 0, 2), argument_error);
  // 2^63 does not fit
  EXPECT_THROW(subsequence(63, 2, 2), std::range_error);
  EXPECT_EQ(subsequence(62, 2, 2).front(), std::int64_t{1} << 62);
  EXPECT_THROW(subsequence(3, 2097152, 2097153), std::range_error);
}

TEST(Config, DefaultsValidate) {
  for (const auto& e : experiment_names()) {
    const auto c = base(e);
    EXPECT_NO_THROW(c.validate()) << e;
    EXPECT_FALSE(c.Ns().empty() && e != "bs-check") << e;
  }
  EXPECT_EQ(base("dio").eps_or_default(), 0.1);
  EXPECT_EQ(base("paircorr").eps_or_default(), 0.05);
  EXPECT_EQ(base("roff-variance").Ns(), (std::vector<std::int64_t>{1024, 4096, 16384}));
}

TEST(Config, RejectsInvalidFields) {
  auto expect_bad = [](auto mutate) {
    auto c = base("paircorr");
    mutate(c);
    EXPECT_THROW(c.validate(), argument_error);
  };
  expect_bad([](ExperimentConfig& c) { c.theta = 1.5; });
  expect_bad([](ExperimentConfig& c) { c.theta = 0.0; });
  expect_bad([](ExperimentConfig& c) { c.eps = 0.2; });
  expect_bad([](ExperimentConfig& c) { c.eps = 0.0; });
  expect_bad([](ExperimentConfig& c) { c.experiment = "nope"; });
  expect_bad([](ExperimentConfig& c) { c.subsequence = SubsequenceSpec{1, 2, 4}; });
  expect_bad([](ExperimentConfig& c) { c.N_list = {1}; });
  expect_bad([](ExperimentConfig& c) { c.alpha_mode = "random"; });
  expect_bad([](ExperimentConfig& c) { c.window = "left"; });
  expect_bad([](ExperimentConfig& c) { c.tolerances["made_up"] = 1.0; });
  expect_bad([](ExperimentConfig& c) { c.s_values = {1.0, -1.0}; });
  expect_bad([](ExperimentConfig& c) {
    c.experiment = "roff-variance";
    c.samples = 50;
  });
  auto ok = base("paircorr");
  ok.subsequence = SubsequenceSpec{2, 10, 12};
  EXPECT_NO_THROW(ok.validate());
  EXPECT_EQ(ok.Ns(), (std::vector<std::int64_t>{100, 121, 144}));
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = base("gaps");
  c.theta = 0.37;
  c.alpha_mode = "fixed";
  c.alpha = 1.25;
  c.subsequence = SubsequenceSpec{3, 4, 9};
  c.eps = 0.07;
  c.seed = 0xFFFFFFFFFFFFFFFFull;
  c.tolerances = {{"gaps_flat", 0.03}};
  c.s_values = {0.25, 0.125};
  c.exclude_squares = true;
  c.bins = 16;
  const auto text = to_json(c).dump();
  EXPECT_EQ(config_from_json(json::parse(text)), c);
  const auto d = base("dio");
  EXPECT_EQ(config_from_json(to_json(d)), d);
}

TEST(Config, JsonErrors) {
  EXPECT_THROW(config_from_json(json::parse(R"({"experiment": "dio", "bogus": 1})")), argument_error);
  EXPECT_THROW(config_from_json(json::parse(R"({"theta": "half"})")), argument_error);
  EXPECT_THROW(config_from_json(json::parse(R"([1, 2])")), argument_error);
  const auto c = config_from_json(json::parse(R"({"experiment": "dio", "N_list": [64, 128]})"));
  EXPECT_EQ(c.Ns(), (std::vector<std::int64_t>{64, 128}));
  EXPECT_EQ(c.theta, 0.5);
}

TEST(Report, RowRoundTripWithNulls) {
  ReportRow r;
  r.op = "x";
  r.inputs = {{"N", 5}};
  r.value = std::nan("");
  r.reference = 2.0;
  r.seed = 9;
  const auto back = row_from_json(json::parse(to_json(r).dump()));
  EXPECT_EQ(back, r);
  EXPECT_TRUE(to_json(r)["value"].is_null());
  EXPECT_TRUE(to_json(r)["pass"].is_null());
  r.ratio = 0.1 + 0.2;
  r.pass = false;
  EXPECT_EQ(row_from_json(json::parse(to_json(r).dump())), r);
}

TEST(Report, CsvSchema) {
  CsvTable t{"t.csv", {}};
  t.add(1.0, 2.0, 4.0);
  t.add(2.0, 3.0, std::nullopt);
  t.add(3.0, 1.0, 0.0);
  EXPECT_EQ(to_csv(t), "x,value,reference,ratio\n1,2,4,0.5\n2,3,,\n3,1,0,\n");
}

TEST(Run, BsCheckRowsPass) {
  const auto rep = run(base("bs-check"));
  ASSERT_EQ(rep.rows.size(), 5u);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.op.rfind("beurling_selberg.", 0), 0u);
    ASSERT_TRUE(r.pass.has_value());
    EXPECT_TRUE(*r.pass) << r.op;
    EXPECT_EQ(r.seed, 1u);
  }
  EXPECT_EQ(rep.failed(), 0);
}

TEST(Run, DeterministicPayload) {
  auto c = base("paircorr");
  c.N_list = {3000};
  c.seed = 77;
  const auto a = to_json(run(c)).dump(), b = to_json(run(c)).dump();
  EXPECT_EQ(a, b);
  c.seed = 78;
  EXPECT_NE(to_json(run(c)).dump(), a);
}

TEST(Run, EveryRowCarriesProvenance) {
  auto c = base("dio");
  c.N_list = {64};
  const auto rep = run(c);
  ASSERT_FALSE(rep.rows.empty());
  for (const auto& r : rep.rows) {
    EXPECT_FALSE(r.op.empty());
    EXPECT_EQ(r.seed, c.seed);
  }
  EXPECT_EQ(rep.rows.front().op, "count_duq.micro");
  EXPECT_EQ(rep.rows.front().value, 8.0);
}

TEST(Run, ResourceGuards) {
  auto c = base("dio");
  c.N_list = {1024};
  EXPECT_THROW(run(c), resource_error);
  auto p = base("paircorr");
  p.N_list = {std::int64_t{1} << 40};
  EXPECT_THROW(run(p), resource_error);
}

TEST(Cli, ConfigErrorWritesNothing) {
  const auto out = scratch("bad");
  EXPECT_EQ(run_cli("paircorr --theta 1.5 --out " + out.string()), 2);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run_cli("nonsense --out " + out.string()), 2);
  EXPECT_EQ(run_cli("bs-check --config /does/not/exist.json --out " + out.string()), 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, ResourceGuardExitCode) {
  const auto out = scratch("big");
  EXPECT_EQ(run_cli("dio --N 4096 --out " + out.string()), 3);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, FailedRowExitCode) {
  const auto out = scratch("fail");
  const auto cfg = scratch("cfg") / "c.json";
  fs::create_directories(cfg.parent_path());
  std::ofstream(cfg) << R"({"N_list": [2000], "tolerances": {"paircorr": 1e-9, "smooth": 1e-9}})";
  EXPECT_EQ(run_cli("paircorr --config " + cfg.string() + " --out " + out.string()), 1);
  EXPECT_TRUE(fs::exists(out / "report.json"));
}

TEST(Cli, ReportAndDeterminism) {
  const auto a = scratch("a");
  ASSERT_EQ(run_cli("bs-check --seed 3 --out " + a.string()), 0);
  auto ja = json::parse(slurp(a / "report.json"));
  std::map<std::string, std::string> first;
  for (const auto& f : ja["files"]) first[f.get<std::string>()] = slurp(a / f.get<std::string>());
  ASSERT_EQ(run_cli("bs-check --seed 3 --out " + a.string()), 0);
  auto jb = json::parse(slurp(a / "report.json"));
  ASSERT_TRUE(ja.contains("timestamp"));
  ja.erase("timestamp");
  jb.erase("timestamp");
  EXPECT_EQ(ja.dump(2), jb.dump(2));
  EXPECT_EQ(config_from_json(ja["config"]).seed, 3u);
  EXPECT_EQ(ja["summary"]["failed"], 0);
  std::vector<ReportRow> rows;
  for (const auto& r : ja["rows"]) rows.push_back(row_from_json(r));
  EXPECT_EQ(rows, run(config_from_json(ja["config"])).rows);
  ASSERT_FALSE(first.empty());
  for (const auto& [name, body] : first) {
    EXPECT_EQ(body.rfind("x,value,reference,ratio\n", 0), 0u) << name;
    EXPECT_EQ(body.find('\r'), std::string::npos);
    EXPECT_EQ(body, slurp(a / name));
  }
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto out = scratch("override");
  const auto cfg = scratch("cfg2") / "c.json";
  fs::create_directories(cfg.parent_path());
  std::ofstream(cfg) << R"({"theta": 0.3, "N_list": [64], "seed": 5})";
  ASSERT_EQ(run_cli("dio --config " + cfg.string() + " --theta 0.5 --N 32,64 --out " + out.string()), 0);
  const auto j = json::parse(slurp(out / "report.json"));
  EXPECT_EQ(j["config"]["theta"], 0.5);
  EXPECT_EQ(j["config"]["seed"], 5);
  EXPECT_EQ(j["config"]["N_list"], json::array({32, 64}));
}
