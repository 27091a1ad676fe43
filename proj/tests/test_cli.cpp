//------------------------------------------------------------------------------
//
//   Copyright 2026 The renyi-vi Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "cli.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using renyi::cli::run;

struct Outcome
{
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test
{
protected:
  void SetUp() override
  {
    ::unsetenv("RENYI_VI_SEED");
    root_ = fs::temp_directory_path() /
            ("renyi_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override
  {
    ::unsetenv("RENYI_VI_SEED");
    fs::remove_all(root_);
  }

  Outcome call(std::vector<std::string> args)
  {
    args.insert(args.begin(), "renyi-vi");
    std::ostringstream out, err;
    int const code = run(args, out, err);
    return {code, out.str(), err.str()};
  }

  std::string write(std::string const &name, std::string const &text)
  {
    auto path = root_ / name;
    std::ofstream(path) << text;
    return path.string();
  }

  static std::string slurp(fs::path const &path)
  {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path root_;
};

TEST_F(Cli, HelpListsEverySubcommand)
{
  auto r = call({"--help"});
  EXPECT_EQ(r.code, 0);
  for (auto const *sub : {"fit", "experiment", "audit", "divergence"})
  {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
}

TEST_F(Cli, MissingSubcommandIsUsageError) { EXPECT_EQ(call({}).code, 1); }

TEST_F(Cli, UnknownExperimentListsValidNames)
{
  auto r = call({"experiment", "bogus", "-o", root_.string()});
  EXPECT_EQ(r.code, 1);
  for (auto const *name : {"consistency", "ubfin", "ndegen", "mixture", "rate-violation", "ep",
                           "figure1", "goodseq-audit"})
  {
    EXPECT_NE(r.err.find(name), std::string::npos) << name;
  }
}

TEST_F(Cli, RateViolationReportsOnsetAndPasses)
{
  auto r = call({"experiment", "rate-violation", "-o", root_.string(), "--timestamp", "T"});
  EXPECT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(slurp(root_ / "rate-violation_T_1" / "report.json"));
  EXPECT_EQ(j["summary"]["n0"], 6);
}

TEST_F(Cli, RepeatedRunsGiveIdenticalCsv)
{
  auto cfg = write("c.json", R"({"experiment": "ndegen", "seed": 4})");
  ASSERT_EQ(call({"experiment", "-c", cfg, "-o", root_.string(), "--timestamp", "A"}).code, 0);
  ASSERT_EQ(call({"experiment", "-c", cfg, "-o", root_.string(), "--timestamp", "B"}).code, 0);
  auto a = slurp(root_ / "ndegen_A_4" / "report.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(root_ / "ndegen_B_4" / "report.csv"));
}

TEST_F(Cli, SeedPrecedenceFlagThenEnvironmentThenConfig)
{
  auto cfg = write("c.json", R"({"seed": 5})");
  auto base = std::vector<std::string>{"experiment", "rate-violation", "-c", cfg, "-o", root_.string(),
                                       "--timestamp", "T"};
  EXPECT_EQ(call(base).code, 0);
  EXPECT_TRUE(fs::exists(root_ / "rate-violation_T_5"));
  ::setenv("RENYI_VI_SEED", "7", 1);
  EXPECT_EQ(call(base).code, 0);
  EXPECT_TRUE(fs::exists(root_ / "rate-violation_T_7"));
  auto with_flag = base;
  with_flag.insert(with_flag.end(), {"--seed", "9"});
  EXPECT_EQ(call(with_flag).code, 0);
  EXPECT_TRUE(fs::exists(root_ / "rate-violation_T_9"));
  ::setenv("RENYI_VI_SEED", "x", 1);
  EXPECT_EQ(call(base).code, 1);
}

TEST_F(Cli, GoodSequenceAuditLaplace)
{
  auto cfg = write("a.json", R"({"experiment": "goodseq-audit", "family": "laplace", "alpha": 2,
  "n_grid": [10, 100, 1000, 10000]})");
  auto r = call({"experiment", "-c", cfg, "-o", root_.string(), "--timestamp", "T"});
  EXPECT_EQ(r.code, 0) << r.out;
  auto j = nlohmann::json::parse(slurp(root_ / "goodseq-audit_T_1" / "report.json"));
  for (auto const &rec : j["records"])
  {
    EXPECT_LE(rec["ratio_sup"].get<double>(), 1.64872);
  }
}

TEST_F(Cli, FitConjugateGaussian)
{
  auto cfg = write("f.json", R"({
  "model": {"kind": "gaussian-mean", "mu0": 0, "sigma": 1},
  "data": {"n": 200, "theta0": 0.5},
  "family": "gaussian",
  "objective": "renyi-alpha",
  "alpha": 2
})");
  auto r = call({"fit", "-c", cfg, "-o", root_.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  auto json_end = r.out.rfind("report:");
  auto j        = nlohmann::json::parse(r.out.substr(0, json_end));
  EXPECT_LE(j["objective"]["value"].get<double>(), 1e-8);
}

TEST_F(Cli, FitDominanceFailureExitsTwo)
{
  auto cfg = write("f.json", R"({
  "model": {"kind": "gaussian-mean", "mu0": 0, "sigma": 1},
  "data": {"n": 100},
  "family": "gamma",
  "alpha": 2
})");
  auto r = call({"fit", "-c", cfg, "-o", root_.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("dominance"), std::string::npos);
}

TEST_F(Cli, FitWithoutAlphaIsConfigError)
{
  auto cfg = write("f.json", R"({
  "model": {"kind": "gaussian-mean", "mu0": 0, "sigma": 1},
  "data": {"n": 100},
  "family": "gaussian",
  "objective": "renyi-alpha"
})");
  auto r = call({"fit", "-c", cfg, "-o", root_.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("alpha"), std::string::npos);
  EXPECT_NE(r.err.find("f.json:5:"), std::string::npos) << r.err;
}

TEST_F(Cli, ConfigErrorsAreLineAnchored)
{
  auto unknown = write("u.json", "{\n  \"family\": \"laplace\",\n  \"colour\": 1\n}\n");
  auto r       = call({"audit", "-c", unknown, "-o", root_.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("u.json:3:"), std::string::npos) << r.err;

  auto broken = write("b.json", "{\n  \"family\": \"laplace\",\n  \"alpha\": \n}\n");
  r           = call({"audit", "-c", broken, "-o", root_.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("b.json:4:"), std::string::npos) << r.err;
}

TEST_F(Cli, DivergenceBetweenDescribedDensities)
{
  auto r = call({"divergence", "--p", R"({"family": "gaussian", "mean": 0, "variance": 1})", "--q",
                 R"({"family": "gaussian", "mean": 1, "variance": 2})", "--alpha", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  // Univariate closed form with s*^2 = 2*2 - 1 = 3.
  double const oracle = 0.5 * std::log(2.0) + std::log(2.0 / 3.0) / 2.0 + 2.0 / (2.0 * 3.0);
  EXPECT_NEAR(j["renyi"]["value"].get<double>(), oracle, 1e-12);
  EXPECT_EQ(call({"divergence", "--p", "{", "--q", "{}"}).code, 1);
}

}  // namespace
