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

#include "renyi/config.hpp"
#include "renyi/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

using namespace renyi;
using namespace renyi::experiments;
using nlohmann::json;

// First n with alpha n^{-2 kappa} + (1 - alpha) / (n + 1) <= 0.
std::size_t onset_oracle(double alpha, double kappa)
{
  for (std::size_t n = 1;; ++n)
  {
    double const nn = static_cast<double>(n);
    if (alpha * std::pow(nn, -2.0 * kappa) <= (alpha - 1.0) / (nn + 1.0))
    {
      return n;
    }
  }
}

TEST(RateViolation, OnsetMatchesDirectInequality)
{
  auto r = run_experiment("rate-violation", json::object());
  EXPECT_EQ(onset_oracle(2.0, 0.75), 6u);
  EXPECT_EQ(r.summary["n0"].get<std::size_t>(), 6u);
  EXPECT_TRUE(r.summary["control_n0"].is_null());
  EXPECT_TRUE(r.passed());

  auto slow = run_experiment("rate-violation", {{"alpha", 1.01}, {"n_max", 100000}});
  EXPECT_EQ(slow.summary["n0"].get<std::size_t>(), onset_oracle(1.01, 0.75));
  EXPECT_GT(slow.summary["n0"].get<std::size_t>(), 1000u);
}

TEST(RateViolation, RejectsSlowRate)
{
  EXPECT_THROW(run_experiment("rate-violation", {{"kappa", 0.5}}), config::ConfigError);
}

TEST(Report, CsvHasSchemaLineAndSortedRecords)
{
  auto r = run_experiment("ndegen", json::object());
  auto csv = r.to_csv();
  EXPECT_EQ(csv.rfind("# schema=1\nlabel,n,seed,", 0), 0u);
  for (std::size_t i = 1; i < r.records.size(); ++i)
  {
    EXPECT_LE(r.records[i - 1].n, r.records[i].n);
  }
  EXPECT_EQ(csv.find("runtime"), std::string::npos);
}

TEST(Report, WritesNamedRunDirectory)
{
  auto r    = run_experiment("rate-violation", json::object());
  auto root = std::filesystem::temp_directory_path() / "renyi_experiments_test";
  std::filesystem::remove_all(root);
  auto dir = write_report(r, root, "20260101T000000Z", 17);
  EXPECT_EQ(dir.filename().string(), "rate-violation_20260101T000000Z_17");
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "grid.csv"));
  std::ifstream in(dir / "report.json");
  auto j = json::parse(in);
  EXPECT_EQ(j["experiment"], "rate-violation");
  EXPECT_EQ(j["config"]["kappa"], 0.75);
  std::filesystem::remove_all(root);
}

TEST(Consistency, ReportDoesNotDependOnWorkerCount)
{
  json cfg = {{"replicates", 4}, {"n_grid", {50, 100, 200, 400}}, {"family", "logistic"}};
  auto one   = run_experiment("consistency", cfg, RunOptions{1});
  auto three = run_experiment("consistency", cfg, RunOptions{3});
  EXPECT_EQ(one.to_csv(), three.to_csv());
  EXPECT_EQ(one.records.size(), 16u);
}

TEST(Consistency, ExactFamilyHasUnitSlope)
{
  json cfg = {{"family", "gaussian"}, {"replicates", 3}};
  auto r   = run_experiment("consistency", cfg);
  // The fit is the conjugate posterior, whose variance is 1/(n + 1).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (double n : {1e2, 1e3, 1e4, 1e5})
  {
    double const x = std::log(n);
    double const y = -std::log(n + 1.0);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double const oracle = (4.0 * sxy - sx * sy) / (4.0 * sxx - sx * sx);
  EXPECT_NEAR(r.summary["variance_slope"].get<double>(), oracle, 1e-6);
  for (auto const &rec : r.records)
  {
    EXPECT_NEAR(rec.get("variance"), 1.0 / (static_cast<double>(rec.n) + 1.0), 1e-9);
  }
}

TEST(Ubfin, BelowThresholdIsRejected)
{
  EXPECT_THROW(UbfinConfig::from_json({{"variance_scales", {0.5}}}, "ubfin"), config::ConfigError);
  auto c = UbfinConfig::from_json({{"variance_scales", {std::sqrt(2.0) * 2.0 / std::exp(1.0)}}}, "ubfin");
  EXPECT_EQ(c.variance_scales.size(), 1u);
}

TEST(Ubfin, LimitOfGoodSequenceDivergence)
{
  auto r = run_experiment("ubfin", {{"alphas", {2.0}}, {"threshold_multiples", {1.0}}});
  // r = 2/e, limit ln r - ln(2r - 1)/2.
  double const ratio = 2.0 / std::exp(1.0);
  double const limit = std::log(ratio) - 0.5 * std::log(2.0 * ratio - 1.0);
  EXPECT_NEAR(r.records.back().get("divergence_limit"), limit, 1e-12);
  EXPECT_NEAR(r.records.back().get("divergence_good"), limit, 1e-3);
  EXPECT_NEAR(r.records.back().get("bound"), 0.0, 1e-12);
  EXPECT_TRUE(r.passed());
}

TEST(Ndegen, FarAwayMemberIsInfinite)
{
  json q = {{"family", "gaussian"}, {"mean", 5.0}, {"variance", 1e-6}};
  auto r = run_experiment("ndegen", {{"q_fixed", q}});
  EXPECT_TRUE(std::isinf(r.records.front().get("divergence")));
  EXPECT_FALSE(r.passed());
}

TEST(Mixture, WidthAboveLimitRejectedAndHeavyWeightNonNegative)
{
  EXPECT_THROW(run_experiment("mixture", {{"spike_widths", {0.05}}}), config::ConfigError);
  auto r = run_experiment("mixture", {{"weight", 0.9}, {"spike_widths", {1e-2}}});
  for (auto const &rec : r.records)
  {
    EXPECT_GE(rec.get("divergence"), 0.0);
  }
}

TEST(Figure1, GridHasOneRowPerPoint)
{
  auto r = run_experiment("figure1", {{"grid_points", 11}, {"alphas", {2.0}}});
  EXPECT_EQ(r.grid.size(), 121u);
  EXPECT_EQ(r.grid_columns.size(), 3u + 3u);
  EXPECT_TRUE(r.passed());
}

TEST(Config, UnknownKeysAndNamesAreRejected)
{
  try
  {
    run_experiment("ndegen", {{"alpha", 2.0}, {"gamma", 1.0}});
    FAIL() << "expected a config error";
  }
  catch (config::ConfigError const &e)
  {
    EXPECT_EQ(e.key(), "gamma");
  }
  try
  {
    run_experiment("nonsense", json::object());
    FAIL() << "expected a config error";
  }
  catch (config::ConfigError const &e)
  {
    for (auto const &name : experiment_names())
    {
      EXPECT_NE(std::string(e.what()).find(name), std::string::npos);
    }
  }
  EXPECT_THROW(run_experiment("consistency", {{"n_grid", {100, 10}}}), config::ConfigError);
}

TEST(Config, LineLookup)
{
  std::string const text = "{\n  \"a\": 1,\n  \"b\": 2\n}\n";
  EXPECT_EQ(config::locate_key(text, "b"), 3u);
  EXPECT_EQ(config::locate_key(text, "c"), 0u);
  EXPECT_EQ(config::line_column(text, text.find("\"b\"")), (std::pair<std::size_t, std::size_t>{3, 3}));
}

}  // namespace
