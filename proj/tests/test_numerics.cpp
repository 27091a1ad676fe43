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

#include "renyi/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace {

using namespace renyi;
using namespace renyi::numerics;

constexpr double kPi = std::numbers::pi;

TEST(Integrate, GaussianOverRealLine)
{
  QuadratureSpec spec;
  spec.rel_tol = 1e-12;
  auto r       = integrate([](double x) { return std::exp(-x * x); }, spec);
  EXPECT_TRUE(r.converged());
  EXPECT_NEAR(r.value, std::sqrt(kPi), 1e-12);
}

TEST(Integrate, IntegrableEndpointSingularity)
{
  QuadratureSpec spec;
  spec.lower   = 0.0;
  spec.upper   = 1.0;
  spec.rel_tol = 1e-10;
  spec.max_refinements = 20000;
  auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, spec);
  EXPECT_NEAR(r.value, 2.0, 1e-8);
}

TEST(Integrate, HalfLineExponential)
{
  QuadratureSpec spec;
  spec.lower   = 0.0;
  spec.rel_tol = 1e-12;
  auto r       = integrate([](double x) { return 3.0 * std::exp(-3.0 * x); }, spec);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(Integrate, RejectsReversedBounds)
{
  QuadratureSpec spec;
  spec.lower = 1.0;
  spec.upper = 0.0;
  EXPECT_THROW(integrate([](double) { return 1.0; }, spec), Error);
}

TEST(Integrate, PartitionedPiecewiseIntegrand)
{
  auto f = [](double x) { return x < 1.0 ? 1.0 : 2.0; };
  auto r = integrate_partitioned(f, Interval{0.0, 3.0}, {1.0}, 1.0, 1e-12, 0.0, 100);
  EXPECT_NEAR(r.value, 5.0, 1e-12);
}

TEST(LogIntegrate, NarrowPeakFarFromOrigin)
{
  double const s = 1e-3;
  auto log_f     = [s](double x) { return -(x - 3.0) * (x - 3.0) / (2.0 * s * s); };
  Anchor a{3.0, s};
  auto r = log_integrate(log_f, Interval{}, std::span<Anchor const>(&a, 1));
  EXPECT_FALSE(r.divergent);
  EXPECT_NEAR(r.log_value, std::log(std::sqrt(2.0 * kPi) * s), 1e-10);
}

TEST(LogIntegrate, HugeMagnitudeDoesNotOverflow)
{
  auto log_f = [](double x) { return 1000.0 - 0.5 * x * x; };
  Anchor a{0.0, 1.0};
  auto r = log_integrate(log_f, Interval{}, std::span<Anchor const>(&a, 1));
  EXPECT_NEAR(r.log_value, 1000.0 + 0.5 * std::log(2.0 * kPi), 1e-9);
}

TEST(LogIntegrate, FlagsNonDecayingTail)
{
  Anchor a{0.0, 1.0};
  auto r = log_integrate([](double x) { return 0.1 * x; }, Interval{}, std::span<Anchor const>(&a, 1));
  EXPECT_TRUE(r.divergent);
}

TEST(LogIntegrate, FlagsNonIntegrablePole)
{
  Anchor a{0.5, 0.5};
  auto r = log_integrate([](double x) { return -std::log(x); }, Interval{0.0, 1.0},
                         std::span<Anchor const>(&a, 1));
  EXPECT_TRUE(r.divergent);
}

TEST(LogIntegrate, IntegrablePoleIsFinite)
{
  Anchor a{0.5, 0.5};
  auto r = log_integrate([](double x) { return -0.5 * std::log(x); }, Interval{0.0, 1.0},
                         std::span<Anchor const>(&a, 1));
  EXPECT_FALSE(r.divergent);
  EXPECT_NEAR(r.log_value, std::log(2.0), 1e-7);
}

TEST(LogSumExp, MatchesDirectSum)
{
  std::vector<double> v = {1000.0, 1000.0, -kInf};
  EXPECT_DOUBLE_EQ(log_sum_exp(v), 1000.0 + std::log(2.0));
  std::vector<double> w = {0.1, -2.0, 1.5};
  EXPECT_NEAR(log_sum_exp(w), std::log(std::exp(0.1) + std::exp(-2.0) + std::exp(1.5)), 1e-15);
  EXPECT_THROW(log_sum_exp(std::span<double const>{}), Error);
}

TEST(NormalTail, MatchesComplementaryErrorFunction)
{
  for (double z = -5.0; z <= 8.0; z += 0.25)
  {
    double const oracle = 0.5 * std::erfc(z / std::sqrt(2.0));
    EXPECT_NEAR(normal_sf(z) / oracle, 1.0, 1e-13) << "z = " << z;
  }
}

TEST(NormalTail, LogTailFollowsMillsRatioFarOut)
{
  double const z = 40.0;
  double const oracle = -0.5 * z * z - std::log(z * std::sqrt(2.0 * kPi)) +
                        std::log(1.0 - 1.0 / (z * z) + 3.0 / std::pow(z, 4) - 15.0 / std::pow(z, 6));
  EXPECT_NEAR(log_normal_sf(z), oracle, 1e-9);
}

TEST(NormalTail, LowerBoundIsBelowTail)
{
  for (double z : {1.5, 2.0, 4.0, 8.0})
  {
    double const s = 2.0;
    EXPECT_LE(gaussian_tail_lower(z * s, s), 0.5 * std::erfc(z / std::sqrt(2.0)));
  }
}

TEST(NormalQuantile, InvertsTheDistributionFunction)
{
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  for (double z : {-6.0, -1.0, 0.0, 0.3, 2.5})
  {
    EXPECT_NEAR(normal_quantile(0.5 * std::erfc(-z / std::sqrt(2.0))), z, 1e-9);
  }
}

TEST(LaplaceApprox, ExactForGaussianIntegrand)
{
  LaplaceInput in;
  in.h        = [](double) { return 2.0; };
  in.g        = [](double y) { return 0.5 * (y - 1.0) * (y - 1.0); };
  in.n        = 50;
  in.y_star   = 1.0;
  in.g_second = 1.0;
  EXPECT_NEAR(laplace_approx(in), 2.0 * std::sqrt(2.0 * kPi / 50.0), 1e-14);
  in.g_second = 0.0;
  EXPECT_THROW(laplace_approx(in), Error);
}

TEST(OlsSlope, RecoversLine)
{
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x)
  {
    y.push_back(-3.0 * v + 1.0);
  }
  EXPECT_NEAR(ols_slope(x, y), -3.0, 1e-14);
}

}  // namespace
