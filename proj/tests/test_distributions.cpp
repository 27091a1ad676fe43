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

#include "renyi/distributions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

using namespace renyi;
using namespace renyi::dist;

constexpr double kPi = std::numbers::pi;

TEST(Gaussian, LogDensityMatchesFormula)
{
  auto g = make_gaussian(1.5, 4.0);
  for (double x : {-3.0, 0.0, 1.5, 7.0})
  {
    double const oracle = -0.5 * std::log(2.0 * kPi * 4.0) - (x - 1.5) * (x - 1.5) / 8.0;
    EXPECT_NEAR(g.log_pdf(x), oracle, 1e-14);
  }
}

TEST(Gaussian, BivariateLogDensityUsesDeterminantAndInverse)
{
  Eigen::Matrix2d cov;
  cov << 2.0, 0.6, 0.6, 1.0;
  auto g = make_gaussian(Eigen::Vector2d(0.5, -1.0), cov);
  double const det = 2.0 * 1.0 - 0.6 * 0.6;
  double const x[2] = {1.0, 0.5};
  double const dx = 0.5, dy = 1.5;
  // Inverse of [[a, b], [b, d]] is [[d, -b], [-b, a]] / det.
  double const quad = (1.0 * dx * dx - 2.0 * 0.6 * dx * dy + 2.0 * dy * dy) / det;
  double const oracle = -std::log(2.0 * kPi) - 0.5 * std::log(det) - 0.5 * quad;
  EXPECT_NEAR(g.log_pdf(x), oracle, 1e-14);
}

TEST(Moments, StandardIdentities)
{
  EXPECT_NEAR(make_laplace(0.3, 1.7).variance1(), 2.0 * 1.7 * 1.7, 1e-14);
  EXPECT_NEAR(make_logistic(0.0, 1.0).variance1(), 3.289868, 1e-6);
  auto g = make_gamma(3.0, 2.0);
  EXPECT_NEAR(g.mean1(), 1.5, 1e-14);
  EXPECT_NEAR(g.variance1(), 0.75, 1e-14);
  EXPECT_NEAR(make_uniform(1.0, 4.0).variance1(), 9.0 / 12.0, 1e-14);
}

TEST(Cdf, ClosedFormsAgainstDirectFormulas)
{
  auto lap = make_laplace(1.0, 2.0);
  EXPECT_NEAR(lap.cdf(0.0), 0.5 * std::exp(-0.5), 1e-15);
  EXPECT_NEAR(lap.cdf(3.0), 1.0 - 0.5 * std::exp(-1.0), 1e-15);
  auto lo = make_logistic(-1.0, 0.5);
  EXPECT_NEAR(lo.cdf(0.0), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
  auto ex = make_gamma(1.0, 3.0);
  EXPECT_NEAR(ex.cdf(0.4), 1.0 - std::exp(-1.2), 1e-14);
  auto g = make_gaussian(0.0, 1.0);
  EXPECT_NEAR(g.mass(numerics::Interval{-1.0, 1.0}), std::erf(1.0 / std::sqrt(2.0)), 1e-14);
}

TEST(Mixture, LogDensityIsLogOfWeightedSum)
{
  auto a = make_gaussian(0.0, 1.0);
  auto b = make_laplace(2.0, 0.5);
  auto m = make_mixture({0.3, 0.7}, {a, b});
  for (double x : {-2.0, 0.0, 1.0, 2.0, 40.0})
  {
    double const oracle = std::log(0.3 * std::exp(a.log_pdf(x)) + 0.7 * std::exp(b.log_pdf(x)));
    if (std::isfinite(oracle))
    {
      EXPECT_NEAR(m.log_pdf(x), oracle, 1e-12);
    }
  }
  // Far out the Gaussian underflows; the Laplace term alone decides.
  EXPECT_NEAR(m.log_pdf(60.0), std::log(0.7) + b.log_pdf(60.0), 1e-12);
  EXPECT_NEAR(m.mean1(), 0.7 * 2.0, 1e-14);
}

TEST(Mixture, RejectsBadWeights)
{
  auto a = make_gaussian(0.0, 1.0);
  EXPECT_THROW(make_mixture({0.5, 0.6}, {a, a}), Error);
  EXPECT_THROW(make_mixture({1.0}, {}), Error);
}

TEST(Factories, RejectInvalidParameters)
{
  EXPECT_THROW(make_gaussian(0.0, -1.0), Error);
  EXPECT_THROW(make_laplace(0.0, 0.0), Error);
  EXPECT_THROW(make_gamma(-1.0, 1.0), Error);
  EXPECT_THROW(make_uniform(1.0, 1.0), Error);
  EXPECT_THROW(make_spike(0.0, 0.0), Error);
}

TEST(Json, RoundTripAndUnknownKeys)
{
  auto g = from_json({{"family", "laplace"}, {"location", 1.0}, {"scale", 2.0}});
  EXPECT_EQ(g.family(), "laplace");
  EXPECT_NEAR(g.variance1(), 8.0, 1e-14);
  auto back = from_json(g.describe());
  EXPECT_DOUBLE_EQ(back.log_pdf(0.3), g.log_pdf(0.3));
  EXPECT_THROW(from_json({{"family", "laplace"}, {"location", 1.0}, {"scale", 2.0}, {"x", 1}}),
               Error);
  EXPECT_THROW(from_json({{"family", "cauchy"}}), Error);
}

TEST(Dominance, SupportContainment)
{
  auto g  = make_gaussian(0.0, 1.0);
  auto ga = make_gamma(2.0, 1.0);
  EXPECT_TRUE(dominates(ga, g));
  EXPECT_FALSE(dominates(g, ga));
  EXPECT_TRUE(dominates(make_uniform(0.0, 1.0), make_uniform(-1.0, 1.0)));
  EXPECT_FALSE(dominates(make_uniform(-1.0, 1.0), make_uniform(0.0, 1.0)));
}

TEST(Quantile, InvertsCdf)
{
  EXPECT_NEAR(quantile(make_gaussian(0.0, 1.0), 0.975), 1.959963984540054, 1e-9);
  auto lap = make_laplace(0.0, 1.0);
  EXPECT_NEAR(quantile(lap, 0.9), -std::log(0.2), 1e-9);
  auto ex = make_gamma(1.0, 2.0);
  double const p = 1.0 - 1e-12;
  EXPECT_NEAR(quantile(ex, p), -std::log(1.0 - p) / 2.0, 1e-9);
}

TEST(Numeric, NormalisesAnUnnormalisedGaussian)
{
  auto d = make_numeric([](double x) { return -0.5 * (x - 2.0) * (x - 2.0) / 0.25 + 10.0; },
                        numerics::Interval{}, {{2.0, 0.5}});
  EXPECT_NEAR(d.mean1(), 2.0, 1e-9);
  EXPECT_NEAR(d.variance1(), 0.25, 1e-9);
  EXPECT_NEAR(d.log_pdf(2.0), -0.5 * std::log(2.0 * kPi * 0.25), 1e-9);
  EXPECT_NEAR(d.cdf(2.5), 0.5 * std::erfc(-1.0 / std::sqrt(2.0)), 1e-7);
}

TEST(Sampling, DeterministicAndUnbiased)
{
  auto g = make_laplace(1.0, 2.0);
  auto a = g.sample(100000, 42);
  auto b = g.sample(100000, 42);
  EXPECT_EQ(a, b);
  double const mean = a.mean();
  double const se   = std::sqrt(8.0 / 100000.0);
  EXPECT_LT(std::abs(mean - 1.0), 5.0 * se);
}

}  // namespace
