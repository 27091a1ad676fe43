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

#include "renyi/goodseq.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

using namespace renyi;
using namespace renyi::goodseq;

constexpr double kPi = std::numbers::pi;

GoodSequenceSpec spec_for(Family f, double alpha = 2.0)
{
  auto model = f == Family::gamma ? models::exponential_model() : models::gaussian_mean_model(0.0, 1.0);
  return GoodSequenceSpec{f, model, alpha, std::nullopt};
}

TEST(AlphaFactor, PowerForm)
{
  EXPECT_NEAR(alpha_factor(2.0), 2.0, 1e-15);
  EXPECT_NEAR(alpha_factor(1.5), 2.25, 1e-14);
  EXPECT_NEAR(alpha_factor(5.0), std::pow(5.0, 0.25), 1e-15);
}

TEST(CitedBounds, LaplaceAndLogisticConstants)
{
  EXPECT_NEAR(*cited_ratio_bound(Family::laplace, 2.0), 1.64872, 1e-5);
  EXPECT_NEAR(*cited_ratio_bound(Family::logistic, 2.0), std::sqrt(2.0) * std::exp(1.0 / 16.0), 1e-14);
  EXPECT_LE(*cited_ratio_bound(Family::logistic, 2.0), 1.50550);
  EXPECT_FALSE(cited_ratio_bound(Family::gaussian_meanfield, 2.0).has_value());
}

TEST(Construction, GaussianCentredOnPosteriorMean)
{
  auto s    = spec_for(Family::gaussian_meanfield);
  s.variance_scale = 1.3;
  auto data = s.model->simulate(0.5, 250, 2);
  auto q    = build_good_sequence(s, data);
  EXPECT_NEAR(q.mean1(), data.sum()(0) / 251.0, 1e-14);
  EXPECT_NEAR(q.variance1(), 1.3 / 250.0, 1e-15);
}

TEST(Construction, LaplaceAndLogisticScales)
{
  auto data = models::gaussian_mean_model(0.0, 1.0)->simulate(0.5, 100, 2);
  auto lap  = build_good_sequence(spec_for(Family::laplace), data);
  // Scale sqrt(pi a sigma^2 / (2 n)) with a = 2.
  double const b = std::sqrt(kPi * 2.0 / 200.0);
  EXPECT_NEAR(lap.variance1(), 2.0 * b * b, 1e-14);
  auto lo = build_good_sequence(spec_for(Family::logistic), data);
  double const s = std::sqrt(2.0 * kPi * 2.0 / 101.0);
  EXPECT_NEAR(lo.variance1(), s * s * kPi * kPi / 3.0, 1e-12);
}

TEST(Construction, GammaShapeAndRate)
{
  auto s    = spec_for(Family::gamma);
  auto data = s.model->simulate(2.0, 300, 5);
  auto q    = build_good_sequence(s, data);
  double const sum = data.sum()(0);
  EXPECT_NEAR(q.mean1(), 301.0 / sum, 1e-12);
  EXPECT_NEAR(q.variance1(), 301.0 / (sum * sum), 1e-12);
}

TEST(Audit, LaplaceEntropyMatchesClosedForm)
{
  auto s    = spec_for(Family::laplace);
  auto data = s.model->simulate(0.5, 1000, 4);
  auto a    = audit(s, data, 0.5);
  double const b = std::sqrt(kPi * 2.0 / 2000.0);
  EXPECT_NEAR(a.entropy, 1.0 + std::log(2.0 * b), 1e-9);
  EXPECT_TRUE(a.entropy_ok);
  EXPECT_LE(a.entropy, 0.5 * std::log(2.0 * kPi * std::numbers::e * a.variance_cap) + 1e-9);
}

TEST(Audit, RatioBoundsHoldAtSmallSamples)
{
  for (auto f : {Family::laplace, Family::logistic})
  {
    auto s    = spec_for(f);
    auto data = s.model->simulate(0.5, 1000, 6);
    auto series = audit_series(s, data, 0.5, {10, 100, 1000});
    for (auto const &a : series.audits)
    {
      ASSERT_TRUE(a.ratio_bound_ok.has_value());
      EXPECT_TRUE(*a.ratio_bound_ok) << to_string(f) << " n = " << a.n << " sup " << a.ratio_sup;
      EXPECT_TRUE(a.logconcave_ok);
      EXPECT_TRUE(a.rate_ok);
      EXPECT_TRUE(a.mean_is_mle);
    }
  }
}

TEST(Audit, EveryConstructorRespectsEntropyBound)
{
  for (auto f : {Family::gaussian_meanfield, Family::laplace, Family::logistic, Family::gamma})
  {
    auto s      = spec_for(f);
    double const theta0 = f == Family::gamma ? 2.0 : 0.5;
    auto data   = s.model->simulate(theta0, 10000, 8);
    auto series = audit_series(s, data, theta0, {100, 1000, 10000});
    for (auto const &a : series.audits)
    {
      EXPECT_LE(a.entropy, a.entropy_bound + 1e-9) << to_string(f) << " n = " << a.n;
    }
  }
}

TEST(Rate, SlopeOfVarianceAgainstSampleSize)
{
  std::vector<double> ns = {100, 1000, 10000, 100000};
  std::vector<double> v;
  for (double n : ns)
  {
    v.push_back(3.0 / n);
  }
  EXPECT_NEAR(rate_estimate(ns, v), -1.0, 1e-12);
  EXPECT_THROW(rate_estimate(std::span<double const>(ns).first(3), std::span<double const>(v).first(3)),
               Error);
}

TEST(Names, RoundTrip)
{
  for (auto f : {Family::gaussian_meanfield, Family::laplace, Family::logistic, Family::gamma})
  {
    EXPECT_EQ(family_from_string(to_string(f)), f);
  }
  EXPECT_THROW(family_from_string("cauchy"), Error);
}

}  // namespace
