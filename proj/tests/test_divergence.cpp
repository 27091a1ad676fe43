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

#include "renyi/divergence.hpp"
#include "renyi/models.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace {

using namespace renyi;
using namespace renyi::divergence;
using dist::Density;
using divergence::renyi;
using dist::make_gaussian;

// Univariate form: log(sq/sp) + log(sq^2/s*^2)/(2(a-1)) + a d^2/(2 s*^2).
double renyi_1d_oracle(double mp, double vp, double mq, double vq, double a)
{
  double const star = a * vq + (1.0 - a) * vp;
  if (star <= 0.0)
  {
    return kInf;
  }
  double const d = mp - mq;
  return 0.5 * std::log(vq / vp) + std::log(vq / star) / (2.0 * (a - 1.0)) +
         a * d * d / (2.0 * star);
}

// Midpoint rule on a wide grid, independent of the library quadrature.
double renyi_brute_force(Density const &p, Density const &q, double a, double lo, double hi)
{
  int const cells = 400000;
  double const h  = (hi - lo) / cells;
  double sum      = 0.0;
  for (int i = 0; i < cells; ++i)
  {
    double const x = lo + (i + 0.5) * h;
    sum += std::exp(a * p.log_pdf(x) + (1.0 - a) * q.log_pdf(x));
  }
  return std::log(sum * h) / (a - 1.0);
}

TEST(Closed, MatchesUnivariateFormula)
{
  for (double a : {1.5, 2.0, 3.0})
  {
    auto p = make_gaussian(0.3, 0.5);
    auto q = make_gaussian(-0.2, 0.9);
    EXPECT_NEAR(renyi_gauss_closed(p, q, a).value, renyi_1d_oracle(0.3, 0.5, -0.2, 0.9, a), 1e-14);
  }
}

TEST(Closed, InfiniteWhenMixtureVarianceIsNotPositive)
{
  auto p = make_gaussian(0.0, 1.0);
  auto q = make_gaussian(0.0, 0.4);
  EXPECT_FALSE(renyi_gauss_closed(p, q, 2.0).finite());
  EXPECT_FALSE(renyi_quadrature(p, q, 2.0).finite());
}

TEST(Quadrature, AgreesWithBruteForceForNonGaussianPair)
{
  auto p = make_gaussian(0.0, 1.0);
  auto q = dist::make_laplace(0.5, 1.2);
  double const oracle = renyi_brute_force(p, q, 2.0, -30.0, 30.0);
  EXPECT_NEAR(renyi_quadrature(p, q, 2.0).value, oracle, 1e-7);
}

TEST(Quadrature, AgreesWithClosedFormInTwoDimensions)
{
  Eigen::Matrix2d sp, sq;
  sp << 1.0, 0.5, 0.5, 1.5;
  sq << 2.0, -0.2, -0.2, 1.0;
  auto p = make_gaussian(Eigen::Vector2d(0.1, -0.3), sp);
  auto q = make_gaussian(Eigen::Vector2d(0.4, 0.2), sq);
  EXPECT_NEAR(renyi_quadrature(p, q, 2.0).value, renyi_gauss_closed(p, q, 2.0).value, 1e-6);
}

TEST(Kl, ClosedFormAndLimitOfRenyi)
{
  auto p = make_gaussian(1.0, 0.5);
  auto q = make_gaussian(0.0, 2.0);
  double const oracle = 0.5 * std::log(2.0 / 0.5) + (0.5 + 1.0) / (2.0 * 2.0) - 0.5;
  EXPECT_NEAR(kl_gauss_closed(p, q).value, oracle, 1e-14);
  EXPECT_NEAR(kl_forward(p, q).value, oracle, 1e-14);
  EXPECT_NEAR(renyi_gauss_closed(p, q, 1.0 + 1e-7).value, oracle, 1e-6);
  // kl_reverse(p, q) measures q against p.
  EXPECT_NEAR(kl_reverse(p, q).value, kl_gauss_closed(q, p).value, 1e-14);
}

TEST(Kl, QuadratureMatchesClosedForm)
{
  auto p = make_gaussian(0.2, 0.7);
  auto q = dist::make_laplace(0.0, 1.0);
  double const ent_cross = expectation(p, [&](std::span<double const> x) { return -q.log_pdf(x); });
  double const ent       = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * 0.7);
  EXPECT_NEAR(kl_forward(p, q).value, ent_cross - ent, 1e-9);
}

TEST(Ordering, KlBelowRenyiAndRenyiIncreasesInOrder)
{
  auto p = dist::make_logistic(0.0, 0.6);
  auto q = dist::make_laplace(0.3, 0.9);
  double const kl = kl_forward(p, q).value;
  double prev     = kl;
  for (double a : {1.5, 2.0, 3.0, 5.0})
  {
    double const d = renyi(p, q, a).value;
    EXPECT_GE(d, prev - 1e-12) << "alpha = " << a;
    prev = d;
  }
}

TEST(Dominance, NonDominatedIsInfinite)
{
  auto p = make_gaussian(1.0, 1.0);
  auto q = dist::make_gamma(2.0, 1.0);
  EXPECT_FALSE(renyi(p, q, 2.0).finite());
  EXPECT_FALSE(kl_forward(p, q).finite());
  EXPECT_THROW(renyi(p, q, 1.0), Error);
}

TEST(Expectation, SecondMoment)
{
  auto p = make_gaussian(1.0, 2.0);
  EXPECT_NEAR(expectation(p, [](std::span<double const> x) { return x[0] * x[0]; }), 3.0, 1e-10);
}

TEST(McBound, ExactPosteriorHasZeroVariance)
{
  auto m    = models::gaussian_mean_model(0.0, 1.0);
  auto data = m->simulate(0.5, 200, 4);
  auto post = m->exact_posterior(data);
  auto b    = mc_renyi_upper_bound(post, m->log_joint(data), 2.0, 1000, 9);
  EXPECT_NEAR(b.value, m->log_evidence(data), 1e-10);
  EXPECT_LT(b.std_error, 1e-10);
}

TEST(McBound, PerturbedProposalCentersOnPopulationValue)
{
  auto m    = models::gaussian_mean_model(0.0, 1.0);
  auto data = m->simulate(0.5, 100, 4);
  auto post = m->exact_posterior(data);
  auto q    = make_gaussian(post.mean1() + 0.02, 1.5 / 100.0);
  double const alpha  = 2.0;
  double const target = m->log_evidence(data) +
                        (alpha - 1.0) / alpha * renyi_gauss_closed(post, q, alpha).value;
  auto b = mc_renyi_upper_bound(q, m->log_joint(data), alpha, 20000, 5);
  EXPECT_LT(std::abs(b.value - target), 4.0 * b.std_error);
  EXPECT_GT(b.std_error, 0.0);
}

TEST(Holder, LowerBoundsTheRenyiIntegral)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i)
  {
    auto p = make_gaussian(u(rng), 0.5 + 0.4 * (u(rng) + 1.0));
    auto q = dist::make_laplace(u(rng), 0.5 + 0.5 * (u(rng) + 1.0));
    double const a = 1.5 + (u(rng) + 1.0);
    numerics::Interval k{u(rng) - 1.0, u(rng) + 1.5};
    double const integral = std::exp((a - 1.0) * renyi(p, q, a).value);
    EXPECT_LE(holder_lower_bound(p, q, a, k), integral * (1.0 + 1e-9));
  }
}

}  // namespace
