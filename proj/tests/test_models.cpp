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

#include "renyi/models.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

namespace {

using namespace renyi;
using namespace renyi::models;

constexpr double kPi = std::numbers::pi;

Dataset make_data(std::vector<double> v)
{
  Dataset d;
  d.values = std::move(v);
  return d;
}

TEST(GaussianMean, PosteriorIsConjugateUpdate)
{
  auto m    = gaussian_mean_model(0.5, 2.0);
  auto data = make_data({1.0, 2.0, -0.5, 3.0});
  auto post = m->exact_posterior(data);
  // Prior N(mu0, sigma^2) with N(theta, sigma^2) likelihood: precision (n + 1)/sigma^2.
  EXPECT_NEAR(post.mean1(), (0.5 + 5.5) / 5.0, 1e-14);
  EXPECT_NEAR(post.variance1(), 4.0 / 5.0, 1e-14);
}

TEST(GaussianMean, EvidenceMatchesMarginalGaussian)
{
  // Marginally X ~ N(mu0 1, sigma^2 (I + 1 1^T)).
  double const mu0 = 0.3, sigma = 1.4;
  auto m    = gaussian_mean_model(mu0, sigma);
  auto data = make_data({0.1, 1.7, -0.4, 0.9, 2.2});
  int const n = 5;
  Eigen::MatrixXd cov = sigma * sigma * (Eigen::MatrixXd::Identity(n, n) + Eigen::MatrixXd::Ones(n, n));
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i)
  {
    r(i) = data.values[static_cast<std::size_t>(i)] - mu0;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  double const logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  double const oracle = -0.5 * n * std::log(2.0 * kPi) - 0.5 * logdet - 0.5 * r.dot(llt.solve(r));
  EXPECT_NEAR(m->log_evidence(data), oracle, 1e-12);
  EXPECT_NEAR(log_evidence_quadrature(*m, data), oracle, 1e-10);
}

TEST(GaussianMean, FisherAndMle)
{
  auto m = gaussian_mean_model(0.0, 2.0);
  EXPECT_NEAR(m->fisher_info(0.7), 0.25, 1e-15);
  EXPECT_NEAR(m->mle1(make_data({1.0, 2.0, 6.0})), 3.0, 1e-15);
  EXPECT_NEAR(m->prior_bound(), 1.0 / std::sqrt(2.0 * kPi * 4.0), 1e-15);
}

TEST(GaussianMean, LogJointIsPriorPlusLikelihood)
{
  auto m    = gaussian_mean_model(0.2, 1.0);
  auto data = make_data({0.5, -1.0});
  auto lj   = m->log_joint(data);
  double const theta = 0.4;
  double oracle      = m->prior().log_pdf(theta);
  for (double x : data.values)
  {
    oracle += -0.5 * std::log(2.0 * kPi) - 0.5 * (x - theta) * (x - theta);
  }
  EXPECT_NEAR(lj(std::span<double const>(&theta, 1)), oracle, 1e-13);
  EXPECT_NEAR(m->log_likelihood_ratio(data, 0.4, 0.1),
              m->log_likelihood(data, 0.4) - m->log_likelihood(data, 0.1), 1e-13);
}

TEST(GaussianMean, LanResidualVanishesForQuadraticLikelihood)
{
  auto m    = gaussian_mean_model(0.0, 1.0);
  auto data = m->simulate(0.5, 400, 3);
  auto lan  = lan_residual(*m, 0.5, data, 3.0);
  EXPECT_EQ(lan.h_grid.size(), 41u);
  EXPECT_LT(lan.max_residual(), 1e-9);
}

TEST(MvnMean, PosteriorMeanAndCovariance)
{
  Eigen::Matrix2d s;
  s << 1.0, 0.3, 0.3, 2.0;
  auto m = mvn_mean_model(Eigen::Vector2d(0.0, 1.0), s);
  Dataset data;
  data.dim    = 2;
  data.values = {1.0, 2.0, 3.0, 0.0};
  auto post   = m->exact_posterior(data);
  EXPECT_NEAR((*post.mean())(0), (0.0 + 4.0) / 3.0, 1e-14);
  EXPECT_NEAR((*post.mean())(1), (1.0 + 2.0) / 3.0, 1e-14);
  EXPECT_TRUE(post.variance()->isApprox(Eigen::MatrixXd(s / 3.0), 1e-14));
}

TEST(Exponential, PosteriorUnderFlatPriorIsGammaLike)
{
  auto m    = exponential_model();
  auto data = m->simulate(2.0, 500, 11);
  double const s = data.sum()(0);
  auto post = m->exact_posterior(data);
  // The uniform prior on [0, 50] truncates a Gamma(n + 1, s) far in its tail.
  EXPECT_NEAR(post.mean1(), 501.0 / s, 1e-8);
  EXPECT_NEAR(post.variance1(), 501.0 / (s * s), 1e-9);
  EXPECT_NEAR(m->fisher_info(2.0), 0.25, 1e-15);
}

TEST(Exponential, RejectsNonPositiveData)
{
  auto m = exponential_model();
  EXPECT_THROW(m->log_likelihood(make_data({1.0, -0.5}), 1.0), Error);
}

TEST(Simulation, DeterministicNestedAndSeedSensitive)
{
  auto m = gaussian_mean_model(0.0, 1.0);
  auto a = m->simulate(0.5, 100, 7);
  auto b = m->simulate(0.5, 100, 7);
  auto c = m->simulate(0.5, 100, 8);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_EQ(a.head(10).size(), 10u);
  EXPECT_EQ(a.head(10).values.back(), a.values[9]);
}

TEST(Csv, ReadsHeaderCommentsAndReportsLine)
{
  auto path = std::filesystem::temp_directory_path() / "renyi_models_test.csv";
  {
    std::ofstream out(path);
    out << "x\n# comment\n1.5\n\n2.5\n";
  }
  auto d = load_csv(path.string());
  EXPECT_EQ(d.values, (std::vector<double>{1.5, 2.5}));
  {
    std::ofstream out(path);
    out << "x\n1.5\nabc\n";
  }
  try
  {
    load_csv(path.string());
    FAIL() << "expected an error";
  }
  catch (Error const &e)
  {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST(Json, ModelDescriptions)
{
  auto m = model_from_json({{"kind", "gaussian-mean"}, {"mu0", 1.0}, {"sigma", 2.0}});
  EXPECT_EQ(m->name(), "gaussian-mean");
  EXPECT_NEAR(m->prior().mean1(), 1.0, 1e-15);
  EXPECT_THROW(model_from_json({{"kind", "gaussian-mean"}, {"tau", 1.0}}), Error);
  EXPECT_THROW(model_from_json({{"kind", "poisson"}}), Error);
}

}  // namespace
