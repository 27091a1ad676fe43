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
#pragma once

#include "renyi/distributions.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace renyi::models {

using dist::Density;
using numerics::Interval;

/// Row-major observations; `dim` values per datum.
struct Dataset
{
  std::size_t dim = 1;
  std::vector<double> values;

  std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
  bool empty() const { return values.empty(); }
  std::span<double const> row(std::size_t i) const
  {
    return std::span<double const>(values).subspan(i * dim, dim);
  }
  /// Per-coordinate sum.
  Eigen::VectorXd sum() const;
  /// First `n` rows.
  Dataset head(std::size_t n) const;
};

using LogJoint = std::function<double(std::span<double const>)>;

/// Prior, likelihood and exact posterior of a conjugate model with parameter in R^d.
class BayesModel
{
public:
  virtual ~BayesModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const  = 0;
  virtual Density const &prior() const = 0;
  /// Parameter space per coordinate.
  virtual std::vector<Interval> parameter_support() const = 0;

  virtual double log_likelihood(Dataset const &data, std::span<double const> theta) const = 0;
  virtual Density exact_posterior(Dataset const &data) const                           = 0;
  virtual Eigen::VectorXd mle(Dataset const &data) const                                = 0;
  virtual Eigen::MatrixXd fisher_matrix(std::span<double const> theta) const            = 0;
  virtual Dataset simulate(std::span<double const> theta0, std::size_t n,
                           std::uint64_t seed) const                                    = 0;
  /// Upper bound M_p on the prior density.
  virtual double prior_bound() const = 0;
  /// θ ↦ log π(θ) + log p(X | θ), built from sufficient statistics.
  virtual LogJoint log_joint(Dataset const &data) const = 0;
  /// log p(X); closed form where available, otherwise quadrature.
  virtual double log_evidence(Dataset const &data) const;
  /// ℓ(θ) − ℓ(θ_ref) for a 1-D parameter.
  virtual double log_likelihood_ratio(Dataset const &data, double theta, double theta_ref) const;

  double log_likelihood(Dataset const &data, double theta) const
  {
    return log_likelihood(data, std::span<double const>(&theta, 1));
  }
  double fisher_info(double theta) const;
  double mle1(Dataset const &data) const;
  Dataset simulate(double theta0, std::size_t n, std::uint64_t seed) const
  {
    return simulate(std::span<double const>(&theta0, 1), n, seed);
  }
};

/// X_i ~ N(μ, σ²) with prior μ ~ N(μ₀, σ²).
class GaussianMeanModel final : public BayesModel
{
public:
  GaussianMeanModel(double mu0, double sigma);

  using BayesModel::log_likelihood;
  using BayesModel::simulate;

  std::string name() const override { return "gaussian-mean"; }
  std::size_t dim() const override { return 1; }
  Density const &prior() const override { return prior_; }
  std::vector<Interval> parameter_support() const override { return {Interval{}}; }
  double log_likelihood(Dataset const &data, std::span<double const> theta) const override;
  Density exact_posterior(Dataset const &data) const override;
  Eigen::VectorXd mle(Dataset const &data) const override;
  Eigen::MatrixXd fisher_matrix(std::span<double const> theta) const override;
  Dataset simulate(std::span<double const> theta0, std::size_t n,
                   std::uint64_t seed) const override;
  double prior_bound() const override;
  LogJoint log_joint(Dataset const &data) const override;
  double log_evidence(Dataset const &data) const override;
  double log_likelihood_ratio(Dataset const &data, double theta,
                              double theta_ref) const override;

  double mu0() const { return mu0_; }
  double sigma() const { return sigma_; }

private:
  double mu0_;
  double sigma_;
  Density prior_;
};

/// X_i ~ N(μ, Σ) in R^d with prior μ ~ N(μ₀, Σ).
class MvnMeanModel final : public BayesModel
{
public:
  MvnMeanModel(Eigen::VectorXd mu0, Eigen::MatrixXd sigma);

  using BayesModel::log_likelihood;
  using BayesModel::simulate;

  std::string name() const override { return "mvn-mean"; }
  std::size_t dim() const override { return static_cast<std::size_t>(mu0_.size()); }
  Density const &prior() const override { return prior_; }
  std::vector<Interval> parameter_support() const override;
  double log_likelihood(Dataset const &data, std::span<double const> theta) const override;
  Density exact_posterior(Dataset const &data) const override;
  Eigen::VectorXd mle(Dataset const &data) const override;
  Eigen::MatrixXd fisher_matrix(std::span<double const> theta) const override;
  Dataset simulate(std::span<double const> theta0, std::size_t n,
                   std::uint64_t seed) const override;
  double prior_bound() const override;
  LogJoint log_joint(Dataset const &data) const override;

  Eigen::MatrixXd const &sigma() const { return sigma_; }

private:
  Eigen::VectorXd mu0_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd precision_;
  double log_det_;
  Density prior_;
};

/// X_i ~ Exp(λ) with a bounded prior on (0, ∞); uniform on [0, 50] by default.
class ExponentialModel final : public BayesModel
{
public:
  ExponentialModel();
  explicit ExponentialModel(Density prior);

  using BayesModel::log_likelihood;
  using BayesModel::simulate;

  std::string name() const override { return "exponential"; }
  std::size_t dim() const override { return 1; }
  Density const &prior() const override { return prior_; }
  std::vector<Interval> parameter_support() const override { return {Interval{0.0, kInf}}; }
  double log_likelihood(Dataset const &data, std::span<double const> theta) const override;
  Density exact_posterior(Dataset const &data) const override;
  Eigen::VectorXd mle(Dataset const &data) const override;
  Eigen::MatrixXd fisher_matrix(std::span<double const> theta) const override;
  Dataset simulate(std::span<double const> theta0, std::size_t n,
                   std::uint64_t seed) const override;
  double prior_bound() const override;
  LogJoint log_joint(Dataset const &data) const override;
  double log_likelihood_ratio(Dataset const &data, double theta,
                              double theta_ref) const override;

private:
  Density prior_;
  Interval prior_support_;
  double prior_max_;
};

std::shared_ptr<BayesModel> gaussian_mean_model(double mu0, double sigma);
std::shared_ptr<BayesModel> mvn_mean_model(Eigen::VectorXd mu0, Eigen::MatrixXd sigma);
std::shared_ptr<BayesModel> exponential_model();
std::shared_ptr<BayesModel> exponential_model(Density prior);

/// Local asymptotic normality residuals on a grid of local perturbations h.
struct LanDiagnostic
{
  double theta0 = 0.0;
  std::vector<double> h_grid;
  std::vector<double> residuals;
  double delta_n = 0.0;
  std::size_t n  = 0;

  double max_residual() const;
};

/**
 * |ℓ(θ₀ + h/√n) − ℓ(θ₀) − h I(θ₀) Δ + ½ h² I(θ₀)| with Δ = √n(θ̂ − θ₀), on a
 * uniform 41-point grid over [−radius, radius]. 1-D models only.
 */
LanDiagnostic lan_residual(BayesModel const &model, double theta0, Dataset const &data,
                           double k_radius);
LanDiagnostic lan_residual(BayesModel const &model, double theta0, Dataset const &data,
                           std::vector<double> h_grid);

/// log p(X) by 1-D quadrature of the log joint.
double log_evidence_quadrature(BayesModel const &model, Dataset const &data);

/// Prior mass outside [center − radius, center + radius] (1-D).
double prior_tail_mass(BayesModel const &model, double center, double radius);

/// One datum per row, `dim` comma-separated columns; '#' comments and a header line are skipped.
Dataset load_csv(std::string const &path, std::size_t dim = 1);

/// Builds a model from {"kind": "gaussian-mean"|"mvn-mean"|"exponential", ...}.
std::shared_ptr<BayesModel> model_from_json(nlohmann::json const &j);

}  // namespace renyi::models
