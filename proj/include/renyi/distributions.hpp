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

#include "renyi/numerics.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace renyi::dist {

using numerics::Anchor;
using numerics::Interval;
using Rng = std::mt19937_64;

/**
 * Interface of an immutable density over R^d (d <= 2 in practice).
 *
 * log_pdf returns -inf outside the support. The 1-D helpers (cdf, anchors,
 * breakpoints) throw for d > 1 unless overridden.
 */
class DensityBase
{
public:
  virtual ~DensityBase() = default;

  virtual std::string family() const                          = 0;
  virtual std::size_t dim() const                             = 0;
  virtual double log_pdf(std::span<double const> x) const     = 0;
  virtual std::vector<Interval> support() const               = 0;
  virtual void draw(Rng &rng, std::span<double> out) const    = 0;
  virtual nlohmann::json describe() const                     = 0;

  virtual std::optional<Eigen::VectorXd> mean() const { return std::nullopt; }
  virtual std::optional<Eigen::MatrixXd> variance() const { return std::nullopt; }

  /// Scalar fast path for d == 1.
  virtual double log_pdf1(double x) const { return log_pdf(std::span<double const>(&x, 1)); }
  virtual double cdf(double x) const;
  /// P(lower <= X <= upper); overridden where cancellation in cdf differences matters.
  virtual double mass(Interval k) const;

  /// Where the mass of coordinate `coord` sits, for quadrature probing.
  virtual std::vector<Anchor> anchors(std::size_t coord) const = 0;
  /// Anchors for coordinate 1 given coordinate 0 equals x0 (2-D only).
  virtual std::vector<Anchor> conditional_anchors(double x0) const;
};

/// Shared handle with value semantics over an immutable DensityBase.
class Density
{
public:
  Density() = default;
  explicit Density(std::shared_ptr<DensityBase const> impl);

  std::string family() const { return impl_->family(); }
  std::size_t dim() const { return impl_->dim(); }
  double log_pdf(std::span<double const> x) const { return impl_->log_pdf(x); }
  double log_pdf(double x) const { return impl_->log_pdf1(x); }
  double pdf(double x) const;
  std::vector<Interval> support() const { return impl_->support(); }
  std::optional<Eigen::VectorXd> mean() const { return impl_->mean(); }
  std::optional<Eigen::MatrixXd> variance() const { return impl_->variance(); }
  double cdf(double x) const { return impl_->cdf(x); }
  double mass(Interval k) const { return impl_->mass(k); }
  std::vector<Anchor> anchors(std::size_t coord = 0) const { return impl_->anchors(coord); }
  std::vector<Anchor> conditional_anchors(double x0) const
  {
    return impl_->conditional_anchors(x0);
  }
  nlohmann::json describe() const { return impl_->describe(); }

  void draw(Rng &rng, std::span<double> out) const { impl_->draw(rng, out); }
  /// count x dim matrix of independent draws from a fresh engine seeded with `seed`.
  Eigen::MatrixXd sample(std::size_t count, std::uint64_t seed) const;

  DensityBase const &base() const { return *impl_; }
  explicit operator bool() const { return static_cast<bool>(impl_); }

  /// Scalar mean/variance for 1-D densities; throws when unavailable.
  double mean1() const;
  double variance1() const;

private:
  std::shared_ptr<DensityBase const> impl_;
};

//------------------------------------------------------------------------------
// Concrete families
//------------------------------------------------------------------------------

class GaussianDensity final : public DensityBase
{
public:
  GaussianDensity(Eigen::VectorXd mu, Eigen::MatrixXd cov);

  std::string family() const override { return "gaussian"; }
  std::size_t dim() const override { return static_cast<std::size_t>(mu_.size()); }
  double log_pdf(std::span<double const> x) const override;
  double log_pdf1(double x) const override;
  std::vector<Interval> support() const override;
  void draw(Rng &rng, std::span<double> out) const override;
  nlohmann::json describe() const override;
  std::optional<Eigen::VectorXd> mean() const override { return mu_; }
  std::optional<Eigen::MatrixXd> variance() const override { return cov_; }
  double cdf(double x) const override;
  double mass(Interval k) const override;
  std::vector<Anchor> anchors(std::size_t coord) const override;
  std::vector<Anchor> conditional_anchors(double x0) const override;

  Eigen::VectorXd const &mu() const { return mu_; }
  Eigen::MatrixXd const &cov() const { return cov_; }
  double log_det() const { return log_det_; }

private:
  Eigen::VectorXd mu_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;  // lower Cholesky factor
  Eigen::MatrixXd precision_;
  double log_det_  = 0.0;
  double log_norm_ = 0.0;  // -d/2 log 2π - 1/2 log det
  double sd1_      = 1.0;
};

class LaplaceDensity final : public DensityBase
{
public:
  LaplaceDensity(double location, double scale);

  std::string family() const override { return "laplace"; }
  std::size_t dim() const override { return 1; }
  double log_pdf(std::span<double const> x) const override { return log_pdf1(x[0]); }
  double log_pdf1(double x) const override;
  std::vector<Interval> support() const override { return {Interval{}}; }
  void draw(Rng &rng, std::span<double> out) const override;
  nlohmann::json describe() const override;
  std::optional<Eigen::VectorXd> mean() const override;
  std::optional<Eigen::MatrixXd> variance() const override;
  double cdf(double x) const override;
  double mass(Interval k) const override;
  std::vector<Anchor> anchors(std::size_t coord) const override;

  double location() const { return k_; }
  double scale() const { return b_; }

private:
  double k_;
  double b_;
};

class LogisticDensity final : public DensityBase
{
public:
  LogisticDensity(double location, double scale);

  std::string family() const override { return "logistic"; }
  std::size_t dim() const override { return 1; }
  double log_pdf(std::span<double const> x) const override { return log_pdf1(x[0]); }
  double log_pdf1(double x) const override;
  std::vector<Interval> support() const override { return {Interval{}}; }
  void draw(Rng &rng, std::span<double> out) const override;
  nlohmann::json describe() const override;
  std::optional<Eigen::VectorXd> mean() const override;
  std::optional<Eigen::MatrixXd> variance() const override;
  double cdf(double x) const override;
  double mass(Interval k) const override;
  std::vector<Anchor> anchors(std::size_t coord) const override;

  double location() const { return m_; }
  double scale() const { return s_; }

private:
  double m_;
  double s_;
};

/// Shape/rate parameterisation: density β^k λ^{k-1} e^{-βλ} / Γ(k) on (0, ∞).
class GammaDensity final : public DensityBase
{
public:
  GammaDensity(double shape, double rate);

  std::string family() const override { return "gamma"; }
  std::size_t dim() const override { return 1; }
  double log_pdf(std::span<double const> x) const override { return log_pdf1(x[0]); }
  double log_pdf1(double x) const override;
  std::vector<Interval> support() const override { return {Interval{0.0, kInf}}; }
  void draw(Rng &rng, std::span<double> out) const override;
  nlohmann::json describe() const override;
  std::optional<Eigen::VectorXd> mean() const override;
  std::optional<Eigen::MatrixXd> variance() const override;
  double cdf(double x) const override;
  double mass(Interval k) const override;
  std::vector<Anchor> anchors(std::size_t coord) const override;

  double shape() const { return k_; }
  double rate() const { return beta_; }

private:
  double k_;
  double beta_;
  double log_norm_;
};

class UniformDensity final : public DensityBase
{
public:
  UniformDensity(double lower, double upper);

  std::string family() const override { return "uniform"; }
  std::size_t dim() const override { return 1; }
  double log_pdf(std::span<double const> x) const override { return log_pdf1(x[0]); }
  double log_pdf1(double x) const override;
  std::vector<Interval> support() const override { return {Interval{a_, b_}}; }
  void draw(Rng &rng, std::span<double> out) const override;
  nlohmann::json describe() const override;
  std::optional<Eigen::VectorXd> mean() const override;
  std::optional<Eigen::MatrixXd> variance() const override;
  double cdf(double x) const override;
  std::vector<Anchor> anchors(std::size_t coord) const override;

private:
  double a_;
  double b_;
};

/// Finite convex combination Σ w_i p_i; all components share a dimension.
class MixtureDensity final : public DensityBase
{
public:
  MixtureDensity(std::vector<double> weights, std::vector<Density> components);

  std::string family() const override { return "mixture"; }
  std::size_t dim() const override { return components_.front().dim(); }
  double log_pdf(std::span<double const> x) const override;
  double log_pdf1(double x) const override;
  std::vector<Interval> support() const override;
  void draw(Rng &rng, std::span<double> out) const override;
  nlohmann::json describe() const override;
  std::optional<Eigen::VectorXd> mean() const override;
  std::optional<Eigen::MatrixXd> variance() const override;
  double cdf(double x) const override;
  double mass(Interval k) const override;
  std::vector<Anchor> anchors(std::size_t coord) const override;
  std::vector<Anchor> conditional_anchors(double x0) const override;

  std::vector<double> const &weights() const { return weights_; }
  std::vector<Density> const &components() const { return components_; }

private:
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<Density> components_;
};

/**
 * 1-D density known up to a constant, normalised by quadrature over a
 * (possibly infinite) support. Moments and the CDF are computed numerically;
 * sampling inverts a tabulated CDF.
 */
class NumericDensity final : public DensityBase
{
public:
  NumericDensity(std::function<double(double)> log_unnormalized, Interval support,
                 std::vector<Anchor> anchors, std::string label);

  std::string family() const override { return "numeric"; }
  std::size_t dim() const override { return 1; }
  double log_pdf(std::span<double const> x) const override { return log_pdf1(x[0]); }
  double log_pdf1(double x) const override;
  std::vector<Interval> support() const override { return {support_}; }
  void draw(Rng &rng, std::span<double> out) const override;
  nlohmann::json describe() const override;
  std::optional<Eigen::VectorXd> mean() const override;
  std::optional<Eigen::MatrixXd> variance() const override;
  double cdf(double x) const override;
  std::vector<Anchor> anchors(std::size_t coord) const override;

  double log_normalizer() const { return log_z_; }

private:
  std::function<double(double)> log_unnorm_;
  Interval support_;
  std::vector<Anchor> anchors_;
  std::string label_;
  double log_z_ = 0.0;
  double mean_  = 0.0;
  double var_   = 0.0;
  std::vector<double> grid_;  // inverse-CDF table
  std::vector<double> cum_;
};

//------------------------------------------------------------------------------
// Constructors
//------------------------------------------------------------------------------

/// Throws on a non-symmetric or non-positive-definite covariance.
Density make_gaussian(Eigen::VectorXd mu, Eigen::MatrixXd cov);
Density make_gaussian(double mean, double variance);
Density make_laplace(double location, double scale);
Density make_logistic(double location, double scale);
Density make_gamma(double shape, double rate);
Density make_uniform(double lower, double upper);
/// Weights must be in (0,1) and sum to 1 within 1e-12.
Density make_mixture(std::vector<double> weights, std::vector<Density> components);
/// Gaussian of standard deviation `width` standing in for a point mass at `center`.
Density make_spike(double center, double width);
Density make_numeric(std::function<double(double)> log_unnormalized, Interval support,
                     std::vector<Anchor> anchors, std::string label = "numeric");

/// Builds a density from its JSON description (the inverse of describe()).
Density from_json(nlohmann::json const &j);

/// supp(p) ⊆ supp(q), coordinate by coordinate. Requires equal dimensions.
bool dominates(Density const &p, Density const &q);

/// Inverse CDF of a 1-D density by bisection; tail probabilities use mass() for accuracy.
double quantile(Density const &d, double prob);

/// Non-null when the density is a Gaussian.
GaussianDensity const *as_gaussian(Density const &d);

}  // namespace renyi::dist
