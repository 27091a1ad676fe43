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

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace renyi::dist {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_1d(DensityBase const &d, char const *what)
{
  if (d.dim() != 1)
  {
    throw Error(std::string(what) + " is only defined for 1-D densities");
  }
}

double uniform01(Rng &rng)
{
  // (0,1), never exactly 0.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double v = u(rng);
  while (v <= 0.0)
  {
    v = u(rng);
  }
  return v;
}

Eigen::VectorXd scalar_vec(double v)
{
  Eigen::VectorXd out(1);
  out(0) = v;
  return out;
}

Eigen::MatrixXd scalar_mat(double v)
{
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = v;
  return out;
}

Eigen::VectorXd json_vector(nlohmann::json const &j)
{
  if (j.is_number())
  {
    return scalar_vec(j.get<double>());
  }
  auto const v = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd const>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd json_matrix(nlohmann::json const &j)
{
  if (j.is_number())
  {
    return scalar_mat(j.get<double>());
  }
  auto const rows = j.get<std::vector<std::vector<double>>>();
  Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
  {
    if (rows[r].size() != static_cast<std::size_t>(m.cols()))
    {
      throw Error("covariance rows must have equal length");
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c)
    {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

nlohmann::json vector_json(Eigen::VectorXd const &v)
{
  if (v.size() == 1)
  {
    return v(0);
  }
  return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json matrix_json(Eigen::MatrixXd const &m)
{
  if (m.size() == 1)
  {
    return m(0, 0);
  }
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
  {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
    {
      row[static_cast<std::size_t>(c)] = m(r, c);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

//------------------------------------------------------------------------------
// DensityBase defaults
//------------------------------------------------------------------------------

double DensityBase::cdf(double) const
{
  throw Error(family() + ": cdf not available");
}

double DensityBase::mass(Interval k) const
{
  require_1d(*this, "mass");
  if (!(k.lower < k.upper))
  {
    return 0.0;
  }
  double const hi = k.upper == kInf ? 1.0 : cdf(k.upper);
  double const lo = k.lower == -kInf ? 0.0 : cdf(k.lower);
  return std::max(0.0, hi - lo);
}

std::vector<Anchor> DensityBase::conditional_anchors(double) const
{
  return anchors(1);
}

//------------------------------------------------------------------------------
// Density handle
//------------------------------------------------------------------------------

Density::Density(std::shared_ptr<DensityBase const> impl)
  : impl_(std::move(impl))
{
  if (!impl_)
  {
    throw Error("Density: null implementation");
  }
}

double Density::pdf(double x) const
{
  return std::exp(log_pdf(x));
}

Eigen::MatrixXd Density::sample(std::size_t count, std::uint64_t seed) const
{
  Rng rng(seed);
  auto const d = dim();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(d));
  std::vector<double> point(d);
  for (std::size_t i = 0; i < count; ++i)
  {
    draw(rng, point);
    for (std::size_t c = 0; c < d; ++c)
    {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = point[c];
    }
  }
  return out;
}

double Density::mean1() const
{
  auto m = mean();
  if (!m || m->size() != 1)
  {
    throw Error(family() + ": scalar mean not available");
  }
  return (*m)(0);
}

double Density::variance1() const
{
  auto v = variance();
  if (!v || v->size() != 1)
  {
    throw Error(family() + ": scalar variance not available");
  }
  return (*v)(0, 0);
}

//------------------------------------------------------------------------------
// Gaussian
//------------------------------------------------------------------------------

GaussianDensity::GaussianDensity(Eigen::VectorXd mu, Eigen::MatrixXd cov)
  : mu_(std::move(mu))
  , cov_(std::move(cov))
{
  auto const d = mu_.size();
  if (d < 1 || cov_.rows() != d || cov_.cols() != d)
  {
    throw Error("gaussian: mean and covariance dimensions disagree");
  }
  if (!mu_.allFinite() || !cov_.allFinite())
  {
    throw Error("gaussian: parameters must be finite");
  }
  double const scale = cov_.cwiseAbs().maxCoeff();
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1e-300))
  {
    throw Error("gaussian: covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success || !(cov_.diagonal().array() > 0.0).all())
  {
    throw Error("gaussian: covariance is not positive definite");
  }
  chol_ = llt.matrixL();
  if (!(chol_.diagonal().array() > 0.0).all())
  {
    throw Error("gaussian: covariance is not positive definite");
  }
  log_det_   = 2.0 * chol_.diagonal().array().log().sum();
  precision_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
  log_norm_  = -0.5 * static_cast<double>(d) * kLog2Pi - 0.5 * log_det_;
  sd1_       = std::sqrt(cov_(0, 0));
}

double GaussianDensity::log_pdf1(double x) const
{
  if (mu_.size() != 1)
  {
    throw Error("gaussian: scalar evaluation of a multivariate density");
  }
  double const z = (x - mu_(0)) / sd1_;
  return log_norm_ - 0.5 * z * z;
}

double GaussianDensity::log_pdf(std::span<double const> x) const
{
  auto const d = static_cast<std::size_t>(mu_.size());
  if (x.size() != d)
  {
    throw Error("gaussian: point has the wrong dimension");
  }
  if (d == 1)
  {
    return log_pdf1(x[0]);
  }
  // Forward substitution L z = x - mu.
  double quad = 0.0;
  double z[8];
  if (d > 8)
  {
    Eigen::VectorXd diff = Eigen::Map<Eigen::VectorXd const>(x.data(), mu_.size()) - mu_;
    return log_norm_ - 0.5 * diff.dot(precision_ * diff);
  }
  for (std::size_t i = 0; i < d; ++i)
  {
    double s = x[i] - mu_(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < i; ++j)
    {
      s -= chol_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z[j];
    }
    z[i] = s / chol_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    quad += z[i] * z[i];
  }
  return log_norm_ - 0.5 * quad;
}

std::vector<Interval> GaussianDensity::support() const
{
  return std::vector<Interval>(static_cast<std::size_t>(mu_.size()), Interval{});
}

void GaussianDensity::draw(Rng &rng, std::span<double> out) const
{
  std::normal_distribution<double> normal(0.0, 1.0);
  auto const d = mu_.size();
  Eigen::VectorXd eps(d);
  for (Eigen::Index i = 0; i < d; ++i)
  {
    eps(i) = normal(rng);
  }
  Eigen::VectorXd x = mu_ + chol_ * eps;
  for (Eigen::Index i = 0; i < d; ++i)
  {
    out[static_cast<std::size_t>(i)] = x(i);
  }
}

nlohmann::json GaussianDensity::describe() const
{
  if (mu_.size() == 1)
  {
    return {{"family", "gaussian"}, {"mean", mu_(0)}, {"variance", cov_(0, 0)}};
  }
  return {{"family", "gaussian"}, {"mean", vector_json(mu_)}, {"cov", matrix_json(cov_)}};
}

double GaussianDensity::cdf(double x) const
{
  require_1d(*this, "cdf");
  return numerics::normal_sf(-(x - mu_(0)) / sd1_);
}

double GaussianDensity::mass(Interval k) const
{
  require_1d(*this, "mass");
  if (!(k.lower < k.upper))
  {
    return 0.0;
  }
  double const za = (k.lower - mu_(0)) / sd1_;
  double const zb = (k.upper - mu_(0)) / sd1_;
  if (za > 0.0)
  {
    return numerics::normal_sf(za) - numerics::normal_sf(zb);
  }
  if (zb < 0.0)
  {
    return numerics::normal_sf(-zb) - numerics::normal_sf(-za);
  }
  return 1.0 - numerics::normal_sf(-za) - numerics::normal_sf(zb);
}

std::vector<Anchor> GaussianDensity::anchors(std::size_t coord) const
{
  auto const c = static_cast<Eigen::Index>(coord);
  if (c >= mu_.size())
  {
    throw Error("gaussian: anchor coordinate out of range");
  }
  return {Anchor{mu_(c), std::sqrt(cov_(c, c))}};
}

std::vector<Anchor> GaussianDensity::conditional_anchors(double x0) const
{
  if (mu_.size() != 2)
  {
    return anchors(1);
  }
  double const m = mu_(1) + cov_(0, 1) / cov_(0, 0) * (x0 - mu_(0));
  double const v = cov_(1, 1) - cov_(0, 1) * cov_(0, 1) / cov_(0, 0);
  return {Anchor{m, std::sqrt(std::max(v, 1e-300))}};
}

//------------------------------------------------------------------------------
// Laplace
//------------------------------------------------------------------------------

LaplaceDensity::LaplaceDensity(double location, double scale)
  : k_(location)
  , b_(scale)
{
  if (!(b_ > 0.0) || !std::isfinite(b_) || !std::isfinite(k_))
  {
    throw Error("laplace: scale must be positive and parameters finite");
  }
}

double LaplaceDensity::log_pdf1(double x) const
{
  return -std::log(2.0 * b_) - std::abs(x - k_) / b_;
}

void LaplaceDensity::draw(Rng &rng, std::span<double> out) const
{
  double const u = uniform01(rng) - 0.5;
  out[0]         = k_ - b_ * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
}

nlohmann::json LaplaceDensity::describe() const
{
  return {{"family", "laplace"}, {"location", k_}, {"scale", b_}};
}

std::optional<Eigen::VectorXd> LaplaceDensity::mean() const
{
  return scalar_vec(k_);
}

std::optional<Eigen::MatrixXd> LaplaceDensity::variance() const
{
  return scalar_mat(2.0 * b_ * b_);
}

double LaplaceDensity::cdf(double x) const
{
  double const z = (x - k_) / b_;
  return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

double LaplaceDensity::mass(Interval k) const
{
  if (!(k.lower < k.upper))
  {
    return 0.0;
  }
  auto sf = [&](double x) {
    double const z = (x - k_) / b_;
    return z > 0.0 ? 0.5 * std::exp(-z) : 1.0 - 0.5 * std::exp(z);
  };
  if (k.lower > k_)
  {
    return sf(k.lower) - (k.upper == kInf ? 0.0 : sf(k.upper));
  }
  return (k.upper == kInf ? 1.0 : cdf(k.upper)) - (k.lower == -kInf ? 0.0 : cdf(k.lower));
}

std::vector<Anchor> LaplaceDensity::anchors(std::size_t) const
{
  return {Anchor{k_, b_}};
}

//------------------------------------------------------------------------------
// Logistic
//------------------------------------------------------------------------------

LogisticDensity::LogisticDensity(double location, double scale)
  : m_(location)
  , s_(scale)
{
  if (!(s_ > 0.0) || !std::isfinite(s_) || !std::isfinite(m_))
  {
    throw Error("logistic: scale must be positive and parameters finite");
  }
}

double LogisticDensity::log_pdf1(double x) const
{
  double const z = std::abs((x - m_) / s_);
  return -z - 2.0 * std::log1p(std::exp(-z)) - std::log(s_);
}

void LogisticDensity::draw(Rng &rng, std::span<double> out) const
{
  double const u = uniform01(rng);
  out[0]         = m_ + s_ * (std::log(u) - std::log1p(-u));
}

nlohmann::json LogisticDensity::describe() const
{
  return {{"family", "logistic"}, {"location", m_}, {"scale", s_}};
}

std::optional<Eigen::VectorXd> LogisticDensity::mean() const
{
  return scalar_vec(m_);
}

std::optional<Eigen::MatrixXd> LogisticDensity::variance() const
{
  return scalar_mat(s_ * s_ * std::numbers::pi * std::numbers::pi / 3.0);
}

double LogisticDensity::cdf(double x) const
{
  return 1.0 / (1.0 + std::exp(-(x - m_) / s_));
}

double LogisticDensity::mass(Interval k) const
{
  if (!(k.lower < k.upper))
  {
    return 0.0;
  }
  auto sf = [&](double x) { return 1.0 / (1.0 + std::exp((x - m_) / s_)); };
  if (k.lower > m_)
  {
    return sf(k.lower) - (k.upper == kInf ? 0.0 : sf(k.upper));
  }
  return (k.upper == kInf ? 1.0 : cdf(k.upper)) - (k.lower == -kInf ? 0.0 : cdf(k.lower));
}

std::vector<Anchor> LogisticDensity::anchors(std::size_t) const
{
  return {Anchor{m_, s_}};
}

//------------------------------------------------------------------------------
// Gamma
//------------------------------------------------------------------------------

GammaDensity::GammaDensity(double shape, double rate)
  : k_(shape)
  , beta_(rate)
{
  if (!(k_ > 0.0) || !(beta_ > 0.0) || !std::isfinite(k_) || !std::isfinite(beta_))
  {
    throw Error("gamma: shape and rate must be positive and finite");
  }
  log_norm_ = k_ * std::log(beta_) - std::lgamma(k_);
}

double GammaDensity::log_pdf1(double x) const
{
  if (!(x > 0.0))
  {
    return -kInf;
  }
  return log_norm_ + (k_ - 1.0) * std::log(x) - beta_ * x;
}

void GammaDensity::draw(Rng &rng, std::span<double> out) const
{
  std::gamma_distribution<double> g(k_, 1.0 / beta_);
  out[0] = g(rng);
}

nlohmann::json GammaDensity::describe() const
{
  return {{"family", "gamma"}, {"shape", k_}, {"rate", beta_}};
}

std::optional<Eigen::VectorXd> GammaDensity::mean() const
{
  return scalar_vec(k_ / beta_);
}

std::optional<Eigen::MatrixXd> GammaDensity::variance() const
{
  return scalar_mat(k_ / (beta_ * beta_));
}

double GammaDensity::cdf(double x) const
{
  if (!(x > 0.0))
  {
    return 0.0;
  }
  return boost::math::gamma_p(k_, beta_ * x);
}

double GammaDensity::mass(Interval k) const
{
  double const a = std::max(k.lower, 0.0);
  if (!(a < k.upper))
  {
    return 0.0;
  }
  double const mode = k_ / beta_;
  if (a > mode)
  {
    double const qa = boost::math::gamma_q(k_, beta_ * a);
    double const qb = k.upper == kInf ? 0.0 : boost::math::gamma_q(k_, beta_ * k.upper);
    return std::max(0.0, qa - qb);
  }
  double const pb = k.upper == kInf ? 1.0 : boost::math::gamma_p(k_, beta_ * k.upper);
  double const pa = a > 0.0 ? boost::math::gamma_p(k_, beta_ * a) : 0.0;
  return std::max(0.0, pb - pa);
}

std::vector<Anchor> GammaDensity::anchors(std::size_t) const
{
  double const sd = std::sqrt(k_) / beta_;
  return {Anchor{k_ / beta_, sd}};
}

//------------------------------------------------------------------------------
// Uniform
//------------------------------------------------------------------------------

UniformDensity::UniformDensity(double lower, double upper)
  : a_(lower)
  , b_(upper)
{
  if (!(a_ < b_) || !std::isfinite(a_) || !std::isfinite(b_))
  {
    throw Error("uniform: requires finite lower < upper");
  }
}

double UniformDensity::log_pdf1(double x) const
{
  return (x >= a_ && x <= b_) ? -std::log(b_ - a_) : -kInf;
}

void UniformDensity::draw(Rng &rng, std::span<double> out) const
{
  out[0] = a_ + (b_ - a_) * uniform01(rng);
}

nlohmann::json UniformDensity::describe() const
{
  return {{"family", "uniform"}, {"lower", a_}, {"upper", b_}};
}

std::optional<Eigen::VectorXd> UniformDensity::mean() const
{
  return scalar_vec(0.5 * (a_ + b_));
}

std::optional<Eigen::MatrixXd> UniformDensity::variance() const
{
  return scalar_mat((b_ - a_) * (b_ - a_) / 12.0);
}

double UniformDensity::cdf(double x) const
{
  return std::clamp((x - a_) / (b_ - a_), 0.0, 1.0);
}

std::vector<Anchor> UniformDensity::anchors(std::size_t) const
{
  return {Anchor{0.5 * (a_ + b_), 0.25 * (b_ - a_)}};
}

//------------------------------------------------------------------------------
// Mixture
//------------------------------------------------------------------------------

MixtureDensity::MixtureDensity(std::vector<double> weights, std::vector<Density> components)
  : weights_(std::move(weights))
  , components_(std::move(components))
{
  if (weights_.empty() || weights_.size() != components_.size())
  {
    throw Error("mixture: need one weight per component and at least one component");
  }
  double total = 0.0;
  for (double w : weights_)
  {
    if (!(w > 0.0 && w < 1.0) && !(weights_.size() == 1 && w == 1.0))
    {
      throw Error("mixture: weights must lie in (0, 1)");
    }
    total += w;
    log_weights_.push_back(std::log(w));
  }
  if (std::abs(total - 1.0) > 1e-12)
  {
    throw Error("mixture: weights must sum to 1");
  }
  for (auto const &c : components_)
  {
    if (!c || c.dim() != components_.front().dim())
    {
      throw Error("mixture: components must share a dimension");
    }
  }
}

namespace {

struct OnlineLse
{
  double max = -kInf;
  double sum = 0.0;

  void add(double v)
  {
    if (v == -kInf)
    {
      return;
    }
    if (v > max)
    {
      sum = sum * std::exp(max - v) + 1.0;
      max = v;
    }
    else
    {
      sum += std::exp(v - max);
    }
  }
  double value() const { return max == -kInf ? -kInf : max + std::log(sum); }
};

}  // namespace

double MixtureDensity::log_pdf(std::span<double const> x) const
{
  OnlineLse acc;
  for (std::size_t i = 0; i < components_.size(); ++i)
  {
    acc.add(log_weights_[i] + components_[i].log_pdf(x));
  }
  return acc.value();
}

double MixtureDensity::log_pdf1(double x) const
{
  OnlineLse acc;
  for (std::size_t i = 0; i < components_.size(); ++i)
  {
    acc.add(log_weights_[i] + components_[i].log_pdf(x));
  }
  return acc.value();
}

std::vector<Interval> MixtureDensity::support() const
{
  auto hull = components_.front().support();
  for (auto const &c : components_)
  {
    auto const s = c.support();
    for (std::size_t i = 0; i < hull.size(); ++i)
    {
      hull[i].lower = std::min(hull[i].lower, s[i].lower);
      hull[i].upper = std::max(hull[i].upper, s[i].upper);
    }
  }
  return hull;
}

void MixtureDensity::draw(Rng &rng, std::span<double> out) const
{
  double u         = uniform01(rng);
  std::size_t pick = components_.size() - 1;
  for (std::size_t i = 0; i < weights_.size(); ++i)
  {
    if (u < weights_[i])
    {
      pick = i;
      break;
    }
    u -= weights_[i];
  }
  components_[pick].draw(rng, out);
}

nlohmann::json MixtureDensity::describe() const
{
  nlohmann::json comps = nlohmann::json::array();
  for (auto const &c : components_)
  {
    comps.push_back(c.describe());
  }
  return {{"family", "mixture"}, {"weights", weights_}, {"components", comps}};
}

std::optional<Eigen::VectorXd> MixtureDensity::mean() const
{
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < components_.size(); ++i)
  {
    auto cm = components_[i].mean();
    if (!cm)
    {
      return std::nullopt;
    }
    m += weights_[i] * *cm;
  }
  return m;
}

std::optional<Eigen::MatrixXd> MixtureDensity::variance() const
{
  auto const m = mean();
  if (!m)
  {
    return std::nullopt;
  }
  auto const d      = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < components_.size(); ++i)
  {
    auto cm = components_[i].mean();
    auto cv = components_[i].variance();
    if (!cv)
    {
      return std::nullopt;
    }
    Eigen::VectorXd diff = *cm - *m;
    v += weights_[i] * (*cv + diff * diff.transpose());
  }
  return v;
}

double MixtureDensity::cdf(double x) const
{
  double total = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i)
  {
    total += weights_[i] * components_[i].cdf(x);
  }
  return total;
}

double MixtureDensity::mass(Interval k) const
{
  double total = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i)
  {
    total += weights_[i] * components_[i].mass(k);
  }
  return total;
}

std::vector<Anchor> MixtureDensity::anchors(std::size_t coord) const
{
  std::vector<Anchor> out;
  for (auto const &c : components_)
  {
    auto const a = c.anchors(coord);
    out.insert(out.end(), a.begin(), a.end());
  }
  return out;
}

std::vector<Anchor> MixtureDensity::conditional_anchors(double x0) const
{
  std::vector<Anchor> out;
  for (auto const &c : components_)
  {
    auto const a = c.conditional_anchors(x0);
    out.insert(out.end(), a.begin(), a.end());
  }
  return out;
}

//------------------------------------------------------------------------------
// Numerically normalised 1-D density
//------------------------------------------------------------------------------

NumericDensity::NumericDensity(std::function<double(double)> log_unnormalized, Interval support,
                               std::vector<Anchor> anchors, std::string label)
  : log_unnorm_(std::move(log_unnormalized))
  , support_(support)
  , anchors_(std::move(anchors))
  , label_(std::move(label))
{
  if (anchors_.empty())
  {
    throw Error("numeric density: at least one anchor is required");
  }
  auto const li = numerics::log_integrate(log_unnorm_, support_, anchors_, 1e-12);
  if (li.divergent || !std::isfinite(li.log_value))
  {
    throw Error("numeric density '" + label_ + "': unnormalisable");
  }
  log_z_ = li.log_value;

  // Tabulate the CDF over the region holding all but ~e^-40 of the mass.
  auto probes = numerics::probe_points(support_, anchors_);
  double lo   = kInf;
  double hi   = -kInf;
  for (double x : probes)
  {
    if (log_pdf1(x) > -40.0)
    {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (!(lo < hi))
  {
    lo = anchors_.front().center - anchors_.front().scale;
    hi = anchors_.front().center + anchors_.front().scale;
  }
  // Widen to the neighbouring probes so the table brackets the bulk.
  auto it_lo = std::lower_bound(probes.begin(), probes.end(), lo);
  auto it_hi = std::upper_bound(probes.begin(), probes.end(), hi);
  lo         = it_lo == probes.begin() ? (support_.lower > -kInf ? support_.lower : lo) : *(it_lo - 1);
  hi         = it_hi == probes.end() ? (support_.upper < kInf ? support_.upper : hi) : *it_hi;

  constexpr std::size_t kCells = 4096;
  grid_.resize(kCells + 1);
  cum_.assign(kCells + 1, 0.0);
  for (std::size_t i = 0; i <= kCells; ++i)
  {
    grid_[i] = lo + (hi - lo) * static_cast<double>(i) / kCells;
  }
  auto const pdf = [this](double x) { return std::exp(log_pdf1(x)); };
  double m1      = 0.0;
  for (std::size_t i = 0; i < kCells; ++i)
  {
    numerics::QuadratureSpec spec;
    spec.lower   = grid_[i];
    spec.upper   = grid_[i + 1];
    spec.rel_tol = 1e-10;
    spec.abs_tol = 1e-300;
    cum_[i + 1]  = cum_[i] + numerics::integrate(pdf, spec).value;
    spec.abs_tol = 1e-300;
    m1 += numerics::integrate([&](double x) { return x * pdf(x); }, spec).value;
  }
  double const total = cum_.back();
  if (!(total > 0.0))
  {
    throw Error("numeric density '" + label_ + "': empty CDF table");
  }
  mean_      = m1 / total;
  double m2  = 0.0;
  for (std::size_t i = 0; i < kCells; ++i)
  {
    numerics::QuadratureSpec spec;
    spec.lower   = grid_[i];
    spec.upper   = grid_[i + 1];
    spec.rel_tol = 1e-10;
    spec.abs_tol = 1e-300;
    m2 += numerics::integrate(
              [&](double x) {
                double const d = x - mean_;
                return d * d * pdf(x);
              },
              spec)
              .value;
  }
  var_ = m2 / total;
  for (auto &c : cum_)
  {
    c /= total;
  }
}

double NumericDensity::log_pdf1(double x) const
{
  if (!support_.contains(x))
  {
    return -kInf;
  }
  return log_unnorm_(x) - log_z_;
}

void NumericDensity::draw(Rng &rng, std::span<double> out) const
{
  double const u = uniform01(rng);
  auto it        = std::upper_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.begin())
  {
    out[0] = grid_.front();
    return;
  }
  if (it == cum_.end())
  {
    out[0] = grid_.back();
    return;
  }
  auto const i   = static_cast<std::size_t>(it - cum_.begin());
  double const w = cum_[i] - cum_[i - 1];
  double const f = w > 0.0 ? (u - cum_[i - 1]) / w : 0.5;
  out[0]         = grid_[i - 1] + f * (grid_[i] - grid_[i - 1]);
}

nlohmann::json NumericDensity::describe() const
{
  return {{"family", "numeric"},
          {"label", label_},
          {"lower", support_.lower},
          {"upper", support_.upper},
          {"mean", mean_},
          {"variance", var_}};
}

std::optional<Eigen::VectorXd> NumericDensity::mean() const
{
  return scalar_vec(mean_);
}

std::optional<Eigen::MatrixXd> NumericDensity::variance() const
{
  return scalar_mat(var_);
}

double NumericDensity::cdf(double x) const
{
  if (x <= grid_.front())
  {
    return 0.0;
  }
  if (x >= grid_.back())
  {
    return 1.0;
  }
  auto it        = std::upper_bound(grid_.begin(), grid_.end(), x);
  auto const i   = static_cast<std::size_t>(it - grid_.begin()) - 1;
  numerics::QuadratureSpec spec;
  spec.lower = grid_[i];
  spec.upper = x;
  if (!(spec.lower < spec.upper))
  {
    return cum_[i];
  }
  spec.rel_tol     = 1e-10;
  spec.abs_tol     = 1e-300;
  double const tot = cum_.back();
  double const piece =
      numerics::integrate([this](double t) { return std::exp(log_pdf1(t)); }, spec).value;
  // cum_ is normalised by the table total; keep the increment on the same footing.
  double const cell = cum_[i + 1] - cum_[i];
  numerics::QuadratureSpec full = spec;
  full.upper = grid_[i + 1];
  double const cell_raw =
      numerics::integrate([this](double t) { return std::exp(log_pdf1(t)); }, full).value;
  double const frac = cell_raw > 0.0 ? piece / cell_raw : 0.0;
  return std::min(tot, cum_[i] + frac * cell);
}

std::vector<Anchor> NumericDensity::anchors(std::size_t) const
{
  return anchors_;
}

//------------------------------------------------------------------------------
// Constructors
//------------------------------------------------------------------------------

Density make_gaussian(Eigen::VectorXd mu, Eigen::MatrixXd cov)
{
  return Density(std::make_shared<GaussianDensity>(std::move(mu), std::move(cov)));
}

Density make_gaussian(double mean, double variance)
{
  if (!(variance > 0.0))
  {
    throw Error("gaussian: variance must be positive");
  }
  return make_gaussian(scalar_vec(mean), scalar_mat(variance));
}

Density make_laplace(double location, double scale)
{
  return Density(std::make_shared<LaplaceDensity>(location, scale));
}

Density make_logistic(double location, double scale)
{
  return Density(std::make_shared<LogisticDensity>(location, scale));
}

Density make_gamma(double shape, double rate)
{
  return Density(std::make_shared<GammaDensity>(shape, rate));
}

Density make_uniform(double lower, double upper)
{
  return Density(std::make_shared<UniformDensity>(lower, upper));
}

Density make_mixture(std::vector<double> weights, std::vector<Density> components)
{
  return Density(std::make_shared<MixtureDensity>(std::move(weights), std::move(components)));
}

Density make_spike(double center, double width)
{
  if (!(width > 0.0))
  {
    throw Error("spike: width must be positive");
  }
  return make_gaussian(center, width * width);
}

Density make_numeric(std::function<double(double)> log_unnormalized, Interval support,
                     std::vector<Anchor> anchors, std::string label)
{
  return Density(std::make_shared<NumericDensity>(std::move(log_unnormalized), support,
                                                  std::move(anchors), std::move(label)));
}

Density from_json(nlohmann::json const &j)
{
  if (!j.is_object() || !j.contains("family"))
  {
    throw Error("density description needs a 'family' field");
  }
  auto const family = j.at("family").get<std::string>();
  auto allow        = [&](std::initializer_list<char const *> keys) {
    for (auto const &[k, v] : j.items())
    {
      if (k == "family")
      {
        continue;
      }
      if (std::none_of(keys.begin(), keys.end(), [&](char const *a) { return k == a; }))
      {
        throw Error("density '" + family + "': unknown key '" + k + "'");
      }
    }
  };
  if (family == "gaussian")
  {
    allow({"mean", "variance", "cov"});
    if (j.contains("cov"))
    {
      return make_gaussian(json_vector(j.at("mean")), json_matrix(j.at("cov")));
    }
    return make_gaussian(j.at("mean").get<double>(), j.at("variance").get<double>());
  }
  if (family == "laplace")
  {
    allow({"location", "scale"});
    return make_laplace(j.at("location").get<double>(), j.at("scale").get<double>());
  }
  if (family == "logistic")
  {
    allow({"location", "scale"});
    return make_logistic(j.at("location").get<double>(), j.at("scale").get<double>());
  }
  if (family == "gamma")
  {
    allow({"shape", "rate"});
    return make_gamma(j.at("shape").get<double>(), j.at("rate").get<double>());
  }
  if (family == "uniform")
  {
    allow({"lower", "upper"});
    return make_uniform(j.at("lower").get<double>(), j.at("upper").get<double>());
  }
  if (family == "spike")
  {
    allow({"center", "width"});
    return make_spike(j.at("center").get<double>(), j.at("width").get<double>());
  }
  if (family == "mixture")
  {
    allow({"weights", "components"});
    std::vector<Density> comps;
    for (auto const &c : j.at("components"))
    {
      comps.push_back(from_json(c));
    }
    return make_mixture(j.at("weights").get<std::vector<double>>(), std::move(comps));
  }
  throw Error("unknown density family '" + family + "'");
}

bool dominates(Density const &p, Density const &q)
{
  if (p.dim() != q.dim())
  {
    throw Error("dominates: densities have different dimensions");
  }
  auto const sp = p.support();
  auto const sq = q.support();
  for (std::size_t i = 0; i < sp.size(); ++i)
  {
    if (!sq[i].contains(sp[i]))
    {
      return false;
    }
  }
  return true;
}

double quantile(Density const &d, double prob)
{
  if (d.dim() != 1)
  {
    throw Error("quantile: 1-D densities only");
  }
  if (!(prob > 0.0 && prob < 1.0))
  {
    throw Error("quantile: probability must lie in (0, 1)");
  }
  auto const support = d.support().front();
  auto const a       = d.anchors().front();
  // Lower-tail probability at x, or upper-tail when prob > 1/2.
  bool const upper = prob > 0.5;
  double const target = upper ? 1.0 - prob : prob;
  auto tail = [&](double x) {
    return upper ? d.mass(Interval{x, kInf}) : d.mass(Interval{-kInf, x});
  };
  double lo = a.center;
  double hi = a.center;
  double step = a.scale;
  // Bracket: tail(inner) >= target >= tail(outer).
  double inner = a.center;
  double outer = a.center;
  for (int i = 0; i < 200; ++i)
  {
    outer = upper ? a.center + step : a.center - step;
    outer = std::clamp(outer, support.lower, support.upper);
    if (tail(outer) <= target)
    {
      break;
    }
    inner = outer;
    step *= 2.0;
  }
  if (tail(inner) < target)
  {
    // The anchor is already beyond the quantile; search towards the other side.
    for (int i = 0; i < 200; ++i)
    {
      step *= 2.0;
      double const x = std::clamp(upper ? a.center - step : a.center + step, support.lower,
                                  support.upper);
      if (tail(x) >= target)
      {
        inner = x;
        break;
      }
    }
  }
  lo = std::min(inner, outer);
  hi = std::max(inner, outer);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)); ++i)
  {
    double const mid = 0.5 * (lo + hi);
    bool const beyond = tail(mid) <= target;
    // In the lower tail, "beyond" means mid is left of the quantile.
    if (upper == beyond)
    {
      hi = mid;
    }
    else
    {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GaussianDensity const *as_gaussian(Density const &d)
{
  return dynamic_cast<GaussianDensity const *>(&d.base());
}

}  // namespace renyi::dist
