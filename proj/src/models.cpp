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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace renyi::models {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Moments1
{
  double n    = 0.0;
  double sum  = 0.0;
  double mean = 0.0;
  double ss   = 0.0;  // Σ(x − x̄)²
};

Moments1 moments1(Dataset const &data)
{
  Moments1 m;
  m.n = static_cast<double>(data.size());
  if (data.empty())
  {
    return m;
  }
  for (double x : data.values)
  {
    m.sum += x;
  }
  m.mean = m.sum / m.n;
  for (double x : data.values)
  {
    m.ss += (x - m.mean) * (x - m.mean);
  }
  return m;
}

void require_dim(Dataset const &data, std::size_t dim, std::string const &model)
{
  if (!data.empty() && data.dim != dim)
  {
    throw Error(model + ": data has dimension " + std::to_string(data.dim) + ", expected " +
                std::to_string(dim));
  }
}

double positive_sum(Dataset const &data)
{
  double s = 0.0;
  for (std::size_t i = 0; i < data.values.size(); ++i)
  {
    double const x = data.values[i];
    if (!(x > 0.0))
    {
      throw Error("exponential: observation " + std::to_string(i) + " is not positive");
    }
    s += x;
  }
  return s;
}

Dataset flatten(Eigen::MatrixXd const &draws)
{
  Dataset d;
  d.dim = static_cast<std::size_t>(draws.cols());
  d.values.reserve(static_cast<std::size_t>(draws.size()));
  for (Eigen::Index r = 0; r < draws.rows(); ++r)
  {
    for (Eigen::Index c = 0; c < draws.cols(); ++c)
    {
      d.values.push_back(draws(r, c));
    }
  }
  return d;
}

}  // namespace

//------------------------------------------------------------------------------
// Dataset
//------------------------------------------------------------------------------

Eigen::VectorXd Dataset::sum() const
{
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < size(); ++i)
  {
    for (std::size_t c = 0; c < dim; ++c)
    {
      s(static_cast<Eigen::Index>(c)) += values[i * dim + c];
    }
  }
  return s;
}

Dataset Dataset::head(std::size_t n) const
{
  if (n > size())
  {
    throw Error("dataset has only " + std::to_string(size()) + " rows");
  }
  Dataset out;
  out.dim = dim;
  out.values.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n * dim));
  return out;
}

//------------------------------------------------------------------------------
// BayesModel
//------------------------------------------------------------------------------

double BayesModel::log_evidence(Dataset const &data) const
{
  return log_evidence_quadrature(*this, data);
}

double BayesModel::log_likelihood_ratio(Dataset const &data, double theta,
                                        double theta_ref) const
{
  return log_likelihood(data, theta) - log_likelihood(data, theta_ref);
}

double BayesModel::fisher_info(double theta) const
{
  if (dim() != 1)
  {
    throw Error(name() + ": scalar Fisher information needs a 1-D model");
  }
  return fisher_matrix(std::span<double const>(&theta, 1))(0, 0);
}

double BayesModel::mle1(Dataset const &data) const
{
  if (dim() != 1)
  {
    throw Error(name() + ": scalar MLE needs a 1-D model");
  }
  return mle(data)(0);
}

//------------------------------------------------------------------------------
// Gaussian mean
//------------------------------------------------------------------------------

GaussianMeanModel::GaussianMeanModel(double mu0, double sigma)
  : mu0_(mu0)
  , sigma_(sigma)
{
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu0))
  {
    throw Error("gaussian-mean: sigma must be positive and finite");
  }
  prior_ = dist::make_gaussian(mu0_, sigma_ * sigma_);
}

double GaussianMeanModel::log_likelihood(Dataset const &data, std::span<double const> theta) const
{
  require_dim(data, 1, name());
  auto const m    = moments1(data);
  double const s2 = sigma_ * sigma_;
  double const d  = m.mean - theta[0];
  return -0.5 * m.n * (kLog2Pi + std::log(s2)) - (m.ss + m.n * d * d) / (2.0 * s2);
}

double GaussianMeanModel::log_likelihood_ratio(Dataset const &data, double theta,
                                               double theta_ref) const
{
  require_dim(data, 1, name());
  auto const m = moments1(data);
  return m.n * (theta - theta_ref) * (2.0 * m.mean - theta - theta_ref) / (2.0 * sigma_ * sigma_);
}

Density GaussianMeanModel::exact_posterior(Dataset const &data) const
{
  require_dim(data, 1, name());
  auto const m = moments1(data);
  return dist::make_gaussian((mu0_ + m.sum) / (m.n + 1.0), sigma_ * sigma_ / (m.n + 1.0));
}

Eigen::VectorXd GaussianMeanModel::mle(Dataset const &data) const
{
  require_dim(data, 1, name());
  if (data.empty())
  {
    throw Error("gaussian-mean: MLE needs data");
  }
  Eigen::VectorXd out(1);
  out(0) = moments1(data).mean;
  return out;
}

Eigen::MatrixXd GaussianMeanModel::fisher_matrix(std::span<double const>) const
{
  return Eigen::MatrixXd::Constant(1, 1, 1.0 / (sigma_ * sigma_));
}

Dataset GaussianMeanModel::simulate(std::span<double const> theta0, std::size_t n,
                                    std::uint64_t seed) const
{
  return flatten(dist::make_gaussian(theta0[0], sigma_ * sigma_).sample(n, seed));
}

double GaussianMeanModel::prior_bound() const
{
  return 1.0 / (sigma_ * std::sqrt(2.0 * std::numbers::pi));
}

LogJoint GaussianMeanModel::log_joint(Dataset const &data) const
{
  require_dim(data, 1, name());
  auto const m    = moments1(data);
  double const s2 = sigma_ * sigma_;
  double const c  = -0.5 * m.n * (kLog2Pi + std::log(s2)) - m.ss / (2.0 * s2);
  auto const pr   = prior_;
  return [m, s2, c, pr](std::span<double const> theta) {
    double const d = m.mean - theta[0];
    return pr.log_pdf(theta[0]) + c - m.n * d * d / (2.0 * s2);
  };
}

double GaussianMeanModel::log_evidence(Dataset const &data) const
{
  require_dim(data, 1, name());
  auto const m    = moments1(data);
  double const s2 = sigma_ * sigma_;
  double const d  = m.mean - mu0_;
  double const q  = m.n > 0.0 ? m.ss + m.n * d * d / (m.n + 1.0) : 0.0;
  return -0.5 * m.n * (kLog2Pi + std::log(s2)) - 0.5 * std::log(m.n + 1.0) - q / (2.0 * s2);
}

//------------------------------------------------------------------------------
// Multivariate Gaussian mean
//------------------------------------------------------------------------------

MvnMeanModel::MvnMeanModel(Eigen::VectorXd mu0, Eigen::MatrixXd sigma)
  : mu0_(std::move(mu0))
  , sigma_(std::move(sigma))
{
  prior_ = dist::make_gaussian(mu0_, sigma_);  // validates SPD
  auto const *g = dist::as_gaussian(prior_);
  log_det_      = g->log_det();
  precision_    = sigma_.llt().solve(Eigen::MatrixXd::Identity(sigma_.rows(), sigma_.cols()));
}

std::vector<Interval> MvnMeanModel::parameter_support() const
{
  return std::vector<Interval>(dim(), Interval{});
}

double MvnMeanModel::log_likelihood(Dataset const &data, std::span<double const> theta) const
{
  require_dim(data, dim(), name());
  auto const d = static_cast<Eigen::Index>(dim());
  Eigen::Map<Eigen::VectorXd const> th(theta.data(), d);
  double quad = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
  {
    auto const r = data.row(i);
    Eigen::VectorXd diff = Eigen::Map<Eigen::VectorXd const>(r.data(), d) - th;
    quad += diff.dot(precision_ * diff);
  }
  double const n = static_cast<double>(data.size());
  return -0.5 * n * (static_cast<double>(d) * kLog2Pi + log_det_) - 0.5 * quad;
}

Density MvnMeanModel::exact_posterior(Dataset const &data) const
{
  require_dim(data, dim(), name());
  double const n = static_cast<double>(data.size());
  return dist::make_gaussian((data.empty() ? mu0_ : Eigen::VectorXd(data.sum() + mu0_)) / (n + 1.0),
                             sigma_ / (n + 1.0));
}

Eigen::VectorXd MvnMeanModel::mle(Dataset const &data) const
{
  require_dim(data, dim(), name());
  if (data.empty())
  {
    throw Error("mvn-mean: MLE needs data");
  }
  return data.sum() / static_cast<double>(data.size());
}

Eigen::MatrixXd MvnMeanModel::fisher_matrix(std::span<double const>) const
{
  return precision_;
}

Dataset MvnMeanModel::simulate(std::span<double const> theta0, std::size_t n,
                               std::uint64_t seed) const
{
  auto const d = static_cast<Eigen::Index>(dim());
  Eigen::VectorXd mu = Eigen::Map<Eigen::VectorXd const>(theta0.data(), d);
  return flatten(dist::make_gaussian(mu, sigma_).sample(n, seed));
}

double MvnMeanModel::prior_bound() const
{
  return std::exp(-0.5 * static_cast<double>(dim()) * kLog2Pi - 0.5 * log_det_);
}

LogJoint MvnMeanModel::log_joint(Dataset const &data) const
{
  require_dim(data, dim(), name());
  auto const d   = static_cast<Eigen::Index>(dim());
  double const n = static_cast<double>(data.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  if (!data.empty())
  {
    mean = data.sum() / n;
    for (std::size_t i = 0; i < data.size(); ++i)
    {
      auto const r = data.row(i);
      Eigen::VectorXd diff = Eigen::Map<Eigen::VectorXd const>(r.data(), d) - mean;
      scatter += diff * diff.transpose();
    }
  }
  double const c = -0.5 * n * (static_cast<double>(d) * kLog2Pi + log_det_) -
                   0.5 * (precision_ * scatter).trace();
  auto const pr = prior_;
  auto const P  = precision_;
  return [pr, P, mean, n, c, d](std::span<double const> theta) {
    Eigen::VectorXd diff = mean - Eigen::Map<Eigen::VectorXd const>(theta.data(), d);
    return pr.log_pdf(theta) + c - 0.5 * n * diff.dot(P * diff);
  };
}

//------------------------------------------------------------------------------
// Exponential rate
//------------------------------------------------------------------------------

ExponentialModel::ExponentialModel()
  : ExponentialModel(dist::make_uniform(0.0, 50.0))
{}

ExponentialModel::ExponentialModel(Density prior)
  : prior_(std::move(prior))
{
  if (!prior_ || prior_.dim() != 1)
  {
    throw Error("exponential: prior must be a 1-D density");
  }
  prior_support_ = prior_.support().front();
  if (prior_support_.lower < 0.0)
  {
    throw Error("exponential: prior must be supported on (0, inf)");
  }
  prior_max_ = 0.0;
  for (double x : numerics::probe_points(prior_support_, prior_.anchors()))
  {
    prior_max_ = std::max(prior_max_, prior_.pdf(x));
  }
  if (!std::isfinite(prior_max_))
  {
    throw Error("exponential: prior density must be bounded");
  }
}

double ExponentialModel::log_likelihood(Dataset const &data, std::span<double const> theta) const
{
  require_dim(data, 1, name());
  double const s = positive_sum(data);
  double const l = theta[0];
  if (!(l > 0.0))
  {
    return data.empty() ? 0.0 : -kInf;
  }
  return static_cast<double>(data.size()) * std::log(l) - l * s;
}

double ExponentialModel::log_likelihood_ratio(Dataset const &data, double theta,
                                              double theta_ref) const
{
  require_dim(data, 1, name());
  double const s = positive_sum(data);
  if (!(theta > 0.0) || !(theta_ref > 0.0))
  {
    throw Error("exponential: rate must be positive");
  }
  return static_cast<double>(data.size()) * std::log(theta / theta_ref) - (theta - theta_ref) * s;
}

Density ExponentialModel::exact_posterior(Dataset const &data) const
{
  require_dim(data, 1, name());
  if (data.empty())
  {
    return prior_;
  }
  double const s = positive_sum(data);
  double const n = static_cast<double>(data.size());
  auto const pr  = prior_;
  auto anchors   = prior_.anchors();
  double const mode =
      std::clamp(n / s, std::max(prior_support_.lower, 1e-300), prior_support_.upper);
  anchors.insert(anchors.begin(), numerics::Anchor{mode, std::sqrt(n) / s});
  Interval const support{std::max(prior_support_.lower, 0.0), prior_support_.upper};
  return dist::make_numeric(
      [pr, n, s](double l) {
        if (!(l > 0.0))
        {
          return -kInf;
        }
        return pr.log_pdf(l) + n * std::log(l) - l * s;
      },
      support, std::move(anchors), "exponential-posterior");
}

Eigen::VectorXd ExponentialModel::mle(Dataset const &data) const
{
  require_dim(data, 1, name());
  if (data.empty())
  {
    throw Error("exponential: MLE needs data");
  }
  Eigen::VectorXd out(1);
  out(0) = static_cast<double>(data.size()) / positive_sum(data);
  return out;
}

Eigen::MatrixXd ExponentialModel::fisher_matrix(std::span<double const> theta) const
{
  if (!(theta[0] > 0.0))
  {
    throw Error("exponential: rate must be positive");
  }
  return Eigen::MatrixXd::Constant(1, 1, 1.0 / (theta[0] * theta[0]));
}

Dataset ExponentialModel::simulate(std::span<double const> theta0, std::size_t n,
                                   std::uint64_t seed) const
{
  if (!(theta0[0] > 0.0))
  {
    throw Error("exponential: rate must be positive");
  }
  dist::Rng rng(seed);
  std::exponential_distribution<double> e(theta0[0]);
  Dataset d;
  d.values.resize(n);
  for (auto &x : d.values)
  {
    do
    {
      x = e(rng);
    } while (!(x > 0.0));
  }
  return d;
}

double ExponentialModel::prior_bound() const
{
  return prior_max_;
}

LogJoint ExponentialModel::log_joint(Dataset const &data) const
{
  require_dim(data, 1, name());
  double const s = positive_sum(data);
  double const n = static_cast<double>(data.size());
  auto const pr  = prior_;
  return [pr, n, s](std::span<double const> theta) {
    double const l = theta[0];
    if (!(l > 0.0))
    {
      return -kInf;
    }
    return pr.log_pdf(l) + n * std::log(l) - l * s;
  };
}

//------------------------------------------------------------------------------
// Factories
//------------------------------------------------------------------------------

std::shared_ptr<BayesModel> gaussian_mean_model(double mu0, double sigma)
{
  return std::make_shared<GaussianMeanModel>(mu0, sigma);
}

std::shared_ptr<BayesModel> mvn_mean_model(Eigen::VectorXd mu0, Eigen::MatrixXd sigma)
{
  return std::make_shared<MvnMeanModel>(std::move(mu0), std::move(sigma));
}

std::shared_ptr<BayesModel> exponential_model()
{
  return std::make_shared<ExponentialModel>();
}

std::shared_ptr<BayesModel> exponential_model(Density prior)
{
  return std::make_shared<ExponentialModel>(std::move(prior));
}

std::shared_ptr<BayesModel> model_from_json(nlohmann::json const &j)
{
  if (!j.is_object() || !j.contains("kind"))
  {
    throw Error("model description needs a 'kind' field");
  }
  auto const kind = j.at("kind").get<std::string>();
  auto allow      = [&](std::initializer_list<char const *> keys) {
    for (auto const &[k, v] : j.items())
    {
      if (k != "kind" &&
          std::none_of(keys.begin(), keys.end(), [&](char const *a) { return k == a; }))
      {
        throw Error("model '" + kind + "': unknown key '" + k + "'");
      }
    }
  };
  if (kind == "gaussian-mean")
  {
    allow({"mu0", "sigma"});
    return gaussian_mean_model(j.value("mu0", 0.0), j.value("sigma", 1.0));
  }
  if (kind == "mvn-mean")
  {
    allow({"mu0", "sigma"});
    auto const mu  = j.at("mu0").get<std::vector<double>>();
    auto const rows = j.at("sigma").get<std::vector<std::vector<double>>>();
    Eigen::VectorXd m = Eigen::Map<Eigen::VectorXd const>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    Eigen::MatrixXd s(m.size(), m.size());
    if (rows.size() != mu.size())
    {
      throw Error("mvn-mean: sigma must be " + std::to_string(mu.size()) + "x" +
                  std::to_string(mu.size()));
    }
    for (std::size_t r = 0; r < rows.size(); ++r)
    {
      if (rows[r].size() != mu.size())
      {
        throw Error("mvn-mean: sigma rows must match mu0 length");
      }
      for (std::size_t c = 0; c < rows[r].size(); ++c)
      {
        s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    return mvn_mean_model(m, s);
  }
  if (kind == "exponential")
  {
    allow({"prior"});
    if (j.contains("prior"))
    {
      return exponential_model(dist::from_json(j.at("prior")));
    }
    return exponential_model();
  }
  throw Error("unknown model kind '" + kind + "' (expected gaussian-mean, mvn-mean, exponential)");
}

//------------------------------------------------------------------------------
// Diagnostics
//------------------------------------------------------------------------------

double LanDiagnostic::max_residual() const
{
  double m = 0.0;
  for (double r : residuals)
  {
    m = std::max(m, r);
  }
  return m;
}

LanDiagnostic lan_residual(BayesModel const &model, double theta0, Dataset const &data,
                           double k_radius)
{
  if (!(k_radius >= 0.0))
  {
    throw Error("lan_residual: radius must be non-negative");
  }
  std::vector<double> grid(41);
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    grid[i] = -k_radius + 2.0 * k_radius * static_cast<double>(i) / 40.0;
  }
  return lan_residual(model, theta0, data, std::move(grid));
}

LanDiagnostic lan_residual(BayesModel const &model, double theta0, Dataset const &data,
                           std::vector<double> h_grid)
{
  if (model.dim() != 1)
  {
    throw Error("lan_residual: 1-D models only");
  }
  if (data.empty())
  {
    throw Error("lan_residual: needs data");
  }
  auto const support = model.parameter_support().front();
  LanDiagnostic out;
  out.theta0        = theta0;
  out.n             = data.size();
  double const rn   = std::sqrt(static_cast<double>(out.n));
  double const info = model.fisher_info(theta0);
  out.delta_n       = rn * (model.mle1(data) - theta0);
  for (double h : h_grid)
  {
    double const theta = theta0 + h / rn;
    if (!(theta > support.lower && theta < support.upper))
    {
      std::ostringstream msg;
      msg << "lan_residual: theta0 + h/sqrt(n) leaves the parameter space at h = " << h;
      throw Error(msg.str());
    }
    double const ratio = model.log_likelihood_ratio(data, theta, theta0);
    out.residuals.push_back(std::abs(ratio - h * info * out.delta_n + 0.5 * h * h * info));
  }
  out.h_grid = std::move(h_grid);
  return out;
}

double log_evidence_quadrature(BayesModel const &model, Dataset const &data)
{
  if (model.dim() != 1)
  {
    throw Error("log_evidence_quadrature: 1-D models only");
  }
  auto const joint = model.log_joint(data);
  auto const post  = model.exact_posterior(data);
  auto anchors     = post.anchors();
  auto const prior_anchors = model.prior().anchors();
  anchors.insert(anchors.end(), prior_anchors.begin(), prior_anchors.end());
  auto const li = numerics::log_integrate(
      [&joint](double t) { return joint(std::span<double const>(&t, 1)); },
      model.prior().support().front(), anchors, 1e-13);
  if (li.divergent)
  {
    throw Error("log_evidence_quadrature: integral diverges");
  }
  return li.log_value;
}

double prior_tail_mass(BayesModel const &model, double center, double radius)
{
  auto const &p = model.prior();
  return p.mass(Interval{-kInf, center - radius}) + p.mass(Interval{center + radius, kInf});
}

Dataset load_csv(std::string const &path, std::size_t dim)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error("cannot open data file '" + path + "'");
  }
  Dataset out;
  out.dim = dim;
  std::string line;
  std::size_t lineno = 0;
  bool seen_content  = false;
  while (std::getline(in, line))
  {
    ++lineno;
    auto const first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
    {
      continue;
    }
    std::vector<double> row;
    bool numeric = true;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
    {
      auto const b = cell.find_first_not_of(" \t\r");
      auto const e = cell.find_last_not_of(" \t\r");
      if (b == std::string::npos)
      {
        numeric = false;
        break;
      }
      double v    = 0.0;
      auto const *begin = cell.data() + b;
      auto const *end   = cell.data() + e + 1;
      auto const res    = std::from_chars(begin, end, v);
      if (res.ec != std::errc{} || res.ptr != end)
      {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric)
    {
      if (!seen_content)
      {
        seen_content = true;  // header
        continue;
      }
      throw Error(path + ":" + std::to_string(lineno) + ": non-numeric value");
    }
    seen_content = true;
    if (row.size() != dim)
    {
      throw Error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                  " columns, found " + std::to_string(row.size()));
    }
    out.values.insert(out.values.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace renyi::models
