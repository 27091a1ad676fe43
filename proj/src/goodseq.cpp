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

#include "renyi/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace renyi::goodseq {

namespace {

constexpr double kPi = std::numbers::pi;

models::GaussianMeanModel const *as_gaussian_mean(BayesModel const &m)
{
  return dynamic_cast<models::GaussianMeanModel const *>(&m);
}

models::MvnMeanModel const *as_mvn_mean(BayesModel const &m)
{
  return dynamic_cast<models::MvnMeanModel const *>(&m);
}

models::ExponentialModel const *as_exponential(BayesModel const &m)
{
  return dynamic_cast<models::ExponentialModel const *>(&m);
}

void require_model(GoodSequenceSpec const &spec)
{
  if (!spec.model)
  {
    throw Error("good sequence: no model bound");
  }
  if (!(spec.alpha > 1.0))
  {
    throw Error("good sequence: alpha must exceed 1");
  }
  auto const &m = *spec.model;
  bool ok       = false;
  switch (spec.family)
  {
  case Family::gaussian_meanfield:
    ok = as_gaussian_mean(m) || as_mvn_mean(m);
    break;
  case Family::laplace:
  case Family::logistic:
    ok = as_gaussian_mean(m) != nullptr;
    break;
  case Family::gamma:
    ok = as_exponential(m) != nullptr;
    break;
  }
  if (!ok)
  {
    throw Error("good sequence: family '" + to_string(spec.family) +
                "' cannot be paired with model '" + m.name() + "'");
  }
}

double posterior_location(models::GaussianMeanModel const &m, Dataset const &data)
{
  return (m.mu0() + data.sum()(0)) / (static_cast<double>(data.size()) + 1.0);
}

struct TailScan
{
  double sup_log = -kInf;
  bool divergent = false;
  std::vector<double> grid;
};

// Sup of log π − log q from `edge` outward to `far`, then geometrically beyond.
TailScan scan_tail(Density const &post, Density const &q, double edge, double far,
                   Interval support)
{
  TailScan out;
  double const dir = far >= edge ? 1.0 : -1.0;
  auto visit       = [&](double x) {
    double const lp = post.log_pdf(x);
    if (lp == -kInf)
    {
      return -kInf;
    }
    double const lq = q.log_pdf(x);
    if (lq == -kInf)
    {
      out.divergent = true;
      return kInf;
    }
    double const r = lp - lq;
    if (std::isnan(r))
    {
      throw Error("audit: ratio evaluation overflowed at x = " + std::to_string(x));
    }
    out.sup_log = std::max(out.sup_log, r);
    return r;
  };
  constexpr int kPoints = 1000;
  for (int i = 0; i < kPoints; ++i)
  {
    double const x = edge + (far - edge) * static_cast<double>(i) / (kPoints - 1);
    if (x > support.lower && x < support.upper)
    {
      out.grid.push_back(x);
      visit(x);
    }
  }
  // Limit behaviour: keep walking outward until the log ratio turns down.
  double const end = dir > 0.0 ? support.upper : support.lower;
  double const width = std::max(std::abs(far - edge), 1e-300);
  std::vector<double> tail;
  for (int j = 0; j < 60; ++j)
  {
    double x = 0.0;
    if (std::isfinite(end))
    {
      x = end - (end - far) * std::exp2(-static_cast<double>(j + 1));
    }
    else
    {
      x = far + dir * width * std::exp2(static_cast<double>(j));
    }
    if (!(x > support.lower && x < support.upper))
    {
      break;
    }
    double const r = visit(x);
    if (r > -kInf)
    {
      tail.push_back(r);
    }
  }
  if (tail.size() >= 3)
  {
    auto const n = tail.size();
    if (tail[n - 1] > tail[n - 2] && tail[n - 2] > tail[n - 3] && tail[n - 1] >= out.sup_log)
    {
      out.divergent = true;
    }
  }
  return out;
}

bool concave_on(Density const &q, std::vector<double> grid)
{
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    f[i] = q.log_pdf(grid[i]);
  }
  for (std::size_t i = 1; i + 1 < grid.size(); ++i)
  {
    if (!std::isfinite(f[i - 1]) || !std::isfinite(f[i]) || !std::isfinite(f[i + 1]))
    {
      continue;
    }
    double const w = (grid[i] - grid[i - 1]) / (grid[i + 1] - grid[i - 1]);
    double const chord = (1.0 - w) * f[i - 1] + w * f[i + 1];
    if (f[i] < chord - 1e-9 * (1.0 + std::abs(f[i])))
    {
      return false;
    }
  }
  return true;
}

}  // namespace

std::string to_string(Family f)
{
  switch (f)
  {
  case Family::gaussian_meanfield:
    return "gaussian-meanfield";
  case Family::laplace:
    return "laplace";
  case Family::logistic:
    return "logistic";
  case Family::gamma:
    return "gamma";
  }
  return "unknown";
}

Family family_from_string(std::string const &name)
{
  for (auto f : {Family::gaussian_meanfield, Family::laplace, Family::logistic, Family::gamma})
  {
    if (to_string(f) == name)
    {
      return f;
    }
  }
  throw Error("unknown good-sequence family '" + name +
              "' (expected gaussian-meanfield, laplace, logistic, gamma)");
}

double alpha_factor(double alpha)
{
  if (!(alpha > 1.0))
  {
    throw Error("alpha must exceed 1");
  }
  return std::pow(alpha, 1.0 / (alpha - 1.0));
}

double variance_scale(GoodSequenceSpec const &spec, Dataset const &data)
{
  require_model(spec);
  if (spec.variance_scale)
  {
    if (!(*spec.variance_scale > 0.0))
    {
      throw Error("good sequence: variance scale must be positive");
    }
    return *spec.variance_scale;
  }
  auto const &m  = *spec.model;
  double const a = alpha_factor(spec.alpha);
  switch (spec.family)
  {
  case Family::gaussian_meanfield:
    if (auto const *g = as_gaussian_mean(m))
    {
      return g->sigma() * g->sigma();
    }
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(as_mvn_mean(m)->sigma())
        .eigenvalues()
        .maxCoeff();
  case Family::laplace: {
    double const s = as_gaussian_mean(m)->sigma();
    return kPi * a * s * s;
  }
  case Family::logistic: {
    double const s = as_gaussian_mean(m)->sigma();
    return 2.0 * kPi * kPi * kPi * a * s * s / 3.0;
  }
  case Family::gamma: {
    if (data.empty())
    {
      throw Error("good sequence: gamma variance scale needs data");
    }
    double const l = m.mle1(data);
    return 2.0 * l * l;
  }
  }
  throw Error("good sequence: unknown family");
}

Density build_good_sequence(GoodSequenceSpec const &spec, Dataset const &data)
{
  require_model(spec);
  if (data.empty())
  {
    throw Error("good sequence: needs at least one observation");
  }
  double const n  = static_cast<double>(data.size());
  auto const &m   = *spec.model;
  double const mb = variance_scale(spec, data);
  switch (spec.family)
  {
  case Family::gaussian_meanfield: {
    if (auto const *g = as_gaussian_mean(m))
    {
      return dist::make_gaussian(posterior_location(*g, data), mb / n);
    }
    auto const *mv = as_mvn_mean(m);
    auto const post = mv->exact_posterior(data);
    auto const d    = static_cast<Eigen::Index>(mv->dim());
    return dist::make_gaussian(*post.mean(), Eigen::MatrixXd::Identity(d, d) * (mb / n));
  }
  case Family::laplace: {
    auto const *g = as_gaussian_mean(m);
    return dist::make_laplace(posterior_location(*g, data), std::sqrt(mb / (2.0 * n)));
  }
  case Family::logistic: {
    auto const *g = as_gaussian_mean(m);
    double const s = spec.variance_scale
                         ? std::sqrt(3.0 * mb / (kPi * kPi * (n + 1.0)))
                         : std::sqrt(2.0 * kPi * alpha_factor(spec.alpha) * g->sigma() *
                                     g->sigma() / (n + 1.0));
    return dist::make_logistic(posterior_location(*g, data), s);
  }
  case Family::gamma:
    return dist::make_gamma(n + 1.0, data.sum()(0));
  }
  throw Error("good sequence: unknown family");
}

std::optional<double> cited_ratio_bound(Family family, double alpha)
{
  double const a = alpha_factor(alpha);
  switch (family)
  {
  case Family::laplace:
    return std::sqrt(2.0 / a) * std::exp(0.5);
  case Family::logistic:
    return 2.0 * std::exp(1.0 / 16.0) / std::sqrt(a);
  default:
    return std::nullopt;
  }
}

nlohmann::json GoodSequenceAudit::to_json() const
{
  auto num = [](double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(v > 0 ? "inf" : "-inf");
  };
  nlohmann::json j;
  j["n"]              = n;
  j["mean"]           = mean;
  j["mle"]            = mle;
  j["mean_gap"]       = mean_gap;
  j["mean_allowance"] = mean_allowance;
  j["mean_is_mle"]    = mean_is_mle;
  j["variance"]       = variance;
  j["variance_cap"]   = variance_cap;
  j["rate_ok"]        = rate_ok;
  j["k"]              = {num(k.lower), num(k.upper)};
  j["ratio_sup"]      = num(ratio_sup);
  j["ratio_claim"]    = ratio_claim ? nlohmann::json(*ratio_claim) : nlohmann::json(nullptr);
  j["ratio_bound_ok"] = ratio_bound_ok ? nlohmann::json(*ratio_bound_ok) : nlohmann::json(nullptr);
  j["logconcave_ok"]  = logconcave_ok;
  j["entropy"]        = entropy;
  j["entropy_bound"]  = entropy_bound;
  j["entropy_ok"]     = entropy_ok;
  return j;
}

GoodSequenceAudit audit(GoodSequenceSpec const &spec, Dataset const &data, double theta0,
                        std::optional<Interval> k, std::optional<double> ratio_claim)
{
  require_model(spec);
  auto const &m = *spec.model;
  if (m.dim() != 1)
  {
    throw Error("audit: 1-D models only");
  }
  auto const q    = build_good_sequence(spec, data);
  auto const post = m.exact_posterior(data);
  auto const space = m.parameter_support().front();

  GoodSequenceAudit out;
  out.n        = data.size();
  double const n = static_cast<double>(out.n);
  out.mean     = q.mean1();
  out.mle      = m.mle1(data);
  out.mean_gap = std::abs(out.mean - out.mle);
  if (spec.family == Family::gamma)
  {
    out.mean_allowance = 2.0 / data.sum()(0);
  }
  else
  {
    auto const *g      = as_gaussian_mean(m);
    out.mean_allowance = std::abs(g->mu0() - out.mle) / (n + 1.0) + 1e-8;
  }
  out.mean_is_mle = out.mean_gap <= out.mean_allowance;

  double const mb  = variance_scale(spec, data);
  out.variance     = q.variance1();
  out.variance_cap = mb / n;
  out.rate_ok      = out.variance <= out.variance_cap * (1.0 + 1e-12);

  if (k)
  {
    out.k = *k;
  }
  else
  {
    double const r = 5.0 / std::sqrt(m.fisher_info(theta0));
    out.k          = Interval{std::max(theta0 - r, space.lower), std::min(theta0 + r, space.upper)};
  }
  if (!(out.k.lower <= theta0 && theta0 <= out.k.upper) || !out.k.bounded())
  {
    throw Error("audit: K must be a compact interval containing theta0");
  }

  double const lo_q = dist::quantile(post, 1e-10);
  double const hi_q = dist::quantile(post, 1.0 - 1e-10);
  double const kw   = out.k.upper - out.k.lower;
  std::vector<double> grid;
  out.ratio_sup    = 0.0;
  double sup_log   = -kInf;
  bool divergent   = false;
  if (out.k.upper < space.upper)
  {
    double const far = std::max(hi_q, out.k.upper + kw);
    auto const scan  = scan_tail(post, q, out.k.upper, far, space);
    sup_log          = std::max(sup_log, scan.sup_log);
    divergent        = divergent || scan.divergent;
    grid.insert(grid.end(), scan.grid.begin(), scan.grid.end());
  }
  if (out.k.lower > space.lower)
  {
    double far = std::min(lo_q, out.k.lower - kw);
    if (std::isfinite(space.lower))
    {
      far = std::max(far, 0.5 * (space.lower + out.k.lower));
    }
    auto const scan = scan_tail(post, q, out.k.lower, far, space);
    sup_log         = std::max(sup_log, scan.sup_log);
    divergent       = divergent || scan.divergent;
    grid.insert(grid.end(), scan.grid.begin(), scan.grid.end());
  }
  if (divergent)
  {
    out.ratio_sup = kInf;
  }
  else if (sup_log > -kInf)
  {
    out.ratio_sup = std::exp(sup_log);
  }
  out.ratio_claim = ratio_claim ? ratio_claim : cited_ratio_bound(spec.family, spec.alpha);
  if (out.ratio_claim)
  {
    out.ratio_bound_ok = out.ratio_sup <= *out.ratio_claim;
  }

  for (int i = 0; i <= 1000; ++i)
  {
    double const x = out.k.lower + kw * static_cast<double>(i) / 1000.0;
    if (x > space.lower && x < space.upper)
    {
      grid.push_back(x);
    }
  }
  out.logconcave_ok = concave_on(q, grid);

  out.entropy = -divergence::expectation(
      q, [&q](std::span<double const> x) { return q.log_pdf(x); });
  out.entropy_bound = 0.5 * std::log(2.0 * kPi * std::numbers::e * out.variance_cap);
  out.entropy_ok    = !(out.variance <= out.variance_cap) || out.entropy <= out.entropy_bound + 1e-9;
  return out;
}

nlohmann::json AuditSeries::to_json() const
{
  nlohmann::json j;
  j["audits"] = nlohmann::json::array();
  for (auto const &a : audits)
  {
    j["audits"].push_back(a.to_json());
  }
  nlohmann::json first;
  for (auto const &[name, n] : first_holding)
  {
    first[name] = n ? nlohmann::json(*n) : nlohmann::json(nullptr);
  }
  j["first_holding"] = first;
  j["rate_slope"]    = rate_slope;
  return j;
}

AuditSeries audit_series(GoodSequenceSpec const &spec, Dataset const &data, double theta0,
                         std::vector<std::size_t> const &ns, std::optional<double> ratio_claim)
{
  if (!std::is_sorted(ns.begin(), ns.end()))
  {
    throw Error("audit_series: n grid must be increasing");
  }
  AuditSeries out;
  for (auto n : ns)
  {
    out.audits.push_back(audit(spec, data.head(n), theta0, std::nullopt, ratio_claim));
  }
  auto record = [&](std::string const &name, auto pred) {
    std::optional<std::size_t> first;
    for (auto const &a : out.audits)
    {
      if (pred(a))
      {
        first = a.n;
        break;
      }
    }
    out.first_holding[name] = first;
  };
  record("mean_is_mle", [](auto const &a) { return a.mean_is_mle; });
  record("rate_ok", [](auto const &a) { return a.rate_ok; });
  record("ratio_bound_ok", [](auto const &a) { return a.ratio_bound_ok.value_or(false); });
  record("logconcave_ok", [](auto const &a) { return a.logconcave_ok; });
  record("entropy_ok", [](auto const &a) { return a.entropy_ok; });
  if (ns.size() >= 4)
  {
    std::vector<double> x, v;
    for (auto const &a : out.audits)
    {
      x.push_back(static_cast<double>(a.n));
      v.push_back(a.variance);
    }
    out.rate_slope = rate_estimate(x, v);
  }
  return out;
}

double rate_estimate(std::span<double const> ns, std::span<double const> variances)
{
  if (ns.size() != variances.size())
  {
    throw Error("rate_estimate: n grid and variances differ in length");
  }
  if (ns.size() < 4)
  {
    throw Error("rate_estimate: needs at least 4 grid points");
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ns.size(); ++i)
  {
    if (!(ns[i] > 0.0) || !(variances[i] > 0.0))
    {
      throw Error("rate_estimate: n and variances must be positive");
    }
    lx.push_back(std::log(ns[i]));
    ly.push_back(std::log(variances[i]));
  }
  return numerics::ols_slope(lx, ly);
}

double rate_estimate(std::span<double const> ns, std::span<Density const> densities)
{
  std::vector<double> v;
  for (auto const &d : densities)
  {
    v.push_back(d.variance1());
  }
  return rate_estimate(ns, v);
}

}  // namespace renyi::goodseq
