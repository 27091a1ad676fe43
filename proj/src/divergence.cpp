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

#include <algorithm>
#include <cmath>

namespace renyi::divergence {

namespace {

using numerics::Anchor;
using numerics::LogIntegral;

// Panels further than this below the peak of the log weight are dropped.
constexpr double kPruneNats = 230.0;

void require_alpha(double alpha)
{
  if (!(alpha > 1.0) || !std::isfinite(alpha))
  {
    throw Error("Renyi divergence needs alpha > 1 (use KL for the alpha -> 1 limit)");
  }
}

void require_pair(Density const &p, Density const &q)
{
  if (!p || !q)
  {
    throw Error("divergence: empty density");
  }
  if (p.dim() != q.dim())
  {
    throw Error("divergence: densities have different dimensions");
  }
  if (p.dim() > 2)
  {
    throw Error("divergence: quadrature supports dim <= 2");
  }
}

std::vector<Anchor> merged(std::vector<Anchor> a, std::vector<Anchor> const &b)
{
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

/**
 * ∫ h over `domain`, where exp(log_mag) bounds |h| up to a slowly varying
 * factor. Probes of log_mag pick the window that carries the integral.
 */
double integrate_pruned(numerics::ScalarFn const &h, numerics::ScalarFn const &log_mag,
                        Interval domain, std::vector<Anchor> const &anchors)
{
  auto const probes = numerics::probe_points(domain, anchors);
  if (probes.empty())
  {
    return 0.0;
  }
  std::vector<double> mags(probes.size());
  double peak = -kInf;
  for (std::size_t i = 0; i < probes.size(); ++i)
  {
    mags[i] = log_mag(probes[i]);
    peak    = std::max(peak, mags[i]);
  }
  if (peak == -kInf)
  {
    return 0.0;
  }
  std::size_t first = probes.size();
  std::size_t last  = 0;
  for (std::size_t i = 0; i < probes.size(); ++i)
  {
    if (mags[i] > peak - kPruneNats)
    {
      first = std::min(first, i);
      last  = std::max(last, i);
    }
  }
  Interval window = domain;
  if (first > 0)
  {
    window.lower = probes[first - 1];
  }
  if (last + 1 < probes.size())
  {
    window.upper = probes[last + 1];
  }
  std::vector<double> breaks(probes.begin() + static_cast<std::ptrdiff_t>(first),
                             probes.begin() + static_cast<std::ptrdiff_t>(last + 1));
  double const tail_scale = anchors.front().scale;
  auto const r = numerics::integrate_partitioned(h, window, std::move(breaks), tail_scale, 1e-11,
                                                 1e-15, 20000);
  return r.value;
}

DivergenceEstimate infinite(Method m, std::optional<double> alpha)
{
  return DivergenceEstimate{kInf, m, 0.0, alpha};
}

}  // namespace

std::string to_string(Method m)
{
  switch (m)
  {
  case Method::closed_form:
    return "closed-form";
  case Method::quadrature:
    return "quadrature";
  case Method::monte_carlo:
    return "monte-carlo";
  }
  return "unknown";
}

nlohmann::json DivergenceEstimate::to_json() const
{
  nlohmann::json j;
  j["value"]  = finite() ? nlohmann::json(value) : nlohmann::json("inf");
  j["method"] = to_string(method);
  j["error"]  = error;
  j["alpha"]  = alpha ? nlohmann::json(*alpha) : nlohmann::json("kl");
  return j;
}

//------------------------------------------------------------------------------
// Rényi
//------------------------------------------------------------------------------

LogIntegral log_renyi_integral(Density const &p, Density const &q, double alpha, double rel_tol)
{
  require_pair(p, q);
  if (!dist::dominates(p, q))
  {
    LogIntegral out;
    out.log_value = kInf;
    out.divergent = true;
    return out;
  }
  auto const combine = [alpha](double lp, double lq) {
    if (lp == -kInf)
    {
      return -kInf;
    }
    if (lq == -kInf)
    {
      return kInf;
    }
    return alpha * lp + (1.0 - alpha) * lq;
  };

  auto const sp = p.support();
  if (p.dim() == 1)
  {
    return numerics::log_integrate(
        [&](double x) { return combine(p.log_pdf(x), q.log_pdf(x)); }, sp[0],
        merged(p.anchors(0), q.anchors(0)), rel_tol);
  }

  auto const inner = [&](double x0) {
    auto const anchors = merged(p.conditional_anchors(x0), q.conditional_anchors(x0));
    auto const li      = numerics::log_integrate(
        [&](double x1) {
          double const pt[2] = {x0, x1};
          return combine(p.log_pdf(std::span<double const>(pt, 2)),
                         q.log_pdf(std::span<double const>(pt, 2)));
        },
        sp[1], anchors, rel_tol * 0.1);
    return li.divergent ? kInf : li.log_value;
  };
  return numerics::log_integrate(inner, sp[0], merged(p.anchors(0), q.anchors(0)), rel_tol);
}

DivergenceEstimate renyi_quadrature(Density const &p, Density const &q, double alpha,
                                    double rel_tol)
{
  require_alpha(alpha);
  auto const li = log_renyi_integral(p, q, alpha, rel_tol);
  if (li.divergent || li.log_value == kInf)
  {
    return infinite(Method::quadrature, alpha);
  }
  DivergenceEstimate out;
  out.value  = li.log_value / (alpha - 1.0);
  out.method = Method::quadrature;
  out.error  = li.rel_error / (alpha - 1.0);
  out.alpha  = alpha;
  return out;
}

DivergenceEstimate renyi_gauss_closed(Density const &p, Density const &q, double alpha)
{
  require_alpha(alpha);
  auto const *gp = dist::as_gaussian(p);
  auto const *gq = dist::as_gaussian(q);
  if (!gp || !gq)
  {
    throw Error("renyi_gauss_closed: both densities must be Gaussian");
  }
  if (gp->dim() != gq->dim())
  {
    throw Error("renyi_gauss_closed: dimension mismatch");
  }
  Eigen::MatrixXd const star = alpha * gq->cov() + (1.0 - alpha) * gp->cov();
  Eigen::LLT<Eigen::MatrixXd> llt(star);
  if (llt.info() != Eigen::Success)
  {
    return infinite(Method::closed_form, alpha);
  }
  Eigen::MatrixXd const l = llt.matrixL();
  if (!(l.diagonal().array() > 0.0).all() || !l.allFinite())
  {
    return infinite(Method::closed_form, alpha);
  }
  double const log_det_star = 2.0 * l.diagonal().array().log().sum();
  Eigen::VectorXd const delta = gp->mu() - gq->mu();
  double const quad           = delta.dot(llt.solve(delta));
  double const value =
      0.5 * alpha * quad -
      (log_det_star - (1.0 - alpha) * gp->log_det() - alpha * gq->log_det()) / (2.0 * (alpha - 1.0));
  return DivergenceEstimate{value, Method::closed_form, 0.0, alpha};
}

DivergenceEstimate renyi(Density const &p, Density const &q, double alpha)
{
  if (dist::as_gaussian(p) && dist::as_gaussian(q))
  {
    return renyi_gauss_closed(p, q, alpha);
  }
  return renyi_quadrature(p, q, alpha);
}

//------------------------------------------------------------------------------
// KL
//------------------------------------------------------------------------------

DivergenceEstimate kl_gauss_closed(Density const &p, Density const &q)
{
  auto const *gp = dist::as_gaussian(p);
  auto const *gq = dist::as_gaussian(q);
  if (!gp || !gq)
  {
    throw Error("kl_gauss_closed: both densities must be Gaussian");
  }
  if (gp->dim() != gq->dim())
  {
    throw Error("kl_gauss_closed: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> lq(gq->cov());
  Eigen::VectorXd const delta = gp->mu() - gq->mu();
  double const trace          = lq.solve(gp->cov()).trace();
  double const quad           = delta.dot(lq.solve(delta));
  double const d              = static_cast<double>(gp->dim());
  double const value          = 0.5 * (trace + quad - d + gq->log_det() - gp->log_det());
  return DivergenceEstimate{std::max(value, 0.0), Method::closed_form, 0.0, std::nullopt};
}

double expectation(Density const &p, std::function<double(std::span<double const>)> const &f)
{
  if (p.dim() > 2)
  {
    throw Error("expectation: dim <= 2 only");
  }
  auto const sp = p.support();
  if (p.dim() == 1)
  {
    return integrate_pruned(
        [&](double x) {
          double const lp = p.log_pdf(x);
          return lp == -kInf ? 0.0 : std::exp(lp) * f(std::span<double const>(&x, 1));
        },
        [&](double x) { return p.log_pdf(x); }, sp[0], p.anchors(0));
  }
  auto const row = [&p](double x0) {
    return std::function<double(double)>([&p, x0](double x1) {
      double const pt[2] = {x0, x1};
      return p.log_pdf(std::span<double const>(pt, 2));
    });
  };
  auto const log_marginal = [&](double x0) {
    auto const li = numerics::log_integrate(row(x0), sp[1], p.conditional_anchors(x0), 1e-8);
    return li.log_value;
  };
  auto const outer = [&](double x0) {
    auto const lrow = row(x0);
    return integrate_pruned(
        [&](double x1) {
          double const lp = lrow(x1);
          double const pt[2] = {x0, x1};
          return lp == -kInf ? 0.0 : std::exp(lp) * f(std::span<double const>(pt, 2));
        },
        lrow, sp[1], p.conditional_anchors(x0));
  };
  return integrate_pruned(outer, log_marginal, sp[0], p.anchors(0));
}

DivergenceEstimate kl_forward(Density const &p, Density const &q)
{
  require_pair(p, q);
  if (dist::as_gaussian(p) && dist::as_gaussian(q))
  {
    return kl_gauss_closed(p, q);
  }
  if (!dist::dominates(p, q))
  {
    return infinite(Method::quadrature, std::nullopt);
  }
  bool blown      = false;
  double const kl = expectation(p, [&](std::span<double const> x) {
    double const lp = p.log_pdf(x);
    double const lq = q.log_pdf(x);
    if (lq == -kInf)
    {
      blown = true;
      return 0.0;
    }
    return lp - lq;
  });
  if (blown)
  {
    return infinite(Method::quadrature, std::nullopt);
  }
  return DivergenceEstimate{std::max(kl, 0.0), Method::quadrature, 1e-10 * (1.0 + std::abs(kl)),
                            std::nullopt};
}

DivergenceEstimate kl_reverse(Density const &p, Density const &q)
{
  return kl_forward(q, p);
}

//------------------------------------------------------------------------------
// Bounds
//------------------------------------------------------------------------------

McBound mc_renyi_upper_bound(Density const &q,
                             std::function<double(std::span<double const>)> const &log_joint,
                             double alpha, std::size_t draws, std::uint64_t seed)
{
  require_alpha(alpha);
  if (draws < 2)
  {
    throw Error("mc_renyi_upper_bound: needs at least 2 draws");
  }
  auto const theta = q.sample(draws, seed);
  auto const d     = static_cast<std::size_t>(theta.cols());
  std::vector<double> lw(draws);
  std::vector<double> point(d);
  for (std::size_t s = 0; s < draws; ++s)
  {
    for (std::size_t c = 0; c < d; ++c)
    {
      point[c] = theta(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(c));
    }
    double const lj = log_joint(point);
    double const lq = q.log_pdf(point);
    lw[s]           = lj == -kInf ? -kInf : alpha * (lj - lq);
  }
  double const lse = numerics::log_sum_exp(lw);
  if (lse == -kInf)
  {
    throw Error("mc_renyi_upper_bound: every importance weight is zero (q misses the joint's "
                "support)");
  }
  double const n = static_cast<double>(draws);
  McBound out;
  out.draws = draws;
  out.value = (lse - std::log(n)) / alpha;

  // Delta method on log of the mean weight, computed on weights scaled by the max.
  double const peak = *std::max_element(lw.begin(), lw.end());
  double mean       = 0.0;
  for (double v : lw)
  {
    mean += std::exp(v - peak);
  }
  mean /= n;
  double var = 0.0;
  for (double v : lw)
  {
    double const u = std::exp(v - peak) - mean;
    var += u * u;
  }
  var /= (n - 1.0);
  out.std_error = std::sqrt(var / n) / mean / alpha;
  return out;
}

double holder_lower_bound(Density const &p, Density const &q, double alpha, Interval k)
{
  require_alpha(alpha);
  if (p.dim() != 1 || q.dim() != 1)
  {
    throw Error("holder_lower_bound: 1-D only");
  }
  double const mp = p.mass(k);
  double const mq = q.mass(k);
  if (!(mq > 0.0))
  {
    return mp > 0.0 ? kInf : 0.0;
  }
  if (!(mp > 0.0))
  {
    return 0.0;
  }
  return std::exp(alpha * std::log(mp) - (alpha - 1.0) * std::log(mq));
}

}  // namespace renyi::divergence
