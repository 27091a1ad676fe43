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

#include "renyi/varfit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace renyi::varfit {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd target_mean(Density const &d)
{
  auto m = d.mean();
  if (!m)
  {
    throw Error("fit: target has no mean to start from");
  }
  return *m;
}

Eigen::MatrixXd target_cov(Density const &d)
{
  auto v = d.variance();
  if (!v)
  {
    throw Error("fit: target has no variance to start from");
  }
  return *v;
}

//------------------------------------------------------------------------------
// Families
//------------------------------------------------------------------------------

class GaussianFamily final : public VariationalFamily
{
public:
  std::string name() const override { return "gaussian"; }
  std::size_t dim() const override { return 1; }
  std::vector<ParamInfo> params() const override
  {
    return {{"mean", ParamKind::location}, {"sd", ParamKind::scale, 0.0, kInf}};
  }
  Density unpack(std::span<double const> t) const override
  {
    return dist::make_gaussian(t[0], t[1] * t[1]);
  }
  std::vector<double> moment_match(Density const &target) const override
  {
    return {target_mean(target)(0), std::sqrt(target_cov(target)(0, 0))};
  }
  bool reparameterizable() const override { return true; }
  void standard_noise(dist::Rng &rng, std::span<double> eps) const override
  {
    std::normal_distribution<double> n(0.0, 1.0);
    eps[0] = n(rng);
  }
  void transform(std::span<double const> t, std::span<double const> eps,
                 std::span<double> x) const override
  {
    x[0] = t[0] + t[1] * eps[0];
  }
};

class IsotropicGaussianFamily final : public VariationalFamily
{
public:
  std::string name() const override { return "isotropic-gaussian"; }
  std::size_t dim() const override { return 2; }
  std::vector<ParamInfo> params() const override
  {
    return {{"mean0", ParamKind::location},
            {"mean1", ParamKind::location},
            {"sd", ParamKind::scale, 0.0, kInf}};
  }
  Density unpack(std::span<double const> t) const override
  {
    return dist::make_gaussian(Eigen::Vector2d(t[0], t[1]),
                               Eigen::Matrix2d::Identity() * (t[2] * t[2]));
  }
  std::vector<double> moment_match(Density const &target) const override
  {
    auto const m = target_mean(target);
    auto const c = target_cov(target);
    if (m.size() != 2)
    {
      throw Error("isotropic-gaussian: target must be 2-D");
    }
    return {m(0), m(1), std::sqrt(c.trace() / 2.0)};
  }
  bool reparameterizable() const override { return true; }
  void standard_noise(dist::Rng &rng, std::span<double> eps) const override
  {
    std::normal_distribution<double> n(0.0, 1.0);
    eps[0] = n(rng);
    eps[1] = n(rng);
  }
  void transform(std::span<double const> t, std::span<double const> eps,
                 std::span<double> x) const override
  {
    x[0] = t[0] + t[2] * eps[0];
    x[1] = t[1] + t[2] * eps[1];
  }
};

double uniform_open(dist::Rng &rng)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double v = u(rng);
  while (v <= 0.0)
  {
    v = u(rng);
  }
  return v;
}

class LaplaceFamily final : public VariationalFamily
{
public:
  std::string name() const override { return "laplace"; }
  std::size_t dim() const override { return 1; }
  std::vector<ParamInfo> params() const override
  {
    return {{"location", ParamKind::location}, {"scale", ParamKind::scale, 0.0, kInf}};
  }
  Density unpack(std::span<double const> t) const override
  {
    return dist::make_laplace(t[0], t[1]);
  }
  std::vector<double> moment_match(Density const &target) const override
  {
    return {target_mean(target)(0), std::sqrt(target_cov(target)(0, 0) / 2.0)};
  }
  bool reparameterizable() const override { return true; }
  void standard_noise(dist::Rng &rng, std::span<double> eps) const override
  {
    double const u = uniform_open(rng) - 0.5;
    eps[0]         = -std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
  }
  void transform(std::span<double const> t, std::span<double const> eps,
                 std::span<double> x) const override
  {
    x[0] = t[0] + t[1] * eps[0];
  }
};

class LogisticFamily final : public VariationalFamily
{
public:
  std::string name() const override { return "logistic"; }
  std::size_t dim() const override { return 1; }
  std::vector<ParamInfo> params() const override
  {
    return {{"location", ParamKind::location}, {"scale", ParamKind::scale, 0.0, kInf}};
  }
  Density unpack(std::span<double const> t) const override
  {
    return dist::make_logistic(t[0], t[1]);
  }
  std::vector<double> moment_match(Density const &target) const override
  {
    return {target_mean(target)(0), std::sqrt(3.0 * target_cov(target)(0, 0)) / kPi};
  }
  bool reparameterizable() const override { return true; }
  void standard_noise(dist::Rng &rng, std::span<double> eps) const override
  {
    double const u = uniform_open(rng);
    eps[0]         = std::log(u) - std::log1p(-u);
  }
  void transform(std::span<double const> t, std::span<double const> eps,
                 std::span<double> x) const override
  {
    x[0] = t[0] + t[1] * eps[0];
  }
};

/// Gamma(shape, shape / mean), searched over (mean, shape).
class GammaFamily final : public VariationalFamily
{
public:
  std::string name() const override { return "gamma"; }
  std::size_t dim() const override { return 1; }
  std::vector<ParamInfo> params() const override
  {
    return {{"mean", ParamKind::scale, 0.0, kInf}, {"shape", ParamKind::scale, 0.0, kInf}};
  }
  Density unpack(std::span<double const> t) const override
  {
    return dist::make_gamma(t[1], t[1] / t[0]);
  }
  std::vector<double> moment_match(Density const &target) const override
  {
    double m        = target_mean(target)(0);
    double const sd = std::sqrt(target_cov(target)(0, 0));
    if (!(m > 0.0))
    {
      m = std::abs(m) + sd;
    }
    return {m, (m / sd) * (m / sd)};
  }
};

//------------------------------------------------------------------------------
// Deterministic search
//------------------------------------------------------------------------------

struct Search
{
  Target const &target;
  VariationalFamily const &family;
  FitOptions const &options;
  std::vector<ParamInfo> info;
  std::vector<TraceEntry> trace;
  std::size_t evaluations = 0;

  // Coordinates are searched in log space for scale parameters.
  std::vector<double> to_params(std::vector<double> const &z) const
  {
    std::vector<double> p(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
    {
      p[i] = info[i].kind == ParamKind::scale ? std::exp(z[i]) : z[i];
    }
    return p;
  }

  double value(std::vector<double> const &z)
  {
    ++evaluations;
    auto const p = to_params(z);
    if (!family.in_bounds(p))
    {
      return kInf;
    }
    for (double v : p)
    {
      if (!std::isfinite(v))
      {
        return kInf;
      }
    }
    auto const q = family.unpack(p);
    auto const e = evaluate_objective(target, q, options.kind, options.alpha, options.mc_draws,
                                      options.seed);
    return e.value;
  }

  void log(std::string phase, std::vector<double> const &z, double f)
  {
    trace.push_back(TraceEntry{trace.size(), std::move(phase), to_params(z), f, true});
  }
};

std::vector<std::size_t> decode(std::size_t flat, std::vector<std::size_t> const &sizes)
{
  std::vector<std::size_t> idx(sizes.size());
  for (std::size_t i = sizes.size(); i-- > 0;)
  {
    idx[i] = flat % sizes[i];
    flat /= sizes[i];
  }
  return idx;
}

// Golden-section search of f along coordinate i over [a, b].
std::pair<double, double> golden(Search &s, std::vector<double> z, std::size_t i, double a,
                                 double b, double tol)
{
  constexpr double kR = 0.6180339887498949;
  double c            = b - kR * (b - a);
  double d            = a + kR * (b - a);
  z[i]                = c;
  double fc           = s.value(z);
  z[i]                = d;
  double fd           = s.value(z);
  for (int it = 0; it < 200 && std::abs(b - a) > tol; ++it)
  {
    if (fc <= fd)
    {
      b  = d;
      d  = c;
      fd = fc;
      c  = b - kR * (b - a);
      z[i] = c;
      fc   = s.value(z);
    }
    else
    {
      a  = c;
      c  = d;
      fc = fd;
      d  = a + kR * (b - a);
      z[i] = d;
      fd   = s.value(z);
    }
  }
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace

//------------------------------------------------------------------------------
// Public API
//------------------------------------------------------------------------------

std::string to_string(ObjectiveKind k)
{
  switch (k)
  {
  case ObjectiveKind::renyi_alpha:
    return "renyi-alpha";
  case ObjectiveKind::kl_reverse:
    return "kl-reverse";
  case ObjectiveKind::kl_forward:
    return "kl-forward";
  case ObjectiveKind::mc_upper_bound:
    return "mc-upper-bound";
  }
  return "unknown";
}

ObjectiveKind objective_from_string(std::string const &name)
{
  for (auto k : {ObjectiveKind::renyi_alpha, ObjectiveKind::kl_reverse, ObjectiveKind::kl_forward,
                 ObjectiveKind::mc_upper_bound})
  {
    if (to_string(k) == name)
    {
      return k;
    }
  }
  throw Error("unknown objective '" + name +
              "' (expected renyi-alpha, kl-reverse, kl-forward, mc-upper-bound)");
}

void VariationalFamily::standard_noise(dist::Rng &, std::span<double>) const
{
  throw Error(name() + ": family is not location-scale");
}

void VariationalFamily::transform(std::span<double const>, std::span<double const>,
                                  std::span<double>) const
{
  throw Error(name() + ": family is not location-scale");
}

bool VariationalFamily::in_bounds(std::span<double const> theta) const
{
  auto const info = params();
  if (theta.size() != info.size())
  {
    return false;
  }
  for (std::size_t i = 0; i < info.size(); ++i)
  {
    if (!(theta[i] > info[i].lower && theta[i] < info[i].upper))
    {
      return false;
    }
  }
  return true;
}

std::shared_ptr<VariationalFamily const> make_family(std::string const &name)
{
  if (name == "gaussian")
  {
    return std::make_shared<GaussianFamily>();
  }
  if (name == "isotropic-gaussian")
  {
    return std::make_shared<IsotropicGaussianFamily>();
  }
  if (name == "laplace")
  {
    return std::make_shared<LaplaceFamily>();
  }
  if (name == "logistic")
  {
    return std::make_shared<LogisticFamily>();
  }
  if (name == "gamma")
  {
    return std::make_shared<GammaFamily>();
  }
  throw Error("unknown variational family '" + name +
              "' (expected gaussian, isotropic-gaussian, laplace, logistic, gamma)");
}

Target target_from_density(Density d)
{
  Target t;
  t.density   = d;
  t.log_joint = [d](std::span<double const> x) { return d.log_pdf(x); };
  return t;
}

Target target_from_model(models::BayesModel const &model, models::Dataset const &data)
{
  Target t;
  t.density      = model.exact_posterior(data);
  t.log_joint    = model.log_joint(data);
  t.log_evidence = model.dim() == 1 ? model.log_evidence(data) : 0.0;
  return t;
}

std::vector<TraceEntry> FitResult::accepted() const
{
  std::vector<TraceEntry> out;
  std::copy_if(trace.begin(), trace.end(), std::back_inserter(out),
               [](TraceEntry const &e) { return e.accepted; });
  return out;
}

nlohmann::json FitResult::to_json() const
{
  nlohmann::json j;
  nlohmann::json p;
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    p[param_names[i]] = params[i];
  }
  j["params"]         = p;
  j["density"]        = density ? density.describe() : nlohmann::json(nullptr);
  j["objective"]      = objective.to_json();
  j["objective_kind"] = to_string(kind);
  j["converged"]      = converged;
  j["evaluations"]    = evaluations;
  j["seed"]           = seed;
  auto const acc      = accepted();
  j["trace_summary"]  = {{"entries", trace.size()},
                         {"accepted", acc.size()},
                         {"first_objective", trace.empty() ? 0.0 : trace.front().objective},
                         {"last_objective", acc.empty() ? 0.0 : acc.back().objective}};
  j["config"]         = config;
  return j;
}

DivergenceEstimate evaluate_objective(Target const &target, Density const &q, ObjectiveKind kind,
                                      double alpha, std::size_t mc_draws, std::uint64_t seed)
{
  switch (kind)
  {
  case ObjectiveKind::renyi_alpha:
    return divergence::renyi(target.density, q, alpha);
  case ObjectiveKind::kl_forward:
    return divergence::kl_forward(target.density, q);
  case ObjectiveKind::kl_reverse:
    return divergence::kl_reverse(target.density, q);
  case ObjectiveKind::mc_upper_bound: {
    if (!dist::dominates(target.density, q))
    {
      return DivergenceEstimate{kInf, divergence::Method::monte_carlo, 0.0, alpha};
    }
    auto const b = divergence::mc_renyi_upper_bound(q, target.log_joint, alpha, mc_draws, seed);
    return DivergenceEstimate{b.value, divergence::Method::monte_carlo, b.std_error, alpha};
  }
  }
  throw Error("unknown objective kind");
}

FitResult fit(Target const &target, VariationalFamily const &family, FitOptions const &options)
{
  if (!target.density)
  {
    throw Error("fit: empty target");
  }
  if (family.dim() != target.density.dim())
  {
    throw Error("fit: family dimension " + std::to_string(family.dim()) +
                " does not match target dimension " + std::to_string(target.density.dim()));
  }
  if (options.kind != ObjectiveKind::kl_forward && options.kind != ObjectiveKind::kl_reverse &&
      !(options.alpha > 1.0))
  {
    throw Error("fit: alpha must exceed 1");
  }

  Search s{target, family, options, family.params(), {}, 0};
  auto const d     = s.info.size();
  auto const start = family.moment_match(target.density);

  // Spread of the location grid: the target's standard deviation per coordinate.
  auto const cov = target_cov(target.density);
  std::vector<std::vector<double>> axes(d);
  std::vector<double> spacing(d);
  std::size_t loc_coord = 0;
  for (std::size_t i = 0; i < d; ++i)
  {
    if (s.info[i].kind == ParamKind::scale)
    {
      double const c = std::log(start[i]);
      spacing[i]     = std::log(64.0) / 12.0;
      for (int k = 0; k < 13; ++k)
      {
        axes[i].push_back(c - std::log(8.0) + spacing[i] * k);
      }
    }
    else
    {
      auto const cc  = static_cast<Eigen::Index>(std::min<std::size_t>(loc_coord, cov.rows() - 1));
      double const sd = std::sqrt(cov(cc, cc));
      spacing[i]      = sd;
      for (int k = -4; k <= 4; ++k)
      {
        axes[i].push_back(start[i] + sd * k);
      }
      ++loc_coord;
    }
  }

  // Full tensor grid, last coordinate fastest; strict < keeps the lowest index.
  std::vector<double> best_z(d);
  double best = kInf;
  std::vector<std::size_t> sizes(d);
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i)
  {
    sizes[i] = axes[i].size();
    total *= sizes[i];
  }
  for (std::size_t flat = 0; flat < total; ++flat)
  {
    auto const idx = decode(flat, sizes);
    std::vector<double> z(d);
    for (std::size_t i = 0; i < d; ++i)
    {
      z[i] = axes[i][idx[i]];
    }
    double const f = s.value(z);
    if (f < best)
    {
      best   = f;
      best_z = z;
    }
  }
  if (!(best < kInf))
  {
    throw DominanceError("family cannot dominate target: objective '" + to_string(options.kind) +
                         "' is infinite over the whole initial grid for family '" +
                         family.name() + "'");
  }
  s.log("grid", best_z, best);

  // Coordinate golden-section sweeps inside a shrinking trust box.
  std::vector<double> step = spacing;
  bool converged           = false;
  double last_gain         = kInf;
  for (int sweep = 0; sweep < 200 && s.evaluations < options.budget; ++sweep)
  {
    double const before = best;
    for (std::size_t i = 0; i < d; ++i)
    {
      double const tol = 1e-10 * std::max(1.0, std::abs(best_z[i])) +
                         (s.info[i].kind == ParamKind::scale ? 1e-12 : 1e-10 * spacing[i]);
      auto const [zi, fi] = golden(s, best_z, i, best_z[i] - step[i], best_z[i] + step[i], tol);
      double const moved  = std::abs(zi - best_z[i]);
      if (fi < best)
      {
        best      = fi;
        best_z[i] = zi;
      }
      step[i] = std::max({2.0 * moved, 0.25 * step[i], 1e-9 * spacing[i]});
    }
    last_gain = before - best;
    s.log("sweep", best_z, best);

    if (last_gain < 1e-8)
    {
      // Final stencil over ±step; any improvement restarts the sweeps.
      std::vector<double> stencil_best = best_z;
      double stencil_f                 = best;
      std::vector<std::size_t> const three(d, 3);
      std::size_t cells = 1;
      for (std::size_t i = 0; i < d; ++i)
      {
        cells *= 3;
      }
      for (std::size_t flat = 0; flat < cells; ++flat)
      {
        auto const off = decode(flat, three);
        std::vector<double> zz = best_z;
        bool centre            = true;
        for (std::size_t i = 0; i < d; ++i)
        {
          zz[i] += (static_cast<double>(off[i]) - 1.0) * step[i];
          centre = centre && off[i] == 1;
        }
        if (centre)
        {
          continue;
        }
        double const f = s.value(zz);
        if (f < stencil_f)
        {
          stencil_f    = f;
          stencil_best = zz;
        }
      }
      if (stencil_f < best)
      {
        last_gain = best - stencil_f;
        best      = stencil_f;
        best_z    = stencil_best;
        s.log("stencil", best_z, best);
        continue;
      }
      converged = true;
      break;
    }
  }

  FitResult out;
  out.params = s.to_params(best_z);
  for (auto const &p : s.info)
  {
    out.param_names.push_back(p.name);
  }
  out.density = family.unpack(out.params);
  out.objective =
      evaluate_objective(target, out.density, options.kind, options.alpha, options.mc_draws,
                         options.seed);
  out.kind        = options.kind;
  out.trace       = std::move(s.trace);
  out.converged   = converged;
  out.evaluations = s.evaluations;
  out.seed        = options.seed;
  out.config      = {{"family", family.name()},
                     {"objective_kind", to_string(options.kind)},
                     {"alpha", options.alpha},
                     {"budget", options.budget},
                     {"mc_draws", options.mc_draws},
                     {"seed", options.seed},
                     {"target", target.density.describe()}};
  return out;
}

FitResult fit_stochastic(Target const &target, VariationalFamily const &family,
                         StochasticOptions const &options)
{
  if (!family.reparameterizable())
  {
    throw Error("fit_stochastic: family '" + family.name() + "' is not location-scale");
  }
  if (!(options.alpha > 1.0))
  {
    throw Error("fit_stochastic: alpha must exceed 1");
  }
  if (options.batch < 2 || options.validation < 2)
  {
    throw Error("fit_stochastic: batch sizes must be at least 2");
  }
  if (!target.log_joint)
  {
    throw Error("fit_stochastic: target needs a joint log-density");
  }
  auto const info = family.params();
  auto const d    = info.size();
  auto const xdim = family.dim();
  auto const start = family.moment_match(target.density);

  // Whitened coordinates: location (θ − θ₀)/s₀, scale log(θ/θ₀).
  double s0 = 1.0;
  for (std::size_t i = 0; i < d; ++i)
  {
    if (info[i].kind == ParamKind::scale)
    {
      s0 = start[i];
    }
  }
  auto to_params = [&](std::vector<double> const &u) {
    std::vector<double> p(d);
    for (std::size_t i = 0; i < d; ++i)
    {
      p[i] = info[i].kind == ParamKind::scale ? start[i] * std::exp(u[i]) : start[i] + s0 * u[i];
    }
    return p;
  };

  dist::Rng rng(options.seed);
  auto draw_noise = [&](std::size_t count) {
    std::vector<double> eps(count * xdim);
    for (std::size_t k = 0; k < count; ++k)
    {
      family.standard_noise(rng, std::span<double>(eps).subspan(k * xdim, xdim));
    }
    return eps;
  };
  double const alpha = options.alpha;
  auto surrogate = [&](std::vector<double> const &u, std::vector<double> const &eps) {
    auto const p = to_params(u);
    if (!family.in_bounds(p))
    {
      return kInf;
    }
    auto const q      = family.unpack(p);
    std::size_t count = eps.size() / xdim;
    std::vector<double> lw(count);
    std::vector<double> x(xdim);
    for (std::size_t k = 0; k < count; ++k)
    {
      family.transform(p, std::span<double const>(eps).subspan(k * xdim, xdim), x);
      double const lj = target.log_joint(x);
      double const lq = q.log_pdf(std::span<double const>(x));
      lw[k]           = lj == -kInf ? -kInf : alpha * (lj - lq);
    }
    double const lse = numerics::log_sum_exp(lw);
    if (lse == -kInf)
    {
      return kInf;
    }
    return (lse - std::log(static_cast<double>(count))) / alpha;
  };

  auto const validation = draw_noise(options.validation);
  std::vector<double> u(d, 0.0);
  double current       = surrogate(u, validation);
  double const initial = current;
  if (!std::isfinite(initial))
  {
    throw DominanceError("fit_stochastic: the starting member gives an infinite bound");
  }
  std::vector<TraceEntry> trace;
  trace.push_back(TraceEntry{0, "start", to_params(u), current, true});

  for (std::size_t t = 1; t <= options.steps; ++t)
  {
    auto const eps = draw_noise(options.batch);
    std::vector<double> grad(d);
    for (std::size_t i = 0; i < d; ++i)
    {
      auto up = u;
      auto dn = u;
      up[i] += options.fd_step;
      dn[i] -= options.fd_step;
      double const fu = surrogate(up, eps);
      double const fd = surrogate(dn, eps);
      grad[i]         = (std::isfinite(fu) && std::isfinite(fd)) ? (fu - fd) / (2.0 * options.fd_step)
                                                                 : 0.0;
    }
    double const eta = options.step_size / (1.0 + static_cast<double>(t) / options.decay);
    auto proposal    = u;
    for (std::size_t i = 0; i < d; ++i)
    {
      proposal[i] -= eta * std::clamp(grad[i], -10.0, 10.0);
    }
    double const f = surrogate(proposal, validation);
    if (f > initial + 1e3)
    {
      trace.push_back(TraceEntry{t, "step", to_params(proposal), f, false});
      throw DivergentTrajectoryError("fit_stochastic: trajectory diverged at step " +
                                         std::to_string(t),
                                     std::move(trace));
    }
    bool const accept = f <= current;
    if (accept)
    {
      u       = proposal;
      current = f;
    }
    trace.push_back(TraceEntry{t, "step", to_params(accept ? u : proposal), f, accept});
  }

  FitResult out;
  out.params = to_params(u);
  for (auto const &p : info)
  {
    out.param_names.push_back(p.name);
  }
  out.density = family.unpack(out.params);
  out.objective = divergence::renyi(target.density, out.density, alpha);
  out.kind      = ObjectiveKind::mc_upper_bound;
  out.trace     = std::move(trace);
  out.converged = true;
  out.evaluations = options.steps * (2 * d + 1);
  out.seed        = options.seed;
  out.config      = {{"family", family.name()},
                     {"objective_kind", "mc-upper-bound"},
                     {"alpha", alpha},
                     {"steps", options.steps},
                     {"batch", options.batch},
                     {"step_size", options.step_size},
                     {"decay", options.decay},
                     {"fd_step", options.fd_step},
                     {"validation", options.validation},
                     {"seed", options.seed},
                     {"target", target.density.describe()}};
  return out;
}

}  // namespace renyi::varfit
