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

#include "renyi/divergence.hpp"
#include "renyi/models.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace renyi::varfit {

using dist::Density;
using divergence::DivergenceEstimate;

/// The family cannot place mass everywhere the target does.
class DominanceError : public Error
{
public:
  using Error::Error;
};

struct TraceEntry
{
  std::size_t iteration = 0;
  std::string phase;
  std::vector<double> params;
  double objective = 0.0;
  bool accepted    = true;
};

/// Raised when a stochastic run blows up; carries the trace so far.
class DivergentTrajectoryError : public Error
{
public:
  DivergentTrajectoryError(std::string const &what, std::vector<TraceEntry> trace)
    : Error(what)
    , trace_(std::move(trace))
  {}
  std::vector<TraceEntry> const &trace() const { return trace_; }

private:
  std::vector<TraceEntry> trace_;
};

enum class ObjectiveKind
{
  renyi_alpha,
  kl_reverse,
  kl_forward,
  mc_upper_bound
};

std::string to_string(ObjectiveKind k);
ObjectiveKind objective_from_string(std::string const &name);

enum class ParamKind
{
  location,
  scale
};

struct ParamInfo
{
  std::string name;
  ParamKind kind = ParamKind::location;
  double lower   = -kInf;
  double upper   = kInf;
};

/// A parametric map from parameter vectors to densities.
class VariationalFamily
{
public:
  virtual ~VariationalFamily() = default;

  virtual std::string name() const = 0;
  /// Dimension of the densities produced.
  virtual std::size_t dim() const             = 0;
  virtual std::vector<ParamInfo> params() const = 0;
  virtual Density unpack(std::span<double const> theta) const = 0;
  /// Parameters whose member matches the target's first two moments.
  virtual std::vector<double> moment_match(Density const &target) const = 0;

  /// Location-scale families can draw x = T(θ, ε) from parameter-free noise.
  virtual bool reparameterizable() const { return false; }
  virtual void standard_noise(dist::Rng &rng, std::span<double> eps) const;
  virtual void transform(std::span<double const> theta, std::span<double const> eps,
                         std::span<double> x) const;

  std::size_t param_dim() const { return params().size(); }
  bool in_bounds(std::span<double const> theta) const;
};

/// gaussian, isotropic-gaussian, laplace, logistic or gamma.
std::shared_ptr<VariationalFamily const> make_family(std::string const &name);

/// What a fit approximates: a density, with the joint log-density when known.
struct Target
{
  Density density;
  models::LogJoint log_joint;
  /// log p(X) when known; 0 for a normalised density.
  double log_evidence = 0.0;
};

Target target_from_density(Density d);
Target target_from_model(models::BayesModel const &model, models::Dataset const &data);

struct FitOptions
{
  ObjectiveKind kind = ObjectiveKind::renyi_alpha;
  double alpha       = 2.0;
  /// Maximum number of objective evaluations.
  std::size_t budget = 20000;
  std::uint64_t seed = 0;
  /// Draws for the mc-upper-bound surrogate.
  std::size_t mc_draws = 4096;
};

struct StochasticOptions
{
  double alpha        = 2.0;
  std::size_t steps   = 2000;
  std::size_t batch   = 256;
  /// η_t = step_size / (1 + t / decay), in whitened coordinates.
  double step_size    = 0.2;
  double decay        = 500.0;
  double fd_step      = 1e-3;
  std::size_t validation = 8192;
  std::uint64_t seed  = 0;
};

struct FitResult
{
  std::vector<double> params;
  std::vector<std::string> param_names;
  Density density;
  DivergenceEstimate objective;
  ObjectiveKind kind = ObjectiveKind::renyi_alpha;
  std::vector<TraceEntry> trace;
  bool converged          = false;
  std::size_t evaluations = 0;
  std::uint64_t seed      = 0;
  nlohmann::json config;

  /// Accepted entries only, in order.
  std::vector<TraceEntry> accepted() const;
  nlohmann::json to_json() const;
};

/// The objective of `kind` at member q (α is ignored for KL kinds).
DivergenceEstimate evaluate_objective(Target const &target, Density const &q, ObjectiveKind kind,
                                      double alpha, std::size_t mc_draws = 4096,
                                      std::uint64_t seed = 0);

/**
 * Deterministic minimisation: a 9-point location grid per location parameter
 * times a 13-point log grid over [s/8, 8s] per scale parameter around the
 * moment-matched start, then coordinate golden-section sweeps and a final
 * 3^d stencil. Lowest grid index wins ties. Throws DominanceError when the
 * objective is infinite over the whole grid.
 */
FitResult fit(Target const &target, VariationalFamily const &family, FitOptions const &options);

/**
 * Minimises the Monte-Carlo Rényi upper bound with central finite-difference
 * gradients under common random numbers. A step is kept only if the bound on
 * a fixed validation batch does not increase. The final member is re-scored
 * with the exact Rényi divergence.
 */
FitResult fit_stochastic(Target const &target, VariationalFamily const &family,
                         StochasticOptions const &options);

}  // namespace renyi::varfit
