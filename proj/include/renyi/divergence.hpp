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

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

namespace renyi::divergence {

using dist::Density;
using numerics::Interval;

enum class Method
{
  closed_form,
  quadrature,
  monte_carlo
};

std::string to_string(Method m);

/// A divergence value in [0, ∞]; `alpha` is empty for KL.
struct DivergenceEstimate
{
  double value = 0.0;
  Method method = Method::closed_form;
  double error  = 0.0;
  std::optional<double> alpha;

  bool finite() const { return value < kInf; }
  nlohmann::json to_json() const;
};

/// log ∫ q (p/q)^α; +∞ when p is not dominated by q. Works for dim ≤ 2.
numerics::LogIntegral log_renyi_integral(Density const &p, Density const &q, double alpha,
                                         double rel_tol = 1e-10);

/// D_α(p‖q) = log ∫ q (p/q)^α / (α − 1) by quadrature. Throws for α ≤ 1.
DivergenceEstimate renyi_quadrature(Density const &p, Density const &q, double alpha,
                                    double rel_tol = 1e-10);

/// Gaussian closed form; ∞ when αΣ_q + (1 − α)Σ_p is not positive definite.
DivergenceEstimate renyi_gauss_closed(Density const &p, Density const &q, double alpha);

/// Closed form for Gaussian pairs, quadrature otherwise.
DivergenceEstimate renyi(Density const &p, Density const &q, double alpha);

DivergenceEstimate kl_gauss_closed(Density const &p, Density const &q);
/// KL(p‖q).
DivergenceEstimate kl_forward(Density const &p, Density const &q);
/// KL(q‖p): the approximation `q` measured against the target `p`.
DivergenceEstimate kl_reverse(Density const &p, Density const &q);

/// ∫ p(x) f(x) dx over the support of p (dim ≤ 2). f may be sign-indefinite.
double expectation(Density const &p, std::function<double(std::span<double const>)> const &f);

struct McBound
{
  double value     = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
};

/**
 * (1/α) log( (1/S) Σ_s (p(θ_s, X)/q(θ_s))^α ) with θ_s ~ q. The population
 * value is log p(X) + ((α − 1)/α) D_α(π‖q). The standard error is the delta
 * method on the mean of the weights. Throws when every weight is zero.
 */
McBound mc_renyi_upper_bound(Density const &q,
                             std::function<double(std::span<double const>)> const &log_joint,
                             double alpha, std::size_t draws, std::uint64_t seed);

/// (∫_K p)^α / (∫_K q)^{α − 1}, a lower bound on ∫ q (p/q)^α. 1-D only.
double holder_lower_bound(Density const &p, Density const &q, double alpha, Interval k);

}  // namespace renyi::divergence
