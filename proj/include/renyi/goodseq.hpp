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

#include "renyi/models.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace renyi::goodseq {

using dist::Density;
using models::BayesModel;
using models::Dataset;
using numerics::Interval;

enum class Family
{
  gaussian_meanfield,
  laplace,
  logistic,
  gamma
};

std::string to_string(Family f);
Family family_from_string(std::string const &name);

struct GoodSequenceSpec
{
  Family family = Family::gaussian_meanfield;
  std::shared_ptr<BayesModel const> model;
  double alpha = 2.0;
  /// M̄: members have variance at most M̄/n. Defaults per family when empty.
  std::optional<double> variance_scale;
};

/// α^{1/(α−1)}.
double alpha_factor(double alpha);

/// M̄ used when the spec leaves it empty. Data are needed for the gamma family only.
double variance_scale(GoodSequenceSpec const &spec, Dataset const &data);

/// The n-th member of the sequence for the first n = data.size() observations.
Density build_good_sequence(GoodSequenceSpec const &spec, Dataset const &data);

/// The constant M_r quoted for the Laplace and logistic constructions; empty otherwise.
std::optional<double> cited_ratio_bound(Family family, double alpha);

struct GoodSequenceAudit
{
  std::size_t n = 0;
  double mean      = 0.0;
  double mle       = 0.0;
  double mean_gap  = 0.0;
  double mean_allowance = 0.0;
  bool mean_is_mle = false;
  double variance     = 0.0;
  double variance_cap = 0.0;
  bool rate_ok        = false;
  Interval k;
  double ratio_sup = 0.0;
  std::optional<double> ratio_claim;
  std::optional<bool> ratio_bound_ok;
  bool logconcave_ok   = false;
  double entropy       = 0.0;
  double entropy_bound = 0.0;
  bool entropy_ok      = false;

  nlohmann::json to_json() const;
};

/**
 * Checks the defining properties of the n-th member against the exact
 * posterior. `k` defaults to θ₀ ± 5/√I(θ₀) within the parameter space;
 * `ratio_claim` defaults to cited_ratio_bound. 1-D models only.
 */
GoodSequenceAudit audit(GoodSequenceSpec const &spec, Dataset const &data, double theta0,
                        std::optional<Interval> k = std::nullopt,
                        std::optional<double> ratio_claim = std::nullopt);

struct AuditSeries
{
  std::vector<GoodSequenceAudit> audits;
  /// Smallest audited n at which each property holds; empty if it never does.
  std::map<std::string, std::optional<std::size_t>> first_holding;
  double rate_slope = 0.0;

  nlohmann::json to_json() const;
};

/// Audits on nested prefixes of `data` (sizes from `ns`, increasing).
AuditSeries audit_series(GoodSequenceSpec const &spec, Dataset const &data, double theta0,
                         std::vector<std::size_t> const &ns,
                         std::optional<double> ratio_claim = std::nullopt);

/// Least-squares slope of log variance against log n. Needs ≥ 4 points.
double rate_estimate(std::span<double const> ns, std::span<double const> variances);
/// Same, reading the variance of each 1-D density.
double rate_estimate(std::span<double const> ns, std::span<Density const> densities);

}  // namespace renyi::goodseq
