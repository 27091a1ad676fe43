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

#include "renyi/goodseq.hpp"
#include "renyi/varfit.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace renyi::experiments {

/// Outcome of one named check, with the value that decided it.
struct Verdict
{
  std::string criterion;
  bool pass = false;
  double measured = 0.0;
  std::string expected;

  nlohmann::json to_json() const;
};

/// One row of a report: a variant label, a sample size, an optional seed and named values.
struct Record
{
  std::string label;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, double>> values;

  void set(std::string const &name, double value);
  double get(std::string const &name) const;
};

struct ExperimentReport
{
  std::string experiment;
  nlohmann::json config;
  std::vector<Record> records;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<Verdict> verdicts;
  double runtime_seconds = 0.0;
  /// Contour grid (figure1 only): header and rows.
  std::vector<std::string> grid_columns;
  std::vector<std::vector<double>> grid;

  bool passed() const;
  Verdict const *verdict(std::string const &criterion) const;
  /// Stable order by (n, label, seed).
  void sort_records();

  nlohmann::json to_json() const;
  /// `# schema=1` line, then label,n,seed and the value columns. No timing data.
  std::string to_csv() const;
  std::string grid_csv() const;
};

/// Writes report.json, report.csv and grid.csv (when present) under
/// `root/<experiment>_<timestamp>_<seed>`; returns that directory.
std::filesystem::path write_report(ExperimentReport const &report, std::filesystem::path const &root,
                                   std::string const &timestamp, std::uint64_t seed);

struct RunOptions
{
  /// Worker threads for independent cells; results do not depend on it.
  std::size_t jobs = 1;
};

/// Seed of replicate `index` under base seed `base`.
std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t index);

//------------------------------------------------------------------------------
// Configurations. Each parses from a JSON object (unknown keys rejected) and
// echoes back with every default resolved.
//------------------------------------------------------------------------------

struct ConsistencyConfig
{
  nlohmann::json model = {{"kind", "gaussian-mean"}, {"mu0", 0.0}, {"sigma", 1.0}};
  std::string family   = "laplace";
  varfit::ObjectiveKind objective = varfit::ObjectiveKind::renyi_alpha;
  double alpha = 2.0;
  /// Defaults to 0.5, or 2 for the exponential model.
  std::optional<double> theta0;
  std::vector<std::size_t> n_grid = {100, 1000, 10000, 100000};
  std::size_t replicates = 100;
  std::uint64_t seed     = 1;
  std::size_t budget     = 20000;
  double variance_slope_low  = -1.2;
  double variance_slope_high = -0.8;
  double error_slope_low     = -0.6;
  double error_slope_high    = -0.4;
  /// Half-width of the error band in units of 1/√(n I(θ₀)).
  double band_sds = 3.0;
  double coverage = 0.95;
  /// Radius of the neighbourhood whose outside mass must vanish.
  double eta = 0.1;
  double concentration_tol = 0.01;

  static ConsistencyConfig from_json(nlohmann::json const &j, std::string const &context);
  nlohmann::json to_json() const;
};

struct UbfinConfig
{
  double mu0   = 0.0;
  double sigma = 1.0;
  double theta0 = 0.5;
  std::vector<double> alphas = {2.0};
  /// Explicit M̄ values; when empty, multiples of the threshold are used.
  std::vector<double> variance_scales;
  std::vector<double> threshold_multiples = {1.0, 2.0};
  std::vector<std::size_t> n_grid = {10000, 100000, 1000000};
  std::uint64_t seed = 1;
  double bound_tol   = 1e-6;
  double limit_tol   = 1e-3;

  static UbfinConfig from_json(nlohmann::json const &j, std::string const &context);
  nlohmann::json to_json() const;
};

struct NdegenConfig
{
  double mu0    = 0.0;
  double sigma  = 1.0;
  double theta0 = 0.5;
  double alpha  = 2.0;
  /// Defaults to N(θ₀, 1).
  std::optional<nlohmann::json> q_fixed;
  std::vector<std::size_t> n_grid = {100, 1000, 10000, 100000, 1000000};
  std::uint64_t seed  = 1;
  double slope_target = 0.5;
  double slope_tol    = 0.05;

  static NdegenConfig from_json(nlohmann::json const &j, std::string const &context);
  nlohmann::json to_json() const;
};

struct MixtureConfig
{
  double mu0    = 0.0;
  double sigma  = 1.0;
  double theta0 = 0.5;
  double alpha  = 2.0;
  double weight = 0.5;
  /// Defaults to θ₀ + 1.
  std::optional<double> theta1;
  std::vector<double> spike_widths = {1e-3, 1e-2};
  std::vector<std::size_t> n_grid  = {100, 1000, 10000, 100000};
  std::uint64_t seed = 1;
  double slack       = 0.05;

  static MixtureConfig from_json(nlohmann::json const &j, std::string const &context);
  nlohmann::json to_json() const;
};

/// Member q_n = N(θ̂_n, B n^{−2κ}) against the conjugate posterior.
struct RateViolationSpec
{
  double kappa = 0.75;
  double alpha = 2.0;
  double mu0   = 0.0;
  double sigma = 1.0;
  /// Sub-Gaussian parameter; equals the variance multiplier for a Gaussian family.
  double b = 1.0;
};

struct RateViolationConfig
{
  RateViolationSpec spec;
  double control_kappa = 0.5;
  double theta0        = 0.5;
  std::size_t n_max    = 10000;
  std::uint64_t seed   = 1;

  static RateViolationConfig from_json(nlohmann::json const &j, std::string const &context);
  nlohmann::json to_json() const;
};

struct Figure1Config
{
  double rho = 0.9;
  std::vector<double> alphas = {2.0, 5.0, 20.0};
  std::size_t budget = 20000;
  std::size_t grid_points = 61;
  double grid_extent      = 3.0;
  double s2_tol           = 0.01;
  /// Allowance above the largest target eigenvalue.
  double cap_margin       = 0.05;
  double quadrature_tol   = 1e-6;
  std::uint64_t seed      = 1;

  static Figure1Config from_json(nlohmann::json const &j, std::string const &context);
  nlohmann::json to_json() const;
};

struct GoodseqConfig
{
  std::string family   = "laplace";
  nlohmann::json model = {{"kind", "gaussian-mean"}, {"mu0", 0.0}, {"sigma", 1.0}};
  double alpha = 2.0;
  std::optional<double> theta0;
  std::optional<double> variance_scale;
  std::optional<double> ratio_claim;
  std::vector<std::size_t> n_grid = {100, 1000, 10000, 100000};
  /// Data file (one datum per row) used instead of simulation.
  std::optional<std::string> data_csv;
  std::uint64_t seed = 1;
  double rate_tol    = 0.01;

  static GoodseqConfig from_json(nlohmann::json const &j, std::string const &context);
  nlohmann::json to_json() const;
};

//------------------------------------------------------------------------------
// Experiments
//------------------------------------------------------------------------------

/// Fits on nested simulated data for every (n, replicate); records mean error,
/// variance, outside mass, KL and Rényi values; fits the rate slopes.
ExperimentReport run_consistency(ConsistencyConfig const &config, RunOptions const &options = {});
/// run_consistency with the forward-KL objective.
ExperimentReport run_ep_consistency(ConsistencyConfig config, RunOptions const &options = {});
/// Gaussian good sequence with variance M̄/n against the minimal divergence bound.
ExperimentReport run_ubfin(UbfinConfig const &config, RunOptions const &options = {});
/// Growth of D_α(π_n ‖ q) for a fixed q.
ExperimentReport run_ndegen(NdegenConfig const &config, RunOptions const &options = {});
/// Two-spike mixture lower bound.
ExperimentReport run_mixture_bound(MixtureConfig const &config, RunOptions const &options = {});
/// First n at which the over-concentrated member leaves the finite region.
ExperimentReport run_rate_violation(RateViolationConfig const &config,
                                    RunOptions const &options = {});
/// Isotropic fits to a correlated 2-D Gaussian under each objective.
ExperimentReport run_figure1(Figure1Config const &config, RunOptions const &options = {});
ExperimentReport run_goodseq_audit(GoodseqConfig const &config, RunOptions const &options = {});

/// consistency, ubfin, ndegen, mixture, rate-violation, ep, figure1, goodseq-audit.
std::vector<std::string> const &experiment_names();

/// Parses `config` for experiment `name` without running it; returns the echo.
nlohmann::json resolve_config(std::string const &name, nlohmann::json const &config);

/// Parses and runs. Throws config::ConfigError for a bad config or unknown name.
ExperimentReport run_experiment(std::string const &name, nlohmann::json const &config,
                                RunOptions const &options = {});

}  // namespace renyi::experiments
