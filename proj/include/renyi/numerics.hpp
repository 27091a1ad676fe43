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

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace renyi {

/// Raised for violated preconditions throughout the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace renyi

namespace renyi::numerics {

/// Closed/open distinction is immaterial for densities; either bound may be infinite.
struct Interval
{
  double lower = -kInf;
  double upper = kInf;

  bool contains(double x) const { return x >= lower && x <= upper; }
  bool contains(Interval const &other) const
  {
    return other.lower >= lower && other.upper <= upper;
  }
  bool bounded() const { return lower > -kInf && upper < kInf; }
  bool operator==(Interval const &) const = default;
};

/**
 * Adaptive quadrature request. Infinite bounds are mapped onto a finite
 * interval by x = center + scale * t / (1 - t^2) (both infinite) or
 * x = a + scale * t / (1 - t) (one infinite), so `center` and `scale` should
 * roughly locate the mass of the integrand.
 */
struct QuadratureSpec
{
  double lower = -kInf;
  double upper = kInf;
  double rel_tol = 1e-6;
  double abs_tol = 0.0;
  int max_refinements = 4000;
  double center = 0.0;
  double scale = 1.0;

  void validate() const;
};

enum class QuadStatus
{
  converged,
  unconverged
};

struct QuadratureResult
{
  double value = 0.0;
  double error = 0.0;
  QuadStatus status = QuadStatus::converged;
  int evaluations = 0;

  bool converged() const { return status == QuadStatus::converged; }
};

using ScalarFn = std::function<double(double)>;

/// Global adaptive Gauss-Kronrod (7/15) with panel bisection. Deterministic.
QuadratureResult integrate(ScalarFn const &f, QuadratureSpec const &spec);

/**
 * Integrate over [domain.lower, domain.upper] with the given interior
 * breakpoints as initial panel edges. Infinite ends use the rational tail map
 * with `tail_scale`.
 */
QuadratureResult integrate_partitioned(ScalarFn const &f, Interval domain,
                                       std::vector<double> breakpoints, double tail_scale,
                                       double rel_tol, double abs_tol, int max_refinements);

/// Where a density-like integrand keeps its mass: a center and a length scale.
struct Anchor
{
  double center = 0.0;
  double scale  = 1.0;
};

/// log of an integral computed in log space. `divergent` marks +infinity.
struct LogIntegral
{
  double log_value = -kInf;
  double rel_error = 0.0;
  bool divergent   = false;
  QuadStatus status = QuadStatus::converged;
};

/**
 * Computes log ∫ exp(log_f(x)) dx over `domain`.
 *
 * The integrand is probed on a grid built around the anchors (dense linear
 * core, then geometric spacing out to 2^40 scales). The probe maximum is used
 * as a shift so nothing overflows; panels whose edges sit more than 200 nats
 * below it are dropped. The integral is reported divergent when the log
 * integrand fails to decay towards an infinite end, or behaves like
 * c*log|x - a| with c <= -1 at a finite end a.
 */
LogIntegral log_integrate(ScalarFn const &log_f, Interval domain, std::span<Anchor const> anchors,
                          double rel_tol = 1e-10, int max_refinements = 4000);

/// Probe points used by log_integrate (sorted, inside the open domain).
std::vector<double> probe_points(Interval domain, std::span<Anchor const> anchors);

/// log Σ exp(v). Throws on empty input. -inf entries are absorbed.
double log_sum_exp(std::span<double const> values);

/// Inputs of the Laplace approximation of ∫ h(y) exp(-n g(y)) dy.
struct LaplaceInput
{
  ScalarFn h;
  ScalarFn g;
  long n = 1;
  double y_star   = 0.0;
  double g_second = 1.0;
};

/// h(y*) exp(-n g(y*)) sqrt(2π / (n g''(y*))). Throws when g'' <= 0 or n < 1.
double laplace_approx(LaplaceInput const &input);

/**
 * Lower bound on P(X > m) for X ~ N(0, s^2):
 * (1/sqrt(2π)) (1/z - 1/z^3) exp(-z^2/2) with z = m/s. Requires z > 1.
 */
double gaussian_tail_lower(double m, double s);

/// P(Z > z) for a standard normal, accurate in the far tail.
double normal_sf(double z);

/// log P(Z > z), finite even where normal_sf underflows.
double log_normal_sf(double z);

/// Φ^{-1}(p) for p in (0, 1).
double normal_quantile(double p);

/// Ordinary least-squares slope of y against x.
double ols_slope(std::span<double const> x, std::span<double const> y);

}  // namespace renyi::numerics
