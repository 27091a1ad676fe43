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

#include "renyi/numerics.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace renyi::numerics {

namespace {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

enum class MapKind
{
  linear,
  right_tail,  // x = origin + scale t/(1-t), t in [0,1)
  left_tail,   // x = origin - scale t/(1-t), t in [0,1)
  whole        // x = origin + scale t/(1-t^2), t in (-1,1)
};

struct Segment
{
  MapKind kind  = MapKind::linear;
  double origin = 0.0;
  double scale  = 1.0;
  double t0     = 0.0;
  double t1     = 0.0;
  int pieces    = 1;
};

struct Panel
{
  std::size_t segment = 0;
  double a            = 0.0;
  double b            = 0.0;
  double value        = 0.0;
  double error        = 0.0;
  std::size_t order   = 0;  // creation index; breaks heap ties deterministically
};

double mapped(Segment const &seg, ScalarFn const &f, double t)
{
  double x   = t;
  double jac = 1.0;
  switch (seg.kind)
  {
  case MapKind::linear:
    break;
  case MapKind::right_tail:
  {
    double const u = 1.0 - t;
    x              = seg.origin + seg.scale * t / u;
    jac            = seg.scale / (u * u);
    break;
  }
  case MapKind::left_tail:
  {
    double const u = 1.0 - t;
    x              = seg.origin - seg.scale * t / u;
    jac            = seg.scale / (u * u);
    break;
  }
  case MapKind::whole:
  {
    double const u = 1.0 - t * t;
    x              = seg.origin + seg.scale * t / u;
    jac            = seg.scale * (1.0 + t * t) / (u * u);
    break;
  }
  }
  if (!std::isfinite(x) || !std::isfinite(jac))
  {
    return 0.0;
  }
  double const fx = f(x);
  if (fx == 0.0)
  {
    return 0.0;
  }
  if (!std::isfinite(fx))
  {
    std::ostringstream msg;
    msg << "integrand not finite at x = " << x;
    throw Error(msg.str());
  }
  return fx * jac;
}

void gauss_kronrod(Segment const &seg, ScalarFn const &f, Panel &panel, int &evaluations)
{
  double const center = 0.5 * (panel.a + panel.b);
  double const half   = 0.5 * (panel.b - panel.a);
  double const fc     = mapped(seg, f, center);
  double resk         = fc * kWgk[7];
  double resg         = fc * kWg[3];
  double resabs       = std::abs(resk);
  std::array<double, 7> f1{};
  std::array<double, 7> f2{};
  for (std::size_t j = 0; j < 7; ++j)
  {
    double const dx = half * kXgk[j];
    f1[j]           = mapped(seg, f, center - dx);
    f2[j]           = mapped(seg, f, center + dx);
    resk += kWgk[j] * (f1[j] + f2[j]);
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1)
    {
      resg += kWg[j / 2] * (f1[j] + f2[j]);
    }
  }
  evaluations += 15;
  double const reskh = resk * 0.5;
  double resasc      = kWgk[7] * std::abs(fc - reskh);
  for (std::size_t j = 0; j < 7; ++j)
  {
    resasc += kWgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
  }
  double const hl = std::abs(half);
  resk *= half;
  resabs *= hl;
  resasc *= hl;
  double err = std::abs((resk - resg * half));
  if (resasc != 0.0 && err != 0.0)
  {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
  {
    err = std::max(50.0 * eps * resabs, err);
  }
  panel.value = resk;
  panel.error = err;
}

QuadratureResult adaptive(ScalarFn const &f, std::vector<Segment> const &segments, double rel_tol,
                          double abs_tol, int max_refinements)
{
  QuadratureResult out;
  std::vector<Panel> heap;
  std::size_t order = 0;
  auto worse        = [](Panel const &x, Panel const &y) {
    if (x.error != y.error)
    {
      return x.error < y.error;
    }
    return x.order > y.order;
  };

  for (std::size_t s = 0; s < segments.size(); ++s)
  {
    auto const &seg  = segments[s];
    double const len = (seg.t1 - seg.t0) / seg.pieces;
    for (int k = 0; k < seg.pieces; ++k)
    {
      Panel p;
      p.segment = s;
      p.a       = seg.t0 + k * len;
      p.b       = (k + 1 == seg.pieces) ? seg.t1 : seg.t0 + (k + 1) * len;
      p.order   = order++;
      gauss_kronrod(seg, f, p, out.evaluations);
      heap.push_back(p);
    }
  }
  std::make_heap(heap.begin(), heap.end(), worse);

  double total = 0.0;
  double error = 0.0;
  for (auto const &p : heap)
  {
    total += p.value;
    error += p.error;
  }

  bool stuck = false;
  for (int r = 0; r < max_refinements; ++r)
  {
    double const tol = std::max(abs_tol, rel_tol * std::abs(total));
    if (error <= tol || heap.empty())
    {
      break;
    }
    std::pop_heap(heap.begin(), heap.end(), worse);
    Panel worst = heap.back();
    heap.pop_back();
    double const mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b))
    {
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), worse);
      stuck = true;
      break;
    }
    Panel left  = worst;
    Panel right = worst;
    left.b      = mid;
    right.a     = mid;
    left.order  = order++;
    right.order = order++;
    auto const &seg = segments[worst.segment];
    gauss_kronrod(seg, f, left, out.evaluations);
    gauss_kronrod(seg, f, right, out.evaluations);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), worse);
  }

  // Re-sum in a fixed geometric order so the result does not carry the
  // rounding history of the running totals.
  std::sort(heap.begin(), heap.end(), [](Panel const &x, Panel const &y) {
    return x.segment != y.segment ? x.segment < y.segment : x.a < y.a;
  });
  total = 0.0;
  error = 0.0;
  for (auto const &p : heap)
  {
    total += p.value;
    error += p.error;
  }
  out.value        = total;
  out.error        = error;
  double const tol = std::max(abs_tol, rel_tol * std::abs(total));
  out.status = (!stuck && error <= tol) ? QuadStatus::converged : QuadStatus::unconverged;
  return out;
}

std::vector<Segment> build_segments(Interval domain, std::vector<double> const &edges,
                                    double tail_scale)
{
  std::vector<Segment> segs;
  if (edges.empty())
  {
    Segment s;
    if (domain.lower == -kInf && domain.upper == kInf)
    {
      s.kind   = MapKind::whole;
      s.origin = 0.0;
      s.scale  = tail_scale;
      s.t0     = -1.0;
      s.t1     = 1.0;
      s.pieces = 4;
    }
    else if (domain.lower == -kInf)
    {
      s.kind   = MapKind::left_tail;
      s.origin = domain.upper;
      s.scale  = tail_scale;
      s.t0     = 0.0;
      s.t1     = 1.0;
      s.pieces = 2;
    }
    else if (domain.upper == kInf)
    {
      s.kind   = MapKind::right_tail;
      s.origin = domain.lower;
      s.scale  = tail_scale;
      s.t0     = 0.0;
      s.t1     = 1.0;
      s.pieces = 2;
    }
    else
    {
      s.t0 = domain.lower;
      s.t1 = domain.upper;
    }
    segs.push_back(s);
    return segs;
  }
  if (domain.lower == -kInf)
  {
    segs.push_back({MapKind::left_tail, edges.front(), tail_scale, 0.0, 1.0, 2});
  }
  else if (domain.lower < edges.front())
  {
    segs.push_back({MapKind::linear, 0.0, 1.0, domain.lower, edges.front(), 1});
  }
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
  {
    segs.push_back({MapKind::linear, 0.0, 1.0, edges[i], edges[i + 1], 1});
  }
  if (domain.upper == kInf)
  {
    segs.push_back({MapKind::right_tail, edges.back(), tail_scale, 0.0, 1.0, 2});
  }
  else if (edges.back() < domain.upper)
  {
    segs.push_back({MapKind::linear, 0.0, 1.0, edges.back(), domain.upper, 1});
  }
  return segs;
}

}  // namespace

void QuadratureSpec::validate() const
{
  if (!(lower < upper))
  {
    throw Error("quadrature: lower must be < upper");
  }
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2))
  {
    throw Error("quadrature: rel_tol must lie in (0, 1e-2]");
  }
  if (!(scale > 0.0) || !std::isfinite(center))
  {
    throw Error("quadrature: tail map needs finite center and positive scale");
  }
  if (max_refinements < 0)
  {
    throw Error("quadrature: max_refinements must be non-negative");
  }
}

QuadratureResult integrate(ScalarFn const &f, QuadratureSpec const &spec)
{
  spec.validate();
  std::vector<double> edges;
  if (spec.lower == -kInf && spec.upper == kInf)
  {
    Segment s{MapKind::whole, spec.center, spec.scale, -1.0, 1.0, 4};
    return adaptive(f, {s}, spec.rel_tol, spec.abs_tol, spec.max_refinements);
  }
  auto segs = build_segments({spec.lower, spec.upper}, edges, spec.scale);
  return adaptive(f, segs, spec.rel_tol, spec.abs_tol, spec.max_refinements);
}

QuadratureResult integrate_partitioned(ScalarFn const &f, Interval domain,
                                       std::vector<double> breakpoints, double tail_scale,
                                       double rel_tol, double abs_tol, int max_refinements)
{
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  std::erase_if(breakpoints,
                [&](double x) { return !(x > domain.lower && x < domain.upper); });
  auto segs = build_segments(domain, breakpoints, tail_scale);
  return adaptive(f, segs, rel_tol, abs_tol, max_refinements);
}

std::vector<double> probe_points(Interval domain, std::span<Anchor const> anchors)
{
  std::vector<double> pts;
  auto push = [&](double x) {
    if (x > domain.lower && x < domain.upper && std::isfinite(x))
    {
      pts.push_back(x);
    }
  };
  for (auto const &a : anchors)
  {
    for (int k = -32; k <= 32; ++k)
    {
      push(a.center + a.scale * k / 4.0);
    }
    for (int j = 1; j <= 74; ++j)
    {
      double const r = 8.0 * std::exp2(j / 2.0);
      push(a.center + a.scale * r);
      push(a.center - a.scale * r);
    }
    for (double e : {1e-12, 1e-9, 1e-6, 1e-4, 1e-2})
    {
      if (domain.lower > -kInf)
      {
        push(domain.lower + a.scale * e);
      }
      if (domain.upper < kInf)
      {
        push(domain.upper - a.scale * e);
      }
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

LogIntegral log_integrate(ScalarFn const &log_f, Interval domain, std::span<Anchor const> anchors,
                          double rel_tol, int max_refinements)
{
  if (anchors.empty())
  {
    throw Error("log_integrate: at least one anchor is required");
  }
  LogIntegral out;
  auto probes = probe_points(domain, anchors);
  if (probes.empty())
  {
    throw Error("log_integrate: no probe point falls inside the domain");
  }
  std::vector<double> lp(probes.size());
  double shift = -kInf;
  for (std::size_t i = 0; i < probes.size(); ++i)
  {
    lp[i] = log_f(probes[i]);
    if (std::isnan(lp[i]))
    {
      std::ostringstream msg;
      msg << "log integrand is NaN at x = " << probes[i];
      throw Error(msg.str());
    }
    if (lp[i] == kInf)
    {
      out.divergent = true;
      out.log_value = kInf;
      return out;
    }
    shift = std::max(shift, lp[i]);
  }
  if (shift == -kInf)
  {
    return out;
  }

  constexpr double kNegligible = 200.0;

  // A tail still rising far below the peak may turn over beyond the last probe.
  auto extend = [&](bool right) {
    double const s = anchors.front().scale;
    for (int j = 0; j < 200 && probes.size() >= 2; ++j)
    {
      std::size_t const far  = right ? probes.size() - 1 : 0;
      std::size_t const prev = right ? probes.size() - 2 : 1;
      double const noise = 1e-9 * std::max(std::abs(lp[far]), std::abs(lp[prev]));
      if (lp[far] == -kInf || lp[far] > shift - kNegligible || !(lp[far] > lp[prev] + noise))
      {
        return;
      }
      double const gap = std::max(std::abs(probes[far] - probes[prev]), s);
      double const x   = right ? probes[far] + 2.0 * gap : probes[far] - 2.0 * gap;
      double const l   = log_f(x);
      if (!std::isfinite(x) || std::isnan(l))
      {
        return;
      }
      if (l == kInf)
      {
        out.divergent = true;
        return;
      }
      if (right)
      {
        probes.push_back(x);
        lp.push_back(l);
      }
      else
      {
        probes.insert(probes.begin(), x);
        lp.insert(lp.begin(), l);
      }
      shift = std::max(shift, l);
    }
  };
  if (domain.upper == kInf)
  {
    extend(true);
  }
  if (domain.lower == -kInf)
  {
    extend(false);
  }
  if (out.divergent)
  {
    out.log_value = kInf;
    return out;
  }
  auto const n = probes.size();

  // Tail behaviour towards infinite ends.
  auto rising = [&](std::size_t far, std::size_t prev) {
    if (lp[far] == -kInf)
    {
      return false;
    }
    double const noise = 1e-9 * std::max(std::abs(lp[far]), std::abs(lp[prev]));
    return lp[far] > shift - kNegligible || lp[far] > lp[prev] + noise;
  };
  if (n >= 2 && domain.upper == kInf && rising(n - 1, n - 2))
  {
    out.divergent = true;
  }
  if (n >= 2 && domain.lower == -kInf && rising(0, 1))
  {
    out.divergent = true;
  }
  // Singular behaviour at finite ends: log f ~ c log|x - a| with c <= -1.
  auto singular = [&](double end, double dir) {
    double const s  = anchors.front().scale;
    double const x1 = end + dir * s * 1e-12;
    double const x2 = end + dir * s * 1e-9;
    double const l1 = log_f(x1);
    double const l2 = log_f(x2);
    if (!std::isfinite(l1) || !std::isfinite(l2))
    {
      return l1 == kInf;
    }
    double const c = (l1 - l2) / (std::log(1e-12) - std::log(1e-9));
    return c <= -1.0 + 1e-6;
  };
  if (domain.lower > -kInf && singular(domain.lower, 1.0))
  {
    out.divergent = true;
  }
  if (domain.upper < kInf && singular(domain.upper, -1.0))
  {
    out.divergent = true;
  }
  if (out.divergent)
  {
    out.log_value = kInf;
    return out;
  }

  for (int attempt = 0; attempt < 4; ++attempt)
  {
    std::vector<Segment> segs;
    double const cut = shift - kNegligible;
    if (domain.lower == -kInf)
    {
      if (lp.front() > cut)
      {
        segs.push_back({MapKind::left_tail, probes.front(), anchors.front().scale, 0.0, 1.0, 2});
      }
    }
    else
    {
      segs.push_back({MapKind::linear, 0.0, 1.0, domain.lower, probes.front(), 1});
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
    {
      if (lp[i] > cut || lp[i + 1] > cut)
      {
        segs.push_back({MapKind::linear, 0.0, 1.0, probes[i], probes[i + 1], 1});
      }
    }
    if (domain.upper == kInf)
    {
      if (lp.back() > cut)
      {
        segs.push_back({MapKind::right_tail, probes.back(), anchors.front().scale, 0.0, 1.0, 2});
      }
    }
    else
    {
      segs.push_back({MapKind::linear, 0.0, 1.0, probes.back(), domain.upper, 1});
    }

    double seen        = -kInf;
    auto const shifted = [&](double x) {
      double const l = log_f(x);
      if (l > seen)
      {
        seen = l;
      }
      if (l == -kInf)
      {
        return 0.0;
      }
      return std::exp(std::min(l - shift, 700.0));
    };
    auto const res = adaptive(shifted, segs, rel_tol, 0.0, max_refinements);
    if (seen > shift + 30.0)
    {
      shift = seen;
      continue;
    }
    out.status = res.status;
    if (res.value <= 0.0)
    {
      out.log_value = -kInf;
      out.rel_error = 0.0;
    }
    else
    {
      out.log_value = shift + std::log(res.value);
      out.rel_error = res.error / res.value;
    }
    if (!std::isfinite(out.log_value) && out.log_value > 0)
    {
      out.divergent = true;
    }
    return out;
  }
  throw Error("log_integrate: could not stabilise the log-space shift");
}

double log_sum_exp(std::span<double const> values)
{
  if (values.empty())
  {
    throw Error("log_sum_exp: empty input");
  }
  double const m = *std::max_element(values.begin(), values.end());
  if (m == -kInf)
  {
    return -kInf;
  }
  if (m == kInf)
  {
    return kInf;
  }
  double s = 0.0;
  for (double v : values)
  {
    s += std::exp(v - m);
  }
  return m + std::log(s);
}

double laplace_approx(LaplaceInput const &input)
{
  if (!(input.g_second > 0.0))
  {
    throw Error("laplace_approx: g''(y*) must be positive (y* must be a local minimum)");
  }
  if (input.n < 1)
  {
    throw Error("laplace_approx: n must be a positive integer");
  }
  if (!input.h || !input.g)
  {
    throw Error("laplace_approx: h and g are required");
  }
  double const n = static_cast<double>(input.n);
  return input.h(input.y_star) * std::exp(-n * input.g(input.y_star)) *
         std::sqrt(2.0 * std::numbers::pi / (n * input.g_second));
}

double gaussian_tail_lower(double m, double s)
{
  if (!(s > 0.0))
  {
    throw Error("gaussian_tail_lower: s must be positive");
  }
  double const z = m / s;
  if (!(z > 1.0))
  {
    throw Error("gaussian_tail_lower: requires m/s > 1");
  }
  return (1.0 / std::sqrt(2.0 * std::numbers::pi)) * (1.0 / z - 1.0 / (z * z * z)) *
         std::exp(-0.5 * z * z);
}

double normal_sf(double z)
{
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

double log_normal_sf(double z)
{
  if (z < 35.0)
  {
    return std::log(normal_sf(z));
  }
  double const z2 = z * z;
  double const series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(z * std::sqrt(2.0 * std::numbers::pi)) + std::log(series);
}

double normal_quantile(double p)
{
  if (!(p > 0.0 && p < 1.0))
  {
    throw Error("normal_quantile: p must lie in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double ols_slope(std::span<double const> x, std::span<double const> y)
{
  if (x.size() != y.size() || x.size() < 2)
  {
    throw Error("ols_slope: need at least two paired points");
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0)
  {
    throw Error("ols_slope: x values are all equal");
  }
  return sxy / sxx;
}

}  // namespace renyi::numerics
