#pragma once
// One-dimensional optimization helpers: golden-section search, Young
// (Legendre-Fenchel) transforms of convex functions on t > 0, and the
// coordinate-wise tuning of the free parameters alpha and y that every bound
// leaves open.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "nadev/errors.hpp"

namespace nadev {

struct Interval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = true;
  bool hi_open = true;

  bool contains(double t) const {
    const bool above = lo_open ? t > lo : t >= lo;
    const bool below = hi_open ? t < hi : t <= hi;
    return above && below;
  }
};

enum class Convexity { Convex, Concave, Unknown };

struct ScalarFunction {
  std::function<double(double)> evaluate;
  Interval domain;
  Convexity convexity = Convexity::Unknown;

  double operator()(double t) const { return evaluate(t); }
};

struct OptimizationResult {
  double argopt = 0.0;  // argmin or argmax, depending on the routine
  double value = 0.0;
  std::size_t iterations = 0;
  std::pair<double, double> bracket{0.0, 0.0};
};

/// Golden-section minimization of a unimodal function on [a, b]. Stops when
/// the bracket is narrower than abs_tol + rel_tol * |midpoint|.
template <typename F>
OptimizationResult golden_section_minimize(F&& f, double a, double b, double abs_tol = 1e-12,
                                           double rel_tol = 1e-12, std::size_t max_iter = 500) {
  constexpr double kInvPhi = 0.6180339887498948482;  // 1/phi
  const std::pair<double, double> initial{a, b};
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  std::size_t it = 0;
  while (it < max_iter && (b - a) > abs_tol + rel_tol * std::abs(0.5 * (a + b))) {
    ++it;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  OptimizationResult r;
  if (fc <= fd) {
    r.argopt = c;
    r.value = fc;
  } else {
    r.argopt = d;
    r.value = fd;
  }
  r.iterations = it;
  r.bracket = initial;
  return r;
}

template <typename F>
OptimizationResult golden_section_maximize(F&& f, double a, double b, double abs_tol = 1e-12,
                                           double rel_tol = 1e-12, std::size_t max_iter = 500) {
  auto r = golden_section_minimize([&](double t) { return -f(t); }, a, b, abs_tol, rel_tol,
                                   max_iter);
  r.value = -r.value;
  return r;
}

/// sup over t in f.domain (t > 0) of x*t - f(t), for convex f.
///
/// The concave objective is bracketed from t = 1 by doubling (or halving toward
/// the lower end of the domain) using function values only, then refined by
/// golden section. A maximizer that escapes past t = 1e12 means x is outside
/// the effective domain of the transform.
inline OptimizationResult young_transform(const ScalarFunction& f, double x) {
  detail::require(std::isfinite(x) && x >= 0.0, "young_transform: x must be finite and >= 0");
  constexpr double kUpperCap = 1e12;
  constexpr double kLowerFloor = 1e-14;
  auto g = [&](double t) { return x * t - f(t); };

  const double hi_limit = std::min(f.domain.hi, kUpperCap);
  std::size_t evals = 0;
  double a = 0.0;
  double c = 0.0;
  double t = std::clamp(1.0, std::max(f.domain.lo, kLowerFloor), hi_limit);
  double gt = g(t);
  double right = std::min(2.0 * t, hi_limit);
  double gr = g(right);
  evals += 2;

  if (gr > gt) {
    a = t;
    double mid = right;
    double gmid = gr;
    double next = 2.0 * mid;
    for (;;) {
      if (next > hi_limit) {
        if (f.domain.hi <= kUpperCap) {
          next = f.domain.hi;
          break;
        }
        throw DivergenceError("young_transform: maximizer not bracketed below t = 1e12");
      }
      const double gn = g(next);
      ++evals;
      if (gn <= gmid) break;
      a = mid;
      mid = next;
      gmid = gn;
      next *= 2.0;
    }
    c = next;
  } else {
    c = right;
    double mid = t;
    double gmid = gt;
    double prev = 0.5 * mid;
    const double floor = std::max(f.domain.lo, kLowerFloor);
    for (;;) {
      if (prev < floor) {
        // supremum approached at the lower end of the domain
        prev = floor;
        break;
      }
      const double gp = g(prev);
      ++evals;
      if (gp <= gmid) break;
      c = mid;
      mid = prev;
      gmid = gp;
      prev *= 0.5;
    }
    a = prev;
  }

  auto r = golden_section_maximize(g, a, c, 1e-14, 1e-12);
  r.iterations += evals;
  r.bracket = {a, c};
  return r;
}

/// Coarse-scan-seeded golden-section minimization over alpha in
/// [1e-6, 1 - 1e-6]. Non-unimodal objectives end in a local minimum that is
/// never worse than the best scan point. An objective that is constant on the
/// scan returns alpha = 1/2.
template <typename F>
OptimizationResult minimize_over_alpha(F&& bound_of_alpha, std::size_t scan_points = 64) {
  constexpr double kLo = 1e-6;
  constexpr double kHi = 1.0 - 1e-6;
  if (scan_points < 3) scan_points = 3;
  std::vector<double> grid(scan_points);
  std::vector<double> vals(scan_points);
  for (std::size_t i = 0; i < scan_points; ++i) {
    grid[i] = kLo + (kHi - kLo) * static_cast<double>(i) / static_cast<double>(scan_points - 1);
    vals[i] = bound_of_alpha(grid[i]);
  }
  const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
  if (*mx - *mn <= 1e-15 * std::max(1.0, std::abs(*mn))) {
    OptimizationResult r;
    r.argopt = 0.5;
    r.value = bound_of_alpha(0.5);
    r.iterations = scan_points;
    r.bracket = {kLo, kHi};
    return r;
  }
  const auto best = static_cast<std::size_t>(mn - vals.begin());
  const double a = grid[best == 0 ? 0 : best - 1];
  const double b = grid[best + 1 == scan_points ? best : best + 1];
  auto r = golden_section_minimize(bound_of_alpha, a, b, 1e-13, 1e-12);
  r.iterations += scan_points;
  if (vals[best] < r.value) {
    r.argopt = grid[best];
    r.value = vals[best];
  }
  r.bracket = {a, b};
  return r;
}

enum class TruncationMode { DefaultRule, NumericScan };

struct TruncationArgs {
  double x = 0.0;  // per-unit deviation in the default rule y = 3nx/(2p ln n)
  double n = 0.0;
  double p = 2.0;
};

inline double default_truncation_y(const TruncationArgs& args) {
  detail::require(args.n >= 3.0, "default truncation rule needs n >= 3 (ln n > 1)");
  detail::require(args.x > 0.0 && args.p > 0.0, "default truncation rule needs x > 0, p > 0");
  return 3.0 * args.n * args.x / (2.0 * args.p * std::log(args.n));
}

/// Chooses the truncation level y for the Fuk-Nagaev / weak-moment bounds.
///
/// NumericScan searches a log grid spanning three decades either side of a
/// reference level (the default-rule y when n >= 3, else x), always includes
/// the default-rule point itself, and refines the best cell by golden section
/// in log y.
template <typename F>
OptimizationResult optimize_truncation_y(F&& bound_of_y, const TruncationArgs& args,
                                         TruncationMode mode, std::size_t scan_points = 256) {
  if (mode == TruncationMode::DefaultRule) {
    const double y = default_truncation_y(args);
    OptimizationResult r;
    r.argopt = y;
    r.value = bound_of_y(y);
    r.iterations = 1;
    r.bracket = {y, y};
    return r;
  }
  detail::require(args.x > 0.0, "optimize_truncation_y: x must be > 0");
  const bool has_default = args.n >= 3.0;
  const double ref = has_default ? default_truncation_y(args) : args.x;
  const double log_lo = std::log(ref / 1e3);
  const double log_hi = std::log(ref * 1e3);
  if (scan_points < 3) scan_points = 3;
  std::vector<double> logs(scan_points);
  std::vector<double> vals(scan_points);
  std::size_t best = 0;
  for (std::size_t i = 0; i < scan_points; ++i) {
    logs[i] = log_lo + (log_hi - log_lo) * static_cast<double>(i) / static_cast<double>(scan_points - 1);
    vals[i] = bound_of_y(std::exp(logs[i]));
    if (vals[i] < vals[best]) best = i;
  }
  const double a = logs[best == 0 ? 0 : best - 1];
  const double b = logs[best + 1 == scan_points ? best : best + 1];
  auto r = golden_section_minimize([&](double ly) { return bound_of_y(std::exp(ly)); }, a, b,
                                   1e-12, 1e-13);
  r.argopt = std::exp(r.argopt);
  r.iterations += scan_points;
  if (vals[best] < r.value) {
    r.argopt = std::exp(logs[best]);
    r.value = vals[best];
  }
  if (has_default) {
    const double v = bound_of_y(ref);
    if (v < r.value) {
      r.argopt = ref;
      r.value = v;
    }
  }
  r.bracket = {std::exp(log_lo), std::exp(log_hi)};
  return r;
}

}  // namespace nadev
