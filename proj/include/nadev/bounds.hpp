#pragma once
// Closed-form deviation bounds for max_{k<=n} S_k (and S_n) of centered,
// negatively associated summands. Every evaluator is a pure function of the
// deviation x, its free parameters and the moment functionals it consumes.
//
// All bounds carry the factor (1 - alpha)^{-1} and the exponent scaling by
// alpha that come from the supermartingale maximal inequality
// E max T_i^alpha <= (E T_1)^alpha / (1 - alpha); alpha is always in (0, 1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nadev/errors.hpp"
#include "nadev/transforms.hpp"

namespace nadev {

enum class BoundFamily {
  FukNagaevH,
  Bennett,
  Bernstein1,
  FukNagaevTail,
  WeakMoment,
  FukPth,
  SemiExp,
  ExpMoment,
  BernsteinCond,
  Rio,
  HoeffdingAzuma,
};

inline std::string_view to_string(BoundFamily f) {
  switch (f) {
    case BoundFamily::FukNagaevH: return "FukNagaevH";
    case BoundFamily::Bennett: return "Bennett";
    case BoundFamily::Bernstein1: return "Bernstein1";
    case BoundFamily::FukNagaevTail: return "FukNagaevTail";
    case BoundFamily::WeakMoment: return "WeakMoment";
    case BoundFamily::FukPth: return "FukPth";
    case BoundFamily::SemiExp: return "SemiExp";
    case BoundFamily::ExpMoment: return "ExpMoment";
    case BoundFamily::BernsteinCond: return "BernsteinCond";
    case BoundFamily::Rio: return "Rio";
    case BoundFamily::HoeffdingAzuma: return "HoeffdingAzuma";
  }
  return "?";
}

struct ChosenParams {
  std::optional<double> alpha;
  std::optional<double> y;
  std::optional<double> t;
};

struct BoundResult {
  BoundFamily family = BoundFamily::FukNagaevH;
  std::string form;  // variant within the family; empty for single-form families
  std::map<std::string, double> inputs;
  ChosenParams chosen;
  double raw_value = 0.0;
  double clipped_value = 0.0;
  bool degenerate = false;
  std::string note;
  std::map<std::string, double> extras;  // e.g. branch values at a boundary, relaxations
};

namespace detail {

inline BoundResult finish(BoundFamily family, std::string form, std::map<std::string, double> inputs,
                          ChosenParams chosen, double raw) {
  BoundResult r;
  r.family = family;
  r.form = std::move(form);
  r.inputs = std::move(inputs);
  r.chosen = chosen;
  r.raw_value = std::max(raw, 0.0);
  r.clipped_value = std::min(1.0, r.raw_value);
  return r;
}

inline void require_alpha(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
}

inline double prefactor(double alpha) { return 1.0 / (1.0 - alpha); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Bennett-type family H_n <= B <= B_1

struct GaussianFamilyArgs {
  double x = 0.0;
  double v = 1.0;
  long n = 1;
  double alpha = 0.5;

  void validate() const {
    detail::require(std::isfinite(x) && x >= 0.0, "H_n: x must be >= 0");
    detail::require(std::isfinite(v) && v > 0.0, "H_n: v must be > 0");
    detail::require(n >= 1, "H_n: n must be >= 1");
    detail::require_alpha(alpha);
  }
};

/// log H_n(x, v); -inf when x > n.
inline double log_fuk_nagaev_h(const GaussianFamilyArgs& args) {
  args.validate();
  const double n = static_cast<double>(args.n);
  const double v2 = args.v * args.v;
  const double x = args.x;
  if (x > n) return -std::numeric_limits<double>::infinity();
  const double power = args.alpha * n / (n + v2);
  // (v^2/(x+v^2))^{x+v^2}
  const double first = -(x + v2) * std::log1p(x / v2);
  if (x == n) {
    // (n/(n-x))^{n-x} = (+inf)^0 = 1
    return power * first;
  }
  const double second = -(n - x) * std::log1p(-x / n);
  return power * (first + second);
}

inline double fuk_nagaev_h(const GaussianFamilyArgs& args) {
  return std::exp(log_fuk_nagaev_h(args));
}

inline double bennett_b(double x, double v, double alpha) {
  detail::require(std::isfinite(x) && x >= 0.0, "Bennett: x must be >= 0");
  detail::require(std::isfinite(v) && v > 0.0, "Bennett: v must be > 0");
  detail::require_alpha(alpha);
  const double v2 = v * v;
  return std::exp(alpha * (x - (x + v2) * std::log1p(x / v2)));
}

inline double bernstein_b1(double x, double v, double alpha) {
  detail::require(std::isfinite(x) && x >= 0.0, "Bernstein: x must be >= 0");
  detail::require(std::isfinite(v) && v > 0.0, "Bernstein: v must be > 0");
  detail::require_alpha(alpha);
  return std::exp(-alpha * x * x / (2.0 * (v * v + x / 3.0)));
}

enum class FukNagaevVariant { Hn, Bennett, Bernstein };

inline std::string_view to_string(FukNagaevVariant v) {
  switch (v) {
    case FukNagaevVariant::Hn: return "Hn";
    case FukNagaevVariant::Bennett: return "Bennett";
    case FukNagaevVariant::Bernstein: return "Bernstein";
  }
  return "?";
}

/// (1-alpha)^{-1} F(alpha x / y, sqrt(B_n(y)) / y) + tail_term, with F one of
/// H_n, B, B_1. tail_term is P(max X_k > y) for the H_n variant and
/// sum_i P(X_i > y) for the other two (any upper bound of these is valid).
inline BoundResult fuk_nagaev_tail_bound(double x, double y, double alpha, long n, double B_n_y,
                                         double tail_term, FukNagaevVariant variant) {
  detail::require(x > 0.0 && std::isfinite(x), "Fuk-Nagaev: x must be > 0");
  detail::require(y > 0.0 && std::isfinite(y), "Fuk-Nagaev: y must be > 0");
  detail::require(B_n_y >= 0.0 && std::isfinite(B_n_y), "Fuk-Nagaev: B_n(y) must be >= 0");
  detail::require(tail_term >= 0.0, "Fuk-Nagaev: tail term must be >= 0");
  detail::require(n >= 1, "Fuk-Nagaev: n must be >= 1");
  detail::require_alpha(alpha);
  std::map<std::string, double> inputs{{"x", x},         {"y", y},
                                       {"alpha", alpha}, {"n", static_cast<double>(n)},
                                       {"B_n_y", B_n_y}, {"tail_term", tail_term}};
  const ChosenParams chosen{alpha, y, std::nullopt};
  const std::string form{to_string(variant)};
  if (B_n_y == 0.0) {
    auto r = detail::finish(BoundFamily::FukNagaevTail, form, std::move(inputs), chosen, tail_term);
    r.degenerate = true;
    r.note = "B_n(y) = 0: variance factor undefined, tail term returned alone";
    return r;
  }
  const double arg = alpha * x / y;
  const double v = std::sqrt(B_n_y) / y;
  double f = 0.0;
  switch (variant) {
    case FukNagaevVariant::Hn: f = fuk_nagaev_h({arg, v, n, alpha}); break;
    case FukNagaevVariant::Bennett: f = bennett_b(arg, v, alpha); break;
    case FukNagaevVariant::Bernstein: f = bernstein_b1(arg, v, alpha); break;
  }
  return detail::finish(BoundFamily::FukNagaevTail, form, std::move(inputs), chosen,
                        detail::prefactor(alpha) * f + tail_term);
}

/// Weak-moment bound: (1-alpha)^{-1} H_n(alpha x/y, sqrt(B_n)/y) + A(p)/y^p.
inline BoundResult weak_moment_tail_bound(double x, double y, double alpha, long n, double B_n,
                                          double A_p, double p) {
  detail::require(x > 0.0 && std::isfinite(x), "weak-moment: x must be > 0");
  detail::require(y > 0.0 && std::isfinite(y), "weak-moment: y must be > 0");
  detail::require(p >= 2.0, "weak-moment: p must be >= 2");
  detail::require(B_n >= 0.0 && A_p >= 0.0, "weak-moment: B_n and A(p) must be >= 0");
  detail::require(n >= 1, "weak-moment: n must be >= 1");
  detail::require_alpha(alpha);
  std::map<std::string, double> inputs{{"x", x},     {"y", y},     {"alpha", alpha},
                                       {"n", static_cast<double>(n)}, {"B_n", B_n},
                                       {"A_p", A_p}, {"p", p}};
  const double tail = A_p / std::pow(y, p);
  const ChosenParams chosen{alpha, y, std::nullopt};
  if (B_n == 0.0) {
    auto r = detail::finish(BoundFamily::WeakMoment, "", std::move(inputs), chosen, tail);
    r.degenerate = true;
    r.note = "B_n = 0: variance factor undefined, weak-moment term returned alone";
    return r;
  }
  const double h = fuk_nagaev_h({alpha * x / y, std::sqrt(B_n) / y, n, alpha});
  return detail::finish(BoundFamily::WeakMoment, "", std::move(inputs), chosen,
                        detail::prefactor(alpha) * h + tail);
}

/// Fuk-type bound under finite p-th moments.
inline BoundResult fuk_tail_bound(double x, double alpha, double p, double B_n, double V_n) {
  detail::require(x > 0.0, "Fuk: x must be > 0");
  detail::require(p >= 2.0, "Fuk: p must be >= 2");
  detail::require(B_n > 0.0 && V_n > 0.0, "Fuk: B_n and V_n must be > 0");
  detail::require_alpha(alpha);
  const double poly = std::pow(1.0 + 2.0 / p, p) * V_n / (std::pow(alpha, p) * std::pow(x, p));
  const double gauss =
      std::exp(-alpha * 2.0 * x * x / ((p + 2.0) * (p + 2.0) * std::exp(p) * B_n));
  return detail::finish(BoundFamily::FukPth, "",
                        {{"x", x}, {"alpha", alpha}, {"p", p}, {"B_n", B_n}, {"V_n", V_n}},
                        {alpha, std::nullopt, std::nullopt},
                        detail::prefactor(alpha) * (poly + gauss));
}

enum class SemiExpForm { Piecewise, Smoothed };

inline std::string_view to_string(SemiExpForm f) {
  return f == SemiExpForm::Piecewise ? "Piecewise" : "Smoothed";
}

/// Semi-exponential bound for p in (0,1) under sum E[X_i^2 exp|X_i|^p] <= K_n.
/// At the breakpoint alpha x = K_n^{1/(2-p)} both branches apply and the
/// smaller one is returned.
inline BoundResult semi_exponential_tail_bound(double x, double alpha, double p, double K_n,
                                               SemiExpForm form) {
  detail::require(x > 0.0 && std::isfinite(x), "semi-exponential: x must be > 0");
  detail::require(p > 0.0 && p < 1.0, "semi-exponential: p must lie in (0, 1)");
  detail::require(K_n >= 1.0, "semi-exponential: K_n must be >= 1");
  detail::require_alpha(alpha);
  const double pre = 2.0 * detail::prefactor(alpha);
  const double ax = alpha * x;
  double raw = 0.0;
  std::map<std::string, double> extras;
  if (form == SemiExpForm::Smoothed) {
    raw = pre * std::exp(-ax * ax / (2.0 * (K_n + std::pow(ax, 2.0 - p))));
  } else {
    const double brk = std::pow(K_n, 1.0 / (2.0 - p));
    const double sub_gauss = pre * std::exp(-ax * ax / (2.0 * K_n));
    const double semi = pre * std::exp(-std::pow(ax, p) / 2.0);
    extras["breakpoint_alpha_x"] = brk;
    if (ax < brk) {
      raw = sub_gauss;
    } else if (ax > brk) {
      raw = semi;
    } else {
      raw = std::min(sub_gauss, semi);
      extras["branch_sub_gaussian"] = sub_gauss;
      extras["branch_semi_exponential"] = semi;
    }
  }
  auto r = detail::finish(BoundFamily::SemiExp, std::string(to_string(form)),
                          {{"x", x}, {"alpha", alpha}, {"p", p}, {"K_n", K_n}},
                          {alpha, std::nullopt, std::nullopt}, raw);
  r.extras = std::move(extras);
  return r;
}

// ---------------------------------------------------------------------------
// Exponential moments E exp{a|X|^p} < inf, p > 1

struct ExpMomentConstants {
  double p = 2.0;
  double q = 2.0;
  double a = 1.0;
  double K = 0.0;
  double tau = 0.0;
  double tau1 = 0.0;
  double t1 = 0.0;
  double x1 = 0.0;
  double A = 0.0;
  double B = 0.0;
  double a1 = 0.0;
  double K1 = 0.0;
  double c = 0.0;  // K (2/a)^{1/(p-1)}, the coefficient in 1 + K + c t^q e^{tau t^q}
};

namespace detail {

inline double log_add_exp(double u, double v) {
  const double hi = std::max(u, v);
  const double lo = std::min(u, v);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace detail

/// Solves for the constants of the exponential-moment bound.
///
/// tau and a1 come from (q tau)^{1/q} (p a)^{1/p} = 1 (and the same with tau1,
/// a1). t1 is the smallest t >= a/2 with 1 + K + c t^q e^{tau t^q} <= e^{tau1 t^q},
/// located on a geometric grid (ratio 1.25) and refined by bisection; the
/// search is capped at t = 1e6 a. B is inf_{s in (0, x1]} sup_{t in [0, t1]}
/// (t s - A t^2) / s^2 on a 200-point log grid in s, which depends only on
/// (A, t1, x1).
inline ExpMomentConstants exp_moment_constants(double p, double a, double K, double tau1_factor) {
  detail::require(p > 1.0, "exp-moment: p must be > 1");
  detail::require(a > 0.0, "exp-moment: a must be > 0");
  detail::require(K >= 0.0 && std::isfinite(K), "exp-moment: K must be finite and >= 0");
  detail::require(tau1_factor > 1.0, "exp-moment: tau1 factor must be > 1");
  ExpMomentConstants c;
  c.p = p;
  c.q = p / (p - 1.0);
  c.a = a;
  c.K = K;
  c.tau = std::pow(p * a, -c.q / p) / c.q;
  c.tau1 = tau1_factor * c.tau;
  c.a1 = std::pow(c.q * c.tau1, -p / c.q) / p;
  c.c = K * std::pow(2.0 / a, 1.0 / (p - 1.0));

  const double log1pK = std::log1p(K);
  auto margin = [&](double t) {
    const double tq = std::pow(t, c.q);
    const double lhs = c.c > 0.0
                           ? detail::log_add_exp(log1pK, std::log(c.c) + c.q * std::log(t) + c.tau * tq)
                           : log1pK;
    return c.tau1 * tq - lhs;
  };

  const double start = a / 2.0;
  const double cap = 1e6 * a;
  if (margin(start) >= 0.0) {
    c.t1 = start;
  } else {
    double lo = start;
    double hi = start;
    for (;;) {
      hi = lo * 1.25;
      if (hi > cap) {
        throw ConvergenceError("exp-moment: no t1 below 1e6*a; tau1 too close to tau");
      }
      if (margin(hi) >= 0.0) break;
      lo = hi;
    }
    for (int i = 0; i < 200 && (hi - lo) > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (margin(mid) >= 0.0 ? hi : lo) = mid;
    }
    c.t1 = hi;
  }

  c.x1 = c.q * c.tau1 * std::pow(c.t1, c.q - 1.0);
  c.K1 = std::exp(a) + K;
  c.A = std::max(2.0 * c.K1 / (a * a), 4.0 * c.tau1 * std::pow(c.t1, c.q) / (a * a));

  constexpr int kGrid = 200;
  double best = std::numeric_limits<double>::infinity();
  const double log_lo = std::log(1e-6 * c.x1);
  const double log_hi = std::log(c.x1);
  for (int i = 0; i < kGrid; ++i) {
    const double s = i + 1 == kGrid ? c.x1 : std::exp(log_lo + (log_hi - log_lo) * i / (kGrid - 1));
    const double t = std::min(s / (2.0 * c.A), c.t1);
    best = std::min(best, (t * s - c.A * t * t) / (s * s));
  }
  c.B = best;
  return c;
}

/// Upper bound on E exp{t S_n}; at t = t1 both branches apply and the smaller is returned.
inline double exp_moment_mgf_bound(double t, long n, const ExpMomentConstants& c) {
  detail::require(t >= 0.0, "exp-moment MGF: t must be >= 0");
  detail::require(n >= 1, "exp-moment MGF: n must be >= 1");
  const double nd = static_cast<double>(n);
  const double large = std::exp(nd * c.tau1 * std::pow(t, c.q));
  const double small = std::exp(nd * c.A * t * t);
  if (t > c.t1) return large;
  if (t < c.t1) return small;
  return std::min(large, small);
}

inline BoundResult exp_moment_tail_bound(double x, long n, double alpha, const ExpMomentConstants& c) {
  detail::require(x > 0.0 && std::isfinite(x), "exp-moment: x must be > 0");
  detail::require(n >= 1, "exp-moment: n must be >= 1");
  detail::require_alpha(alpha);
  const double nd = static_cast<double>(n);
  const double pre = detail::prefactor(alpha);
  const double boundary = nd * c.x1;
  const double large = pre * std::exp(-c.a1 * alpha * std::pow(x, c.p) / std::pow(nd, c.p - 1.0));
  const double moderate = pre * std::exp(-c.B * alpha * x * x / nd);
  std::map<std::string, double> extras{{"boundary_x", boundary}};
  double raw = 0.0;
  if (x > boundary) {
    raw = large;
  } else if (x < boundary) {
    raw = moderate;
  } else {
    raw = std::min(large, moderate);
    extras["branch_large"] = large;
    extras["branch_moderate"] = moderate;
    extras["branch_gap"] = std::abs(large - moderate);
  }
  auto r = detail::finish(BoundFamily::ExpMoment, "",
                          {{"x", x}, {"n", nd}, {"alpha", alpha}, {"p", c.p}, {"a", c.a}, {"K", c.K}},
                          {alpha, std::nullopt, std::nullopt}, raw);
  r.extras = std::move(extras);
  return r;
}

// ---------------------------------------------------------------------------
// Bernstein condition |sum E X_i^k| <= k! M^{k-2} B_n / 2

enum class BernsteinForm { Sharp, Simple };

inline std::string_view to_string(BernsteinForm f) {
  return f == BernsteinForm::Sharp ? "Sharp" : "Simple";
}

inline BoundResult bernstein_condition_tail_bound(double x, double alpha, double M, double B_n,
                                                  BernsteinForm form) {
  detail::require(x > 0.0 && std::isfinite(x), "Bernstein condition: x must be > 0");
  detail::require(M > 0.0, "Bernstein condition: M must be > 0");
  detail::require(B_n > 0.0, "Bernstein condition: B_n must be > 0");
  detail::require_alpha(alpha);
  const double denom = form == BernsteinForm::Sharp
                           ? B_n * (1.0 + std::sqrt(2.0 * x * M / B_n)) + x * M
                           : 2.0 * (B_n + x * M);
  return detail::finish(BoundFamily::BernsteinCond, std::string(to_string(form)),
                        {{"x", x}, {"alpha", alpha}, {"M", M}, {"B_n", B_n}},
                        {alpha, std::nullopt, std::nullopt},
                        detail::prefactor(alpha) * std::exp(-alpha * x * x / denom));
}

// ---------------------------------------------------------------------------
// Bounded summands m_i <= X_i <= M_i

/// l(t) = (t - ln t - 1) + t/(e^t - 1) + ln(1 - e^{-t}), evaluated literally.
/// Loses all relative precision as t -> 0; kept as the reference form.
inline double rio_ell_naive(double t) {
  return (t - std::log(t) - 1.0) + t / (std::exp(t) - 1.0) + std::log(1.0 - std::exp(-t));
}

/// Even power series of l about 0: sum_k B_k (k+1)/(k k!) t^k (Bernoulli B_k),
/// i.e. t^2/8 - t^4/576 + t^6/25920 - t^8/1075200 + ..., truncated after t^10.
/// Relative error stays below 1e-15 for t < 0.25.
inline double rio_ell_series(double t) {
  const double t2 = t * t;
  return t2 * (1.0 / 8.0 +
               t2 * (-1.0 / 576.0 + t2 * (1.0 / 25920.0 + t2 * (-1.0 / 1075200.0 +
                                                               t2 * (1.0 / 43545600.0)))));
}

inline double rio_ell(double t) {
  detail::require(t > 0.0 && !std::isnan(t), "l(t): t must be > 0");
  if (t < 0.25) return rio_ell_series(t);
  return (t - std::log(t) - 1.0) + t / std::expm1(t) + std::log(-std::expm1(-t));
}

/// l'(t) = 1 - 1/t + 2/(e^t - 1) - t e^t/(e^t - 1)^2; increasing from 0 to 1.
inline double rio_ell_derivative(double t) {
  detail::require(t > 0.0, "l'(t): t must be > 0");
  if (t < 1e-2) {
    const double t2 = t * t;
    return t * (1.0 / 4.0 + t2 * (-1.0 / 144.0 + t2 * (1.0 / 4320.0 + t2 * (-1.0 / 134400.0))));
  }
  const double em1 = std::expm1(t);
  return 1.0 - 1.0 / t + 2.0 / em1 - t / (em1 * -std::expm1(-t));
}

/// Young transform l*(x) = sup_{t>0} (x t - l(t)) for 0 <= x < 1.
///
/// The maximizer solves l'(t) = x; it is bracketed from t = 1 by doubling or
/// halving on the sign of x - l'(t), then located by golden section.
inline double rio_ell_star(double x) {
  detail::require(x >= 0.0 && x < 1.0, "l*(x): x must lie in [0, 1)");
  if (x == 0.0) return 0.0;
  double lo = 1.0;
  double hi = 1.0;
  if (rio_ell_derivative(1.0) < x) {
    while (rio_ell_derivative(hi) < x) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12) throw ConvergenceError("l*(x): maximizer not bracketed");
    }
  } else {
    while (rio_ell_derivative(lo) > x) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300) return 0.0;
    }
  }
  auto g = [x](double t) { return x * t - rio_ell(t); };
  const auto r = golden_section_maximize(g, lo, hi, 1e-300, 1e-12);
  return std::max(r.value, 0.0);
}

struct BoundedRangeSpec {
  std::vector<double> lower;
  std::vector<double> upper;

  void validate() const {
    detail::require(!lower.empty() && lower.size() == upper.size(),
                    "range: lower and upper must be nonempty and of equal length");
    for (std::size_t i = 0; i < lower.size(); ++i) {
      detail::require(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] <= upper[i],
                      "range: need finite m_i <= M_i");
    }
  }
  std::size_t size() const { return lower.size(); }
  /// M^2(n) = sum (M_i - m_i)^2
  double width_sq_sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i < lower.size(); ++i) s += (upper[i] - lower[i]) * (upper[i] - lower[i]);
    return s;
  }
  /// D(n) = sum (M_i - m_i)
  double width_sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i < lower.size(); ++i) s += upper[i] - lower[i];
    return s;
  }
  /// Delta(n) = max (M_i - m_i)
  double width_max() const {
    double s = 0.0;
    for (std::size_t i = 0; i < lower.size(); ++i) s = std::max(s, upper[i] - lower[i]);
    return s;
  }
};

/// exp{ D^2/M^2 * l(M^2 t / D) }, the bounded-range MGF bound.
inline double rio_mgf_bound(double t, const BoundedRangeSpec& range) {
  range.validate();
  detail::require(t >= 0.0 && std::isfinite(t), "range MGF: t must be >= 0");
  const double m2 = range.width_sq_sum();
  if (m2 == 0.0) throw DegenerateError("range MGF: all ranges have zero width");
  if (t == 0.0) return 1.0;
  const double d = range.width_sum();
  return std::exp(d * d / m2 * rio_ell(m2 * t / d));
}

enum class RioForm { YoungForm, ClosedForm, HoeffdingAzuma, DeltaForm };

inline std::string_view to_string(RioForm f) {
  switch (f) {
    case RioForm::YoungForm: return "YoungForm";
    case RioForm::ClosedForm: return "ClosedForm";
    case RioForm::HoeffdingAzuma: return "HoeffdingAzuma";
    case RioForm::DeltaForm: return "DeltaForm";
  }
  return "?";
}

/// Bounded-range tail bounds. YoungForm and ClosedForm hold on 0 <= x <= D(n),
/// DeltaForm on 0 <= x <= n Delta(n); HoeffdingAzuma (for S_n, alpha-free) on x >= 0.
inline BoundResult rio_tail_bound(double x, double alpha, const BoundedRangeSpec& range, RioForm form) {
  range.validate();
  detail::require_alpha(alpha);
  detail::require(std::isfinite(x) && x >= 0.0, "range bound: x must be >= 0");
  const double m2 = range.width_sq_sum();
  if (m2 == 0.0) throw DegenerateError("range bound: all ranges have zero width");
  const double d = range.width_sum();
  const double delta = range.width_max();
  const double n = static_cast<double>(range.size());
  std::map<std::string, double> inputs{{"x", x}, {"alpha", alpha}, {"n", n}, {"M2", m2}, {"D", d},
                                       {"Delta", delta}};
  const BoundFamily family =
      form == RioForm::HoeffdingAzuma ? BoundFamily::HoeffdingAzuma : BoundFamily::Rio;
  const ChosenParams chosen{form == RioForm::HoeffdingAzuma ? std::nullopt : std::optional{alpha},
                            std::nullopt, std::nullopt};
  double raw = 0.0;
  std::map<std::string, double> extras;
  switch (form) {
    case RioForm::YoungForm:
      detail::require(x <= d, "range bound: YoungForm needs x <= D(n)");
      raw = x == d ? 0.0
                   : detail::prefactor(alpha) * std::exp(-alpha * d * d / m2 * rio_ell_star(x / d));
      break;
    case RioForm::ClosedForm:
      detail::require(x <= d, "range bound: ClosedForm needs x <= D(n)");
      raw = x == d ? 0.0 : std::exp(alpha * x * (2.0 * d - x) / m2 * std::log1p(-x / d));
      break;
    case RioForm::HoeffdingAzuma:
      raw = std::exp(-2.0 * x * x / m2);
      break;
    case RioForm::DeltaForm: {
      const double cap = n * delta;
      detail::require(x <= cap, "range bound: DeltaForm needs x <= n Delta(n)");
      raw = x == cap ? 0.0 : std::exp(-alpha * n * rio_ell_star(x / cap));
      extras["relaxation"] = std::exp(-2.0 * alpha * x * x / (n * delta * delta));
      break;
    }
  }
  auto r = detail::finish(family, std::string(to_string(form)), std::move(inputs), chosen, raw);
  r.extras = std::move(extras);
  return r;
}

}  // namespace nadev
