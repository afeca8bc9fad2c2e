#pragma once
// Marginal laws of the summands and the moment functionals the bounds consume.
// Discrete and uniform laws use closed forms; Gaussian-type laws use closed
// forms where they exist and adaptive Gauss-Kronrod quadrature otherwise.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nadev/bounds.hpp"
#include "nadev/errors.hpp"
#include "nadev/transforms.hpp"

namespace nadev {

struct Atom {
  double value = 0.0;
  double prob = 0.0;
  bool operator==(const Atom&) const = default;
};

struct BoundedDiscrete {
  std::vector<Atom> support;
  bool operator==(const BoundedDiscrete&) const = default;
};
struct Uniform {
  double a = -1.0;
  double b = 1.0;
  bool operator==(const Uniform&) const = default;
};
struct CenteredGaussian {
  double sigma = 1.0;
  bool operator==(const CenteredGaussian&) const = default;
};
/// Centered Gaussian conditioned on |X| <= cut.
struct TruncatedCenteredGaussian {
  double sigma = 1.0;
  double cut = 1.0;
  bool operator==(const TruncatedCenteredGaussian&) const = default;
};
/// One uniformly chosen element of a finite population.
struct FinitePopulationValue {
  std::vector<double> population;
  bool operator==(const FinitePopulationValue&) const = default;
};

using DistributionKind =
    std::variant<BoundedDiscrete, Uniform, CenteredGaussian, TruncatedCenteredGaussian, FinitePopulationValue>;

struct DistributionSpec {
  DistributionKind kind;
  bool centered = true;

  void validate() const;
  bool operator==(const DistributionSpec&) const = default;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline constexpr double kSqrt2 = std::numbers::sqrt2;

inline std::vector<Atom> atoms_of(const FinitePopulationValue& pop) {
  std::map<double, double> merged;
  const double w = 1.0 / static_cast<double>(pop.population.size());
  for (double v : pop.population) merged[v] += w;
  std::vector<Atom> out;
  out.reserve(merged.size());
  for (const auto& [v, p] : merged) out.push_back({v, p});
  return out;
}

template <typename F>
double sum_atoms(const std::vector<Atom>& atoms, F&& f) {
  double s = 0.0;
  for (const auto& at : atoms) s += at.prob * f(at.value);
  return s;
}

inline double integrate(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13, &err);
}

/// Gaussian density of N(0, sigma^2).
inline double gauss_pdf(double x, double sigma) {
  const double z = x / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// P(Z > z) for standard normal Z.
inline double gauss_sf(double z) { return 0.5 * std::erfc(z / kSqrt2); }

/// Normalizer of the truncated law: P(|N(0, sigma^2)| <= cut).
inline double trunc_mass(const TruncatedCenteredGaussian& g) { return std::erf(g.cut / (g.sigma * kSqrt2)); }

/// 2 * int_0^upper h(x) dens(x) dx for a symmetric Gaussian-type law.
inline double symmetric_integral(const DistributionKind& kind, const std::function<double(double)>& h,
                                 double upper = std::numeric_limits<double>::infinity()) {
  if (const auto* g = std::get_if<CenteredGaussian>(&kind)) {
    const double hi = std::min(upper, 40.0 * g->sigma);
    if (hi <= 0.0) return 0.0;
    return 2.0 * integrate([&](double x) { return h(x) * gauss_pdf(x, g->sigma); }, 0.0, hi);
  }
  const auto& t = std::get<TruncatedCenteredGaussian>(kind);
  const double hi = std::min(upper, t.cut);
  if (hi <= 0.0) return 0.0;
  const double z = trunc_mass(t);
  return 2.0 * integrate([&](double x) { return h(x) * gauss_pdf(x, t.sigma) / z; }, 0.0, hi);
}

inline double double_factorial_odd(int k) {  // (k-1)!! for even k
  double r = 1.0;
  for (int j = k - 1; j > 1; j -= 2) r *= j;
  return r;
}

}  // namespace detail

inline DistributionSpec bounded_discrete(std::vector<Atom> support) {
  return {BoundedDiscrete{std::move(support)}, true};
}
inline DistributionSpec uniform_law(double a, double b) { return {Uniform{a, b}, a == -b}; }
inline DistributionSpec centered_gaussian(double sigma) { return {CenteredGaussian{sigma}, true}; }
inline DistributionSpec truncated_gaussian(double sigma, double cut) {
  return {TruncatedCenteredGaussian{sigma, cut}, true};
}
/// Population value; with center set the population mean is subtracted first.
inline DistributionSpec population_value(std::vector<double> values, bool center = true) {
  if (center && !values.empty()) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    for (double& v : values) v -= mean;
  }
  return {FinitePopulationValue{std::move(values)}, center};
}

inline double mean(const DistributionSpec& d) {
  return std::visit(
      detail::overloaded{
          [](const BoundedDiscrete& b) { return detail::sum_atoms(b.support, [](double v) { return v; }); },
          [](const Uniform& u) { return 0.5 * (u.a + u.b); },
          [](const CenteredGaussian&) { return 0.0; },
          [](const TruncatedCenteredGaussian&) { return 0.0; },
          [](const FinitePopulationValue& p) {
            return detail::sum_atoms(detail::atoms_of(p), [](double v) { return v; });
          },
      },
      d.kind);
}

inline void DistributionSpec::validate() const {
  std::visit(detail::overloaded{
                 [](const BoundedDiscrete& b) {
                   detail::require(!b.support.empty(), "discrete law: empty support");
                   double total = 0.0;
                   for (const auto& at : b.support) {
                     detail::require(std::isfinite(at.value), "discrete law: non-finite atom");
                     detail::require(at.prob >= 0.0, "discrete law: negative probability");
                     total += at.prob;
                   }
                   detail::require(std::abs(total - 1.0) <= 1e-12, "discrete law: probabilities must sum to 1");
                 },
                 [](const Uniform& u) { detail::require(u.a < u.b, "uniform law: need a < b"); },
                 [](const CenteredGaussian& g) { detail::require(g.sigma > 0.0, "Gaussian law: sigma must be > 0"); },
                 [](const TruncatedCenteredGaussian& g) {
                   detail::require(g.sigma > 0.0 && g.cut > 0.0, "truncated Gaussian: sigma and cut must be > 0");
                 },
                 [](const FinitePopulationValue& p) {
                   detail::require(!p.population.empty(), "population law: empty population");
                 },
             },
             kind);
  if (centered) {
    double scale = 1.0;
    if (const auto* p = std::get_if<FinitePopulationValue>(&kind)) {
      for (double v : p->population) scale = std::max(scale, std::abs(v));
    } else if (const auto* b = std::get_if<BoundedDiscrete>(&kind)) {
      for (const auto& at : b->support) scale = std::max(scale, std::abs(at.value));
    }
    detail::require(std::abs(mean(*this)) <= 1e-12 * scale, "law flagged centered has nonzero mean");
  }
}

/// Support interval [m, M] for bounded kinds.
inline std::optional<std::pair<double, double>> support_range(const DistributionSpec& d) {
  return std::visit(
      detail::overloaded{
          [](const BoundedDiscrete& b) -> std::optional<std::pair<double, double>> {
            const auto [lo, hi] = std::minmax_element(b.support.begin(), b.support.end(),
                                                      [](const Atom& l, const Atom& r) { return l.value < r.value; });
            return std::pair{lo->value, hi->value};
          },
          [](const Uniform& u) -> std::optional<std::pair<double, double>> { return std::pair{u.a, u.b}; },
          [](const CenteredGaussian&) -> std::optional<std::pair<double, double>> { return std::nullopt; },
          [](const TruncatedCenteredGaussian& t) -> std::optional<std::pair<double, double>> {
            return std::pair{-t.cut, t.cut};
          },
          [](const FinitePopulationValue& p) -> std::optional<std::pair<double, double>> {
            const auto [lo, hi] = std::minmax_element(p.population.begin(), p.population.end());
            return std::pair{*lo, *hi};
          },
      },
      d.kind);
}

/// E X^k for integer k >= 0.
inline double raw_moment(const DistributionSpec& d, int k) {
  detail::require(k >= 0, "raw moment: k must be >= 0");
  return std::visit(
      detail::overloaded{
          [k](const BoundedDiscrete& b) { return detail::sum_atoms(b.support, [k](double v) { return std::pow(v, k); }); },
          [k](const Uniform& u) {
            return (std::pow(u.b, k + 1) - std::pow(u.a, k + 1)) / ((k + 1) * (u.b - u.a));
          },
          [k](const CenteredGaussian& g) {
            return k % 2 == 1 ? 0.0 : std::pow(g.sigma, k) * detail::double_factorial_odd(k);
          },
          [k, &d](const TruncatedCenteredGaussian&) {
            if (k % 2 == 1) return 0.0;
            return detail::symmetric_integral(d.kind, [k](double x) { return std::pow(x, k); });
          },
          [k](const FinitePopulationValue& p) {
            return detail::sum_atoms(detail::atoms_of(p), [k](double v) { return std::pow(v, k); });
          },
      },
      d.kind);
}

inline double second_moment(const DistributionSpec& d) { return raw_moment(d, 2); }

/// E|X|^p for real p > 0.
inline double abs_moment(const DistributionSpec& d, double p) {
  detail::require(p > 0.0, "absolute moment: p must be > 0");
  return std::visit(
      detail::overloaded{
          [p](const BoundedDiscrete& b) {
            return detail::sum_atoms(b.support, [p](double v) { return std::pow(std::abs(v), p); });
          },
          [p](const Uniform& u) {
            auto prim = [p](double x) { return std::copysign(std::pow(std::abs(x), p + 1.0), x) / (p + 1.0); };
            return (prim(u.b) - prim(u.a)) / (u.b - u.a);
          },
          [p](const CenteredGaussian& g) {
            return std::pow(g.sigma, p) * std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) /
                   std::sqrt(std::numbers::pi);
          },
          [p, &d](const TruncatedCenteredGaussian&) {
            return detail::symmetric_integral(d.kind, [p](double x) { return std::pow(x, p); });
          },
          [p](const FinitePopulationValue& pop) {
            return detail::sum_atoms(detail::atoms_of(pop), [p](double v) { return std::pow(std::abs(v), p); });
          },
      },
      d.kind);
}

/// P(X > y).
inline double upper_tail(const DistributionSpec& d, double y) {
  return std::visit(
      detail::overloaded{
          [y](const BoundedDiscrete& b) { return detail::sum_atoms(b.support, [y](double v) { return v > y ? 1.0 : 0.0; }); },
          [y](const Uniform& u) { return std::clamp((u.b - y) / (u.b - u.a), 0.0, 1.0); },
          [y](const CenteredGaussian& g) { return detail::gauss_sf(y / g.sigma); },
          [y](const TruncatedCenteredGaussian& t) {
            if (y >= t.cut) return 0.0;
            if (y <= -t.cut) return 1.0;
            const double z = detail::trunc_mass(t);
            return (detail::gauss_sf(y / t.sigma) - detail::gauss_sf(t.cut / t.sigma)) / z;
          },
          [y](const FinitePopulationValue& p) {
            return detail::sum_atoms(detail::atoms_of(p), [y](double v) { return v > y ? 1.0 : 0.0; });
          },
      },
      d.kind);
}

/// P(|X| > x) for x >= 0.
inline double abs_survival(const DistributionSpec& d, double x) {
  return std::visit(
      detail::overloaded{
          [x](const BoundedDiscrete& b) {
            return detail::sum_atoms(b.support, [x](double v) { return std::abs(v) > x ? 1.0 : 0.0; });
          },
          [x](const Uniform& u) {
            const double w = u.b - u.a;
            return std::clamp((u.b - x) / w, 0.0, 1.0) + std::clamp((-x - u.a) / w, 0.0, 1.0);
          },
          [x](const CenteredGaussian& g) { return std::erfc(x / (g.sigma * detail::kSqrt2)); },
          [x](const TruncatedCenteredGaussian& t) {
            if (x >= t.cut) return 0.0;
            return (std::erfc(x / (t.sigma * detail::kSqrt2)) - std::erfc(t.cut / (t.sigma * detail::kSqrt2))) /
                   detail::trunc_mass(t);
          },
          [x](const FinitePopulationValue& p) {
            return detail::sum_atoms(detail::atoms_of(p), [x](double v) { return std::abs(v) > x ? 1.0 : 0.0; });
          },
      },
      d.kind);
}

/// E[X^2 1{X <= y}] (one-sided truncation), y > 0.
inline double truncated_second_moment(const DistributionSpec& d, double y) {
  detail::require(y > 0.0, "truncated second moment: y must be > 0");
  return std::visit(
      detail::overloaded{
          [y](const BoundedDiscrete& b) {
            return detail::sum_atoms(b.support, [y](double v) { return v <= y ? v * v : 0.0; });
          },
          [y](const Uniform& u) {
            if (y <= u.a) return 0.0;
            const double top = std::min(y, u.b);
            return (top * top * top - u.a * u.a * u.a) / (3.0 * (u.b - u.a));
          },
          [y, &d](const CenteredGaussian& g) {
            // negative half contributes sigma^2 / 2
            return 0.5 * g.sigma * g.sigma +
                   0.5 * detail::symmetric_integral(d.kind, [](double x) { return x * x; }, y);
          },
          [y, &d](const TruncatedCenteredGaussian&) {
            const double half = 0.5 * detail::symmetric_integral(d.kind, [](double x) { return x * x; });
            return half + 0.5 * detail::symmetric_integral(d.kind, [](double x) { return x * x; }, y);
          },
          [y](const FinitePopulationValue& p) {
            return detail::sum_atoms(detail::atoms_of(p), [y](double v) { return v <= y ? v * v : 0.0; });
          },
      },
      d.kind);
}

/// ||X||_{w,p}^p = sup_{x>0} x^p P(|X| > x).
///
/// Discrete laws: the supremum is a left limit at an atom, |v|^p P(|X| >= |v|).
/// Continuous laws: 4096-point log grid over [1e-6, 1e3] times the scale of X,
/// refined by golden section in log x. A maximum on the last grid point is
/// reported as divergence.
inline double weak_norm_p(const DistributionSpec& d, double p) {
  detail::require(p >= 1.0, "weak norm: p must be >= 1");
  auto discrete = [p](const std::vector<Atom>& atoms) {
    double best = 0.0;
    for (const auto& at : atoms) {
      const double a = std::abs(at.value);
      if (a == 0.0) continue;
      double mass = 0.0;
      for (const auto& other : atoms) {
        if (std::abs(other.value) >= a) mass += other.prob;
      }
      best = std::max(best, std::pow(a, p) * mass);
    }
    return best;
  };
  if (const auto* b = std::get_if<BoundedDiscrete>(&d.kind)) return discrete(b->support);
  if (const auto* pop = std::get_if<FinitePopulationValue>(&d.kind)) return discrete(detail::atoms_of(*pop));

  double scale = std::sqrt(second_moment(d));
  if (const auto r = support_range(d)) scale = std::max(std::abs(r->first), std::abs(r->second));
  constexpr int kGrid = 4096;
  const double lo = std::log(1e-6 * scale);
  const double hi = std::log(1e3 * scale);
  auto h = [&](double lx) {
    const double x = std::exp(lx);
    return std::pow(x, p) * abs_survival(d, x);
  };
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i < kGrid; ++i) {
    const double v = h(lo + (hi - lo) * i / (kGrid - 1));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best == kGrid - 1) throw DivergenceError("weak norm: supremum not attained on the scan (tail too heavy for p)");
  const double a = lo + (hi - lo) * std::max(best - 1, 0) / (kGrid - 1);
  const double b = lo + (hi - lo) * (best + 1) / (kGrid - 1);
  const auto r = golden_section_maximize(h, a, b, 1e-15, 1e-14);
  return std::max(r.value, best_val);
}

/// E[X^2 exp{|X|^p}], p in (0, 1).
inline double semi_exp_moment(const DistributionSpec& d, double p) {
  detail::require(p > 0.0 && p < 1.0, "semi-exponential moment: p must lie in (0, 1)");
  auto h = [p](double x) { return x * x * std::exp(std::pow(std::abs(x), p)); };
  return std::visit(
      detail::overloaded{
          [&](const BoundedDiscrete& b) { return detail::sum_atoms(b.support, h); },
          [&](const Uniform& u) {
            double s = 0.0;
            if (u.a < 0.0) s += detail::integrate(h, u.a, std::min(u.b, 0.0));
            if (u.b > 0.0) s += detail::integrate(h, std::max(u.a, 0.0), u.b);
            return s / (u.b - u.a);
          },
          [&](const CenteredGaussian&) { return detail::symmetric_integral(d.kind, h); },
          [&](const TruncatedCenteredGaussian&) { return detail::symmetric_integral(d.kind, h); },
          [&](const FinitePopulationValue& pop) { return detail::sum_atoms(detail::atoms_of(pop), h); },
      },
      d.kind);
}

/// E[exp{a |X|^p}], p > 1. Throws DivergenceError when infinite.
inline double exp_moment(const DistributionSpec& d, double a, double p) {
  detail::require(p > 1.0 && a > 0.0, "exponential moment: need p > 1, a > 0");
  auto h = [a, p](double x) { return std::exp(a * std::pow(std::abs(x), p)); };
  return std::visit(
      detail::overloaded{
          [&](const BoundedDiscrete& b) { return detail::sum_atoms(b.support, h); },
          [&](const Uniform& u) {
            double s = 0.0;
            if (u.a < 0.0) s += detail::integrate(h, u.a, std::min(u.b, 0.0));
            if (u.b > 0.0) s += detail::integrate(h, std::max(u.a, 0.0), u.b);
            return s / (u.b - u.a);
          },
          [&](const CenteredGaussian& g) {
            const double s2 = g.sigma * g.sigma;
            if (p > 2.0 || (p == 2.0 && a * s2 >= 0.5)) {
              throw DivergenceError("exponential moment: E exp{a|X|^p} is infinite for this Gaussian");
            }
            if (p == 2.0) return 1.0 / std::sqrt(1.0 - 2.0 * a * s2);
            const double c = 1.0 / (g.sigma * std::sqrt(2.0 * std::numbers::pi));
            return 2.0 * detail::integrate(
                             [&](double x) { return c * std::exp(a * std::pow(x, p) - 0.5 * x * x / s2); }, 0.0,
                             std::numeric_limits<double>::infinity());
          },
          [&](const TruncatedCenteredGaussian&) { return detail::symmetric_integral(d.kind, h); },
          [&](const FinitePopulationValue& pop) { return detail::sum_atoms(detail::atoms_of(pop), h); },
      },
      d.kind);
}

// ---------------------------------------------------------------------------

struct BernsteinReport {
  bool holds = false;
  int worst_k = 2;
  double worst_ratio = 0.0;
  int k_max = 2;  // the condition is certified only for 2 <= k <= k_max
};

/// Checks |sum_i E X_i^k| <= k! M^{k-2} B_n / 2 for k = 2..k_max.
inline BernsteinReport bernstein_condition_check(const std::vector<DistributionSpec>& dists, double M, int k_max) {
  detail::require(!dists.empty(), "Bernstein check: empty catalog");
  detail::require(M > 0.0, "Bernstein check: M must be > 0");
  detail::require(k_max >= 2, "Bernstein check: k_max must be >= 2");
  double bn = 0.0;
  for (const auto& d : dists) bn += second_moment(d);
  if (bn == 0.0) throw DegenerateError("Bernstein check: B_n = 0");
  BernsteinReport rep;
  rep.k_max = k_max;
  rep.worst_ratio = -1.0;
  for (int k = 2; k <= k_max; ++k) {
    double sk = 0.0;
    for (const auto& d : dists) sk += raw_moment(d, k);
    if (!std::isfinite(sk)) throw DivergenceError("Bernstein check: moment of order " + std::to_string(k) + " is infinite");
    const double log_rhs = std::log(0.5) + std::lgamma(k + 1.0) + (k - 2) * std::log(M) + std::log(bn);
    const double ratio = sk == 0.0 ? 0.0 : std::exp(std::log(std::abs(sk)) - log_rhs);
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_k = k;
    }
  }
  rep.holds = rep.worst_ratio <= 1.0 + 1e-12;
  return rep;
}

/// Smallest M for which the Bernstein condition holds for every k >= 2, for
/// bounded summands. Orders 3..k_cap are checked exactly; beyond k_cap the
/// bound |E X^k| <= R^{k-2} E X^2 (R = max |X|) certifies the rest.
inline std::optional<double> bernstein_M_certificate(const std::vector<DistributionSpec>& dists, int k_cap = 40) {
  double R = 0.0;
  double bn = 0.0;
  for (const auto& d : dists) {
    const auto r = support_range(d);
    if (!r) return std::nullopt;
    R = std::max({R, std::abs(r->first), std::abs(r->second)});
    bn += second_moment(d);
  }
  if (bn == 0.0) return std::nullopt;
  double M = R * std::exp((std::log(2.0) - std::lgamma(k_cap + 2.0)) / (k_cap - 1));
  for (int k = 3; k <= k_cap; ++k) {
    double sk = 0.0;
    for (const auto& d : dists) sk += raw_moment(d, k);
    if (sk == 0.0) continue;
    const double mk = std::exp((std::log(std::abs(sk)) - std::log(0.5) - std::lgamma(k + 1.0) - std::log(bn)) / (k - 2));
    M = std::max(M, mk);
  }
  return M;
}

struct MomentSummary {
  std::size_t n = 0;
  std::vector<std::pair<double, double>> B_n_of_y;       // y -> sum E[X_i^2 1{X_i <= y}]
  std::vector<std::pair<double, double>> tail_sum_of_y;  // y -> sum P(X_i > y)
  double B_n = 0.0;
  double p_fuk = 2.0;
  double V_n = 0.0;  // sum E|X_i|^p_fuk
  double A_p = 0.0;  // sum ||X_i||_{w,p_fuk}^p_fuk
  double p_semi = 0.5;
  std::optional<double> K_n;  // sum E[X_i^2 exp|X_i|^p_semi]
  double p_exp = 2.0;
  double a = 0.0;
  std::optional<double> K_exp;  // sum E exp{a |X_i|^p_exp}
  std::optional<double> bernstein_M;
  std::optional<BoundedRangeSpec> range;
  std::vector<std::string> divergences;
};

inline double truncated_second_moment_sum(const std::vector<DistributionSpec>& dists, double y) {
  double s = 0.0;
  for (const auto& d : dists) s += truncated_second_moment(d, y);
  return s;
}

inline double upper_tail_sum(const std::vector<DistributionSpec>& dists, double y) {
  double s = 0.0;
  for (const auto& d : dists) s += upper_tail(d, y);
  return s;
}

inline MomentSummary moment_summary(const std::vector<DistributionSpec>& dists, double p_fuk, double p_semi,
                                    double p_exp, double a, const std::vector<double>& y_grid) {
  detail::require(!dists.empty(), "moment summary: empty catalog");
  detail::require(p_fuk >= 2.0, "moment summary: p for Fuk-type functionals must be >= 2");
  detail::require(p_semi > 0.0 && p_semi < 1.0, "moment summary: semi-exponential p must lie in (0, 1)");
  detail::require(p_exp > 1.0 && a > 0.0, "moment summary: need p_exp > 1 and a > 0");
  for (const auto& d : dists) d.validate();

  MomentSummary s;
  s.n = dists.size();
  s.p_fuk = p_fuk;
  s.p_semi = p_semi;
  s.p_exp = p_exp;
  s.a = a;
  for (double y : y_grid) {
    s.B_n_of_y.emplace_back(y, truncated_second_moment_sum(dists, y));
    s.tail_sum_of_y.emplace_back(y, upper_tail_sum(dists, y));
  }
  double kn = 0.0;
  double kexp = 0.0;
  bool kn_ok = true;
  bool kexp_ok = true;
  for (const auto& d : dists) {
    s.B_n += second_moment(d);
    s.V_n += abs_moment(d, p_fuk);
    try {
      s.A_p += weak_norm_p(d, p_fuk);
    } catch (const DivergenceError& e) {
      s.divergences.emplace_back(std::string("A_p: ") + e.what());
    }
    if (kn_ok) {
      try {
        kn += semi_exp_moment(d, p_semi);
      } catch (const DivergenceError& e) {
        kn_ok = false;
        s.divergences.emplace_back(std::string("K_n: ") + e.what());
      }
    }
    if (kexp_ok) {
      try {
        kexp += exp_moment(d, a, p_exp);
      } catch (const DivergenceError& e) {
        kexp_ok = false;
        s.divergences.emplace_back(std::string("K_exp: ") + e.what());
      }
    }
  }
  if (kn_ok) s.K_n = kn;
  if (kexp_ok) s.K_exp = kexp;

  BoundedRangeSpec range;
  bool bounded = true;
  for (const auto& d : dists) {
    const auto r = support_range(d);
    if (!r) {
      bounded = false;
      break;
    }
    range.lower.push_back(r->first);
    range.upper.push_back(r->second);
  }
  if (bounded) {
    s.range = std::move(range);
    s.bernstein_M = bernstein_M_certificate(dists);
  }
  return s;
}

/// A catalog of summand laws with identical laws grouped, and the per-law
/// functionals memoized. Not safe for concurrent use.
class MomentCatalog {
 public:
  explicit MomentCatalog(std::vector<DistributionSpec> dists) : all_(std::move(dists)) {
    detail::require(!all_.empty(), "moment catalog: empty catalog");
    for (const auto& d : all_) {
      d.validate();
      auto it = std::find_if(groups_.begin(), groups_.end(), [&](const auto& g) { return g.first == d; });
      if (it == groups_.end()) {
        groups_.emplace_back(d, 1);
      } else {
        ++it->second;
      }
    }
  }

  std::size_t n() const { return all_.size(); }
  const std::vector<DistributionSpec>& distributions() const { return all_; }

  double B_n() const {
    return memo("B_n", 0.0, 0.0, [](const DistributionSpec& d) { return second_moment(d); });
  }
  double B_n_of_y(double y) const {
    return memo("B_n_y", y, 0.0, [y](const DistributionSpec& d) { return truncated_second_moment(d, y); });
  }
  /// sum_i P(X_i > y)
  double tail_sum(double y) const {
    return memo("tail", y, 0.0, [y](const DistributionSpec& d) { return upper_tail(d, y); });
  }
  double V_n(double p) const {
    return memo("V_n", p, 0.0, [p](const DistributionSpec& d) { return abs_moment(d, p); });
  }
  double A_p(double p) const {
    return memo("A_p", p, 0.0, [p](const DistributionSpec& d) { return weak_norm_p(d, p); });
  }
  double K_n(double p) const {
    return memo("K_n", p, 0.0, [p](const DistributionSpec& d) { return semi_exp_moment(d, p); });
  }
  double K_exp(double a, double p) const {
    return memo("K_exp", a, p, [a, p](const DistributionSpec& d) { return exp_moment(d, a, p); });
  }

  std::optional<double> bernstein_M() const {
    if (!M_) M_ = bernstein_M_certificate(all_);
    return *M_;
  }

  std::optional<BoundedRangeSpec> range() const {
    BoundedRangeSpec r;
    for (const auto& d : all_) {
      const auto s = support_range(d);
      if (!s) return std::nullopt;
      r.lower.push_back(s->first);
      r.upper.push_back(s->second);
    }
    return r;
  }

 private:
  template <typename F>
  double memo(const char* what, double k1, double k2, F&& f) const {
    const auto key = std::make_tuple(std::string(what), k1, k2);
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    double s = 0.0;
    for (const auto& [d, count] : groups_) s += static_cast<double>(count) * f(d);
    cache_.emplace(key, s);
    return s;
  }

  std::vector<DistributionSpec> all_;
  std::vector<std::pair<DistributionSpec, std::size_t>> groups_;
  mutable std::map<std::tuple<std::string, double, double>, double> cache_;
  mutable std::optional<std::optional<double>> M_;
};

}  // namespace nadev
