#pragma once
// Monte Carlo estimation of the probabilities and expectations the bounds and
// the comparison inequalities speak about, with checks at 3 sigma.
//
// Replicates are spread over worker threads in contiguous blocks; results are
// stored per replicate and reduced in replicate order, so every estimate is a
// function of (model, seed, reps) only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "nadev/bounds.hpp"
#include "nadev/errors.hpp"
#include "nadev/sampler.hpp"

namespace nadev {

enum class Statistic { MaxPrefix, FinalSum, Expectation };

inline std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::MaxPrefix: return "MaxPrefix";
    case Statistic::FinalSum: return "FinalSum";
    case Statistic::Expectation: return "Expectation";
  }
  return "?";
}

/// Runs f(rep) for rep in [0, reps) on up to `threads` workers (0 = hardware
/// concurrency) and returns the results in replicate order.
template <typename T, typename F>
std::vector<T> map_replicates(std::uint64_t reps, unsigned threads, F&& f) {
  std::vector<T> out(reps);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(reps, 1)));
  if (workers <= 1) {
    for (std::uint64_t r = 0; r < reps; ++r) out[r] = f(r);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = reps * w / workers;
    const std::uint64_t end = reps * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        for (std::uint64_t r = begin; r < end; ++r) out[r] = f(r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

struct TailEstimate {
  double x = 0.0;
  std::size_t n = 0;
  Statistic statistic = Statistic::MaxPrefix;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
  std::uint64_t hits = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;  // Clopper-Pearson 95%
  double ci_high = 0.0;
  double se = 0.0;  // sqrt(p_hat (1 - p_hat) / reps)
  double ci_low_3sigma = 0.0;
  double ci_high_3sigma = 0.0;
};

/// Exact two-sided binomial interval at the given confidence.
inline std::pair<double, double> clopper_pearson(std::uint64_t hits, std::uint64_t reps, double confidence = 0.95) {
  detail::require(reps > 0 && hits <= reps, "Clopper-Pearson: need 0 <= hits <= reps, reps > 0");
  const double tail = 0.5 * (1.0 - confidence);
  const auto h = static_cast<double>(hits);
  const auto n = static_cast<double>(reps);
  using boost::math::beta_distribution;
  const double lo = hits == 0 ? 0.0 : boost::math::quantile(beta_distribution<double>(h, n - h + 1.0), tail);
  const double hi = hits == reps ? 1.0 : boost::math::quantile(beta_distribution<double>(h + 1.0, n - h), 1.0 - tail);
  return {lo, hi};
}

inline TailEstimate tail_estimate_from_hits(double x, std::size_t n, Statistic stat, std::uint64_t reps,
                                            std::uint64_t seed, std::uint64_t hits) {
  TailEstimate e;
  e.x = x;
  e.n = n;
  e.statistic = stat;
  e.reps = reps;
  e.seed = seed;
  e.hits = hits;
  e.p_hat = static_cast<double>(hits) / static_cast<double>(reps);
  std::tie(e.ci_low, e.ci_high) = clopper_pearson(hits, reps);
  e.se = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(reps));
  e.ci_low_3sigma = std::max(0.0, e.p_hat - 3.0 * e.se);
  e.ci_high_3sigma = std::min(1.0, e.p_hat + 3.0 * e.se);
  return e;
}

/// P(statistic >= x) for the NA model.
inline TailEstimate estimate_tail(const NAModel& model, double x, std::uint64_t reps, std::uint64_t seed,
                                  Statistic statistic, unsigned threads = 1) {
  detail::require(reps >= 1000, "estimate_tail: reps must be >= 1000");
  detail::require(statistic != Statistic::Expectation, "estimate_tail: statistic must be MaxPrefix or FinalSum");
  detail::require(!std::isnan(x), "estimate_tail: x is NaN");
  const auto flags = map_replicates<std::uint8_t>(reps, threads, [&](std::uint64_t rep) -> std::uint8_t {
    const auto p = sample_na_path(model, seed, rep);
    const double s = statistic == Statistic::MaxPrefix ? p.running_max : p.prefix_sums.back();
    return s >= x ? 1 : 0;
  });
  std::uint64_t hits = 0;
  for (auto f : flags) hits += f;
  return tail_estimate_from_hits(x, model.n(), statistic, reps, seed, hits);
}

/// Same estimates for several thresholds from one set of replicates.
inline std::vector<TailEstimate> estimate_tails(const NAModel& model, const std::vector<double>& xs,
                                                std::uint64_t reps, std::uint64_t seed, Statistic statistic,
                                                unsigned threads = 1) {
  detail::require(reps >= 1000, "estimate_tail: reps must be >= 1000");
  detail::require(statistic != Statistic::Expectation, "estimate_tail: statistic must be MaxPrefix or FinalSum");
  const auto stats = map_replicates<double>(reps, threads, [&](std::uint64_t rep) {
    const auto p = sample_na_path(model, seed, rep);
    return statistic == Statistic::MaxPrefix ? p.running_max : p.prefix_sums.back();
  });
  std::vector<TailEstimate> out;
  out.reserve(xs.size());
  for (double x : xs) {
    std::uint64_t hits = 0;
    for (double s : stats) hits += s >= x ? 1 : 0;
    out.push_back(tail_estimate_from_hits(x, model.n(), statistic, reps, seed, hits));
  }
  return out;
}

// ---------------------------------------------------------------------------

struct ConvexTestFunction {
  enum class Kind { Exponential, ShiftedSquare, IdentityPlus };
  Kind kind = Kind::IdentityPlus;
  double param = 0.0;  // t for Exponential, a for ShiftedSquare

  double operator()(double x) const {
    switch (kind) {
      case Kind::Exponential: return std::exp(param * x);
      case Kind::ShiftedSquare: {
        const double d = std::max(x - param, 0.0);
        return d * d;
      }
      case Kind::IdentityPlus: return std::max(x, 0.0);
    }
    return 0.0;
  }

  bool nondecreasing() const { return kind != Kind::Exponential || param >= 0.0; }

  std::string name() const {
    switch (kind) {
      case Kind::Exponential: return "Exponential(" + format_param() + ")";
      case Kind::ShiftedSquare: return "ShiftedSquare(" + format_param() + ")";
      case Kind::IdentityPlus: return "IdentityPlus";
    }
    return "?";
  }

 private:
  std::string format_param() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", param);
    return buf;
  }
};

struct ConvexComparison {
  std::string function;
  bool use_max = false;
  double lhs_hat = 0.0;  // E f(S) under the NA model
  double rhs_hat = 0.0;  // E f(S*) under the independent copy
  double diff_hat = 0.0;  // mean of the paired differences lhs - rhs
  double diff_se = 0.0;
  double diff_ci_low = 0.0;  // diff_hat -/+ 3 diff_se
  double diff_ci_high = 0.0;
  bool pass = false;  // lhs_hat <= rhs_hat + 3 diff_se
};

/// E f(S_n) <= E f(S_n*) (or the running-maximum version) with NA and
/// independent replicates paired by seed.
inline ConvexComparison convex_comparison(const NAModel& model, const ConvexTestFunction& f, std::uint64_t reps,
                                          std::uint64_t seed, bool use_max, unsigned threads = 1) {
  detail::require(reps >= 2, "convex_comparison: reps must be >= 2");
  detail::require(!use_max || f.nondecreasing(), "convex_comparison: the maximum version needs nondecreasing f");
  struct Pair {
    double lhs, rhs;
  };
  const auto pairs = map_replicates<Pair>(reps, threads, [&](std::uint64_t rep) {
    const auto a = sample_na_path(model, seed, rep);
    const auto b = sample_independent_path(model, seed, rep);
    const double sa = use_max ? a.running_max : a.prefix_sums.back();
    const double sb = use_max ? b.running_max : b.prefix_sums.back();
    const Pair p{f(sa), f(sb)};
    if (!std::isfinite(p.lhs) || !std::isfinite(p.rhs)) {
      throw DivergenceError("convex_comparison: f overflowed on a sample path; reduce the exponential rate");
    }
    return p;
  });
  double sl = 0.0, sr = 0.0, sd = 0.0, sd2 = 0.0;
  for (const auto& p : pairs) {
    sl += p.lhs;
    sr += p.rhs;
    const double d = p.lhs - p.rhs;
    sd += d;
    sd2 += d * d;
  }
  const auto n = static_cast<double>(reps);
  ConvexComparison c;
  c.function = f.name();
  c.use_max = use_max;
  c.lhs_hat = sl / n;
  c.rhs_hat = sr / n;
  c.diff_hat = sd / n;
  const double var = std::max(0.0, (sd2 - sd * sd / n) / (n - 1.0));
  c.diff_se = std::sqrt(var / n);
  c.diff_ci_low = c.diff_hat - 3.0 * c.diff_se;
  c.diff_ci_high = c.diff_hat + 3.0 * c.diff_se;
  c.pass = c.lhs_hat <= c.rhs_hat + 3.0 * c.diff_se;
  return c;
}

// ---------------------------------------------------------------------------

struct DominationVerdict {
  std::string bound;
  bool dominated = false;
  double margin = 0.0;  // raw_value - p_hat
};

/// The statistic a bound speaks about: the Hoeffding-Azuma form controls the
/// final sum, every other family the running maximum.
inline Statistic statistic_for(const BoundResult& b) {
  return b.family == BoundFamily::HoeffdingAzuma ? Statistic::FinalSum : Statistic::MaxPrefix;
}

inline std::string bound_label(const BoundResult& b) {
  std::string s{to_string(b.family)};
  if (!b.form.empty()) s += ":" + b.form;
  return s;
}

/// dominated iff estimate.ci_high_3sigma <= raw_value.
inline std::vector<DominationVerdict> domination_report(const std::vector<BoundResult>& bounds,
                                                        const TailEstimate& estimate) {
  std::vector<DominationVerdict> out;
  out.reserve(bounds.size());
  for (const auto& b : bounds) {
    const auto x = b.inputs.find("x");
    if (x == b.inputs.end() || std::abs(x->second - estimate.x) > 1e-12 * std::max(1.0, std::abs(estimate.x))) {
      throw MismatchError("domination_report: bound " + bound_label(b) + " is not evaluated at the estimate's x");
    }
    const auto n = b.inputs.find("n");
    if (n != b.inputs.end() && static_cast<std::size_t>(n->second) != estimate.n) {
      throw MismatchError("domination_report: bound " + bound_label(b) + " is for a different n");
    }
    if (statistic_for(b) != estimate.statistic) {
      throw MismatchError("domination_report: bound " + bound_label(b) + " needs statistic " +
                          std::string(to_string(statistic_for(b))));
    }
    out.push_back({bound_label(b), estimate.ci_high_3sigma <= b.raw_value, b.raw_value - estimate.p_hat});
  }
  return out;
}

// ---------------------------------------------------------------------------

/// T_k = exp{t W_k - k t^2 sigma^2 / 2}, W a Gaussian walk with N(0, sigma^2)
/// steps; a nonnegative martingale with E T_1 = 1.
struct SupermartingaleSpec {
  double t = 0.0;
  double sigma = 1.0;
  std::size_t n = 1;
  double alpha = 0.5;
};

struct SupermartingaleReport {
  double lhs_hat = 0.0;  // E max_{i <= n} T_i^alpha
  double lhs_se = 0.0;
  double rhs_exact = 0.0;  // (E T_1)^alpha / (1 - alpha)
  bool pass = false;       // lhs_hat + 3 lhs_se <= rhs_exact
};

inline SupermartingaleReport supermartingale_max_moment(const SupermartingaleSpec& spec, std::uint64_t reps,
                                                        std::uint64_t seed, unsigned threads = 1) {
  detail::require(spec.alpha > 0.0 && spec.alpha < 1.0, "supermartingale: alpha must lie in (0, 1)");
  detail::require(spec.n >= 1 && spec.sigma > 0.0, "supermartingale: need n >= 1 and sigma > 0");
  detail::require(reps >= 2, "supermartingale: reps must be >= 2");
  const double drift = 0.5 * spec.t * spec.t * spec.sigma * spec.sigma;
  const auto vals = map_replicates<double>(reps, threads, [&](std::uint64_t rep) {
    CounterRng rng(seed, rep, 0);
    double w = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= spec.n; ++k) {
      w += spec.sigma * rng.normal();
      best = std::max(best, spec.t * w - static_cast<double>(k) * drift);
    }
    return std::exp(spec.alpha * best);
  });
  double s = 0.0, s2 = 0.0;
  for (double v : vals) {
    s += v;
    s2 += v * v;
  }
  const auto n = static_cast<double>(reps);
  SupermartingaleReport r;
  r.lhs_hat = s / n;
  r.lhs_se = std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1.0)) / n);
  r.rhs_exact = 1.0 / (1.0 - spec.alpha);
  r.pass = r.lhs_hat + 3.0 * r.lhs_se <= r.rhs_exact;
  return r;
}

}  // namespace nadev
