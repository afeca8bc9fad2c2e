#pragma once
// Negatively associated sequences from three classical families, and matched
// independent copies with the same marginals.
//
// Randomness is counter based: every (master seed, replicate, stream) triple
// names its own SplitMix64 sequence, so replicates can be generated in any
// order or on any thread with identical results.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "nadev/errors.hpp"
#include "nadev/moments.hpp"

namespace nadev {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t replicate, std::uint64_t stream)
      : state_(detail::splitmix(detail::splitmix(detail::splitmix(seed + detail::kGolden) ^ replicate) +
                                stream * detail::kGolden)) {}

  std::uint64_t next() {
    state_ += detail::kGolden;
    return detail::splitmix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  /// Unbiased integer in [0, n), Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t n) {
    __uint128_t m = static_cast<__uint128_t>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = -n % n;
      while (low < threshold) {
        m = static_cast<__uint128_t>(next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal by Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SamplingWithoutReplacement {
  std::vector<double> population;  // already centered
  std::size_t n_draw = 0;
};

struct MultinomialCounts {
  long trials = 0;
  std::vector<double> probs;
  std::vector<double> cumulative;  // cumulative[i] = probs[0] + ... + probs[i]
};

struct GaussianNegCov {
  std::size_t dim = 0;
  std::vector<double> cov;     // row-major dim x dim
  std::vector<double> factor;  // lower triangular L with L L^T = cov
};

using NAModelKind = std::variant<SamplingWithoutReplacement, MultinomialCounts, GaussianNegCov>;

struct NAModel {
  NAModelKind kind;
  std::string name;

  std::size_t n() const;
};

struct SamplePath {
  std::vector<double> values;
  std::vector<double> prefix_sums;  // S_0 = 0, ..., S_n
  double running_max = 0.0;         // max_{1<=k<=n} S_k
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
};

inline std::size_t NAModel::n() const {
  return std::visit(detail::overloaded{
                        [](const SamplingWithoutReplacement& m) { return m.n_draw; },
                        [](const MultinomialCounts& m) { return m.probs.size(); },
                        [](const GaussianNegCov& m) { return m.dim; },
                    },
                    kind);
}

/// Lower-triangular L with L L^T = a for a symmetric positive semidefinite a
/// (row-major, dim x dim). No pivoting; a vanishing pivot zeroes its column,
/// which is consistent only when the rest of that column also vanishes.
inline std::vector<double> psd_cholesky(const std::vector<double>& a, std::size_t dim) {
  std::vector<double> L(dim * dim, 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < dim; ++i) scale = std::max(scale, std::abs(a[i * dim + i]));
  const double tol = 1e-12 * std::max(scale, 1e-300) * static_cast<double>(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    double d = a[j * dim + j];
    for (std::size_t k = 0; k < j; ++k) d -= L[j * dim + k] * L[j * dim + k];
    if (d < -tol) throw FactorizationError("covariance is not positive semidefinite (pivot " + std::to_string(j) + ")");
    const bool zero_pivot = d <= tol;
    const double ljj = zero_pivot ? 0.0 : std::sqrt(d);
    L[j * dim + j] = ljj;
    for (std::size_t i = j + 1; i < dim; ++i) {
      double s = a[i * dim + j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i * dim + k] * L[j * dim + k];
      if (zero_pivot) {
        if (std::abs(s) > std::sqrt(tol * std::max(scale, 1e-300))) {
          throw FactorizationError("covariance is not positive semidefinite (column " + std::to_string(j) + ")");
        }
        L[i * dim + j] = 0.0;
      } else {
        L[i * dim + j] = s / ljj;
      }
    }
  }
  return L;
}

/// Draws n_draw values without replacement; the population mean is subtracted
/// first so the draws are exactly centered.
inline NAModel sampling_without_replacement(std::vector<double> population, std::size_t n_draw,
                                            std::string name = "without_replacement") {
  detail::require(!population.empty(), "without-replacement model: empty population");
  detail::require(n_draw >= 1 && n_draw <= population.size(), "without-replacement model: need 1 <= n_draw <= N");
  double mean = 0.0;
  for (double v : population) mean += v;
  mean /= static_cast<double>(population.size());
  for (double& v : population) v -= mean;
  return {SamplingWithoutReplacement{std::move(population), n_draw}, std::move(name)};
}

/// Category counts of `trials` multinomial draws minus their expectations.
inline NAModel multinomial_counts(long trials, std::vector<double> probs, std::string name = "multinomial") {
  detail::require(trials >= 1, "multinomial model: trials must be >= 1");
  detail::require(!probs.empty(), "multinomial model: empty probability vector");
  double total = 0.0;
  for (double p : probs) {
    detail::require(p >= 0.0, "multinomial model: negative probability");
    total += p;
  }
  detail::require(std::abs(total - 1.0) <= 1e-12, "multinomial model: probabilities must sum to 1");
  std::vector<double> cum(probs.size());
  double c = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) cum[i] = (c += probs[i]);
  cum.back() = 1.0;
  return {MultinomialCounts{trials, std::move(probs), std::move(cum)}, std::move(name)};
}

/// Centered Gaussian vector with the given covariance (row-major). Every
/// off-diagonal entry must be <= 0, which makes the coordinates NA.
inline NAModel gaussian_neg_cov(std::vector<double> cov, std::size_t dim, std::string name = "gaussian_negcov") {
  detail::require(dim >= 1 && cov.size() == dim * dim, "Gaussian model: covariance must be dim x dim");
  for (std::size_t i = 0; i < dim; ++i) {
    detail::require(cov[i * dim + i] >= 0.0, "Gaussian model: negative variance");
    for (std::size_t j = 0; j < dim; ++j) {
      detail::require(std::isfinite(cov[i * dim + j]), "Gaussian model: non-finite covariance entry");
      detail::require(cov[i * dim + j] == cov[j * dim + i], "Gaussian model: covariance must be symmetric");
      if (i != j) detail::require(cov[i * dim + j] <= 0.0, "Gaussian model: off-diagonal covariances must be <= 0");
    }
  }
  auto L = psd_cholesky(cov, dim);
  return {GaussianNegCov{dim, std::move(cov), std::move(L)}, std::move(name)};
}

namespace detail {

inline SamplePath finish_path(std::vector<double> values, std::uint64_t seed, std::uint64_t rep) {
  SamplePath p;
  p.values = std::move(values);
  p.prefix_sums.resize(p.values.size() + 1);
  p.prefix_sums[0] = 0.0;
  p.running_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    p.prefix_sums[k + 1] = p.prefix_sums[k] + p.values[k];
    p.running_max = std::max(p.running_max, p.prefix_sums[k + 1]);
  }
  p.seed = seed;
  p.replicate = rep;
  return p;
}

/// floor(u * m) clamped to [0, m).
inline std::size_t scaled_index(double u, std::size_t m) {
  return std::min(static_cast<std::size_t>(u * static_cast<double>(m)), m - 1);
}

inline std::size_t category_of(const std::vector<double>& cum, double u) {
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return std::min(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
}

}  // namespace detail

// Pairing: both path generators consume the same uniforms from stream 0 (the
// population and Gaussian models) or share stream 0 for the first coordinate
// (multinomial), so NA and independent replicates are positively coupled.

inline SamplePath sample_na_path(const NAModel& model, std::uint64_t seed, std::uint64_t replicate = 0) {
  std::vector<double> values = std::visit(
      detail::overloaded{
          [&](const SamplingWithoutReplacement& m) {
            CounterRng rng(seed, replicate, 0);
            std::vector<std::size_t> idx(m.population.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            std::vector<double> out(m.n_draw);
            for (std::size_t i = 0; i < m.n_draw; ++i) {
              const std::size_t j = i + detail::scaled_index(rng.uniform(), idx.size() - i);
              std::swap(idx[i], idx[j]);
              out[i] = m.population[idx[i]];
            }
            return out;
          },
          [&](const MultinomialCounts& m) {
            CounterRng rng(seed, replicate, 0);
            std::vector<long> counts(m.probs.size(), 0);
            for (long t = 0; t < m.trials; ++t) ++counts[detail::category_of(m.cumulative, rng.uniform())];
            std::vector<double> out(m.probs.size());
            for (std::size_t i = 0; i < out.size(); ++i) {
              out[i] = static_cast<double>(counts[i]) - static_cast<double>(m.trials) * m.probs[i];
            }
            return out;
          },
          [&](const GaussianNegCov& m) {
            CounterRng rng(seed, replicate, 0);
            std::vector<double> z(m.dim);
            for (double& v : z) v = rng.normal();
            std::vector<double> out(m.dim, 0.0);
            for (std::size_t i = 0; i < m.dim; ++i) {
              double s = 0.0;
              for (std::size_t k = 0; k <= i; ++k) s += m.factor[i * m.dim + k] * z[k];
              out[i] = s;
            }
            return out;
          },
      },
      model.kind);
  return detail::finish_path(std::move(values), seed, replicate);
}

inline SamplePath sample_independent_path(const NAModel& model, std::uint64_t seed, std::uint64_t replicate = 0) {
  std::vector<double> values = std::visit(
      detail::overloaded{
          [&](const SamplingWithoutReplacement& m) {
            CounterRng rng(seed, replicate, 0);
            std::vector<double> out(m.n_draw);
            for (double& v : out) v = m.population[detail::scaled_index(rng.uniform(), m.population.size())];
            return out;
          },
          [&](const MultinomialCounts& m) {
            std::vector<double> out(m.probs.size());
            for (std::size_t i = 0; i < out.size(); ++i) {
              CounterRng rng(seed, replicate, i);
              const double lo = i == 0 ? 0.0 : m.cumulative[i - 1];
              const double hi = m.cumulative[i];
              long c = 0;
              for (long t = 0; t < m.trials; ++t) {
                const double u = rng.uniform();
                if (u >= lo && (u < hi || (i + 1 == out.size() && u <= hi))) ++c;
              }
              out[i] = static_cast<double>(c) - static_cast<double>(m.trials) * m.probs[i];
            }
            return out;
          },
          [&](const GaussianNegCov& m) {
            CounterRng rng(seed, replicate, 0);
            std::vector<double> out(m.dim);
            for (std::size_t i = 0; i < m.dim; ++i) out[i] = std::sqrt(m.cov[i * m.dim + i]) * rng.normal();
            return out;
          },
      },
      model.kind);
  return detail::finish_path(std::move(values), seed, replicate);
}

/// Marginal law of each coordinate (identical for the NA path and its
/// independent copy).
inline std::vector<DistributionSpec> marginals(const NAModel& model) {
  return std::visit(
      detail::overloaded{
          [](const SamplingWithoutReplacement& m) {
            return std::vector<DistributionSpec>(m.n_draw, population_value(m.population, true));
          },
          [](const MultinomialCounts& m) {
            std::vector<DistributionSpec> out;
            for (double p : m.probs) {
              const double mu = static_cast<double>(m.trials) * p;
              std::vector<Atom> atoms;
              if (p == 0.0 || p == 1.0) {
                atoms.push_back({0.0, 1.0});
              } else {
                double total = 0.0;
                for (long k = 0; k <= m.trials; ++k) {
                  const double lp = std::lgamma(m.trials + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m.trials - k + 1.0) +
                                    k * std::log(p) + (m.trials - k) * std::log1p(-p);
                  const double w = std::exp(lp);
                  if (w == 0.0) continue;
                  atoms.push_back({static_cast<double>(k) - mu, w});
                  total += w;
                }
                for (auto& at : atoms) at.prob /= total;
              }
              out.push_back(bounded_discrete(std::move(atoms)));
            }
            return out;
          },
          [](const GaussianNegCov& m) {
            std::vector<DistributionSpec> out;
            for (std::size_t i = 0; i < m.dim; ++i) {
              const double v = m.cov[i * m.dim + i];
              out.push_back(v > 0.0 ? centered_gaussian(std::sqrt(v)) : bounded_discrete({{0.0, 1.0}}));
            }
            return out;
          },
      },
      model.kind);
}

}  // namespace nadev
