#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "nadev/moments.hpp"

using namespace nadev;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DistributionSpec rademacher() { return bounded_discrete({{-1.0, 0.5}, {1.0, 0.5}}); }

struct Running {
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
  }
  double mean(double n) const { return sum / n; }
  double se(double n) const {
    const double m = sum / n;
    return std::sqrt((sum_sq / n - m * m) / (n - 1.0));
  }
};

}  // namespace

TEST_CASE("distribution validation", "[moments]") {
  CHECK_NOTHROW(rademacher().validate());
  CHECK_THROWS_AS(bounded_discrete({{-1.0, 0.5}, {1.0, 0.4}}).validate(), DomainError);
  CHECK_THROWS_AS(bounded_discrete({{0.0, 0.5}, {1.0, 0.5}}).validate(), DomainError);
  CHECK_THROWS_AS(uniform_law(1.0, 1.0).validate(), DomainError);
  CHECK_THROWS_AS(centered_gaussian(0.0).validate(), DomainError);
  CHECK_THROWS_AS(population_value({}).validate(), DomainError);
  CHECK_NOTHROW(population_value({3.0, 5.0, 10.0}).validate());
  CHECK_FALSE(uniform_law(0.0, 1.0).centered);
  CHECK_NOTHROW(uniform_law(0.0, 1.0).validate());
}

TEST_CASE("truncated second moment", "[moments]") {
  const auto r = rademacher();
  CHECK(truncated_second_moment(r, 2.0) == 1.0);
  CHECK(truncated_second_moment(r, 0.5) == 0.5);
  CHECK_THROWS_AS(truncated_second_moment(r, 0.0), DomainError);

  const auto g = centered_gaussian(1.0);
  CHECK_THAT(truncated_second_moment(g, 1.0), WithinRel(0.59937402154939959879, 1e-10));
  CHECK_THAT(truncated_second_moment(uniform_law(-1.0, 1.0), 0.5), WithinRel((0.125 + 1.0) / 6.0, 1e-14));

  for (const auto& d : {g, centered_gaussian(2.5), truncated_gaussian(1.0, 1.5), uniform_law(-2.0, 2.0)}) {
    double prev = 0.0;
    for (double y = 0.01; y < 20.0; y *= 1.3) {
      const double v = truncated_second_moment(d, y);
      CHECK(v >= prev - 1e-15);
      prev = v;
    }
    const double sigma = std::sqrt(second_moment(d));
    CHECK_THAT(truncated_second_moment(d, 1e6 * sigma), WithinRel(second_moment(d), 1e-9));
  }
}

TEST_CASE("weak norm", "[moments]") {
  CHECK_THAT(weak_norm_p(uniform_law(-1.0, 1.0), 2.0), WithinRel(4.0 / 27.0, 1e-10));
  for (double p : {1.0, 2.0, 5.5}) CHECK_THAT(weak_norm_p(rademacher(), p), WithinRel(1.0, 1e-15));
  CHECK_THAT(weak_norm_p(centered_gaussian(1.0), 2.0), WithinRel(0.33143322955770280933, 1e-10));
  // scales as sigma^p
  CHECK_THAT(weak_norm_p(centered_gaussian(3.0), 2.0), WithinRel(9.0 * 0.33143322955770280933, 1e-10));
  // a two-atom law whose supremum sits at the smaller atom
  const auto d = bounded_discrete({{-1.0, 0.9}, {9.0, 0.1}});
  CHECK_THAT(weak_norm_p(d, 1.0), WithinRel(1.0, 1e-15));
  CHECK_THAT(weak_norm_p(d, 2.0), WithinRel(8.1, 1e-15));
  CHECK_THROWS_AS(weak_norm_p(d, 0.5), DomainError);

  const std::vector<DistributionSpec> catalog{rademacher(),          uniform_law(-1.0, 1.0), centered_gaussian(1.0),
                                              truncated_gaussian(2.0, 1.0), population_value({1.0, 2.0, 7.0}),
                                              uniform_law(-3.0, 1.0)};
  for (const auto& dist : catalog) {
    for (double p : {1.0, 2.0, 3.0, 4.0}) CHECK(weak_norm_p(dist, p) <= abs_moment(dist, p) * (1.0 + 1e-12));
  }
}

TEST_CASE("Gaussian functionals match frozen values", "[moments]") {
  const auto g = centered_gaussian(1.0);
  CHECK_THAT(semi_exp_moment(g, 0.5), WithinRel(3.5617082664553809254, 1e-10));
  CHECK_THAT(exp_moment(g, 0.3, 1.5), WithinRel(1.355987019589252276, 1e-10));
  CHECK_THAT(exp_moment(g, 0.3, 2.0), WithinRel(1.0 / std::sqrt(0.4), 1e-14));
  CHECK_THROWS_AS(exp_moment(g, 0.5, 2.0), DivergenceError);
  CHECK_THROWS_AS(exp_moment(g, 0.01, 2.5), DivergenceError);
  CHECK_THAT(abs_moment(g, 2.0), WithinRel(1.0, 1e-14));
  CHECK_THAT(abs_moment(g, 1.0), WithinRel(std::sqrt(2.0 / std::numbers::pi), 1e-14));
  CHECK(raw_moment(g, 8) == 105.0);
  CHECK(raw_moment(g, 7) == 0.0);
}

TEST_CASE("quadrature functionals agree with a 1e7-sample Monte Carlo oracle", "[moments][oracle]") {
  constexpr int kSamples = 10'000'000;
  std::mt19937_64 eng(20240917);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double cut = 1.3;
  Running trunc_y, semi, expm, tg_sq, tg_abs3, tg_semi, un_semi;
  int tg_count = 0;
  std::uniform_real_distribution<double> unif(-2.0, 1.0);
  for (int i = 0; i < kSamples; ++i) {
    const double z = normal(eng);
    trunc_y.add(z <= 1.0 ? z * z : 0.0);
    semi.add(z * z * std::exp(std::sqrt(std::abs(z))));
    expm.add(std::exp(0.3 * std::pow(std::abs(z), 1.5)));
    if (std::abs(z) <= cut) {
      ++tg_count;
      tg_sq.add(z * z);
      tg_abs3.add(std::pow(std::abs(z), 3.0));
      tg_semi.add(z * z * std::exp(std::pow(std::abs(z), 0.3)));
    }
    const double u = unif(eng);
    un_semi.add(u * u * std::exp(std::pow(std::abs(u), 0.7)));
  }
  const double n = kSamples;
  const double m = tg_count;
  const auto g = centered_gaussian(1.0);
  const auto tg = truncated_gaussian(1.0, cut);
  auto within4 = [](double value, const Running& r, double count) {
    return std::abs(value - r.mean(count)) <= 4.0 * r.se(count);
  };
  CHECK(within4(truncated_second_moment(g, 1.0), trunc_y, n));
  CHECK(within4(semi_exp_moment(g, 0.5), semi, n));
  CHECK(within4(exp_moment(g, 0.3, 1.5), expm, n));
  CHECK(within4(second_moment(tg), tg_sq, m));
  CHECK(within4(abs_moment(tg, 3.0), tg_abs3, m));
  CHECK(within4(semi_exp_moment(tg, 0.3), tg_semi, m));
  CHECK(within4(semi_exp_moment(uniform_law(-2.0, 1.0), 0.7), un_semi, n));
}

TEST_CASE("moment summary", "[moments]") {
  const std::size_t n = 7;
  const std::vector<DistributionSpec> rad(n, rademacher());
  const auto s = moment_summary(rad, 3.0, 0.5, 2.0, 0.1, {0.5, 2.0});
  CHECK(s.n == n);
  CHECK(s.B_n == 7.0);
  CHECK(s.V_n == 7.0);
  CHECK_THAT(s.A_p, WithinRel(7.0, 1e-15));
  REQUIRE(s.K_exp.has_value());
  CHECK_THAT(*s.K_exp, WithinRel(7.0 * std::exp(0.1), 1e-14));
  REQUIRE(s.K_n.has_value());
  CHECK_THAT(*s.K_n, WithinRel(7.0 * std::exp(1.0), 1e-14));
  REQUIRE(s.range.has_value());
  CHECK(s.range->width_sum() == 14.0);
  CHECK(s.range->width_sq_sum() == 28.0);
  REQUIRE(s.B_n_of_y.size() == 2);
  CHECK(s.B_n_of_y[0].second == 3.5);
  CHECK(s.B_n_of_y[1].second == 7.0);
  CHECK(s.tail_sum_of_y[0].second == 3.5);
  CHECK(s.tail_sum_of_y[1].second == 0.0);
  REQUIRE(s.bernstein_M.has_value());
  CHECK(*s.bernstein_M <= 1.0);

  // Gaussian with a >= 1/(2 sigma^2): K_exp flagged, everything else populated
  const std::vector<DistributionSpec> mixed{centered_gaussian(1.0), rademacher(), uniform_law(-1.0, 1.0)};
  const auto t = moment_summary(mixed, 2.0, 0.5, 2.0, 0.5, {1.0, 1e3});
  CHECK_FALSE(t.K_exp.has_value());
  CHECK(t.divergences.size() == 1);
  CHECK_FALSE(t.range.has_value());
  CHECK_FALSE(t.bernstein_M.has_value());
  CHECK_THAT(t.B_n, WithinRel(2.0 + 1.0 / 3.0, 1e-14));
  CHECK_THAT(t.B_n_of_y[1].second, WithinRel(t.B_n, 1e-12));
  CHECK_THAT(t.A_p, WithinRel(0.33143322955770280933 + 1.0 + 4.0 / 27.0, 1e-10));

  CHECK_THROWS_AS(moment_summary({}, 2.0, 0.5, 2.0, 0.1, {}), DomainError);
  CHECK_THROWS_AS(moment_summary(rad, 1.5, 0.5, 2.0, 0.1, {}), DomainError);
  CHECK_THROWS_AS(moment_summary(rad, 2.0, 1.0, 2.0, 0.1, {}), DomainError);
}

TEST_CASE("Bernstein condition check", "[moments]") {
  const std::vector<DistributionSpec> rad(5, rademacher());
  auto rep = bernstein_condition_check(rad, 1.0, 2);
  CHECK(rep.holds);
  CHECK(rep.worst_k == 2);
  CHECK(rep.worst_ratio == 1.0);

  const std::vector<DistributionSpec> bounded{uniform_law(-1.0, 1.0), population_value({-2.0, 0.5, 1.5}),
                                              truncated_gaussian(1.0, 2.0)};
  rep = bernstein_condition_check(bounded, 2.0, 30);
  CHECK(rep.holds);

  // Gaussian moments (2m-1)!!: ratio_k = (k-1)!! / (k!/2) peaks at k = 2
  rep = bernstein_condition_check({centered_gaussian(1.0)}, 1.0, 10);
  CHECK(rep.holds);
  CHECK(rep.k_max == 10);
  CHECK(rep.worst_k == 2);
  CHECK_THAT(rep.worst_ratio, WithinRel(1.0, 1e-15));
  rep = bernstein_condition_check({centered_gaussian(1.0)}, 0.1, 6);
  CHECK_FALSE(rep.holds);
  CHECK(rep.worst_k == 6);
  CHECK_THAT(rep.worst_ratio, WithinRel(15.0 / (360.0 * 1e-4), 1e-12));

  // the certified M satisfies the check it certifies
  const auto M = bernstein_M_certificate(bounded);
  REQUIRE(M.has_value());
  CHECK(bernstein_condition_check(bounded, *M, 60).holds);
  CHECK_FALSE(bernstein_condition_check(bounded, 0.5 * *M, 60).holds);
}
