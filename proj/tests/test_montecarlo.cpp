#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "nadev/montecarlo.hpp"

using namespace nadev;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> balanced(std::size_t N) {
  std::vector<double> v(N);
  for (std::size_t i = 0; i < N; ++i) v[i] = i % 2 == 0 ? 1.0 : -1.0;
  return v;
}

std::vector<double> equicorrelated(std::size_t d, double var, double off) {
  std::vector<double> c(d * d, off);
  for (std::size_t i = 0; i < d; ++i) c[i * d + i] = var;
  return c;
}

/// P(K >= k) for K hypergeometric: draws n from N items of which G are good.
double hypergeom_sf(int N, int G, int n, int k) {
  auto lchoose = [](int a, int b) { return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0); };
  double s = 0.0;
  for (int j = k; j <= std::min(n, G); ++j) s += std::exp(lchoose(G, j) + lchoose(N - G, n - j) - lchoose(N, n));
  return s;
}

}  // namespace

TEST_CASE("replicate mapping is independent of the worker count", "[montecarlo]") {
  auto f = [](std::uint64_t r) { return std::sin(static_cast<double>(r)) * 1e-3 + static_cast<double>(r % 7); };
  const auto a = map_replicates<double>(10007, 1, f);
  const auto b = map_replicates<double>(10007, 8, f);
  CHECK(a == b);
  CHECK_THROWS_AS(map_replicates<int>(100, 4, [](std::uint64_t r) -> int {
                    if (r == 57) throw DomainError("boom");
                    return 0;
                  }),
                  DomainError);
}

TEST_CASE("Clopper-Pearson interval", "[montecarlo]") {
  const auto [lo0, hi0] = clopper_pearson(0, 1000);
  CHECK(lo0 == 0.0);
  CHECK_THAT(hi0, WithinRel(1.0 - std::pow(0.025, 1.0 / 1000.0), 1e-10));
  const auto [lo1, hi1] = clopper_pearson(1000, 1000);
  CHECK(hi1 == 1.0);
  CHECK_THAT(lo1, WithinRel(std::pow(0.025, 1.0 / 1000.0), 1e-10));
  const auto [lo, hi] = clopper_pearson(37, 400);
  CHECK(lo < 37.0 / 400.0);
  CHECK(hi > 37.0 / 400.0);
}

TEST_CASE("tail estimates: sure and null events, interval shape", "[montecarlo]") {
  const auto model = sampling_without_replacement(balanced(200), 50);
  const double inf = std::numeric_limits<double>::infinity();
  for (auto stat : {Statistic::MaxPrefix, Statistic::FinalSum}) {
    CHECK(estimate_tail(model, -inf, 1000, 1, stat).p_hat == 1.0);
    CHECK(estimate_tail(model, inf, 1000, 1, stat).p_hat == 0.0);
    CHECK(estimate_tail(model, 51.0, 1000, 1, stat).p_hat == 0.0);
  }
  // S_1 = +-1 >= -1 surely
  CHECK(estimate_tail(model, -1.0, 1000, 1, Statistic::MaxPrefix).p_hat == 1.0);
  CHECK_THROWS_AS(estimate_tail(model, 1.0, 999, 1, Statistic::MaxPrefix), DomainError);
  CHECK_THROWS_AS(estimate_tail(model, 1.0, 1000, 1, Statistic::Expectation), DomainError);

  double prev_width = 1.0;
  for (std::uint64_t reps : {1000ULL, 10000ULL, 100000ULL}) {
    const auto e = estimate_tail(model, 5.0, reps, 3, Statistic::MaxPrefix);
    CHECK(e.ci_low <= e.p_hat);
    CHECK(e.p_hat <= e.ci_high);
    CHECK(e.ci_low_3sigma <= e.p_hat);
    CHECK(e.p_hat <= e.ci_high_3sigma);
    const double width = e.ci_high - e.ci_low;
    if (reps > 1000) CHECK_THAT(prev_width / width, WithinAbs(std::sqrt(10.0), 0.5));
    prev_width = width;
  }
}

TEST_CASE("final-sum tail matches the hypergeometric law", "[montecarlo]") {
  const auto model = sampling_without_replacement(balanced(200), 50);
  const auto e = estimate_tail(model, 10.0, 100000, 17, Statistic::FinalSum);
  // S = 2K - 50 with K ~ Hypergeometric(200, 100, 50)
  const double exact = hypergeom_sf(200, 100, 50, 30);
  CHECK_THAT(e.p_hat, WithinAbs(exact, 4.0 * std::sqrt(exact * (1.0 - exact) / 1e5)));
  CHECK(e.ci_low <= exact);
  CHECK(exact <= e.ci_high);

  const auto xs = estimate_tails(model, {5.0, 10.0, 15.0}, 100000, 17, Statistic::FinalSum, 4);
  CHECK(xs[1].hits == e.hits);
  CHECK(xs[0].hits >= xs[1].hits);
  CHECK(xs[1].hits >= xs[2].hits);
}

TEST_CASE("estimates do not depend on threads", "[montecarlo]") {
  const auto model = multinomial_counts(30, std::vector<double>(10, 0.1));
  const auto a = estimate_tail(model, 3.0, 20000, 5, Statistic::MaxPrefix, 1);
  const auto b = estimate_tail(model, 3.0, 20000, 5, Statistic::MaxPrefix, 8);
  CHECK(a.hits == b.hits);
  const ConvexTestFunction sq{ConvexTestFunction::Kind::ShiftedSquare, 1.0};
  const auto c = convex_comparison(model, sq, 20000, 5, true, 1);
  const auto d = convex_comparison(model, sq, 20000, 5, true, 8);
  CHECK(c.lhs_hat == d.lhs_hat);
  CHECK(c.diff_se == d.diff_se);
}

TEST_CASE("convex comparison", "[montecarlo]") {
  const std::size_t dim = 20;
  const double t = 0.2;
  const auto cov = equicorrelated(dim, 1.0, -0.01);
  const auto gauss = gaussian_neg_cov(cov, dim);
  const ConvexTestFunction ex{ConvexTestFunction::Kind::Exponential, t};
  const auto r = convex_comparison(gauss, ex, 100000, 9, false);
  double total = 0.0;
  for (double c : cov) total += c;
  const double lhs_exact = std::exp(t * t * total / 2.0);
  const double rhs_exact = std::exp(t * t * dim / 2.0);
  CHECK(lhs_exact <= rhs_exact);
  CHECK(r.pass);
  CHECK_THAT(r.lhs_hat, WithinRel(lhs_exact, 0.02));
  CHECK_THAT(r.rhs_hat, WithinRel(rhs_exact, 0.02));

  // same law on both sides
  const auto diag = gaussian_neg_cov(equicorrelated(5, 2.0, 0.0), 5);
  const auto same = convex_comparison(diag, ex, 2000, 9, true);
  CHECK(same.lhs_hat == same.rhs_hat);
  CHECK(same.diff_se == 0.0);

  const auto pop = sampling_without_replacement(balanced(200), 50);
  for (const auto& f : {ConvexTestFunction{ConvexTestFunction::Kind::ShiftedSquare, 1.0},
                        ConvexTestFunction{ConvexTestFunction::Kind::IdentityPlus, 0.0}}) {
    for (bool use_max : {false, true}) CHECK(convex_comparison(pop, f, 20000, 4, use_max).pass);
  }

  CHECK_THROWS_AS(convex_comparison(pop, ConvexTestFunction{ConvexTestFunction::Kind::Exponential, -0.1}, 100, 1, true),
                  DomainError);
  CHECK_NOTHROW(convex_comparison(pop, ConvexTestFunction{ConvexTestFunction::Kind::Exponential, -0.1}, 100, 1, false));
  CHECK_THROWS_AS(convex_comparison(pop, ConvexTestFunction{ConvexTestFunction::Kind::Exponential, 1e3}, 100, 1, false),
                  DivergenceError);
}

TEST_CASE("domination report", "[montecarlo]") {
  const auto e = tail_estimate_from_hits(10.0, 50, Statistic::MaxPrefix, 100000, 1, 500);
  const BoundedRangeSpec range{std::vector<double>(50, -1.0), std::vector<double>(50, 1.0)};

  const auto trivial = bernstein_condition_tail_bound(10.0, 0.9, 1.0, 50.0, BernsteinForm::Simple);
  REQUIRE(trivial.raw_value >= 1.0);
  const auto tiny = bernstein_condition_tail_bound(10.0, 0.5, 1e-3, 1.0, BernsteinForm::Sharp);
  const auto v = domination_report({trivial, tiny}, e);
  REQUIRE(v.size() == 2);
  CHECK(v[0].dominated);
  CHECK(v[0].bound == "BernsteinCond:Simple");
  CHECK_FALSE(v[1].dominated);
  CHECK(v[1].margin < 0.0);

  const auto zero = tail_estimate_from_hits(10.0, 50, Statistic::MaxPrefix, 100000, 1, 0);
  CHECK(domination_report({tiny}, zero)[0].dominated);

  CHECK_THROWS_AS(domination_report({bernstein_condition_tail_bound(9.0, 0.5, 1.0, 50.0, BernsteinForm::Sharp)}, e),
                  MismatchError);
  const auto ha = rio_tail_bound(10.0, 0.5, range, RioForm::HoeffdingAzuma);
  CHECK_THROWS_AS(domination_report({ha}, e), MismatchError);
  const auto fin = tail_estimate_from_hits(10.0, 50, Statistic::FinalSum, 100000, 1, 500);
  CHECK(domination_report({ha}, fin)[0].dominated);
  CHECK_THROWS_AS(domination_report({ha}, tail_estimate_from_hits(10.0, 40, Statistic::FinalSum, 1000, 1, 5)),
                  MismatchError);
}

TEST_CASE("supermartingale maximal moment", "[montecarlo]") {
  const auto flat = supermartingale_max_moment({0.0, 1.0, 25, 0.3}, 1000, 2);
  CHECK(flat.lhs_hat == 1.0);
  CHECK(flat.lhs_se == 0.0);
  CHECK_THAT(flat.rhs_exact, WithinRel(1.0 / 0.7, 1e-15));
  CHECK(flat.pass);

  // n = 1: E T^alpha = exp{-alpha (1 - alpha) t^2 sigma^2 / 2}
  const auto one = supermartingale_max_moment({0.8, 1.0, 1, 0.5}, 100000, 2);
  CHECK_THAT(one.lhs_hat, WithinAbs(std::exp(-0.25 * 0.64 / 2.0), 4.0 * one.lhs_se));
  CHECK(one.pass);

  const auto r = supermartingale_max_moment({0.5, 1.0, 100, 0.5}, 100000, 7);
  CHECK(r.rhs_exact == 2.0);
  CHECK(r.pass);
  CHECK(r.lhs_hat > 1.0);
  CHECK_THROWS_AS(supermartingale_max_moment({0.5, 1.0, 100, 1.0}, 1000, 7), DomainError);
}
