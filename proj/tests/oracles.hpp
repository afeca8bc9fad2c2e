#pragma once
// Test-only reference evaluations in 50-digit arithmetic. These are written
// directly from the displayed formulas and share no code with the library.

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_50;

inline Real H(Real x, Real v, Real n, Real alpha) {
  using boost::multiprecision::pow;
  if (x > n) return Real(0);
  const Real v2 = v * v;
  if (x == n) return pow(v2 / (n + v2), alpha * n);
  return pow(pow(v2 / (x + v2), x + v2) * pow(n / (n - x), n - x), alpha * n / (n + v2));
}

inline Real bennett(Real x, Real v, Real alpha) {
  using boost::multiprecision::exp;
  using boost::multiprecision::pow;
  const Real v2 = v * v;
  return pow(v2 / (x + v2), alpha * (x + v2)) * exp(alpha * x);
}

inline Real bernstein1(Real x, Real v, Real alpha) {
  using boost::multiprecision::exp;
  return exp(-alpha * x * x / (2 * (v * v + x / 3)));
}

inline Real ell(Real t) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  return (t - log(t) - 1) + t / (exp(t) - 1) + log(1 - exp(-t));
}

/// sup_t (x t - ell(t)) by bisection on the numerical derivative followed by
/// evaluation; 50-digit arithmetic makes the central difference exact enough.
inline Real ell_star(Real x) {
  if (x == 0) return Real(0);
  auto dell = [](Real t) {
    const Real h = t * Real("1e-20");
    return (ell(t + h) - ell(t - h)) / (2 * h);
  };
  Real lo("1e-8");
  Real hi(1);
  while (dell(hi) < x) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const Real mid = (lo + hi) / 2;
    (dell(mid) < x ? lo : hi) = mid;
  }
  const Real t = (lo + hi) / 2;
  return x * t - ell(t);
}

inline double d(const Real& r) { return static_cast<double>(r); }

}  // namespace oracle
