#pragma once

#include <stdexcept>
#include <string>

namespace nadev {

/// Violated precondition of a bound or functional (argument outside its valid domain).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inputs are formally valid but collapse a formula (e.g. zero variance, zero range width).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative search did not bracket or converge below its cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A moment functional or transform is infinite for the given law/parameters.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Estimates and bounds that were asked to be compared do not describe the same event.
class MismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Covariance matrix has no triangular factor (not positive semidefinite).
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace nadev
