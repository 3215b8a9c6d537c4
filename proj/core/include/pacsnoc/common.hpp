#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacsnoc/autodiff.hpp"

namespace pacsnoc {

using Vec = std::vector<double>;

/// Invalid configuration or argument values (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical blowup or failed convergence (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ad::value_of;

template <class T>
bool all_finite(std::span<const T> xs) {
  for (const auto& x : xs) {
    if (!std::isfinite(value_of(x))) return false;
  }
  return true;
}

template <class T>
std::vector<T> lift(std::span<const double> xs) {
  return std::vector<T>(xs.begin(), xs.end());
}

inline Vec values_of(std::span<const ad::Var> xs) {
  Vec out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(x.value());
  return out;
}

/// log(sum(exp(x))) without overflow; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> xs);

}  // namespace pacsnoc
