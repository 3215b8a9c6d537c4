#pragma once

// Data-independent priors over controller parameters.

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <variant>

#include "pacsnoc/common.hpp"

namespace pacsnoc::pb {

struct Gaussian1D {
  double mean = 0.0;
  double variance = 1.0;
};

struct Uniform1D {
  double lo = -5.0;
  double hi = 5.0;
};

/// N(mean, variance * I).
struct GaussianIso {
  Vec mean;
  double variance = 1.0;
};

/// Independent prior on (k, beta) for the affine controller.
struct Product2D {
  Gaussian1D k;
  std::variant<Uniform1D, Gaussian1D> beta;
};

class Prior {
 public:
  using Kind = std::variant<GaussianIso, Product2D>;

  Prior() : Prior(GaussianIso{{0.0}, 1.0}) {}
  explicit Prior(Kind kind);

  const Kind& kind() const { return kind_; }
  std::size_t dim() const;
  bool in_support(std::span<const double> theta) const;

  /// log P(theta); -inf outside the support. Differentiable in theta.
  template <class T>
  T log_density(std::span<const T> theta) const;

  Vec sample(std::mt19937_64& rng) const;

 private:
  Kind kind_;
};

/// Prior on (k, beta) used for the scalar plant: k ~ N(k_lqr, 1) and beta
/// either uniform on (-0.5/b, 0.5/b) or N(3, 1.5^2).
Prior lti_prior(double k_center, bool gaussian_beta, double b = 0.1);

/// Gain of the infinite-horizon LQR for x+ = a x + b u with stage cost q x^2 + r u^2.
double ih_lqr_gain(double a, double b, double q, double r);

// --- implementation -------------------------------------------------------

namespace detail {

inline double gauss_log_norm(double variance) { return -0.5 * std::log(2.0 * std::numbers::pi * variance); }

template <class T>
T gauss_log(const T& x, const Gaussian1D& g) {
  const T d = x - g.mean;
  return gauss_log_norm(g.variance) - (0.5 / g.variance) * (d * d);
}

}  // namespace detail

template <class T>
T Prior::log_density(std::span<const T> theta) const {
  if (theta.size() != dim()) throw std::invalid_argument("Prior::log_density: dimension mismatch");
  if (const auto* g = std::get_if<GaussianIso>(&kind_)) {
    std::vector<T> d(theta.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = theta[i] - g->mean[i];
    const T sq = ad::dot(std::span<const T>(d), std::span<const T>(d));
    return static_cast<double>(d.size()) * detail::gauss_log_norm(g->variance) - (0.5 / g->variance) * sq;
  }
  const auto& p = std::get<Product2D>(kind_);
  const T lk = detail::gauss_log(theta[0], p.k);
  if (const auto* u = std::get_if<Uniform1D>(&p.beta)) {
    const double b = value_of(theta[1]);
    if (!(b >= u->lo && b <= u->hi)) return T(-std::numeric_limits<double>::infinity());
    return lk - std::log(u->hi - u->lo);
  }
  return lk + detail::gauss_log(theta[1], std::get<Gaussian1D>(p.beta));
}

}  // namespace pacsnoc::pb
