#pragma once

// Stein variational gradient descent with an RBF kernel.

#include <functional>
#include <optional>

#include "pacsnoc/common.hpp"

namespace pacsnoc::inf {

/// Unnormalized log target and its gradient.
using LogTarget = std::function<ad::ValueAndGradient(std::span<const double>)>;

/// h = med^2 / ln(k + 1), med the median pairwise distance; floored at 1e-8.
/// A single particle gets h = 1.
double median_bandwidth(const std::vector<Vec>& particles);

/// kappa(a, b) = exp(-||a - b||^2 / h).
double rbf_kernel(std::span<const double> a, std::span<const double> b, double h);

/// phi_i += eta (1/k) sum_j [kappa(phi_j, phi_i) grad_j + grad_{phi_j} kappa(phi_j, phi_i)].
/// `h` <= 0 selects the median heuristic.
std::vector<Vec> svgd_step(const std::vector<Vec>& particles, const std::vector<Vec>& grads, double eta,
                           double h = 0.0);

struct SvgdOptions {
  double eta = 1e-3;
  std::size_t max_epochs = 1000;
  double tolerance = 1e-6;   // stop when the largest particle displacement is below this
  std::size_t patience = 500;  // epochs without validation improvement
  /// Applied to each particle after every update (e.g. gain projection).
  std::function<void(std::span<double>)> project;
  /// Validation cost of a particle set; enables early stopping on the best set.
  std::function<double(const std::vector<Vec>&)> validation;
};

struct SvgdResult {
  std::vector<Vec> particles;
  Vec mean_log_target;  // per epoch, before the update
  Vec validation;       // per epoch, when a validation callback is given
  std::size_t epochs = 0;
  bool converged = false;
  bool stopped_early = false;
};

SvgdResult svgd_train(std::vector<Vec> particles, const LogTarget& target, const SvgdOptions& options);

}  // namespace pacsnoc::inf
