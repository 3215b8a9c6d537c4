#pragma once

// Empirical cost minimization by plain gradient descent with validation-based
// early stopping, and the flow base initialization built on it.

#include <cstdint>
#include <functional>
#include <optional>

#include "pacsnoc/inference/flows.hpp"
#include "pacsnoc/problem.hpp"

namespace pacsnoc {

struct TrainOptions {
  std::size_t epochs = 1000;
  double lr = 1e-2;
  std::size_t patience = 500;
  double train_fraction = 0.75;
  double init_std = 0.1;  // REN initialization N(0, init_std^2 I)
  std::uint64_t seed = 0;
  std::optional<Vec> init;
  std::function<void(std::span<double>)> project;
};

struct TrainResult {
  Vec theta;  // best by validation cost (training cost without a validation split)
  Vec train_cost;
  Vec validation_cost;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

/// First round(fraction * S) sequences for training (at least one), the rest for
/// validation (possibly empty).
std::pair<sim::NoiseDataset, sim::NoiseDataset> train_validation_split(const sim::NoiseDataset& data,
                                                                        double train_fraction);

/// Default starting point: (0, 0) for the affine law, N(0, init_std^2 I) for a REN.
Vec initial_theta(const ControlProblem& problem, double init_std, std::uint64_t seed);

/// Gradient descent on L-hat over the training split.
TrainResult train_empirical(const ControlProblem& problem, const sim::NoiseDataset& data, const TrainOptions& options);

/// Trains one empirical controller per seed on `sequence` and fits a diagonal
/// Gaussian to the results (variance times `scale`).
inf::BaseGaussian flow_base_init(const ControlProblem& problem, const sim::NoiseSequence& sequence,
                                 std::span<const std::uint64_t> seeds, double scale, TrainOptions options);

}  // namespace pacsnoc
