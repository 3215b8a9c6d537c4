#pragma once

// A control problem bundles the plant, the controller family and the
// transformed cost; it evaluates L(theta, w) and the empirical cost over a
// dataset, with or without gradients.

#include <cstdint>

#include "pacsnoc/controllers.hpp"
#include "pacsnoc/cost.hpp"
#include "pacsnoc/rollout.hpp"
#include "pacsnoc/sim.hpp"

namespace pacsnoc {

struct ControlProblem {
  sim::Plant plant;
  ctrl::Architecture arch;
  cost::CostSpec cost;

  std::size_t dim() const { return ctrl::parameter_count(arch); }

  /// Transformed cost C * tanh(L / gamma) of one rollout.
  template <class T>
  T sequence_cost(std::span<const T> theta, const sim::NoiseSequence& noise) const {
    const auto traj = sim::rollout<T>(plant, arch, theta, noise);
    return cost::transform_cost(cost::fh_cost<T>(cost, traj), cost.bound, cost.gamma);
  }

  double raw_sequence_cost(std::span<const double> theta, const sim::NoiseSequence& noise) const {
    return cost::fh_cost<double>(cost, sim::rollout<double>(plant, arch, theta, noise));
  }

  /// Mean transformed cost over the dataset, recorded on the caller's tape.
  template <class T>
  T empirical_cost(std::span<const T> theta, const sim::NoiseDataset& data) const {
    if (data.empty()) throw std::invalid_argument("empirical_cost: empty dataset");
    std::vector<T> costs;
    costs.reserve(data.size());
    for (const auto& seq : data.sequences()) costs.push_back(sequence_cost<T>(theta, seq));
    return ad::sum(std::span<const T>(costs)) * (1.0 / static_cast<double>(data.size()));
  }
};

/// L-hat(theta, S) = (1/S) sum_s C tanh(L(theta, w^s) / gamma).
double empirical_cost(const ControlProblem& problem, std::span<const double> theta,
                      const sim::NoiseDataset& data);

/// Transformed cost of every sequence, in dataset order.
Vec sequence_costs(const ControlProblem& problem, std::span<const double> theta, const sim::NoiseDataset& data);

/// Empirical cost and its gradient. Each sequence is differentiated on its own
/// tape and the per-sequence gradients are summed in dataset order.
ad::ValueAndGradient empirical_cost_gradient(const ControlProblem& problem, std::span<const double> theta,
                                             const sim::NoiseDataset& data);

struct TrueCostEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

/// Monte-Carlo estimate of E_w[L(theta, w)] from `n_test` fresh sequences.
TrueCostEstimate true_cost_mc(const ControlProblem& problem, std::span<const double> theta,
                              const sim::NoiseSpec& noise, std::size_t horizon, std::size_t n_test,
                              std::uint64_t seed);

/// Percentage of sequences whose rollout has a robot-robot or robot-obstacle
/// contact; 0 for plants without geometry.
double collision_percentage(const ControlProblem& problem, std::span<const double> theta,
                            const sim::NoiseDataset& data);

/// Mean and standard error of a sample.
TrueCostEstimate mean_and_stderr(std::span<const double> xs);

}  // namespace pacsnoc
