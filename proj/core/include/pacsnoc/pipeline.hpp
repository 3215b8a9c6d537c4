#pragma once

// End-to-end procedures shared by the command-line tool and the experiments:
// PAC training with SVGD or flows, and the two-stage Monte-Carlo bound.

#include <cstdint>
#include <functional>

#include "pacsnoc/inference/flows.hpp"
#include "pacsnoc/inference/svgd.hpp"
#include "pacsnoc/pac_bayes.hpp"
#include "pacsnoc/training.hpp"

namespace pacsnoc::pipeline {

struct PacSvgdOptions {
  std::size_t particles = 1;
  std::size_t epochs = 500;
  double lr = 10.0;  // step size on L-hat; the SVGD step is lr / lambda
  std::size_t patience = 500;
  double train_fraction = 0.75;
  double init_std = 0.1;
  std::uint64_t seed = 0;
  std::function<void(std::span<double>)> project;
};

/// Starting particles: the empirical initialization for seed, seed + 1, ...
/// For the affine law, whose initialization is fixed, particles after the
/// first are prior draws.
std::vector<Vec> initial_particles(const ControlProblem& problem, const pb::Prior& prior, std::size_t count,
                                   double init_std, std::uint64_t seed);

/// SVGD on the Gibbs posterior of the training split with validation early
/// stopping on the mean particle cost.
inf::SvgdResult train_pac_svgd(const ControlProblem& problem, const pb::Prior& prior, const sim::NoiseDataset& data,
                               double lambda, const PacSvgdOptions& options);

struct TwoStageFlowOptions {
  TrainOptions stage1;        // empirical fit on S1 that centers the flow base
  std::size_t layers = 16;
  double base_std = 0.01;
  double init_scale = 0.01;   // planar layer initialization
  inf::FlowTrainOptions flow;
  std::size_t prior_samples = 300000;  // N_P drawn from Q1
  std::size_t chunk = 4096;
  std::uint64_t sample_seed = 5;
};

struct TwoStageFlowResult {
  pb::BoundReport report;
  inf::PlanarFlow flow;  // Q1, the stage-2 prior
  Vec stage1_theta;
  double stage1_cost = 0.0;  // L-hat of the stage-1 controller on S2
};

/// Stage 1: fit an empirical controller on the first s1 sequences and train a
/// planar flow Q1 centered there against the stage-1 Gibbs posterior with
/// lambda1. Stage 2: Monte-Carlo bound on the remaining sequences with prior
/// Q1 and lambda2, ln Z estimated from N_P samples of Q1. The empirical term
/// is that of the stage-1 controller.
TwoStageFlowResult two_stage_flow_bound(const ControlProblem& problem, const pb::Prior& prior,
                                        const sim::NoiseDataset& data, std::size_t s1, double lambda, double delta,
                                        const TwoStageFlowOptions& options);

/// Empirical costs on `data` of n samples from the flow, drawn in chunks.
Vec flow_sample_costs(const ControlProblem& problem, const inf::PlanarFlow& flow, const sim::NoiseDataset& data,
                      std::size_t n, std::uint64_t seed, std::size_t chunk = 4096);

}  // namespace pacsnoc::pipeline
