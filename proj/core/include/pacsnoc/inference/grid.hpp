#pragma once

// Exact Gibbs posterior on a rectangular (k, beta) grid.

#include <cstdint>

#include "pacsnoc/pac_bayes.hpp"

namespace pacsnoc::inf {

/// Cell centers of a uniform rectangular grid.
struct GridAxes {
  Vec k;
  Vec beta;

  std::size_t size() const { return k.size() * beta.size(); }
  /// Row-major cell index: k varies slowest.
  std::size_t index(std::size_t ik, std::size_t ib) const { return ik * beta.size() + ib; }
  Vec cell(std::size_t i) const { return {k[i / beta.size()], beta[i % beta.size()]}; }
};

/// Uniform axes of `resolution` cell centers spanning [lo, hi].
Vec uniform_axis(double lo, double hi, std::size_t resolution);

/// Axes covering mean +/- `num_sd` standard deviations of each Gaussian factor
/// and the full support of a uniform factor.
GridAxes prior_axes(const pb::Prior& prior, std::size_t resolution, double num_sd = 3.0);

/// Prior mass of the box spanned by the axes (their outer cell edges).
double covered_prior_mass(const pb::Prior& prior, const GridAxes& axes);

/// Transformed cost of every (cell, sequence) pair; row-major [cell][sequence].
struct GridCosts {
  GridAxes axes;
  std::size_t num_sequences = 0;
  Vec per_sequence;

  /// L-hat of every cell over the sequences in `columns` (all when empty).
  Vec empirical(std::span<const std::size_t> columns = {}) const;
};

GridCosts grid_costs(const ControlProblem& problem, const GridAxes& axes, const sim::NoiseDataset& data);

struct GridPosterior {
  GridAxes axes;
  double lambda = 0.0;
  Vec log_prior;  // prior cell masses normalized over the grid (log)
  Vec lhat;       // empirical cost per cell
  Vec log_mass;   // normalized posterior (log)
  double log_z = 0.0;

  Vec mass() const;
  /// Posterior mean and variance of coordinate 0 (k) or 1 (beta).
  double mean(std::size_t coord) const;
  double variance(std::size_t coord) const;
  std::size_t argmax() const;
};

/// Log prior masses of the cells, normalized over the grid.
Vec grid_log_prior(const pb::Prior& prior, const GridAxes& axes);

/// Gibbs posterior over cells from log prior masses (need not be normalized)
/// and per-cell costs; ln Z is taken relative to the normalized prior.
GridPosterior grid_posterior(const GridAxes& axes, std::span<const double> log_prior, std::span<const double> lhat,
                             double lambda);

GridPosterior grid_posterior(const pb::Prior& prior, const GridCosts& costs, double lambda);

/// Evaluates costs on the prior's default axes and normalizes.
GridPosterior grid_posterior(const pb::Prior& prior, const ControlProblem& problem, const sim::NoiseDataset& data,
                             double lambda, std::size_t resolution = 120);

/// Inverse-CDF sampling of cell centers.
std::vector<Vec> grid_sample(const GridPosterior& grid, std::size_t n, std::uint64_t seed);
/// Sampled cell indices.
std::vector<std::size_t> grid_sample_indices(const GridPosterior& grid, std::size_t n, std::uint64_t seed);

struct TwoStageGrid {
  GridPosterior stage1;  // prior P, data S1, lambda1
  GridPosterior stage2;  // prior Q1, data S2, lambda2
};

/// Stage 1 on `first`, then stage 2 on `second` with Q1 as prior. With
/// lambda_i = (S_i/S) lambda the result equals the single-stage Q*.
TwoStageGrid two_stage_grid(const pb::Prior& prior, const GridCosts& costs, std::span<const std::size_t> first,
                            std::span<const std::size_t> second, double lambda);

}  // namespace pacsnoc::inf
