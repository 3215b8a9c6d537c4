#pragma once

// Bootstrap selection among candidate controllers with out-of-bag scoring.

#include <cstdint>

#include "pacsnoc/problem.hpp"

namespace pacsnoc::sel {

struct BootstrapEstimate {
  std::size_t candidate = 0;
  Vec oob_scores;  // one per resample
  double score = 0.0;       // mean of oob_scores
  double full_cost = 0.0;   // L-hat on the whole dataset
};

struct SelectionResult {
  std::size_t best = 0;
  std::vector<BootstrapEstimate> estimates;
  std::size_t resamples = 0;
};

/// Bootstrap resample index sets of size S with non-empty out-of-bag sets.
std::vector<std::vector<std::size_t>> bootstrap_indices(std::size_t sample_size, std::size_t num_resamples,
                                                        std::uint64_t seed);

/// `costs[c][s]`: transformed cost of candidate c on sequence s. Each candidate is
/// scored by the mean of its out-of-bag means; ties go to the lower full L-hat.
SelectionResult bootstrap_select(const std::vector<Vec>& costs, std::size_t num_resamples, std::uint64_t seed);

SelectionResult bootstrap_select(const ControlProblem& problem, const std::vector<Vec>& candidates,
                                 const sim::NoiseDataset& data, std::size_t num_resamples, std::uint64_t seed);

std::string selection_csv_header();
std::vector<std::string> selection_csv_rows(const SelectionResult& result);

}  // namespace pacsnoc::sel
