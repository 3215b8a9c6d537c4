#include "pacsnoc/selection.hpp"

#include <random>
#include <sstream>

namespace pacsnoc::sel {

std::vector<std::vector<std::size_t>> bootstrap_indices(std::size_t sample_size, std::size_t num_resamples,
                                                        std::uint64_t seed) {
  if (sample_size < 2) throw ConfigError("bootstrap: need at least two sequences for out-of-bag scoring");
  if (num_resamples == 0) throw ConfigError("bootstrap: B must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, sample_size - 1);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(num_resamples);
  for (std::size_t b = 0; b < num_resamples; ++b) {
    std::vector<std::size_t> idx(sample_size);
    bool has_oob = false;
    for (int attempt = 0; attempt <= 100 && !has_oob; ++attempt) {
      std::vector<bool> in(sample_size, false);
      for (auto& i : idx) {
        i = pick(rng);
        in[i] = true;
      }
      for (bool x : in) has_oob = has_oob || !x;
    }
    if (!has_oob) throw NumericalError("bootstrap: no out-of-bag sequences after 100 redraws");
    out.push_back(std::move(idx));
  }
  return out;
}

SelectionResult bootstrap_select(const std::vector<Vec>& costs, std::size_t num_resamples, std::uint64_t seed) {
  if (costs.empty()) throw ConfigError("bootstrap: no candidates");
  const std::size_t s = costs.front().size();
  for (const auto& c : costs) {
    if (c.size() != s) throw ConfigError("bootstrap: candidates scored on different datasets");
  }
  SelectionResult res;
  res.estimates.resize(costs.size());
  for (std::size_t c = 0; c < costs.size(); ++c) {
    res.estimates[c].candidate = c;
    res.estimates[c].full_cost = ad::sum(std::span<const double>(costs[c])) / static_cast<double>(s);
  }
  if (costs.size() == 1) {
    res.estimates[0].score = res.estimates[0].full_cost;
    return res;
  }
  const auto resamples = bootstrap_indices(s, num_resamples, seed);
  res.resamples = resamples.size();
  for (const auto& idx : resamples) {
    std::vector<bool> in(s, false);
    for (std::size_t i : idx) in[i] = true;
    for (std::size_t c = 0; c < costs.size(); ++c) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < s; ++i) {
        if (!in[i]) {
          sum += costs[c][i];
          ++n;
        }
      }
      res.estimates[c].oob_scores.push_back(sum / static_cast<double>(n));
    }
  }
  for (auto& e : res.estimates) {
    e.score = ad::sum(std::span<const double>(e.oob_scores)) / static_cast<double>(e.oob_scores.size());
  }
  for (std::size_t c = 1; c < costs.size(); ++c) {
    const auto& a = res.estimates[c];
    const auto& b = res.estimates[res.best];
    if (a.score < b.score || (a.score == b.score && a.full_cost < b.full_cost)) res.best = c;
  }
  return res;
}

SelectionResult bootstrap_select(const ControlProblem& problem, const std::vector<Vec>& candidates,
                                 const sim::NoiseDataset& data, std::size_t num_resamples, std::uint64_t seed) {
  std::vector<Vec> costs(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) costs[c] = sequence_costs(problem, candidates[c], data);
  return bootstrap_select(costs, num_resamples, seed);
}

std::string selection_csv_header() { return "candidate,empirical_cost,bootstrap_score,selected"; }

std::vector<std::string> selection_csv_rows(const SelectionResult& result) {
  std::vector<std::string> rows;
  for (const auto& e : result.estimates) {
    std::ostringstream os;
    os.precision(12);
    os << e.candidate << ',' << e.full_cost << ',' << e.score << ',' << (e.candidate == result.best ? 1 : 0);
    rows.push_back(os.str());
  }
  return rows;
}

}  // namespace pacsnoc::sel
