#include "pacsnoc/inference/grid.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "pacsnoc/parallel.hpp"

namespace pacsnoc::inf {

namespace {

double normal_cdf(double x, double mean, double variance) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

double gaussian_interval_mass(const pb::Gaussian1D& g, double lo, double hi) {
  return normal_cdf(hi, g.mean, g.variance) - normal_cdf(lo, g.mean, g.variance);
}

// Outer edges of a uniform axis of cell centers.
std::pair<double, double> edges(const Vec& axis) {
  const double h = axis.size() > 1 ? axis[1] - axis[0] : 0.0;
  return {axis.front() - 0.5 * h, axis.back() + 0.5 * h};
}

const pb::Product2D& product_of(const pb::Prior& prior) {
  const auto* p = std::get_if<pb::Product2D>(&prior.kind());
  if (p == nullptr) throw ConfigError("grid posterior requires a (k, beta) product prior");
  return *p;
}

}  // namespace

Vec uniform_axis(double lo, double hi, std::size_t resolution) {
  if (resolution < 2) throw ConfigError("grid resolution must be at least 2 per axis");
  if (!(hi > lo)) throw ConfigError("grid axis must satisfy lo < hi");
  const double h = (hi - lo) / static_cast<double>(resolution);
  Vec axis(resolution);
  for (std::size_t i = 0; i < resolution; ++i) axis[i] = lo + (static_cast<double>(i) + 0.5) * h;
  return axis;
}

GridAxes prior_axes(const pb::Prior& prior, std::size_t resolution, double num_sd) {
  const auto& p = product_of(prior);
  GridAxes axes;
  const double sk = std::sqrt(p.k.variance);
  axes.k = uniform_axis(p.k.mean - num_sd * sk, p.k.mean + num_sd * sk, resolution);
  if (const auto* u = std::get_if<pb::Uniform1D>(&p.beta)) {
    axes.beta = uniform_axis(u->lo, u->hi, resolution);
  } else {
    const auto& g = std::get<pb::Gaussian1D>(p.beta);
    const double sb = std::sqrt(g.variance);
    axes.beta = uniform_axis(g.mean - num_sd * sb, g.mean + num_sd * sb, resolution);
  }
  return axes;
}

double covered_prior_mass(const pb::Prior& prior, const GridAxes& axes) {
  const auto& p = product_of(prior);
  const auto [klo, khi] = edges(axes.k);
  const auto [blo, bhi] = edges(axes.beta);
  const double mk = gaussian_interval_mass(p.k, klo, khi);
  double mb = 0.0;
  if (const auto* u = std::get_if<pb::Uniform1D>(&p.beta)) {
    mb = std::max(0.0, std::min(bhi, u->hi) - std::max(blo, u->lo)) / (u->hi - u->lo);
  } else {
    mb = gaussian_interval_mass(std::get<pb::Gaussian1D>(p.beta), blo, bhi);
  }
  return mk * mb;
}

Vec GridCosts::empirical(std::span<const std::size_t> columns) const {
  const std::size_t cells = axes.size();
  Vec out(cells, 0.0);
  if (columns.empty()) {
    for (std::size_t c = 0; c < cells; ++c) {
      out[c] = ad::sum(std::span<const double>(per_sequence).subspan(c * num_sequences, num_sequences)) /
               static_cast<double>(num_sequences);
    }
    return out;
  }
  for (std::size_t j : columns) {
    if (j >= num_sequences) throw std::out_of_range("GridCosts::empirical: column out of range");
  }
  for (std::size_t c = 0; c < cells; ++c) {
    double s = 0.0;
    for (std::size_t j : columns) s += per_sequence[c * num_sequences + j];
    out[c] = s / static_cast<double>(columns.size());
  }
  return out;
}

GridCosts grid_costs(const ControlProblem& problem, const GridAxes& axes, const sim::NoiseDataset& data) {
  if (problem.dim() != 2) throw ConfigError("grid costs require a two-parameter controller");
  if (data.empty()) throw ConfigError("grid costs: empty dataset");
  GridCosts out;
  out.axes = axes;
  out.num_sequences = data.size();
  out.per_sequence.assign(axes.size() * data.size(), 0.0);
  parallel_for(axes.size(), [&](std::size_t c) {
    const Vec theta = axes.cell(c);
    for (std::size_t s = 0; s < data.size(); ++s) {
      out.per_sequence[c * data.size() + s] = problem.sequence_cost<double>(theta, data[s]);
    }
  });
  return out;
}

Vec GridPosterior::mass() const {
  Vec m(log_mass.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(log_mass[i]);
  return m;
}

double GridPosterior::mean(std::size_t coord) const {
  double s = 0.0;
  for (std::size_t i = 0; i < log_mass.size(); ++i) s += std::exp(log_mass[i]) * axes.cell(i).at(coord);
  return s;
}

double GridPosterior::variance(std::size_t coord) const {
  const double m = mean(coord);
  double s = 0.0;
  for (std::size_t i = 0; i < log_mass.size(); ++i) {
    const double d = axes.cell(i).at(coord) - m;
    s += std::exp(log_mass[i]) * d * d;
  }
  return s;
}

std::size_t GridPosterior::argmax() const {
  return static_cast<std::size_t>(std::max_element(log_mass.begin(), log_mass.end()) - log_mass.begin());
}

Vec grid_log_prior(const pb::Prior& prior, const GridAxes& axes) {
  Vec lp(axes.size());
  for (std::size_t i = 0; i < lp.size(); ++i) {
    const Vec c = axes.cell(i);
    lp[i] = prior.log_density<double>(c);
  }
  const double norm = log_sum_exp(lp);
  if (!std::isfinite(norm)) throw ConfigError("grid has no prior mass");
  for (auto& v : lp) v -= norm;
  return lp;
}

GridPosterior grid_posterior(const GridAxes& axes, std::span<const double> log_prior, std::span<const double> lhat,
                             double lambda) {
  if (log_prior.size() != axes.size() || lhat.size() != axes.size()) {
    throw std::invalid_argument("grid_posterior: size mismatch");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("grid_posterior: lambda must be >= 0");
  GridPosterior g;
  g.axes = axes;
  g.lambda = lambda;
  g.log_prior.assign(log_prior.begin(), log_prior.end());
  const double prior_norm = log_sum_exp(g.log_prior);
  for (auto& v : g.log_prior) v -= prior_norm;
  g.lhat.assign(lhat.begin(), lhat.end());
  g.log_mass.resize(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) {
    g.log_mass[i] = lambda == 0.0 ? g.log_prior[i] : g.log_prior[i] - lambda * g.lhat[i];
  }
  g.log_z = log_sum_exp(g.log_mass);
  for (auto& v : g.log_mass) v -= g.log_z;
  return g;
}

GridPosterior grid_posterior(const pb::Prior& prior, const GridCosts& costs, double lambda) {
  const Vec lp = grid_log_prior(prior, costs.axes);
  const Vec lhat = costs.empirical();
  return grid_posterior(costs.axes, lp, lhat, lambda);
}

GridPosterior grid_posterior(const pb::Prior& prior, const ControlProblem& problem, const sim::NoiseDataset& data,
                             double lambda, std::size_t resolution) {
  const auto axes = prior_axes(prior, resolution);
  return grid_posterior(prior, grid_costs(problem, axes, data), lambda);
}

std::vector<std::size_t> grid_sample_indices(const GridPosterior& grid, std::size_t n, std::uint64_t seed) {
  Vec cdf(grid.log_mass.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += std::exp(grid.log_mass[i]);
    cdf[i] = acc;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, acc);
  std::vector<std::size_t> out(n);
  for (auto& idx : out) {
    const double u = unif(rng);
    // upper_bound never lands on a zero-mass cell.
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) it = std::prev(cdf.end());
    idx = static_cast<std::size_t>(it - cdf.begin());
  }
  return out;
}

std::vector<Vec> grid_sample(const GridPosterior& grid, std::size_t n, std::uint64_t seed) {
  std::vector<Vec> out;
  out.reserve(n);
  for (std::size_t i : grid_sample_indices(grid, n, seed)) out.push_back(grid.axes.cell(i));
  return out;
}

TwoStageGrid two_stage_grid(const pb::Prior& prior, const GridCosts& costs, std::span<const std::size_t> first,
                            std::span<const std::size_t> second, double lambda) {
  if (second.empty()) throw ConfigError("two-stage: stage-2 split is empty");
  std::vector<std::size_t> seen(first.begin(), first.end());
  seen.insert(seen.end(), second.begin(), second.end());
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) throw ConfigError("two-stage: splits overlap");
  const auto lambdas = pb::two_stage_lambdas(first.size(), second.size(), lambda);
  const Vec lp = grid_log_prior(prior, costs.axes);
  TwoStageGrid out;
  if (first.empty()) {
    out.stage1 = grid_posterior(costs.axes, lp, Vec(costs.axes.size(), 0.0), 0.0);
  } else {
    out.stage1 = grid_posterior(costs.axes, lp, costs.empirical(first), lambdas.lambda1);
  }
  out.stage2 = grid_posterior(costs.axes, out.stage1.log_mass, costs.empirical(second), lambdas.lambda2);
  return out;
}

}  // namespace pacsnoc::inf
