#include "pacsnoc/pipeline.hpp"

#include <random>

#include "pacsnoc/parallel.hpp"

namespace pacsnoc::pipeline {

std::vector<Vec> initial_particles(const ControlProblem& problem, const pb::Prior& prior, std::size_t count,
                                   double init_std, std::uint64_t seed) {
  if (count == 0) throw ConfigError("svgd: need at least one particle");
  std::vector<Vec> out;
  out.push_back(initial_theta(problem, init_std, seed));
  const bool fixed = std::holds_alternative<ctrl::AffineArch>(problem.arch);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 1; i < count; ++i) {
    out.push_back(fixed ? prior.sample(rng) : initial_theta(problem, init_std, seed + i));
  }
  return out;
}

inf::SvgdResult train_pac_svgd(const ControlProblem& problem, const pb::Prior& prior, const sim::NoiseDataset& data,
                               double lambda, const PacSvgdOptions& options) {
  if (!(lambda > 0.0)) throw ConfigError("svgd: lambda must be positive");
  const auto [train, val] = train_validation_split(data, options.train_fraction);
  const pb::GibbsPosterior post(problem, prior, train, lambda);
  inf::SvgdOptions so;
  so.eta = options.lr / lambda;
  so.max_epochs = options.epochs;
  so.patience = options.patience;
  so.project = options.project;
  const sim::NoiseDataset& score_on = val.empty() ? train : val;
  so.validation = [&](const std::vector<Vec>& ps) {
    double s = 0.0;
    for (const auto& p : ps) s += empirical_cost(problem, p, score_on);
    return s / static_cast<double>(ps.size());
  };
  auto particles = initial_particles(problem, prior, options.particles, options.init_std, options.seed);
  if (options.project) {
    for (auto& p : particles) options.project(p);
  }
  return inf::svgd_train(std::move(particles),
                         [&](std::span<const double> t) { return post.log_unnorm_gradient(t); }, so);
}

Vec flow_sample_costs(const ControlProblem& problem, const inf::PlanarFlow& flow, const sim::NoiseDataset& data,
                      std::size_t n, std::uint64_t seed, std::size_t chunk) {
  if (chunk == 0) chunk = 4096;
  std::mt19937_64 rng(seed);
  Vec costs(n);
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t m = std::min(chunk, n - start);
    const auto samples = flow.sample(m, rng);
    parallel_for(m, [&](std::size_t i) { costs[start + i] = empirical_cost(problem, samples[i], data); });
  }
  return costs;
}

TwoStageFlowResult two_stage_flow_bound(const ControlProblem& problem, const pb::Prior& prior,
                                        const sim::NoiseDataset& data, std::size_t s1, double lambda, double delta,
                                        const TwoStageFlowOptions& options) {
  if (s1 == 0 || s1 >= data.size()) throw ConfigError("two-stage: S1 must lie in [1, S - 1]");
  const auto [d1, d2] = data.split(s1);
  const auto lambdas = pb::two_stage_lambdas(s1, d2.size(), lambda);

  TrainOptions fit = options.stage1;
  fit.train_fraction = 1.0;
  const Vec center = train_empirical(problem, d1, fit).theta;

  const pb::GibbsPosterior stage1(problem, prior, d1, lambdas.lambda1);
  const inf::PlanarFlow base(center, Vec(center.size(), options.base_std), options.layers, options.flow.seed + 1,
                             options.init_scale);
  auto trained = inf::flow_train(base, [&](std::span<const double> t) { return stage1.log_unnorm_gradient(t); },
                                 options.flow);

  const Vec costs = flow_sample_costs(problem, trained.flow, d2, options.prior_samples, options.sample_seed,
                                      options.chunk);
  TwoStageFlowResult out;
  out.stage1_theta = center;
  out.stage1_cost = empirical_cost(problem, center, d2);
  out.report = pb::bounds_qstar_mc(out.stage1_cost, pb::log_partition_estimate(costs, lambdas.lambda2),
                                   options.prior_samples, delta, lambdas.lambda2, problem.cost.bound, d2.size());
  out.report.method = "two_stage_flow";
  out.flow = std::move(trained.flow);
  return out;
}

}  // namespace pacsnoc::pipeline
