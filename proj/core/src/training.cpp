#include "pacsnoc/training.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace pacsnoc {

std::pair<sim::NoiseDataset, sim::NoiseDataset> train_validation_split(const sim::NoiseDataset& data,
                                                                        double train_fraction) {
  if (data.empty()) throw ConfigError("training: empty dataset");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ConfigError("training: fraction must lie in (0, 1]");
  auto n = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(data.size())));
  n = std::clamp<std::size_t>(n, 1, data.size());
  return data.split(n);
}

Vec initial_theta(const ControlProblem& problem, double init_std, std::uint64_t seed) {
  if (std::holds_alternative<ctrl::AffineArch>(problem.arch)) return {0.0, 0.0};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_std);
  Vec theta(problem.dim());
  for (auto& t : theta) t = normal(rng);
  return theta;
}

TrainResult train_empirical(const ControlProblem& problem, const sim::NoiseDataset& data, const TrainOptions& options) {
  if (!(options.lr >= 0.0)) throw ConfigError("training: learning rate must be >= 0");
  const auto [train, val] = train_validation_split(data, options.train_fraction);
  Vec theta = options.init ? *options.init : initial_theta(problem, options.init_std, options.seed);
  if (theta.size() != problem.dim()) throw ConfigError("training: initial parameters have wrong length");
  if (options.project) options.project(theta);

  TrainResult res;
  res.theta = theta;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto vg = empirical_cost_gradient(problem, theta, train);
    const double v = val.empty() ? vg.value : empirical_cost(problem, theta, val);
    res.train_cost.push_back(vg.value);
    res.validation_cost.push_back(v);
    if (v < best) {
      best = v;
      res.theta = theta;
      res.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= options.patience) {
      res.stopped_early = true;
      res.epochs = epoch;
      return res;
    }
    if (!all_finite<double>(vg.gradient)) throw NumericalError("training: nonfinite gradient");
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= options.lr * vg.gradient[i];
    if (options.project) options.project(theta);
    res.epochs = epoch + 1;
  }
  const double v = val.empty() ? empirical_cost(problem, theta, train) : empirical_cost(problem, theta, val);
  if (v < best) {
    res.theta = theta;
    res.best_epoch = options.epochs;
  }
  return res;
}

inf::BaseGaussian flow_base_init(const ControlProblem& problem, const sim::NoiseSequence& sequence,
                                 std::span<const std::uint64_t> seeds, double scale, TrainOptions options) {
  if (seeds.size() < 2) throw ConfigError("flow_base_init: need at least two runs");
  const sim::NoiseDataset single(problem.plant.state_dim(), sequence.length() - 1, {sequence});
  options.train_fraction = 1.0;
  std::vector<Vec> solutions;
  for (std::uint64_t seed : seeds) {
    options.seed = seed;
    solutions.push_back(train_empirical(problem, single, options).theta);
  }
  return inf::base_from_samples(solutions, scale);
}

}  // namespace pacsnoc
