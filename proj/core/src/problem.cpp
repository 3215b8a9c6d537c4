#include "pacsnoc/problem.hpp"

#include "pacsnoc/parallel.hpp"

namespace pacsnoc {

Vec sequence_costs(const ControlProblem& problem, std::span<const double> theta, const sim::NoiseDataset& data) {
  Vec costs(data.size());
  parallel_for(data.size(), [&](std::size_t i) { costs[i] = problem.sequence_cost<double>(theta, data[i]); });
  return costs;
}

double empirical_cost(const ControlProblem& problem, std::span<const double> theta,
                      const sim::NoiseDataset& data) {
  if (data.empty()) throw std::invalid_argument("empirical_cost: empty dataset");
  const Vec costs = sequence_costs(problem, theta, data);
  return ad::sum(std::span<const double>(costs)) / static_cast<double>(data.size());
}

ad::ValueAndGradient empirical_cost_gradient(const ControlProblem& problem, std::span<const double> theta,
                                             const sim::NoiseDataset& data) {
  if (data.empty()) throw std::invalid_argument("empirical_cost_gradient: empty dataset");
  std::vector<ad::ValueAndGradient> parts(data.size());
  parallel_for(data.size(), [&](std::size_t i) {
    ad::Tape tape;
    const auto x = tape.variables(theta);
    const ad::Var c = problem.sequence_cost<ad::Var>(x, data[i]);
    parts[i].value = c.value();
    parts[i].gradient = c.is_constant() ? Vec(theta.size(), 0.0) : tape.backward(c);
  });
  ad::ValueAndGradient out;
  out.gradient.assign(theta.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(data.size());
  for (const auto& p : parts) {
    out.value += p.value;
    for (std::size_t j = 0; j < theta.size(); ++j) out.gradient[j] += p.gradient[j];
  }
  out.value *= inv;
  for (auto& g : out.gradient) g *= inv;
  return out;
}

double collision_percentage(const ControlProblem& problem, std::span<const double> theta,
                            const sim::NoiseDataset& data) {
  if (problem.plant.is_lti() || data.empty()) return 0.0;
  const sim::PlanarRobots* robots = &problem.plant.robots();
  std::vector<char> hit(data.size(), 0);
  parallel_for(data.size(), [&](std::size_t i) {
    hit[i] = sim::has_collision(*robots, sim::rollout<double>(problem.plant, problem.arch, theta, data[i])) ? 1 : 0;
  });
  std::size_t count = 0;
  for (char h : hit) count += static_cast<std::size_t>(h);
  return 100.0 * static_cast<double>(count) / static_cast<double>(data.size());
}

TrueCostEstimate mean_and_stderr(std::span<const double> xs) {
  TrueCostEstimate e;
  e.samples = xs.size();
  if (xs.empty()) return e;
  double s = 0.0;
  for (double x : xs) s += x;
  e.mean = s / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return e;
}

TrueCostEstimate true_cost_mc(const ControlProblem& problem, std::span<const double> theta,
                              const sim::NoiseSpec& noise, std::size_t horizon, std::size_t n_test,
                              std::uint64_t seed) {
  if (n_test == 0) throw ConfigError("true_cost_mc: n_test must be positive");
  const auto test = sim::generate_dataset(noise, n_test, horizon, seed);
  const Vec costs = sequence_costs(problem, theta, test);
  return mean_and_stderr(costs);
}

}  // namespace pacsnoc
