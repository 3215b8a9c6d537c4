#include "pacsnoc/cost.hpp"

namespace pacsnoc::sim {

Trajectory rollout_open_loop(const Plant& plant, const NoiseSequence& noise) {
  const std::size_t nx = plant.state_dim();
  const Vec zero_u(plant.input_dim(), 0.0);
  Trajectory traj;
  Vec x = plant.nominal_state();
  for (std::size_t i = 0; i < nx; ++i) x[i] += noise.values.at(0).at(i);
  for (std::size_t t = 0; t < noise.length(); ++t) {
    if (!all_finite<double>(x)) throw NumericalError("open-loop rollout: nonfinite state");
    traj.states.push_back(x);
    traj.inputs.push_back(zero_u);
    if (t + 1 < noise.length()) x = step(plant, x, zero_u, noise.values[t + 1]);
  }
  return traj;
}

}  // namespace pacsnoc::sim

namespace pacsnoc::cost {

RobotNav RobotNav::defaults_for(const sim::PlanarRobots& robots) {
  RobotNav nav;
  const std::size_t n = robots.num_robots();
  nav.q_diag.assign(4 * n, 1.0);
  nav.r_diag.assign(2 * n, 0.01);
  nav.safe_distance = robots.safe_distance;
  nav.barrier_offset = robots.barrier_offset;
  nav.obstacles = robots.obstacles;
  nav.num_robots = n;
  nav.target.assign(4 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    nav.target[4 * i] = robots.targets[i].x;
    nav.target[4 * i + 1] = robots.targets[i].y;
  }
  return nav;
}

void CostSpec::validate() const {
  if (!(bound > 0.0)) throw ConfigError("cost: bound C must be positive");
  if (!(gamma > 0.0)) throw ConfigError("cost: gamma must be positive");
  if (const auto* lti = std::get_if<LtiQuadratic>(&variant)) {
    if (!(lti->q > 0.0) || !(lti->r > 0.0)) throw ConfigError("cost: q and r must be positive");
    return;
  }
  const auto& nav = std::get<RobotNav>(variant);
  for (double q : nav.q_diag) {
    if (q < 0.0) throw ConfigError("cost: Q must be positive semidefinite");
  }
  for (double r : nav.r_diag) {
    if (r < 0.0) throw ConfigError("cost: R must be positive semidefinite");
  }
  if (nav.q_diag.size() != nav.target.size() || nav.q_diag.size() != 4 * nav.num_robots ||
      nav.r_diag.size() != 2 * nav.num_robots) {
    throw ConfigError("cost: Q/R dimensions do not match the robots");
  }
  if (!(nav.safe_distance > 0.0) || !(nav.barrier_offset > 0.0)) {
    throw ConfigError("cost: D and nu must be positive");
  }
}

double default_gamma(const sim::Plant& plant, const CostSpec& spec, std::size_t horizon) {
  const auto traj = sim::rollout_open_loop(plant, sim::zero_sequence(plant.state_dim(), horizon));
  const double raw = fh_cost<double>(spec, traj);
  return raw > 0.0 ? raw : 1.0;
}

}  // namespace pacsnoc::cost
