#pragma once

#include <string>

#include "pacsnoc/controllers.hpp"
#include "pacsnoc/sim.hpp"

namespace pacsnoc::sim {

/// Closed-loop rollout r^theta_{T:0}(w_{T:0}):
///   x_0 = xbar + w_0,  u_t = K_t(x_{t:0}),  x_{t+1} = f(x_t, u_t) + w_{t+1}.
/// Throws NumericalError if a state or input becomes nonfinite.
template <class T>
TrajectoryT<T> rollout(const Plant& plant, const ctrl::Architecture& arch, std::span<const T> theta,
                       const NoiseSequence& noise) {
  if (noise.length() == 0) throw std::invalid_argument("rollout: empty noise sequence");
  const std::size_t nx = plant.state_dim();
  for (const auto& w : noise.values) {
    if (w.size() != nx) throw std::invalid_argument("rollout: noise dimension mismatch");
  }
  ctrl::Policy<T> policy(plant, arch, theta);
  TrajectoryT<T> traj;
  traj.states.reserve(noise.length());
  traj.inputs.reserve(noise.length());

  const Vec xbar = plant.nominal_state();
  std::vector<T> x(nx);
  for (std::size_t i = 0; i < nx; ++i) x[i] = xbar[i] + noise.values[0][i];
  for (std::size_t t = 0; t < noise.length(); ++t) {
    std::vector<T> u = policy.act(x);
    if (!all_finite<T>(x) || !all_finite<T>(u)) {
      throw NumericalError("rollout: nonfinite state or input at t = " + std::to_string(t));
    }
    traj.states.push_back(x);
    traj.inputs.push_back(u);
    if (t + 1 < noise.length()) {
      std::vector<T> next = plant.predict<T>(x, u);
      for (std::size_t i = 0; i < nx; ++i) next[i] = next[i] + noise.values[t + 1][i];
      x = std::move(next);
    }
  }
  return traj;
}

inline Trajectory rollout(const Plant& plant, const ctrl::ControllerParams& params, const NoiseSequence& noise) {
  return rollout<double>(plant, params.arch, params.theta, noise);
}

/// Rollout with no external input (the pre-stabilized open loop).
Trajectory rollout_open_loop(const Plant& plant, const NoiseSequence& noise);

}  // namespace pacsnoc::sim
