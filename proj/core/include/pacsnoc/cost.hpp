#pragma once

// Finite-horizon costs and the bounded transform C * tanh(L / gamma).

#include <variant>

#include "pacsnoc/rollout.hpp"
#include "pacsnoc/sim.hpp"

namespace pacsnoc::cost {

/// sum_t q x_t^2 + r u_t^2
struct LtiQuadratic {
  double q = 5.0;
  double r = 0.003;
};

/// sum_t dx^T Q dx + u^T R u + l_ca(d_t) + l_oa(x_t), dx = x - x_target.
/// Barriers are (d + nu)^-2 while d <= D, and 0 beyond.
struct RobotNav {
  Vec q_diag;  // per state coordinate
  Vec r_diag;  // per input coordinate
  double safe_distance = 0.5;
  double barrier_offset = 0.05;
  std::vector<sim::Obstacle> obstacles;
  Vec target;
  std::size_t num_robots = 2;

  /// Q = I, R = 0.01 I and the plant's geometry.
  static RobotNav defaults_for(const sim::PlanarRobots& robots);
};

struct CostSpec {
  std::variant<LtiQuadratic, RobotNav> variant;
  double bound = 1.0;  // C
  double gamma = 1.0;

  void validate() const;
};

/// Raw (untransformed) finite-horizon cost of a trajectory.
template <class T>
T fh_cost(const CostSpec& spec, const sim::TrajectoryT<T>& traj);

/// C * tanh(raw / gamma), in [0, C) for raw >= 0.
template <class T>
T transform_cost(const T& raw, double bound, double gamma) {
  using std::tanh;
  return bound * tanh(raw * (1.0 / gamma));
}

/// Raw cost of the noise-free open-loop rollout (zero external input); falls
/// back to 1 when that cost is 0.
double default_gamma(const sim::Plant& plant, const CostSpec& spec, std::size_t horizon);

// --- implementation -------------------------------------------------------

namespace detail {

template <class T>
T barrier(const T& d, double safe_distance, double offset) {
  if (value_of(d) > safe_distance) return T(0.0);
  const T s = d + offset;
  return T(1.0) / (s * s);
}

// Inside an obstacle (negative gap) the barrier continues along its tangent at
// the surface, so the penalty keeps growing with penetration depth.
template <class T>
T surface_barrier(const T& gap, double safe_distance, double offset) {
  if (value_of(gap) >= 0.0) return barrier(gap, safe_distance, offset);
  const double inv = 1.0 / offset;
  return inv * inv - (2.0 * inv * inv * inv) * gap;
}

template <class T>
T distance(const T& dx, const T& dy) {
  using std::sqrt;
  return sqrt(dx * dx + dy * dy + 1e-12);
}

}  // namespace detail

template <class T>
T fh_cost(const CostSpec& spec, const sim::TrajectoryT<T>& traj) {
  if (traj.states.size() != traj.inputs.size()) throw std::invalid_argument("fh_cost: trajectory lengths differ");
  if (const auto* lti = std::get_if<LtiQuadratic>(&spec.variant)) {
    T total(0.0);
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
      const T& x = traj.states[t][0];
      const T& u = traj.inputs[t][0];
      if (!std::isfinite(value_of(x)) || !std::isfinite(value_of(u))) throw NumericalError("fh_cost: nonfinite trajectory");
      total = total + lti->q * (x * x) + lti->r * (u * u);
    }
    return total;
  }
  const auto& nav = std::get<RobotNav>(spec.variant);
  std::vector<T> terms;
  terms.reserve(traj.states.size() * 4);
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    const auto& x = traj.states[t];
    const auto& u = traj.inputs[t];
    if (!all_finite<T>(x) || !all_finite<T>(u)) throw NumericalError("fh_cost: nonfinite trajectory");
    std::vector<T> dx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = (x[i] - nav.target[i]) * std::sqrt(nav.q_diag[i]);
    terms.push_back(ad::dot(std::span<const T>(dx), std::span<const T>(dx)));
    std::vector<T> du(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) du[i] = u[i] * std::sqrt(nav.r_diag[i]);
    terms.push_back(ad::dot(std::span<const T>(du), std::span<const T>(du)));
    for (std::size_t i = 0; i < nav.num_robots; ++i) {
      const T& px = x[4 * i];
      const T& py = x[4 * i + 1];
      for (std::size_t j = i + 1; j < nav.num_robots; ++j) {
        const T d = detail::distance<T>(px - x[4 * j], py - x[4 * j + 1]);
        if (value_of(d) <= nav.safe_distance) {
          terms.push_back(detail::barrier(d, nav.safe_distance, nav.barrier_offset));
        }
      }
      for (const auto& o : nav.obstacles) {
        const T gap = detail::distance<T>(px - o.center.x, py - o.center.y) - o.radius;
        if (value_of(gap) <= nav.safe_distance) {
          terms.push_back(detail::surface_barrier(gap, nav.safe_distance, nav.barrier_offset));
        }
      }
    }
  }
  return ad::sum(std::span<const T>(terms));
}

}  // namespace pacsnoc::cost
