#pragma once

// Plants, noise datasets and the one-step dynamics x_t = f(x_{t-1}, u_{t-1}) + w_t.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pacsnoc/common.hpp"

namespace pacsnoc::sim {

/// w_{T:0}: T+1 noise vectors; index 0 perturbs the initial state.
struct NoiseSequence {
  std::vector<Vec> values;

  std::size_t length() const { return values.size(); }
};

class NoiseDataset {
 public:
  NoiseDataset() = default;
  NoiseDataset(std::size_t state_dim, std::size_t horizon, std::vector<NoiseSequence> sequences);

  std::size_t state_dim() const { return state_dim_; }
  std::size_t horizon() const { return horizon_; }
  std::size_t size() const { return sequences_.size(); }
  bool empty() const { return sequences_.empty(); }
  const std::vector<NoiseSequence>& sequences() const { return sequences_; }
  const NoiseSequence& operator[](std::size_t i) const { return sequences_[i]; }

  NoiseDataset subset(std::span<const std::size_t> indices) const;
  /// First `n` sequences followed by the rest, as two disjoint datasets.
  std::pair<NoiseDataset, NoiseDataset> split(std::size_t n) const;

 private:
  std::size_t state_dim_ = 0;
  std::size_t horizon_ = 0;
  std::vector<NoiseSequence> sequences_;
};

/// Gaussian noise at every step (i.i.d. per coordinate).
struct GaussianPerStep {
  double mean = 0.3;
  double stddev = 0.3;
};
/// Zero-mean Gaussian on w_0 only; w_t = 0 for t > 0.
struct InitialOnly {
  double stddev = 0.2;
};

struct NoiseSpec {
  std::variant<GaussianPerStep, InitialOnly> kind;
  std::size_t state_dim = 1;

  void validate() const;
};

NoiseDataset generate_dataset(const NoiseSpec& spec, std::size_t num_sequences, std::size_t horizon,
                              std::uint64_t seed);

/// Noise sequence of zeros.
NoiseSequence zero_sequence(std::size_t state_dim, std::size_t horizon);

struct ScalarLti {
  double a = 0.8;
  double b = 0.1;
  double xbar = 2.0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Obstacle {
  Point center;
  double radius = 0.5;
};

/// Which state the internal model predicts at t = 0 when reconstructing w_0.
enum class ImcAnchor {
  kNominal,  // w_hat_0 = x_0 - xbar, i.e. exactly w_0
  kTarget,   // w_hat_0 = x_0 - x_target, the whole initial offset
};

/// Point-mass robots with drag and a proportional pre-stabilizing force.
/// Per-robot state (px, py, vx, vy); per-robot input (Fx, Fy).
struct PlanarRobots {
  double mass = 1.0;
  double drag_linear = 1.0;
  double drag_quadratic = 0.1;
  double prestab_gain = 1.0;
  double dt = 0.05;
  std::vector<Point> spawns{{-2.0, -2.0}, {2.0, -2.0}};
  std::vector<Point> targets{{2.0, 2.0}, {-2.0, 2.0}};
  std::vector<Obstacle> obstacles{{{-1.0, 0.0}, 0.8}, {{1.0, 0.0}, 0.8}};
  double safe_distance = 0.5;    // D
  double barrier_offset = 0.05;  // nu
  double robot_radius = 0.2;
  ImcAnchor imc_anchor = ImcAnchor::kTarget;

  std::size_t num_robots() const { return spawns.size(); }
};

class Plant {
 public:
  using Model = std::variant<ScalarLti, PlanarRobots>;

  Plant() : Plant(ScalarLti{}) {}
  explicit Plant(Model model);

  const Model& model() const { return model_; }
  bool is_lti() const { return std::holds_alternative<ScalarLti>(model_); }
  const ScalarLti& lti() const { return std::get<ScalarLti>(model_); }
  const PlanarRobots& robots() const { return std::get<PlanarRobots>(model_); }

  std::size_t state_dim() const;
  std::size_t input_dim() const;
  /// xbar
  Vec nominal_state() const;
  /// Equilibrium of the pre-stabilized plant (origin for the LTI plant).
  Vec target_state() const;
  /// Internal-model prediction of x_0.
  Vec imc_anchor_state() const;

  /// f(x_{t-1}, u_{t-1}); the dynamics are Markov so only the last sample matters.
  template <class T>
  std::vector<T> predict(std::span<const T> x, std::span<const T> u) const;

 private:
  void validate() const;

  Model model_;
};

/// x_t = f(x_{t-1}, u_{t-1}) + w_t.
Vec step(const Plant& plant, std::span<const double> x_prev, std::span<const double> u_prev,
         std::span<const double> noise);

template <class T>
struct TrajectoryT {
  std::vector<std::vector<T>> states;
  std::vector<std::vector<T>> inputs;

  std::size_t length() const { return states.size(); }
};
using Trajectory = TrajectoryT<double>;

Trajectory values_of(const TrajectoryT<ad::Var>& traj);

/// Robot-robot and robot-obstacle contact (centers closer than the sum of radii).
bool has_collision(const PlanarRobots& robots, const Trajectory& traj);

// --- implementation -------------------------------------------------------

template <class T>
std::vector<T> Plant::predict(std::span<const T> x, std::span<const T> u) const {
  using std::abs;
  if (x.size() != state_dim() || u.size() != input_dim()) {
    throw std::invalid_argument("Plant::predict: dimension mismatch");
  }
  if (const auto* lti = std::get_if<ScalarLti>(&model_)) {
    return {lti->a * x[0] + lti->b * u[0]};
  }
  const auto& r = std::get<PlanarRobots>(model_);
  std::vector<T> next(x.size());
  const double inv_mass = 1.0 / r.mass;
  for (std::size_t i = 0; i < r.num_robots(); ++i) {
    const std::size_t o = 4 * i;
    const double target[2] = {r.targets[i].x, r.targets[i].y};
    for (std::size_t c = 0; c < 2; ++c) {
      const T& p = x[o + c];
      const T& v = x[o + 2 + c];
      const T force = -r.drag_linear * v - r.drag_quadratic * v * abs(v) +
                      r.prestab_gain * (target[c] - p) + u[2 * i + c];
      next[o + c] = p + r.dt * v;
      next[o + 2 + c] = v + (r.dt * inv_mass) * force;
    }
  }
  return next;
}

}  // namespace pacsnoc::sim
