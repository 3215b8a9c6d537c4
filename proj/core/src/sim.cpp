#include "pacsnoc/sim.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace pacsnoc {

double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace pacsnoc

namespace pacsnoc::sim {

NoiseDataset::NoiseDataset(std::size_t state_dim, std::size_t horizon,
                           std::vector<NoiseSequence> sequences)
    : state_dim_(state_dim), horizon_(horizon), sequences_(std::move(sequences)) {
  if (state_dim_ == 0) throw ConfigError("NoiseDataset: state_dim must be positive");
  for (const auto& seq : sequences_) {
    if (seq.length() != horizon_ + 1) {
      throw ConfigError("NoiseDataset: every sequence must have length horizon + 1");
    }
    for (const auto& w : seq.values) {
      if (w.size() != state_dim_) throw ConfigError("NoiseDataset: noise vector has wrong dimension");
      if (!all_finite<double>(w)) throw ConfigError("NoiseDataset: nonfinite noise entry");
    }
  }
}

NoiseDataset NoiseDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<NoiseSequence> out;
  out.reserve(indices.size());
  for (auto i : indices) {
    if (i >= sequences_.size()) throw std::out_of_range("NoiseDataset::subset: index out of range");
    out.push_back(sequences_[i]);
  }
  return NoiseDataset(state_dim_, horizon_, std::move(out));
}

std::pair<NoiseDataset, NoiseDataset> NoiseDataset::split(std::size_t n) const {
  if (n > size()) throw std::out_of_range("NoiseDataset::split: n exceeds dataset size");
  std::vector<NoiseSequence> first(sequences_.begin(), sequences_.begin() + static_cast<long>(n));
  std::vector<NoiseSequence> second(sequences_.begin() + static_cast<long>(n), sequences_.end());
  return {NoiseDataset(state_dim_, horizon_, std::move(first)),
          NoiseDataset(state_dim_, horizon_, std::move(second))};
}

void NoiseSpec::validate() const {
  if (state_dim == 0) throw ConfigError("noise spec: state_dim must be positive");
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, GaussianPerStep>) {
          if (!std::isfinite(k.mean) || !(k.stddev >= 0.0) || !std::isfinite(k.stddev)) {
            throw ConfigError("noise spec: invalid Gaussian parameters");
          }
        } else {
          if (!(k.stddev >= 0.0) || !std::isfinite(k.stddev)) {
            throw ConfigError("noise spec: invalid initial-state stddev");
          }
        }
      },
      kind);
}

NoiseDataset generate_dataset(const NoiseSpec& spec, std::size_t num_sequences, std::size_t horizon,
                              std::uint64_t seed) {
  spec.validate();
  if (num_sequences == 0) throw ConfigError("generate_dataset: need at least one sequence");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<NoiseSequence> seqs(num_sequences);
  for (auto& seq : seqs) {
    seq.values.assign(horizon + 1, Vec(spec.state_dim, 0.0));
    if (const auto* g = std::get_if<GaussianPerStep>(&spec.kind)) {
      for (auto& w : seq.values) {
        for (auto& x : w) x = g->mean + g->stddev * normal(rng);
      }
    } else {
      const auto& init = std::get<InitialOnly>(spec.kind);
      for (auto& x : seq.values[0]) x = init.stddev * normal(rng);
    }
  }
  return NoiseDataset(spec.state_dim, horizon, std::move(seqs));
}

NoiseSequence zero_sequence(std::size_t state_dim, std::size_t horizon) {
  NoiseSequence seq;
  seq.values.assign(horizon + 1, Vec(state_dim, 0.0));
  return seq;
}

Plant::Plant(Model model) : model_(std::move(model)) { validate(); }

void Plant::validate() const {
  if (const auto* lti = std::get_if<ScalarLti>(&model_)) {
    if (!(std::abs(lti->a) < 1.0)) throw ConfigError("ScalarLti: |a| must be < 1 (pre-stabilized plant)");
    if (!std::isfinite(lti->b) || !std::isfinite(lti->xbar)) throw ConfigError("ScalarLti: nonfinite parameter");
    return;
  }
  const auto& r = std::get<PlanarRobots>(model_);
  if (!(r.mass > 0.0)) throw ConfigError("PlanarRobots: mass must be positive");
  if (!(r.dt > 0.0)) throw ConfigError("PlanarRobots: dt must be positive");
  if (!(r.safe_distance > 0.0)) throw ConfigError("PlanarRobots: safe distance D must be positive");
  if (!(r.barrier_offset > 0.0)) throw ConfigError("PlanarRobots: barrier offset nu must be positive");
  if (r.drag_linear < 0.0 || r.drag_quadratic < 0.0 || r.prestab_gain < 0.0) {
    throw ConfigError("PlanarRobots: drag and gain must be nonnegative");
  }
  if (r.spawns.empty() || r.spawns.size() != r.targets.size()) {
    throw ConfigError("PlanarRobots: need one target per robot");
  }
  for (const auto& o : r.obstacles) {
    if (!(o.radius > 0.0)) throw ConfigError("PlanarRobots: obstacle radius must be positive");
  }
}

std::size_t Plant::state_dim() const { return is_lti() ? 1 : 4 * robots().num_robots(); }
std::size_t Plant::input_dim() const { return is_lti() ? 1 : 2 * robots().num_robots(); }

Vec Plant::nominal_state() const {
  if (is_lti()) return {lti().xbar};
  Vec x(state_dim(), 0.0);
  const auto& r = robots();
  for (std::size_t i = 0; i < r.num_robots(); ++i) {
    x[4 * i] = r.spawns[i].x;
    x[4 * i + 1] = r.spawns[i].y;
  }
  return x;
}

Vec Plant::target_state() const {
  if (is_lti()) return {0.0};
  Vec x(state_dim(), 0.0);
  const auto& r = robots();
  for (std::size_t i = 0; i < r.num_robots(); ++i) {
    x[4 * i] = r.targets[i].x;
    x[4 * i + 1] = r.targets[i].y;
  }
  return x;
}

Vec Plant::imc_anchor_state() const {
  if (is_lti() || robots().imc_anchor == ImcAnchor::kNominal) return nominal_state();
  return target_state();
}

Vec step(const Plant& plant, std::span<const double> x_prev, std::span<const double> u_prev,
         std::span<const double> noise) {
  if (noise.size() != plant.state_dim()) throw std::invalid_argument("step: noise dimension mismatch");
  Vec next = plant.predict<double>(x_prev, u_prev);
  for (std::size_t i = 0; i < next.size(); ++i) next[i] += noise[i];
  return next;
}

Trajectory values_of(const TrajectoryT<ad::Var>& traj) {
  Trajectory out;
  out.states.reserve(traj.states.size());
  out.inputs.reserve(traj.inputs.size());
  for (const auto& x : traj.states) out.states.push_back(pacsnoc::values_of(x));
  for (const auto& u : traj.inputs) out.inputs.push_back(pacsnoc::values_of(u));
  return out;
}

bool has_collision(const PlanarRobots& robots, const Trajectory& traj) {
  const std::size_t n = robots.num_robots();
  for (const auto& x : traj.states) {
    for (std::size_t i = 0; i < n; ++i) {
      const double px = x[4 * i];
      const double py = x[4 * i + 1];
      for (const auto& o : robots.obstacles) {
        if (std::hypot(px - o.center.x, py - o.center.y) < o.radius + robots.robot_radius) return true;
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::hypot(px - x[4 * j], py - x[4 * j + 1]) < 2.0 * robots.robot_radius) return true;
      }
    }
  }
  return false;
}

}  // namespace pacsnoc::sim
