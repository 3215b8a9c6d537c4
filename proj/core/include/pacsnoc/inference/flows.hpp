#pragma once

// Planar normalizing flows: z_l = z_{l-1} + u_hat tanh(w^T z_{l-1} + b) on top
// of a diagonal Gaussian base.
//
// Flow parameters are packed as [base mean (d), base log-std (d), then per
// layer u (d), w (d), b (1)]. Each layer is made invertible by replacing u with
//   u_hat = u + (m(w^T u) - w^T u) w / ||w||^2,  m(x) = -1 + softplus(x),
// which gives w^T u_hat >= -1. A layer with w = 0 uses u_hat = u, so u = w = 0
// is the identity.

#include <cstdint>
#include <numbers>
#include <random>

#include "pacsnoc/inference/svgd.hpp"

namespace pacsnoc::inf {

struct PlanarLayer {
  Vec u;
  Vec w;
  double b = 0.0;
};

/// Planar map with an already admissible u_hat: returns (z', ln|1 + u_hat^T psi(z)|).
template <class T>
std::pair<std::vector<T>, T> planar_forward(std::span<const T> u_hat, std::span<const T> w, const T& b,
                                            std::span<const T> z);

/// u_hat from raw (u, w).
template <class T>
std::vector<T> admissible_u(std::span<const T> u, std::span<const T> w);

/// Solves planar_forward(u_hat, w, b, z) = y for z via the scalar equation in
/// a = w^T z. Throws NumericalError if 100 safeguarded Newton steps do not converge.
Vec planar_inverse(std::span<const double> u_hat, std::span<const double> w, double b, std::span<const double> y);

class PlanarFlow {
 public:
  PlanarFlow() = default;
  /// Base N(mean, diag(stddev^2)) and `num_layers` layers with u, w ~ U(-s, s),
  /// s = init_scale / sqrt(d), and b = 0.
  PlanarFlow(Vec base_mean, Vec base_stddev, std::size_t num_layers, std::uint64_t seed, double init_scale = 1.0);
  /// From packed parameters.
  PlanarFlow(std::size_t dim, std::size_t num_layers, Vec params);

  std::size_t dim() const { return dim_; }
  std::size_t num_layers() const { return layers_; }
  std::size_t num_params() const { return params_.size(); }
  const Vec& params() const { return params_; }
  Vec& params() { return params_; }

  Vec base_mean() const;
  Vec base_stddev() const;
  PlanarLayer layer(std::size_t l) const;
  void set_layer(std::size_t l, const PlanarLayer& layer);

  /// Pushes base noise eps (standard normal) through the flow; returns (theta, log q(theta)).
  template <class T>
  std::pair<std::vector<T>, T> transform(std::span<const T> params, std::span<const double> eps) const;

  std::pair<Vec, double> transform(std::span<const double> eps) const;

  /// n samples theta ~ q.
  std::vector<Vec> sample(std::size_t n, std::mt19937_64& rng) const;

  /// log q(theta), by inverting the layers last to first.
  double log_density(std::span<const double> theta) const;

 private:
  static std::size_t packed_size(std::size_t dim, std::size_t num_layers) { return 2 * dim + num_layers * (2 * dim + 1); }

  std::size_t dim_ = 0;
  std::size_t layers_ = 0;
  Vec params_;
};

double flow_log_density(const PlanarFlow& flow, std::span<const double> theta);

struct FlowTrainOptions {
  std::size_t steps = 500;
  std::size_t n_mc = 16;  // Monte-Carlo samples per step
  double lr = 1e-3;
  bool adam = false;  // plain SGD otherwise
  std::uint64_t seed = 0;
  double divergence_factor = 10.0;
};

struct FlowTrainResult {
  PlanarFlow flow;
  Vec objective;  // E[log q - log target] per step
};

/// Minimizes E_{z0}[log q(theta) - log target(theta)] by reparameterized
/// stochastic gradients. With target = log P - lambda L-hat this is KL(q||Q*) - ln Z.
/// Aborts with NumericalError when the objective exceeds
/// divergence_factor * max(|initial|, 1) or becomes nonfinite.
FlowTrainResult flow_train(PlanarFlow flow, const LogTarget& target, const FlowTrainOptions& options);

struct BaseGaussian {
  Vec mean;
  Vec stddev;
};

/// Mean of the samples and per-coordinate sample variance times `scale`,
/// variance floored at 1e-6 before scaling.
BaseGaussian base_from_samples(const std::vector<Vec>& samples, double scale);

// --- implementation -------------------------------------------------------

template <class T>
std::vector<T> admissible_u(std::span<const T> u, std::span<const T> w) {
  const T wu = ad::dot(w, u);
  const T ww = ad::dot(w, w);
  if (value_of(ww) == 0.0) return std::vector<T>(u.begin(), u.end());
  using ad::softplus;
  const T coef = (T(-1.0) + softplus(wu) - wu) / ww;
  std::vector<T> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + coef * w[i];
  return out;
}

template <class T>
std::pair<std::vector<T>, T> planar_forward(std::span<const T> u_hat, std::span<const T> w, const T& b,
                                            std::span<const T> z) {
  using std::abs;
  using std::log;
  using std::tanh;
  if (u_hat.size() != z.size() || w.size() != z.size()) throw std::invalid_argument("planar_forward: dimension mismatch");
  const T t = tanh(ad::dot(w, z) + b);
  std::vector<T> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] + u_hat[i] * t;
  const T det = T(1.0) + (T(1.0) - t * t) * ad::dot(u_hat, w);
  if (value_of(det) == 0.0) throw NumericalError("planar_forward: singular layer");
  return {std::move(out), log(abs(det))};
}

template <class T>
std::pair<std::vector<T>, T> PlanarFlow::transform(std::span<const T> params, std::span<const double> eps) const {
  using std::exp;
  if (params.size() != packed_size(dim_, layers_) || eps.size() != dim_) {
    throw std::invalid_argument("PlanarFlow::transform: dimension mismatch");
  }
  const std::size_t d = dim_;
  std::vector<T> z(d);
  T log_q(0.0);
  double base_const = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const T& log_sd = params[d + i];
    z[i] = params[i] + exp(log_sd) * eps[i];
    log_q = log_q - log_sd;
    base_const += -0.5 * eps[i] * eps[i] - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  log_q = log_q + base_const;
  for (std::size_t l = 0; l < layers_; ++l) {
    const auto block = params.subspan(2 * d + l * (2 * d + 1), 2 * d + 1);
    const auto u = block.first(d);
    const auto w = block.subspan(d, d);
    const std::vector<T> u_hat = admissible_u<T>(u, w);
    auto [next, log_det] = planar_forward<T>(u_hat, w, block[2 * d], z);
    z = std::move(next);
    log_q = log_q - log_det;
  }
  return {std::move(z), log_q};
}

}  // namespace pacsnoc::inf
