#include "pacsnoc/inference/flows.hpp"

#include <algorithm>
#include <limits>

#include "pacsnoc/parallel.hpp"

namespace pacsnoc::inf {

Vec planar_inverse(std::span<const double> u_hat, std::span<const double> w, double b, std::span<const double> y) {
  if (u_hat.size() != y.size() || w.size() != y.size()) throw std::invalid_argument("planar_inverse: dimension mismatch");
  const double c = ad::dot(w, u_hat);
  const double wy = ad::dot(w, y);
  // w^T y = a + c tanh(a + b), monotone in a since c >= -1; the root lies
  // within |c| of w^T y.
  auto g = [&](double a) { return a + c * std::tanh(a + b) - wy; };
  double lo = wy - std::abs(c) - 1e-12;
  double hi = wy + std::abs(c) + 1e-12;
  double a = wy;
  bool done = false;
  for (int it = 0; it < 100; ++it) {
    const double ga = g(a);
    if (std::abs(ga) <= 1e-15 * (1.0 + std::abs(wy))) {
      done = true;
      break;
    }
    if (ga > 0.0) {
      hi = a;
    } else {
      lo = a;
    }
    const double t = std::tanh(a + b);
    const double slope = 1.0 + c * (1.0 - t * t);
    double next = slope > 0.0 ? a - ga / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == a || hi - lo <= 1e-15 * (1.0 + std::abs(wy))) {
      a = next;
      done = true;
      break;
    }
    a = next;
  }
  if (!done && std::abs(g(a)) > 1e-10 * (1.0 + std::abs(wy))) {
    throw NumericalError("planar_inverse: no convergence in 100 iterations");
  }
  const double t = std::tanh(a + b);
  Vec z(y.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = y[i] - u_hat[i] * t;
  return z;
}

PlanarFlow::PlanarFlow(Vec base_mean, Vec base_stddev, std::size_t num_layers, std::uint64_t seed,
                       double init_scale)
    : dim_(base_mean.size()), layers_(num_layers) {
  if (dim_ == 0) throw ConfigError("flow: dimension must be positive");
  if (base_stddev.size() != dim_) throw ConfigError("flow: base mean and stddev differ in size");
  params_.assign(packed_size(dim_, layers_), 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    if (!(base_stddev[i] > 0.0)) throw ConfigError("flow: base stddev must be positive");
    params_[i] = base_mean[i];
    params_[dim_ + i] = std::log(base_stddev[i]);
  }
  std::mt19937_64 rng(seed);
  const double s = init_scale / std::sqrt(static_cast<double>(dim_));
  std::uniform_real_distribution<double> unif(-s, s);
  for (std::size_t k = 2 * dim_; k < params_.size(); ++k) params_[k] = unif(rng);
  for (std::size_t l = 0; l < layers_; ++l) params_[2 * dim_ + l * (2 * dim_ + 1) + 2 * dim_] = 0.0;
}

PlanarFlow::PlanarFlow(std::size_t dim, std::size_t num_layers, Vec params)
    : dim_(dim), layers_(num_layers), params_(std::move(params)) {
  if (dim_ == 0) throw ConfigError("flow: dimension must be positive");
  if (params_.size() != packed_size(dim_, layers_)) throw ConfigError("flow: packed parameter vector has wrong length");
}

Vec PlanarFlow::base_mean() const { return Vec(params_.begin(), params_.begin() + static_cast<std::ptrdiff_t>(dim_)); }

Vec PlanarFlow::base_stddev() const {
  Vec out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = std::exp(params_[dim_ + i]);
  return out;
}

PlanarLayer PlanarFlow::layer(std::size_t l) const {
  if (l >= layers_) throw std::out_of_range("PlanarFlow::layer");
  const auto it = params_.begin() + static_cast<std::ptrdiff_t>(2 * dim_ + l * (2 * dim_ + 1));
  const auto d = static_cast<std::ptrdiff_t>(dim_);
  return {Vec(it, it + d), Vec(it + d, it + 2 * d), *(it + 2 * d)};
}

void PlanarFlow::set_layer(std::size_t l, const PlanarLayer& layer) {
  if (l >= layers_) throw std::out_of_range("PlanarFlow::set_layer");
  if (layer.u.size() != dim_ || layer.w.size() != dim_) throw std::invalid_argument("PlanarFlow::set_layer: dimension mismatch");
  const std::size_t o = 2 * dim_ + l * (2 * dim_ + 1);
  std::copy(layer.u.begin(), layer.u.end(), params_.begin() + static_cast<std::ptrdiff_t>(o));
  std::copy(layer.w.begin(), layer.w.end(), params_.begin() + static_cast<std::ptrdiff_t>(o + dim_));
  params_[o + 2 * dim_] = layer.b;
}

std::pair<Vec, double> PlanarFlow::transform(std::span<const double> eps) const {
  return transform<double>(params_, eps);
}

std::vector<Vec> PlanarFlow::sample(std::size_t n, std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(n);
  Vec eps(dim_);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& e : eps) e = normal(rng);
    out.push_back(transform(eps).first);
  }
  return out;
}

double PlanarFlow::log_density(std::span<const double> theta) const {
  if (theta.size() != dim_) throw std::invalid_argument("PlanarFlow::log_density: dimension mismatch");
  Vec z(theta.begin(), theta.end());
  double sum_log_det = 0.0;
  for (std::size_t l = layers_; l-- > 0;) {
    const PlanarLayer ly = layer(l);
    const Vec u_hat = admissible_u<double>(ly.u, ly.w);
    Vec prev = planar_inverse(u_hat, ly.w, ly.b, z);
    sum_log_det += planar_forward<double>(u_hat, ly.w, ly.b, prev).second;
    z = std::move(prev);
  }
  double log_base = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double log_sd = params_[dim_ + i];
    const double e = (z[i] - params_[i]) * std::exp(-log_sd);
    log_base += -0.5 * e * e - log_sd - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return log_base - sum_log_det;
}

double flow_log_density(const PlanarFlow& flow, std::span<const double> theta) { return flow.log_density(theta); }

FlowTrainResult flow_train(PlanarFlow flow, const LogTarget& target, const FlowTrainOptions& options) {
  if (options.n_mc == 0) throw ConfigError("flow_train: n_mc must be positive");
  if (!(options.lr >= 0.0)) throw ConfigError("flow_train: learning rate must be >= 0");
  const std::size_t np = flow.num_params();
  const std::size_t d = flow.dim();
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FlowTrainResult res;
  Vec m(np, 0.0);
  Vec v(np, 0.0);
  double threshold = std::numeric_limits<double>::infinity();

  for (std::size_t step = 0; step < options.steps; ++step) {
    std::vector<Vec> eps(options.n_mc, Vec(d));
    for (auto& e : eps) {
      for (auto& x : e) x = normal(rng);
    }
    std::vector<double> values(options.n_mc);
    std::vector<Vec> grads(options.n_mc);
    const Vec params = flow.params();
    parallel_for(options.n_mc, [&](std::size_t i) {
      // theta and log q on the flow tape; the target gradient enters as a constant
      // cotangent so only one rollout tape per sample is needed.
      // A domain error here means the parameters have left the region where
      // the flow is evaluable; it is reported as a nonfinite objective.
      try {
        ad::Tape tape;
        const auto p = tape.variables(params);
        auto [theta_v, log_q] = flow.transform<ad::Var>(p, eps[i]);
        const Vec theta = values_of(theta_v);
        const auto tg = target(theta);
        values[i] = log_q.value() - tg.value;
        const ad::Var surrogate =
            log_q - ad::dot(std::span<const double>(tg.gradient), std::span<const ad::Var>(theta_v));
        grads[i] = surrogate.is_constant() ? Vec(np, 0.0) : tape.backward(surrogate);
      } catch (const std::domain_error&) {
        values[i] = std::numeric_limits<double>::quiet_NaN();
        grads[i] = Vec(np, 0.0);
      }
    });
    double obj = 0.0;
    Vec g(np, 0.0);
    for (std::size_t i = 0; i < options.n_mc; ++i) {
      obj += values[i];
      for (std::size_t k = 0; k < np; ++k) g[k] += grads[i][k];
    }
    obj /= static_cast<double>(options.n_mc);
    for (auto& x : g) x /= static_cast<double>(options.n_mc);
    if (!std::isfinite(obj) || !all_finite<double>(g)) {
      throw NumericalError("flow_train: nonfinite objective at step " + std::to_string(step));
    }
    if (step == 0) threshold = options.divergence_factor * std::max(std::abs(obj), 1.0);
    if (obj > threshold) throw NumericalError("flow_train: objective diverged at step " + std::to_string(step));
    res.objective.push_back(obj);

    Vec& theta = flow.params();
    if (options.adam) {
      const double b1 = 0.9;
      const double b2 = 0.999;
      const double t = static_cast<double>(step + 1);
      for (std::size_t k = 0; k < np; ++k) {
        m[k] = b1 * m[k] + (1.0 - b1) * g[k];
        v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
        const double mh = m[k] / (1.0 - std::pow(b1, t));
        const double vh = v[k] / (1.0 - std::pow(b2, t));
        theta[k] -= options.lr * mh / (std::sqrt(vh) + 1e-8);
      }
    } else {
      for (std::size_t k = 0; k < np; ++k) theta[k] -= options.lr * g[k];
    }
  }
  res.flow = std::move(flow);
  return res;
}

BaseGaussian base_from_samples(const std::vector<Vec>& samples, double scale) {
  if (samples.size() < 2) throw ConfigError("base_from_samples: need at least two samples");
  if (!(scale > 0.0)) throw ConfigError("base_from_samples: scale must be positive");
  const std::size_t d = samples.front().size();
  BaseGaussian out;
  out.mean.assign(d, 0.0);
  out.stddev.assign(d, 0.0);
  const double n = static_cast<double>(samples.size());
  for (const auto& s : samples) {
    if (s.size() != d) throw ConfigError("base_from_samples: samples differ in dimension");
    for (std::size_t i = 0; i < d; ++i) out.mean[i] += s[i];
  }
  for (auto& x : out.mean) x /= n;
  for (std::size_t i = 0; i < d; ++i) {
    double ss = 0.0;
    for (const auto& s : samples) ss += (s[i] - out.mean[i]) * (s[i] - out.mean[i]);
    out.stddev[i] = std::sqrt(std::max(ss / (n - 1.0), 1e-6) * scale);
  }
  return out;
}

}  // namespace pacsnoc::inf
