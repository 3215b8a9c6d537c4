#include "pacsnoc/inference/svgd.hpp"

#include <algorithm>
#include <limits>

#include "pacsnoc/parallel.hpp"

namespace pacsnoc::inf {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_particles(const std::vector<Vec>& particles) {
  if (particles.empty()) throw ConfigError("svgd: need at least one particle");
  for (const auto& p : particles) {
    if (p.size() != particles.front().size()) throw ConfigError("svgd: particles differ in dimension");
  }
}

}  // namespace

double median_bandwidth(const std::vector<Vec>& particles) {
  check_particles(particles);
  const std::size_t k = particles.size();
  if (k == 1) return 1.0;
  Vec d;
  d.reserve(k * (k - 1) / 2);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) d.push_back(std::sqrt(sq_dist(particles[i], particles[j])));
  }
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size();
  const double med = m % 2 == 1 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
  return std::max(med * med / std::log(static_cast<double>(k) + 1.0), 1e-8);
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double h) {
  return std::exp(-sq_dist(a, b) / h);
}

std::vector<Vec> svgd_step(const std::vector<Vec>& particles, const std::vector<Vec>& grads, double eta,
                           double h) {
  check_particles(particles);
  if (grads.size() != particles.size()) throw std::invalid_argument("svgd_step: one gradient per particle");
  const std::size_t k = particles.size();
  const std::size_t d = particles.front().size();
  for (const auto& g : grads) {
    if (g.size() != d) throw std::invalid_argument("svgd_step: gradient dimension mismatch");
    if (!all_finite<double>(g)) throw NumericalError("svgd_step: nonfinite gradient");
  }
  if (h <= 0.0) h = median_bandwidth(particles);
  std::vector<Vec> out = particles;
  const double inv_k = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    Vec phi(d, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const double kij = rbf_kernel(particles[j], particles[i], h);
      // grad_{phi_j} kappa(phi_j, phi_i) = -2 (phi_j - phi_i) / h * kappa
      const double c = -2.0 * kij / h;
      for (std::size_t a = 0; a < d; ++a) {
        phi[a] += kij * grads[j][a] + c * (particles[j][a] - particles[i][a]);
      }
    }
    for (std::size_t a = 0; a < d; ++a) out[i][a] += eta * inv_k * phi[a];
  }
  return out;
}

SvgdResult svgd_train(std::vector<Vec> particles, const LogTarget& target, const SvgdOptions& options) {
  check_particles(particles);
  SvgdResult res;
  std::vector<Vec> best;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<Vec> grads(particles.size());
  Vec values(particles.size());
  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    if (options.validation) {
      const double v = options.validation(particles);
      res.validation.push_back(v);
      if (v < best_val) {
        best_val = v;
        best = particles;
        since_best = 0;
      } else if (++since_best >= options.patience) {
        res.stopped_early = true;
        break;
      }
    }
    parallel_for(particles.size(), [&](std::size_t i) {
      auto vg = target(particles[i]);
      values[i] = vg.value;
      grads[i] = std::move(vg.gradient);
    });
    double mean = 0.0;
    for (double v : values) mean += v;
    res.mean_log_target.push_back(mean / static_cast<double>(values.size()));

    std::vector<Vec> next = svgd_step(particles, grads, options.eta);
    if (options.project) {
      for (auto& p : next) options.project(p);
    }
    double move = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      for (std::size_t a = 0; a < next[i].size(); ++a) move = std::max(move, std::abs(next[i][a] - particles[i][a]));
    }
    particles = std::move(next);
    res.epochs = epoch + 1;
    if (move < options.tolerance) {
      res.converged = true;
      break;
    }
  }
  if (options.validation) {
    const double v = options.validation(particles);
    if (v < best_val) best = particles;
    res.particles = best.empty() ? particles : best;
  } else {
    res.particles = std::move(particles);
  }
  return res;
}

}  // namespace pacsnoc::inf
