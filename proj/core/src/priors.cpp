#include "pacsnoc/priors.hpp"

namespace pacsnoc::pb {

namespace {

void check_gaussian(const Gaussian1D& g, const char* what) {
  if (!std::isfinite(g.mean) || !(g.variance > 0.0) || !std::isfinite(g.variance)) {
    throw ConfigError(std::string("prior: invalid Gaussian for ") + what);
  }
}

}  // namespace

Prior::Prior(Kind kind) : kind_(std::move(kind)) {
  if (const auto* g = std::get_if<GaussianIso>(&kind_)) {
    if (g->mean.empty()) throw ConfigError("prior: empty mean");
    if (!all_finite<double>(g->mean)) throw ConfigError("prior: nonfinite mean");
    if (!(g->variance > 0.0) || !std::isfinite(g->variance)) throw ConfigError("prior: variance must be positive");
    return;
  }
  const auto& p = std::get<Product2D>(kind_);
  check_gaussian(p.k, "k");
  if (const auto* u = std::get_if<Uniform1D>(&p.beta)) {
    if (!(u->hi > u->lo) || !std::isfinite(u->lo) || !std::isfinite(u->hi)) {
      throw ConfigError("prior: uniform support must satisfy lo < hi");
    }
  } else {
    check_gaussian(std::get<Gaussian1D>(p.beta), "beta");
  }
}

std::size_t Prior::dim() const {
  if (const auto* g = std::get_if<GaussianIso>(&kind_)) return g->mean.size();
  return 2;
}

bool Prior::in_support(std::span<const double> theta) const {
  if (theta.size() != dim()) return false;
  if (const auto* p = std::get_if<Product2D>(&kind_)) {
    if (const auto* u = std::get_if<Uniform1D>(&p->beta)) return theta[1] >= u->lo && theta[1] <= u->hi;
  }
  return true;
}

Vec Prior::sample(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  if (const auto* g = std::get_if<GaussianIso>(&kind_)) {
    const double sd = std::sqrt(g->variance);
    Vec out(g->mean.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = g->mean[i] + sd * normal(rng);
    return out;
  }
  const auto& p = std::get<Product2D>(kind_);
  Vec out(2);
  out[0] = p.k.mean + std::sqrt(p.k.variance) * normal(rng);
  if (const auto* u = std::get_if<Uniform1D>(&p.beta)) {
    std::uniform_real_distribution<double> unif(u->lo, u->hi);
    out[1] = unif(rng);
  } else {
    const auto& g = std::get<Gaussian1D>(p.beta);
    out[1] = g.mean + std::sqrt(g.variance) * normal(rng);
  }
  return out;
}

Prior lti_prior(double k_center, bool gaussian_beta, double b) {
  Product2D p;
  p.k = {k_center, 1.0};
  if (gaussian_beta) {
    p.beta = Gaussian1D{3.0, 1.5 * 1.5};
  } else {
    p.beta = Uniform1D{-0.5 / b, 0.5 / b};
  }
  return Prior(p);
}

double ih_lqr_gain(double a, double b, double q, double r) {
  if (!(q > 0.0) || !(r > 0.0) || b == 0.0) throw ConfigError("ih_lqr_gain: need q, r > 0 and b != 0");
  // Scalar DARE: p = q + a^2 p - (a b p)^2 / (r + b^2 p); positive root of
  // b^2 p^2 + (r - a^2 r - q b^2) p - q r = 0.
  const double qa = b * b;
  const double qb = r - a * a * r - q * b * b;
  const double qc = -q * r;
  const double p = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
  return a * b * p / (r + b * b * p);
}

}  // namespace pacsnoc::pb
