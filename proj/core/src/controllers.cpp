#include "pacsnoc/controllers.hpp"

#include <algorithm>

namespace pacsnoc::ctrl {

std::size_t parameter_count(const Architecture& arch) {
  if (std::holds_alternative<AffineArch>(arch)) return 2;
  const auto& r = std::get<ImcRenArch>(arch);
  const std::size_t n = 2 * r.xi_dim + r.zeta_dim;
  return n * n + r.xi_dim * r.xi_dim + r.xi_dim * r.state_dim + r.input_dim * r.xi_dim +
         r.input_dim * r.zeta_dim + r.input_dim * r.state_dim + r.zeta_dim * r.state_dim;
}

std::string arch_name(const Architecture& arch) {
  return std::holds_alternative<AffineArch>(arch) ? "affine" : "imc_ren";
}

void check_compatible(const Architecture& arch, const sim::Plant& plant) {
  if (std::holds_alternative<AffineArch>(arch)) {
    if (plant.state_dim() != 1 || plant.input_dim() != 1) {
      throw ConfigError("affine controller requires a scalar plant");
    }
    return;
  }
  const auto& r = std::get<ImcRenArch>(arch);
  if (r.state_dim != plant.state_dim() || r.input_dim != plant.input_dim()) {
    throw ConfigError("REN dimensions do not match the plant");
  }
  if (r.xi_dim == 0 || r.zeta_dim == 0) throw ConfigError("REN dimensions must be positive");
  if (!(r.epsilon > 0.0)) throw ConfigError("REN epsilon must be positive");
}

void ControllerParams::validate() const {
  if (theta.size() != parameter_count(arch)) {
    throw ConfigError("controller parameters: expected " + std::to_string(parameter_count(arch)) +
                      " entries, got " + std::to_string(theta.size()));
  }
  if (!all_finite<double>(theta)) throw ConfigError("controller parameters: nonfinite entry");
  if (std::holds_alternative<AffineArch>(arch) &&
      !(theta[0] > kGainLower && theta[0] < kGainUpper)) {
    throw ConfigError("affine gain outside the stabilizing interval (-2, 18)");
  }
}

double project_gain(double k) {
  return std::clamp(k, kGainLower + kGainMargin, kGainUpper - kGainMargin);
}

void project_affine(std::span<double> theta) {
  if (!theta.empty()) theta[0] = project_gain(theta[0]);
}

}  // namespace pacsnoc::ctrl
