#pragma once

// Controller families whose closed loop is stable for the admissible parameters:
//  * affine state feedback u = -(k x + beta) for the scalar plant, with k
//    projected into the stabilizing interval (-2, 18);
//  * internal-model control: the disturbance is reconstructed with the exact
//    plant model and fed to a contracting recurrent equilibrium network (REN),
//    which is l2-stable for every real parameter vector.

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pacsnoc/common.hpp"
#include "pacsnoc/sim.hpp"

namespace pacsnoc::ctrl {

struct AffineArch {};

/// Contracting REN with an acyclic equilibrium layer.
///
/// Parameter ordering in theta (all matrices row-major), with n = 2*xi + zeta:
///   X   (n x n), Y (xi x xi), B2 (xi x Nx), C2 (Nu x xi), D21 (Nu x zeta),
///   D22 (Nu x Nx), D12 (zeta x Nx).
struct ImcRenArch {
  std::size_t xi_dim = 8;
  std::size_t zeta_dim = 8;
  std::size_t state_dim = 8;  // REN input (reconstructed disturbance)
  std::size_t input_dim = 4;  // REN output (plant input)
  double epsilon = 1e-3;      // H = X^T X + epsilon I
};

using Architecture = std::variant<AffineArch, ImcRenArch>;

std::size_t parameter_count(const Architecture& arch);
std::string arch_name(const Architecture& arch);
/// Throws ConfigError when the architecture cannot drive the plant.
void check_compatible(const Architecture& arch, const sim::Plant& plant);

struct ControllerParams {
  Architecture arch;
  Vec theta;

  void validate() const;
};

inline constexpr double kGainLower = -2.0;
inline constexpr double kGainUpper = 18.0;
inline constexpr double kGainMargin = 1e-6;

/// Clamp into [-2 + 1e-6, 18 - 1e-6]; idempotent.
double project_gain(double k);
/// Projects the gain entry of an affine parameter vector in place.
void project_affine(std::span<double> theta);

template <class T>
T affine_act(const T& k, const T& beta, const T& x) {
  return -(k * x + beta);
}

/// w_hat_0 = x_0 - anchor (anchor is the internal model's prediction of x_0).
template <class T>
std::vector<T> reconstruct_disturbance(const sim::Plant& plant, std::span<const T> x0) {
  const Vec anchor = plant.imc_anchor_state();
  if (x0.size() != anchor.size()) throw std::invalid_argument("reconstruct_disturbance: dimension mismatch");
  std::vector<T> w(x0.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = x0[i] - anchor[i];
  return w;
}

/// w_hat_t = x_t - f(x_{t-1}, u_{t-1}).
template <class T>
std::vector<T> reconstruct_disturbance(const sim::Plant& plant, std::span<const T> x_t,
                                       std::span<const T> x_prev, std::span<const T> u_prev) {
  if (x_t.size() != plant.state_dim()) throw std::invalid_argument("reconstruct_disturbance: dimension mismatch");
  std::vector<T> w = plant.predict<T>(x_prev, u_prev);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = x_t[i] - w[i];
  return w;
}

template <class T>
struct RenState {
  std::vector<T> xi;                    // internal state, zero at t = 0
  std::vector<std::vector<T>> history;  // reconstructed disturbances seen so far
};

/// Realized REN matrices for one parameter vector.
template <class T>
class Ren {
 public:
  Ren(const ImcRenArch& arch, std::span<const T> theta);

  const ImcRenArch& arch() const { return arch_; }
  RenState<T> initial_state() const;
  /// One step: returns u_t and advances state.xi to xi_{t+1}.
  std::vector<T> forward(RenState<T>& state, std::span<const T> w_hat) const;

 private:
  ImcRenArch arch_;
  // Row-major blocks.
  std::vector<T> e_inv_;   // xi x xi
  std::vector<T> f_;       // xi x xi
  std::vector<T> b1_;      // xi x zeta
  std::vector<T> b2_;      // xi x Nx
  std::vector<T> c1_;      // zeta x xi
  std::vector<T> d11_;     // zeta x zeta, strictly lower triangular
  std::vector<T> d12_;     // zeta x Nx
  std::vector<T> c2_;      // Nu x xi
  std::vector<T> d21_;     // Nu x zeta
  std::vector<T> d22_;     // Nu x Nx
  std::vector<T> inv_lambda_;  // zeta
};

/// Stateful control law K_t(x_{t:0}) returning u_t for either architecture.
template <class T>
class Policy {
 public:
  Policy(const sim::Plant& plant, const Architecture& arch, std::span<const T> theta);

  std::vector<T> act(std::span<const T> x_t);

 private:
  const sim::Plant* plant_;
  bool affine_ = true;
  T k_{};
  T beta_{};
  std::vector<Ren<T>> ren_;  // empty for the affine law
  RenState<T> state_;
  std::vector<T> x_prev_;
  std::vector<T> u_prev_;
};

// --- implementation -------------------------------------------------------

namespace detail {

template <class T>
std::vector<T> matvec(std::span<const T> m, std::size_t rows, std::size_t cols, std::span<const T> v) {
  std::vector<T> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = ad::dot(m.subspan(r * cols, cols), v);
  return out;
}

/// Inverse of a matrix whose symmetric part is positive definite (no pivoting needed).
template <class T>
std::vector<T> invert_pd_like(std::vector<T> a, std::size_t n) {
  std::vector<T> inv(n * n, T(0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = T(1.0);
  for (std::size_t c = 0; c < n; ++c) {
    const T pivot = a[c * n + c];
    if (value_of(pivot) == 0.0) throw NumericalError("REN: singular E matrix");
    const T inv_pivot = T(1.0) / pivot;
    for (std::size_t j = 0; j < n; ++j) {
      a[c * n + j] = a[c * n + j] * inv_pivot;
      inv[c * n + j] = inv[c * n + j] * inv_pivot;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const T factor = a[r * n + c];
      if constexpr (std::is_same_v<T, double>) {
        if (factor == 0.0) continue;
      } else {
        if (factor.is_constant() && factor.value() == 0.0) continue;
      }
      for (std::size_t j = 0; j < n; ++j) {
        a[r * n + j] = a[r * n + j] - factor * a[c * n + j];
        inv[r * n + j] = inv[r * n + j] - factor * inv[c * n + j];
      }
    }
  }
  return inv;
}

}  // namespace detail

template <class T>
Ren<T>::Ren(const ImcRenArch& arch, std::span<const T> theta) : arch_(arch) {
  const std::size_t nx = arch.xi_dim;
  const std::size_t nz = arch.zeta_dim;
  const std::size_t nw = arch.state_dim;
  const std::size_t nu = arch.input_dim;
  const std::size_t n = 2 * nx + nz;
  if (theta.size() != parameter_count(arch)) throw std::invalid_argument("Ren: parameter vector has wrong length");

  std::size_t off = 0;
  auto take = [&](std::size_t count) {
    auto s = theta.subspan(off, count);
    off += count;
    return s;
  };
  const auto x = take(n * n);
  const auto y = take(nx * nx);
  const auto b2 = take(nx * nw);
  const auto c2 = take(nu * nx);
  const auto d21 = take(nu * nz);
  const auto d22 = take(nu * nw);
  const auto d12 = take(nz * nw);

  // H = X^T X + eps I, computed column-wise from X's columns.
  std::vector<std::vector<T>> cols(n, std::vector<T>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) cols[c][r] = x[r * n + c];
  }
  std::vector<T> h(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      T v = ad::dot(std::span<const T>(cols[i]), std::span<const T>(cols[j]));
      if (i == j) v = v + arch.epsilon;
      h[i * n + j] = v;
      h[j * n + i] = v;
    }
  }
  auto hb = [&](std::size_t r, std::size_t c) -> const T& { return h[r * n + c]; };
  // Block offsets: [0, nx) -> 1, [nx, nx+nz) -> 2, [nx+nz, n) -> 3.
  const std::size_t o2 = nx;
  const std::size_t o3 = nx + nz;

  std::vector<T> e(nx * nx);
  f_.resize(nx * nx);
  for (std::size_t r = 0; r < nx; ++r) {
    for (std::size_t c = 0; c < nx; ++c) {
      e[r * nx + c] = 0.5 * (hb(r, c) + hb(o3 + r, o3 + c) + y[r * nx + c] - y[c * nx + r]);
      f_[r * nx + c] = hb(o3 + r, c);
    }
  }
  e_inv_ = detail::invert_pd_like<T>(std::move(e), nx);

  b1_.resize(nx * nz);
  for (std::size_t r = 0; r < nx; ++r) {
    for (std::size_t c = 0; c < nz; ++c) b1_[r * nz + c] = hb(o3 + r, o2 + c);
  }
  c1_.resize(nz * nx);
  d11_.assign(nz * nz, T(0.0));
  inv_lambda_.resize(nz);
  for (std::size_t r = 0; r < nz; ++r) {
    for (std::size_t c = 0; c < nx; ++c) c1_[r * nx + c] = -hb(o2 + r, c);
    for (std::size_t c = 0; c < r; ++c) d11_[r * nz + c] = -hb(o2 + r, o2 + c);
    inv_lambda_[r] = T(2.0) / hb(o2 + r, o2 + r);
  }
  b2_.assign(b2.begin(), b2.end());
  c2_.assign(c2.begin(), c2.end());
  d21_.assign(d21.begin(), d21.end());
  d22_.assign(d22.begin(), d22.end());
  d12_.assign(d12.begin(), d12.end());
}

template <class T>
RenState<T> Ren<T>::initial_state() const {
  RenState<T> s;
  s.xi.assign(arch_.xi_dim, T(0.0));
  return s;
}

template <class T>
std::vector<T> Ren<T>::forward(RenState<T>& state, std::span<const T> w_hat) const {
  const std::size_t nx = arch_.xi_dim;
  const std::size_t nz = arch_.zeta_dim;
  const std::size_t nw = arch_.state_dim;
  const std::size_t nu = arch_.input_dim;
  if (w_hat.size() != nw || state.xi.size() != nx) throw std::invalid_argument("Ren::forward: dimension mismatch");
  const std::span<const T> xi(state.xi);

  // Equilibrium layer: zeta_i depends only on sigma(zeta_j), j < i.
  std::vector<T> eps(nz, T(0.0));
  for (std::size_t i = 0; i < nz; ++i) {
    T v = ad::dot(std::span<const T>(c1_).subspan(i * nx, nx), xi) +
          ad::dot(std::span<const T>(d12_).subspan(i * nw, nw), w_hat);
    if (i > 0) {
      v = v + ad::dot(std::span<const T>(d11_).subspan(i * nz, i), std::span<const T>(eps).first(i));
    }
    using std::tanh;
    eps[i] = tanh(v * inv_lambda_[i]);
  }

  std::vector<T> u(nu);
  for (std::size_t r = 0; r < nu; ++r) {
    u[r] = ad::dot(std::span<const T>(c2_).subspan(r * nx, nx), xi) +
           ad::dot(std::span<const T>(d21_).subspan(r * nz, nz), std::span<const T>(eps)) +
           ad::dot(std::span<const T>(d22_).subspan(r * nw, nw), w_hat);
  }

  std::vector<T> rhs(nx);
  for (std::size_t r = 0; r < nx; ++r) {
    rhs[r] = ad::dot(std::span<const T>(f_).subspan(r * nx, nx), xi) +
             ad::dot(std::span<const T>(b1_).subspan(r * nz, nz), std::span<const T>(eps)) +
             ad::dot(std::span<const T>(b2_).subspan(r * nw, nw), w_hat);
  }
  state.xi = detail::matvec<T>(e_inv_, nx, nx, rhs);
  state.history.emplace_back(w_hat.begin(), w_hat.end());
  return u;
}

/// Free-function form of one REN step.
template <class T>
std::pair<std::vector<T>, RenState<T>> ren_forward(const Ren<T>& ren, RenState<T> state,
                                                   std::span<const T> w_hat) {
  auto u = ren.forward(state, w_hat);
  return {std::move(u), std::move(state)};
}

template <class T>
Policy<T>::Policy(const sim::Plant& plant, const Architecture& arch, std::span<const T> theta)
    : plant_(&plant) {
  if (theta.size() != parameter_count(arch)) throw std::invalid_argument("Policy: parameter vector has wrong length");
  check_compatible(arch, plant);
  if (std::holds_alternative<AffineArch>(arch)) {
    k_ = theta[0];
    beta_ = theta[1];
  } else {
    affine_ = false;
    ren_.emplace_back(std::get<ImcRenArch>(arch), theta);
    state_ = ren_.front().initial_state();
  }
}

template <class T>
std::vector<T> Policy<T>::act(std::span<const T> x_t) {
  if (affine_) return {affine_act(k_, beta_, x_t[0])};
  std::vector<T> w_hat = x_prev_.empty()
                             ? reconstruct_disturbance<T>(*plant_, x_t)
                             : reconstruct_disturbance<T>(*plant_, x_t, x_prev_, u_prev_);
  std::vector<T> u = ren_.front().forward(state_, w_hat);
  x_prev_.assign(x_t.begin(), x_t.end());
  u_prev_ = u;
  return u;
}

}  // namespace pacsnoc::ctrl
