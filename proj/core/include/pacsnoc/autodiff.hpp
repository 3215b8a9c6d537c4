#pragma once

// Tape-based reverse-mode differentiation for scalar objectives.
//
// A Var is either a constant (no tape) or a node on a Tape. Every arithmetic
// operation involving at least one taped operand appends a node holding the
// local partial derivatives with respect to its parents. Nodes are appended in
// evaluation order, so the tape is topologically sorted and a single reverse
// sweep yields all adjoints.
//
// Tapes are not thread-safe; use one tape per thread.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace pacsnoc::ad {

class Tape;

class Var {
 public:
  static constexpr std::uint32_t kConstant = std::numeric_limits<std::uint32_t>::max();

  Var() = default;
  Var(double value) : value_(value) {}  // NOLINT: implicit constants are intended

  double value() const { return value_; }
  std::uint32_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool is_constant() const { return tape_ == nullptr; }

 private:
  friend class Tape;
  Var(double value, std::uint32_t id, Tape* tape) : value_(value), id_(id), tape_(tape) {}

  double value_ = 0.0;
  std::uint32_t id_ = kConstant;
  Tape* tape_ = nullptr;
};

class Tape {
 public:
  Tape() { offsets_.push_back(0); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// New independent variable. Gradients are reported per leaf, in creation order.
  Var variable(double value) {
    const auto id = append_node();
    leaves_.push_back(id);
    return Var(value, id, this);
  }

  std::vector<Var> variables(std::span<const double> values) {
    std::vector<Var> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(variable(v));
    return out;
  }

  std::size_t size() const { return offsets_.size() - 1; }
  std::size_t num_leaves() const { return leaves_.size(); }

  void clear() {
    offsets_.assign(1, 0);
    parents_.clear();
    partials_.clear();
    leaves_.clear();
  }

  /// d(output)/d(leaf) for every leaf. One reverse sweep over the tape.
  std::vector<double> backward(const Var& output) const;

  // Node construction; used by the operator overloads below.
  Var unary(double value, const Var& a, double da) {
    const auto id = append_node_with(a.id_, da);
    return Var(value, id, this);
  }
  Var binary(double value, const Var& a, double da, const Var& b, double db) {
    parents_.push_back(a.id_);
    partials_.push_back(da);
    parents_.push_back(b.id_);
    partials_.push_back(db);
    offsets_.push_back(static_cast<std::uint32_t>(parents_.size()));
    return Var(value, static_cast<std::uint32_t>(size() - 1), this);
  }
  /// n-ary node: only taped parents should be passed.
  Var nary(double value, std::span<const std::uint32_t> ids, std::span<const double> partials) {
    parents_.insert(parents_.end(), ids.begin(), ids.end());
    partials_.insert(partials_.end(), partials.begin(), partials.end());
    offsets_.push_back(static_cast<std::uint32_t>(parents_.size()));
    return Var(value, static_cast<std::uint32_t>(size() - 1), this);
  }

 private:
  std::uint32_t append_node() {
    offsets_.push_back(static_cast<std::uint32_t>(parents_.size()));
    return static_cast<std::uint32_t>(size() - 1);
  }
  std::uint32_t append_node_with(std::uint32_t parent, double partial) {
    parents_.push_back(parent);
    partials_.push_back(partial);
    return append_node();
  }

  std::vector<std::uint32_t> offsets_;  // node i owns edges [offsets_[i], offsets_[i+1])
  std::vector<std::uint32_t> parents_;
  std::vector<double> partials_;
  std::vector<std::uint32_t> leaves_;
};

namespace detail {

inline Tape* common_tape(const Var& a, const Var& b) {
  if (a.tape() == nullptr) return b.tape();
  if (b.tape() != nullptr && b.tape() != a.tape()) {
    throw std::invalid_argument("autodiff: operands recorded on different tapes");
  }
  return a.tape();
}

inline Var make_binary(double value, const Var& a, double da, const Var& b, double db) {
  Tape* tape = common_tape(a, b);
  if (tape == nullptr) return Var(value);
  if (a.is_constant()) return tape->unary(value, b, db);
  if (b.is_constant()) return tape->unary(value, a, da);
  return tape->binary(value, a, da, b, db);
}

inline Var make_unary(double value, const Var& a, double da) {
  if (a.is_constant()) return Var(value);
  return a.tape()->unary(value, a, da);
}

}  // namespace detail

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.value(); }

inline Var operator+(const Var& a, const Var& b) {
  return detail::make_binary(a.value() + b.value(), a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  return detail::make_binary(a.value() - b.value(), a, 1.0, b, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  return detail::make_binary(a.value() * b.value(), a, b.value(), b, a.value());
}
inline Var operator/(const Var& a, const Var& b) {
  if (b.value() == 0.0) throw std::domain_error("autodiff: division by zero");
  const double inv = 1.0 / b.value();
  const double q = a.value() * inv;
  return detail::make_binary(q, a, inv, b, -q * inv);
}
inline Var operator-(const Var& a) { return detail::make_unary(-a.value(), a, -1.0); }

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

inline Var tanh(const Var& a) {
  const double t = std::tanh(a.value());
  return detail::make_unary(t, a, 1.0 - t * t);
}
inline Var exp(const Var& a) {
  const double e = std::exp(a.value());
  return detail::make_unary(e, a, e);
}
inline Var log(const Var& a) {
  if (!(a.value() > 0.0)) throw std::domain_error("autodiff: log of nonpositive value");
  return detail::make_unary(std::log(a.value()), a, 1.0 / a.value());
}
inline Var sqrt(const Var& a) {
  if (!(a.value() > 0.0)) throw std::domain_error("autodiff: sqrt of nonpositive value");
  const double s = std::sqrt(a.value());
  return detail::make_unary(s, a, 0.5 / s);
}
inline Var pow2(const Var& a) { return detail::make_unary(a.value() * a.value(), a, 2.0 * a.value()); }
/// |a| with derivative sign(a) (0 at the origin).
inline Var abs(const Var& a) {
  const double s = a.value() > 0.0 ? 1.0 : (a.value() < 0.0 ? -1.0 : 0.0);
  return detail::make_unary(std::abs(a.value()), a, s);
}
/// sqrt(a^2 + eps): smooth surrogate of |a|.
inline Var abs_smooth(const Var& a, double eps = 1e-12) {
  const double r = std::sqrt(a.value() * a.value() + eps);
  return detail::make_unary(r, a, a.value() / r);
}
/// log(1 + e^a), overflow-safe.
inline Var softplus(const Var& a) {
  const double x = a.value();
  const double v = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  const double sig = 1.0 / (1.0 + std::exp(-x));
  return detail::make_unary(v, a, sig);
}

inline double pow2(double a) { return a * a; }
inline double abs_smooth(double a, double eps = 1e-12) { return std::sqrt(a * a + eps); }
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// Inner product recorded as a single node.
Var dot(std::span<const Var> a, std::span<const Var> b);
Var dot(std::span<const double> a, std::span<const Var> b);
inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
Var sum(std::span<const Var> a);
inline double sum(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x;
  return s;
}

// Convenience overloads so templated code can call dot/sum on vectors.
template <class A, class B>
auto dot(const std::vector<A>& a, const std::vector<B>& b) {
  return dot(std::span<const A>(a), std::span<const B>(b));
}

/// Value and gradient of a scalar function evaluated on a fresh tape.
struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

ValueAndGradient value_and_gradient(const std::function<Var(std::span<const Var>)>& f,
                                    std::span<const double> point);

struct GradCheckResult {
  bool passed = false;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

/// Compares the taped gradient of `f` against central differences with step `h`.
/// Per-coordinate error is |g_ad - g_fd| / max(|g_ad|, |g_fd|, floor).
/// At a kink the two sides disagree; the result reports it rather than throwing.
GradCheckResult grad_check(const std::function<Var(std::span<const Var>)>& f,
                           std::span<const double> point, double h, double tol,
                           double floor = 1e-6);

}  // namespace pacsnoc::ad
