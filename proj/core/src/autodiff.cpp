#include "pacsnoc/autodiff.hpp"

#include <algorithm>

namespace pacsnoc::ad {

std::vector<double> Tape::backward(const Var& output) const {
  if (output.tape() != this || output.id() >= size()) {
    throw std::invalid_argument("autodiff: backward output is not recorded on this tape");
  }
  std::vector<double> adjoint(output.id() + 1, 0.0);
  adjoint[output.id()] = 1.0;
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    const double a = adjoint[i];
    if (a == 0.0) continue;
    for (std::uint32_t e = offsets_[i]; e < offsets_[i + 1]; ++e) {
      adjoint[parents_[e]] += a * partials_[e];
    }
  }
  std::vector<double> grad(leaves_.size(), 0.0);
  for (std::size_t k = 0; k < leaves_.size(); ++k) {
    if (leaves_[k] <= output.id()) grad[k] = adjoint[leaves_[k]];
  }
  return grad;
}

Var dot(std::span<const Var> a, std::span<const Var> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  Tape* tape = nullptr;
  double value = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    value += a[i].value() * b[i].value();
    for (Tape* t : {a[i].tape(), b[i].tape()}) {
      if (t == nullptr) continue;
      if (tape != nullptr && tape != t) throw std::invalid_argument("dot: mixed tapes");
      tape = t;
    }
  }
  if (tape == nullptr) return Var(value);
  thread_local std::vector<std::uint32_t> ids;
  thread_local std::vector<double> partials;
  ids.clear();
  partials.clear();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_constant()) {
      ids.push_back(a[i].id());
      partials.push_back(b[i].value());
    }
    if (!b[i].is_constant()) {
      ids.push_back(b[i].id());
      partials.push_back(a[i].value());
    }
  }
  return tape->nary(value, ids, partials);
}

Var dot(std::span<const double> a, std::span<const Var> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  Tape* tape = nullptr;
  double value = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    value += a[i] * b[i].value();
    if (b[i].tape() != nullptr) {
      if (tape != nullptr && tape != b[i].tape()) throw std::invalid_argument("dot: mixed tapes");
      tape = b[i].tape();
    }
  }
  if (tape == nullptr) return Var(value);
  thread_local std::vector<std::uint32_t> ids;
  thread_local std::vector<double> partials;
  ids.clear();
  partials.clear();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!b[i].is_constant() && a[i] != 0.0) {
      ids.push_back(b[i].id());
      partials.push_back(a[i]);
    }
  }
  return tape->nary(value, ids, partials);
}

Var sum(std::span<const Var> a) {
  Tape* tape = nullptr;
  double value = 0.0;
  for (const auto& x : a) {
    value += x.value();
    if (x.tape() != nullptr) {
      if (tape != nullptr && tape != x.tape()) throw std::invalid_argument("sum: mixed tapes");
      tape = x.tape();
    }
  }
  if (tape == nullptr) return Var(value);
  thread_local std::vector<std::uint32_t> ids;
  thread_local std::vector<double> partials;
  ids.clear();
  partials.clear();
  for (const auto& x : a) {
    if (!x.is_constant()) {
      ids.push_back(x.id());
      partials.push_back(1.0);
    }
  }
  return tape->nary(value, ids, partials);
}

ValueAndGradient value_and_gradient(const std::function<Var(std::span<const Var>)>& f,
                                    std::span<const double> point) {
  Tape tape;
  const auto x = tape.variables(point);
  const Var y = f(x);
  ValueAndGradient out;
  out.value = y.value();
  if (y.is_constant()) {
    out.gradient.assign(point.size(), 0.0);
  } else {
    out.gradient = tape.backward(y);
  }
  return out;
}

GradCheckResult grad_check(const std::function<Var(std::span<const Var>)>& f,
                           std::span<const double> point, double h, double tol, double floor) {
  GradCheckResult r;
  r.analytic = value_and_gradient(f, point).gradient;
  r.numeric.resize(point.size());
  std::vector<Var> x(point.begin(), point.end());
  for (std::size_t i = 0; i < point.size(); ++i) {
    x[i] = Var(point[i] + h);
    const double fp = f(x).value();
    x[i] = Var(point[i] - h);
    const double fm = f(x).value();
    x[i] = Var(point[i]);
    r.numeric[i] = (fp - fm) / (2.0 * h);
  }
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double scale = std::max({std::abs(r.analytic[i]), std::abs(r.numeric[i]), floor});
    double err = std::abs(r.analytic[i] - r.numeric[i]) / scale;
    if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
    if (err > r.max_rel_error) {
      r.max_rel_error = err;
      r.worst_index = i;
    }
  }
  r.passed = r.max_rel_error < tol;
  return r;
}

}  // namespace pacsnoc::ad
