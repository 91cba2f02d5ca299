#pragma once

#include <cmath>
#include <string>

#include "eecoord/errors.hpp"

namespace eecoord {

namespace detail {

inline void require_nonnegative(double x, const char* who) {
  if (!(x >= 0.0)) throw domain_error(std::string(who) + ": argument must be >= 0");
}

// Sign-equivalent form of x f'(x) - f(x) with the common factor
// (1 - e^-x)^(M-1) removed, so it does not underflow near zero for large M.
inline double first_order_bracket(int order, double x) {
  const double e = std::exp(-x);
  return order * x * e + std::expm1(-x);
}

inline double power_success(int order, double x) { return std::pow(-std::expm1(-x), order); }

inline double power_success_derivative(int order, double x) {
  return order * std::exp(-x) * std::pow(-std::expm1(-x), order - 1);
}

}  // namespace detail

/// Returns the unique positive root of x f'(x) = f(x) for f(x) = (1 - e^-x)^M.
///
/// The root is bracketed starting from [1e-9, 1], doubling the upper end
/// until the residual turns negative, then bisected to 1e-12 absolute width.
/// Throws unsupported_order for M < 2 (f is concave, the only root is 0) and
/// convergence_error if the bracket would have to grow past 1e3.
inline double solve_gamma_star(int order) {
  if (order < 2)
    throw unsupported_order("solve_gamma_star: efficiency order M must be >= 2, got " +
                            std::to_string(order));
  double lo = 1e-9;
  double hi = 1.0;
  while (detail::first_order_bracket(order, hi) >= 0.0) {
    hi *= 2.0;
    if (hi > 1e3) throw convergence_error("solve_gamma_star: no sign change below 1e3");
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (detail::first_order_bracket(order, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double root = 0.5 * (lo + hi);
  const double f = detail::power_success(order, root);
  const double residual = root * detail::power_success_derivative(order, root) - f;
  if (!(std::abs(residual) <= 1e-10 * f))
    throw convergence_error("solve_gamma_star: residual above tolerance");
  return root;
}

// Sigmoidal packet-success function f(x) = (1 - e^-x)^M together with its
// cached optimal operating SINR.
class EfficiencyModel {
 public:
  explicit EfficiencyModel(int order) : order_(order), gamma_star_(solve_gamma_star(order)) {}

  int order() const noexcept { return order_; }
  double gamma_star() const noexcept { return gamma_star_; }

  double value(double x) const {
    detail::require_nonnegative(x, "efficiency_value");
    return detail::power_success(order_, x);
  }

  double derivative(double x) const {
    detail::require_nonnegative(x, "efficiency_derivative");
    return detail::power_success_derivative(order_, x);
  }

  // 1/(1+γ*): the quality level above which a δ-OCSC outcome is an exact equilibrium.
  double equilibrium_threshold() const noexcept { return 1.0 / (1.0 + gamma_star_); }

  // x f'(x) - f(x) at γ*.
  double residual() const {
    return gamma_star_ * derivative(gamma_star_) - value(gamma_star_);
  }

 private:
  int order_;
  double gamma_star_;
};

inline double efficiency_value(const EfficiencyModel& model, double x) { return model.value(x); }

inline double efficiency_derivative(const EfficiencyModel& model, double x) {
  return model.derivative(x);
}

}  // namespace eecoord
