#pragma once

// Double-exponential (tanh-sinh) quadrature on a finite interval.  The
// integrand receives the node together with its exact distances to both
// endpoints, so integrable endpoint singularities can be evaluated without
// cancellation.

#include <cmath>
#include <numbers>

#include "cfp/error.hpp"

namespace cfp {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int levels = 0;
};

/// `fn(x, x - a, b - x)`.  Refines by halving the step in t until two
/// successive estimates agree to `rel_tol`.
template <class F>
QuadratureResult tanh_sinh(F&& fn, double a, double b, double rel_tol = 1e-14, int max_level = 12) {
  if (!(b > a)) {
    if (a == b) return {};
    throw Error(ErrorKind::InvalidArgument, "tanh_sinh needs a < b");
  }
  const double r = 0.5 * (b - a);
  constexpr double t_max = 6.5;
  constexpr double half_pi = 0.5 * std::numbers::pi;

  auto term = [&](double t) {
    const double u = half_pi * std::sinh(t);
    const double e = std::exp(-2.0 * std::abs(u));
    // distance to the nearer endpoint and to the farther one
    const double near = 2.0 * r * e / (1.0 + e);
    const double far = 2.0 * r / (1.0 + e);
    const double cu = std::cosh(u);
    const double weight = r * half_pi * std::cosh(t) / (cu * cu);
    if (weight == 0.0 || near == 0.0) return 0.0;
    const double x = t < 0.0 ? a + near : b - near;
    const double v = t < 0.0 ? fn(x, near, far) : fn(x, far, near);
    return std::isfinite(v) ? weight * v : 0.0;
  };

  double step = 0.5;
  double sum = term(0.0);
  for (int j = 1; j * step <= t_max; ++j) sum += term(j * step) + term(-j * step);
  double estimate = step * sum;
  QuadratureResult out{estimate, std::abs(estimate), 0};
  for (int level = 1; level <= max_level; ++level) {
    step *= 0.5;
    for (int j = 1; j * step <= t_max; j += 2) sum += term(j * step) + term(-j * step);
    const double next = step * sum;
    out.error_estimate = std::abs(next - estimate);
    out.value = next;
    out.levels = level;
    estimate = next;
    if (level >= 3 && out.error_estimate <= rel_tol * std::abs(next)) break;
    if (level >= 3 && next == 0.0) break;
  }
  return out;
}

}  // namespace cfp
