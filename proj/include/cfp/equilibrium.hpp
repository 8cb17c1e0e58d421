#pragma once

// Zero-flux steady profiles
//
//   f(w; C) = C H^{s-1} / (1 - beta C^alpha H^{s alpha})^{1/alpha},   s = 1 / (2 lambda),
//
// the critical mass of the extremal member C = beta^{-1/alpha}, and the
// amplitude/condensate split for a prescribed mass.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "cfp/error.hpp"
#include "cfp/grid.hpp"
#include "cfp/quadrature.hpp"
#include "cfp/solver.hpp"

namespace cfp {

struct SteadyProfile {
  double amplitude = 0.0;
  double s = 0.0;
  GridFunction values;
  /// Mass of the continuous profile on (-1, 1).
  double mass = 0.0;
  /// Midpoint sum of the grid values.
  double grid_mass = 0.0;
  bool is_critical = false;
};

namespace detail {

/// Pointwise evaluation of the steady family.  The point is passed as |w|
/// together with 1 - |w| to keep both ends accurate.
class SteadyFormula {
 public:
  SteadyFormula(double amplitude, const ModelParams& p) : c_(amplitude), p_(p) {
    s_ = 1.0 / (2.0 * p.lambda);
    if (p.beta > 0.0) {
      k_ = p.beta * std::pow(c_, p.alpha);
      m_ = s_ * p.alpha;
    }
  }

  bool singular_at_zero() const { return p_.beta > 0.0 && k_ >= 1.0; }

  /// 1 - H^m for |w| = aw.
  double psi(double aw) const {
    const double w2 = aw * aw;
    if (w2 < 1e-6) {
      // 1 - (1 - w^2)^m by its series
      return w2 * (m_ - 0.5 * m_ * (m_ - 1.0) * w2 + m_ * (m_ - 1.0) * (m_ - 2.0) * w2 * w2 / 6.0);
    }
    return -std::expm1(m_ * std::log1p(-w2));
  }

  /// f at |w| = aw, with dist = 1 - aw given exactly.
  double operator()(double aw, double dist) const {
    const double h = dist * (2.0 - dist);
    double out = c_ * (s_ == 1.0 ? 1.0 : std::pow(h, s_ - 1.0));
    if (p_.beta == 0.0) return out;
    if (singular_at_zero()) {
      if (aw == 0.0) return std::numeric_limits<double>::infinity();
      // (w^2 q)^{-1/alpha} with q = psi / w^2 > 0
      const double q = psi(aw) / (aw * aw);
      return out * std::exp(-(2.0 / p_.alpha) * std::log(aw)) * std::pow(q, -1.0 / p_.alpha);
    }
    const double denom = (1.0 - k_) + k_ * psi(aw);
    return out * std::pow(denom, -1.0 / p_.alpha);
  }

  /// Leading coefficient r0 in f ~ r0 |w|^{-2/alpha} at w = 0 (critical case).
  double singular_coefficient() const { return c_ * std::pow(m_, -1.0 / p_.alpha); }

  /// Mass over (-1, 1) by double-exponential quadrature on (0, 1).
  double mass() const {
    auto fn = [this](double x, double da, double db) {
      (void)x;
      return (*this)(da, db);
    };
    return 2.0 * tanh_sinh(fn, 0.0, 1.0, 1e-15, 14).value;
  }

 private:
  double c_;
  ModelParams p_;
  double s_ = 1.0;
  double k_ = 0.0;
  double m_ = 0.0;
};

inline void validate_amplitude(double amplitude, const ModelParams& p, bool& critical) {
  p.validate();
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw Error(ErrorKind::InvalidArgument, "amplitude must be positive");
  }
  critical = false;
  if (p.beta == 0.0) return;
  if (p.alpha == 0.0) {
    throw Error(ErrorKind::Unsupported, "steady family needs alpha > 0 when beta > 0");
  }
  const double c_max = std::pow(p.beta, -1.0 / p.alpha);
  if (amplitude > c_max) {
    throw Error(ErrorKind::SupercriticalAmplitude,
                "amplitude exceeds beta^(-1/alpha) = " + std::to_string(c_max));
  }
  critical = amplitude == c_max;
}

}  // namespace detail

/// beta^{-1/alpha}.
inline double critical_amplitude(const ModelParams& p) {
  p.validate();
  if (p.beta == 0.0) throw Error(ErrorKind::NoCriticalAmplitude, "beta = 0 has no critical amplitude");
  if (p.alpha == 0.0) throw Error(ErrorKind::Unsupported, "alpha = 0 has no critical amplitude");
  return std::pow(p.beta, -1.0 / p.alpha);
}

inline SteadyProfile steady_profile(double amplitude, const ModelParams& p, const Grid& grid) {
  bool critical = false;
  detail::validate_amplitude(amplitude, p, critical);
  const detail::SteadyFormula formula(amplitude, p);
  const std::size_t n = grid.size();
  const auto w = grid.centers();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double aw = std::abs(w[i]);
    if (aw == 0.0 && formula.singular_at_zero()) {
      // cell average of r0 |w|^{-2/alpha} over the central cell
      if (p.alpha <= 2.0) {
        throw Error(ErrorKind::NumericalInput, "critical profile is not integrable at w = 0 for alpha <= 2");
      }
      const double e = 1.0 - 2.0 / p.alpha;
      v[i] = formula.singular_coefficient() * std::pow(0.5 * grid.h(), e) / e / (0.5 * grid.h());
    } else {
      v[i] = formula(aw, 1.0 - aw);
    }
  }
  double grid_mass = 0.0;
  for (double x : v) grid_mass += x;
  grid_mass *= grid.h();

  double total = std::numeric_limits<double>::infinity();
  if (!critical || p.alpha > 2.0) total = formula.mass();
  return SteadyProfile{amplitude, 1.0 / (2.0 * p.lambda), GridFunction(grid, std::move(v)), total, grid_mass,
                       critical};
}

/// Mass of the critical profile; +infinity when alpha <= 2.
inline double critical_mass(const ModelParams& p) {
  const double c = critical_amplitude(p);
  if (p.alpha <= 2.0) return std::numeric_limits<double>::infinity();
  return detail::SteadyFormula(c, p).mass();
}

/// Continuous mass of f(.; C).
inline double steady_mass(double amplitude, const ModelParams& p) {
  bool critical = false;
  detail::validate_amplitude(amplitude, p, critical);
  if (critical && p.alpha <= 2.0) return std::numeric_limits<double>::infinity();
  return detail::SteadyFormula(amplitude, p).mass();
}

struct AmplitudeSplit {
  double amplitude = 0.0;
  double condensate_mass = 0.0;
};

/// Amplitude whose profile carries mass mu; any excess over the critical
/// mass is reported as a condensate at w = 0.
inline AmplitudeSplit solve_amplitude_for_mass(double mu, const ModelParams& p) {
  p.validate();
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  if (p.beta == 0.0) {
    // mass is linear in C
    return {mu / steady_mass(1.0, p), 0.0};
  }
  const double c_max = critical_amplitude(p);
  const double mu_c = critical_mass(p);
  if (mu >= mu_c) return {c_max, mu - mu_c};

  double lo = 0.0;
  double hi = c_max;
  double mid = 0.5 * c_max;
  double m = 0.0;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    m = steady_mass(mid, p);
    if (std::abs(m - mu) <= 1e-13 * mu) break;
    if (m < mu) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (!(std::abs(m - mu) <= 1e-9 * mu)) {
    // alpha <= 2 and mu so large that C sits within one ulp of beta^{-1/alpha}
    throw Error(ErrorKind::OutOfRange, "amplitude for mass " + std::to_string(mu) + " is not resolvable in double precision");
  }
  return {mid, 0.0};
}

/// Largest |F| over interior faces, skipping `exclude_central` cells on each
/// side of w = 0.
inline double residual_flux(const SteadyProfile& profile, const ModelParams& p, std::size_t exclude_central = 0) {
  const DensityState state{profile.values, 0.0, false};
  const auto flux = face_fluxes(state, p);
  const Grid& grid = profile.values.grid();
  const std::size_t n = grid.size();
  const double centre = 0.5 * static_cast<double>(n);
  double worst = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs(static_cast<double>(k) - centre) < static_cast<double>(exclude_central)) continue;
    worst = std::max(worst, std::abs(flux[k]));
  }
  return worst;
}

}  // namespace cfp
