#pragma once

// Closed-form blow-up apparatus for alpha > 2: lemma constants, the sign
// functions Phi (small energy) and Psi (large mass), the critical energy,
// the mass threshold, the blow-up time bound, and a regime classifier.

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "cfp/error.hpp"
#include "cfp/solver.hpp"

namespace cfp {

struct BlowupConstants {
  double alpha = 0.0;
  double c_alpha = 0.0;
  double d_alpha = 0.0;
  /// c d + d^{-2}
  double s_alpha = 0.0;
  /// (alpha - 2) / (2 alpha^2)
  double gamma = 0.0;
};

inline BlowupConstants constants(double alpha) {
  if (!std::isfinite(alpha) || !(alpha > 2.0)) {
    throw Error(ErrorKind::OutOfRegime, "blow-up constants need alpha > 2");
  }
  BlowupConstants k;
  k.alpha = alpha;
  k.c_alpha = std::pow(2.0 * alpha / (alpha - 2.0), alpha / (alpha + 1.0));
  k.d_alpha = std::cbrt(2.0 * (alpha + 1.0) / (k.c_alpha * (alpha - 2.0)));
  k.s_alpha = k.c_alpha * k.d_alpha + 1.0 / (k.d_alpha * k.d_alpha);
  k.gamma = (alpha - 2.0) / (2.0 * alpha * alpha);
  return k;
}

/// Lambda = 2 beta (mu - E0)^{3/(2 alpha)} / s^{3/(2 alpha)}.
inline double lambda_coefficient(const BlowupConstants& k, double beta, double mu, double e0) {
  const double e = 3.0 / (2.0 * k.alpha);
  return 2.0 * beta * std::pow(mu - e0, e) / std::pow(k.s_alpha, e);
}

namespace detail {
inline void check_energy(double e0, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  if (!(e0 > 0.0 && e0 < mu)) throw Error(ErrorKind::InvalidArgument, "E0 must lie in (0, mu)");
}
}  // namespace detail

/// 2 lambda mu - 2 beta / s^{3a/2} (mu - E0)^{3a/2} / E0^{(a-2)/2}.
inline double phi(double e0, double mu, const ModelParams& p) {
  p.validate();
  const auto k = constants(p.alpha);
  detail::check_energy(e0, mu);
  const double a = p.alpha;
  const double e = 1.5 * a;
  return 2.0 * p.lambda * mu -
         2.0 * p.beta / std::pow(k.s_alpha, e) * std::pow(mu - e0, e) / std::pow(e0, 0.5 * (a - 2.0));
}

/// Root of phi on (0, mu) by bisection in log E0.
inline double critical_energy(double mu, const ModelParams& p, double tol = 1e-14) {
  p.validate();
  constants(p.alpha);
  if (!(p.beta > 0.0)) throw Error(ErrorKind::InvalidParameter, "critical energy needs beta > 0");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  double lo = std::log(mu) - 700.0;
  double hi = std::log(mu);
  if (phi(std::exp(lo), mu, p) >= 0.0) {
    throw Error(ErrorKind::OutOfRange, "critical energy below representable range");
  }
  // phi(mu^-) = 2 lambda mu > 0
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double e = std::exp(mid);
    if (!(e < mu)) {
      hi = mid;
      continue;
    }
    if (phi(e, mu, p) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

/// 2 lambda - 2 beta / s^{3a/2} mu^{a+1} (1 - E0)^{3a/2} / E0^{(a-2)/2}.
inline double psi(double mu, double e0, const ModelParams& p) {
  p.validate();
  const auto k = constants(p.alpha);
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  if (!(e0 > 0.0 && e0 < 1.0)) throw Error(ErrorKind::InvalidArgument, "E0 must lie in (0, 1)");
  const double a = p.alpha;
  const double e = 1.5 * a;
  return 2.0 * p.lambda - 2.0 * p.beta / std::pow(k.s_alpha, e) * std::pow(mu, a + 1.0) * std::pow(1.0 - e0, e) /
                              std::pow(e0, 0.5 * (a - 2.0));
}

/// Zero of psi in mu: psi(mu) < 0 exactly when mu > mu*.
inline double mass_threshold(double e0, const ModelParams& p) {
  p.validate();
  const auto k = constants(p.alpha);
  if (!(p.beta > 0.0)) throw Error(ErrorKind::InvalidParameter, "mass threshold needs beta > 0");
  if (!(e0 > 0.0 && e0 < 1.0)) throw Error(ErrorKind::InvalidArgument, "E0 must lie in (0, 1)");
  const double a = p.alpha;
  const double e = 1.5 * a;
  return std::pow(p.lambda * std::pow(k.s_alpha, e) * std::pow(e0, 0.5 * (a - 2.0)) /
                      (p.beta * std::pow(1.0 - e0, e)),
                  1.0 / (a + 1.0));
}

struct TimeBound {
  bool available = false;
  /// +inf at the admissibility boundary.
  double t_bar = std::numeric_limits<double>::infinity();
  double Lambda = 0.0;
  double gamma = 0.0;
  /// (Lambda / (2 lambda mu))^{1/gamma}
  double admissible_below = 0.0;
};

/// t_bar = E0^{g+1} / ((g+1)(Lambda - 2 lambda mu E0^g)) when E0 is admissible.
inline TimeBound blowup_time_bound(double e0, double mu, const ModelParams& p) {
  p.validate();
  const auto k = constants(p.alpha);
  detail::check_energy(e0, mu);
  TimeBound out;
  out.gamma = k.gamma;
  out.Lambda = lambda_coefficient(k, p.beta, mu, e0);
  out.admissible_below = std::pow(out.Lambda / (2.0 * p.lambda * mu), 1.0 / k.gamma);
  if (e0 > out.admissible_below) return out;
  const double denom = out.Lambda - 2.0 * p.lambda * mu * std::pow(e0, k.gamma);
  out.available = true;
  if (denom <= 0.0) return out;
  out.t_bar = std::pow(e0, k.gamma + 1.0) / ((k.gamma + 1.0) * denom);
  return out;
}

enum class Regime { L2Bounded, L2MassConditional, Supercritical };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::L2Bounded: return "L2_BOUNDED";
    case Regime::L2MassConditional: return "L2_MASS_CONDITIONAL";
    case Regime::Supercritical: return "SUPERCRITICAL";
  }
  return "unknown";
}

struct SupercriticalInfo {
  std::optional<int> phi_sign;
  std::optional<int> psi_sign;
  std::optional<double> critical_energy;
  std::optional<double> mass_threshold;
  std::optional<double> t_bar;
  double p_star = 0.0;
  /// admissible q in [q_min, q_max] for the weighted norms
  double q_min = 1.0;
  double q_max = 1.0;
  bool q2_admissible = false;
};

struct RegimeLabel {
  Regime regime = Regime::L2Bounded;
  std::optional<SupercriticalInfo> supercritical;
};

namespace detail {
inline int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }
}  // namespace detail

/// Branches on alpha.  Quantities whose preconditions fail are left unset.
inline RegimeLabel classify(const ModelParams& p, double mu, double e0) {
  p.validate();
  RegimeLabel label;
  if (p.alpha < 2.0) {
    label.regime = Regime::L2Bounded;
    return label;
  }
  if (p.alpha == 2.0) {
    label.regime = Regime::L2MassConditional;
    return label;
  }
  label.regime = Regime::Supercritical;
  SupercriticalInfo info;
  info.p_star = (p.alpha - 2.0) / (p.alpha + 1.0);
  info.q_max = std::min(2.0, p.alpha - 1.0);
  info.q2_admissible = p.alpha >= 3.0;
  const bool energy_ok = mu > 0.0 && e0 > 0.0 && e0 < mu;
  if (energy_ok) {
    info.phi_sign = detail::sign_of(phi(e0, mu, p));
    const auto tb = blowup_time_bound(e0, mu, p);
    if (tb.available) info.t_bar = tb.t_bar;
  }
  if (mu > 0.0 && e0 > 0.0 && e0 < 1.0) {
    info.psi_sign = detail::sign_of(psi(mu, e0, p));
    if (p.beta > 0.0) info.mass_threshold = mass_threshold(e0, p);
  }
  if (p.beta > 0.0 && mu > 0.0) {
    try {
      info.critical_energy = critical_energy(mu, p);
    } catch (const Error&) {
      // root below the representable range
    }
  }
  label.supercritical = info;
  return label;
}

}  // namespace cfp
