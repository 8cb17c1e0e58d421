#pragma once

// Moments, norms and a-priori bounds evaluated on density states.

#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "cfp/blowup.hpp"
#include "cfp/constants.hpp"
#include "cfp/error.hpp"
#include "cfp/grid.hpp"
#include "cfp/report.hpp"
#include "cfp/solver.hpp"

namespace cfp {

struct MomentReport {
  double time = 0.0;
  double mass = 0.0;
  double mean = 0.0;
  double energy = 0.0;
  double temperature = 0.0;
  double l2_sq = 0.0;
  /// (p, q) -> \int |w|^p f^q
  std::map<std::pair<double, double>, double> weighted_norms;

  double weighted(double p, double q) const {
    const auto it = weighted_norms.find({p, q});
    if (it == weighted_norms.end()) throw Error(ErrorKind::InvalidArgument, "weighted norm not computed");
    return it->second;
  }
};

/// (alpha - 2) / (alpha + 1).
inline double weighted_exponent(double alpha) { return (alpha - 2.0) / (alpha + 1.0); }

struct MomentOptions {
  /// adds (p*, 2) when alpha > 2
  std::optional<double> alpha;
  std::vector<std::pair<double, double>> extra;
};

inline MomentReport moments(const DensityState& state, const MomentOptions& options = {}) {
  MomentReport r;
  r.time = state.time;
  r.mass = quadrature(state.f, WeightSpec::unit());
  r.mean = quadrature(state.f, WeightSpec::moment(1));
  r.energy = quadrature(state.f, WeightSpec::moment(2));
  r.temperature = r.mass > 0.0 ? r.energy / r.mass : 0.0;
  r.l2_sq = quadrature(state.f, WeightSpec::power(2.0));
  r.weighted_norms[{0.0, 2.0}] = r.l2_sq;
  std::vector<std::pair<double, double>> pairs = options.extra;
  if (options.alpha && *options.alpha > 2.0) pairs.emplace_back(weighted_exponent(*options.alpha), 2.0);
  for (const auto& [p, q] : pairs) {
    if (!r.weighted_norms.contains({p, q})) {
      r.weighted_norms[{p, q}] = quadrature(state.f, WeightSpec::weighted_norm(p, q));
    }
  }
  return r;
}

/// \int w^2 H^alpha f^{alpha+1}.
inline double nonlinear_energy_term(const DensityState& state, double alpha) {
  const auto w = state.f.grid().centers();
  const auto hc = state.f.grid().h_centers();
  const auto f = state.f.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] <= 0.0) continue;
    sum += w[i] * w[i] * std::pow(hc[i], alpha) * std::pow(f[i], alpha + 1.0);
  }
  return sum * state.f.grid().h();
}

/// dE/dt = 2 lambda mu - 2 (lambda + 1) E - 2 beta \int w^2 H^alpha f^{alpha+1}.
inline double energy_rhs(const DensityState& state, const ModelParams& p) {
  p.validate();
  const double mu = quadrature(state.f, WeightSpec::unit());
  const double e = quadrature(state.f, WeightSpec::moment(2));
  double rhs = 2.0 * p.lambda * mu - 2.0 * (p.lambda + 1.0) * e;
  if (p.beta != 0.0) rhs -= 2.0 * p.beta * nonlinear_energy_term(state, p.alpha);
  return rhs;
}

/// (1/5)^5 (2 sqrt 2)^4 mu^5 / l2_sq^2.
inline double second_moment_lower_bound(double mu, double l2_sq) {
  if (!(mu > 0.0) || !(l2_sq > 0.0)) throw Error(ErrorKind::InvalidArgument, "mu and l2_sq must be positive");
  constexpr double k = 64.0 / 3125.0;
  return k * std::pow(mu, 5.0) / (l2_sq * l2_sq);
}

/// 5 (2 sqrt 2)^{-4/5}.
inline double l1_interpolation_coefficient() { return 5.0 * std::pow(2.0 * std::sqrt(2.0), -0.8); }

/// \int f <= 5 (2 sqrt 2)^{-4/5} (\int f^2)^{2/5} (\int w^2 f)^{1/5}.
inline InequalityReport l1_from_l2_and_energy_check(const DensityState& state) {
  const double l1 = quadrature(state.f, WeightSpec::unit());
  const double l2 = quadrature(state.f, WeightSpec::power(2.0));
  const double e = quadrature(state.f, WeightSpec::moment(2));
  const double k = l1_interpolation_coefficient();
  const double rhs = k * std::pow(l2, 0.4) * std::pow(e, 0.2);
  return make_report("l1_from_l2_energy", l1, rhs, "unconstrained", {{"coefficient", k}});
}

/// (mu - E)^{3a/2} / (s^{3a/2} E^{(a-2)/2}).
inline double lemma_prop1_rhs(double alpha, double mu, double energy) {
  const auto k = constants(alpha);
  const double e = 1.5 * alpha;
  return std::pow(mu - energy, e) / (std::pow(k.s_alpha, e) * std::pow(energy, 0.5 * (alpha - 2.0)));
}

/// \int w^2 H^a f^{a+1} >= (mu - E)^{3a/2} / (s^{3a/2} E^{(a-2)/2}).
inline InequalityReport lemma_prop1_check(const DensityState& state, const ModelParams& p) {
  if (!(p.alpha > 2.0)) throw Error(ErrorKind::OutOfRegime, "lemma check needs alpha > 2");
  const double mu = quadrature(state.f, WeightSpec::unit());
  const double e = quadrature(state.f, WeightSpec::moment(2));
  if (!(e > 0.0)) throw Error(ErrorKind::InvalidArgument, "lemma check needs E > 0");
  const auto k = constants(p.alpha);
  const double lower = nonlinear_energy_term(state, p.alpha);
  const double bound = mu > e ? lemma_prop1_rhs(p.alpha, mu, e) : 0.0;
  return make_lower_bound_report("lemma_prop1", lower, bound, "unconstrained",
                     {{"c_alpha", k.c_alpha}, {"d_alpha", k.d_alpha}, {"s_alpha", k.s_alpha}});
}

/// \sum_{interior faces} H_{i+1/2} ((f_{i+1} - f_i) / h)^2 h.
inline double dirichlet_form(const GridFunction& f) {
  const auto hf = f.grid().h_faces();
  const auto v = f.values();
  const double h = f.grid().h();
  double sum = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double d = (v[k] - v[k - 1]) / h;
    sum += hf[k] * d * d;
  }
  return sum * h;
}

/// C_{alpha,beta*} = max{2^{a/(a+2)} lambda* + 2 beta*/(a+2), 2 beta*/(a+2)}.
inline double l2_growth_constant(const ModelParams& p) {
  const auto [ls, bs] = rescale_params(p);
  const double a = p.alpha;
  const double c0 = 2.0 * bs / (a + 2.0);
  return std::max(std::pow(2.0, a / (a + 2.0)) * ls + c0, c0);
}

/// -2 \int H |f'|^2 + C_{alpha,beta*} \int f^{alpha+2}, the bound on d(l2_sq)/dtau.
inline double l2_evolution_bound(const DensityState& state, const ModelParams& p) {
  p.validate();
  if (!(p.alpha > 0.0 && p.alpha <= 2.0)) throw Error(ErrorKind::OutOfRegime, "L2 evolution bound needs 0 < alpha <= 2");
  const double integral = quadrature(state.f, WeightSpec::power(p.alpha + 2.0));
  return -2.0 * dirichlet_form(state.f) + l2_growth_constant(p) * integral;
}

struct L2AprioriBound {
  /// alpha < 2: the bound on l2_sq.  alpha = 2: unset.
  std::optional<double> bound;
  /// alpha = 2: mass threshold and whether mu satisfies it.
  std::optional<double> mass_threshold;
  bool mass_condition_met = false;
  double growth_constant = 0.0;
  /// C_GN^{3/(alpha+1)}
  double gn_power = 0.0;
};

inline L2AprioriBound l2_apriori_bound(const ModelParams& p, double f0_l2_sq, double mu) {
  p.validate();
  const double a = p.alpha;
  if (!(a > 0.0 && a <= 2.0)) throw Error(ErrorKind::OutOfRegime, "a-priori L2 bound needs 0 < alpha <= 2");
  if (!(mu > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  L2AprioriBound out;
  out.growth_constant = l2_growth_constant(p);
  // C_GN at exponent alpha + 2 raised to 3/(alpha+1) is C D
  out.gn_power = kNashConstant * nash2_constant();
  const double base = out.growth_constant / (std::pow(2.0, 2.0 / (a + 2.0)) * out.gn_power);
  if (a < 2.0) {
    const double third = std::pow(base, (a + 1.0) / (2.0 - a)) * std::pow(mu, (a + 4.0) / (2.0 - a));
    out.bound = std::max({f0_l2_sq, std::pow(2.0, a / (a + 2.0)), third});
  } else {
    out.mass_threshold = std::pow(base, (a + 4.0) / (a + 1.0));
    out.mass_condition_met = mu <= *out.mass_threshold;
  }
  return out;
}

/// Sign checks of the weighted L^q_p evolution, q = 1 + gamma in (1, 2].
struct WeightedSignReport {
  double p = 0.0;
  double q = 2.0;
  /// -lambda p^2 - (1 - lambda) p + gamma (1 - 2 lambda)
  double drift_coefficient = 0.0;
  std::size_t faces_checked = 0;
  std::size_t faces_negative = 0;
  bool flux_term_negative = false;
};

/// Evaluates d/dw (w H^a / |w|^{p(a+1)/gamma}) at interior faces away from w = 0.
inline WeightedSignReport weighted_sign_diagnostics(const Grid& grid, const ModelParams& params, double q = 2.0) {
  params.validate();
  if (!(q > 1.0 && q <= 2.0)) throw Error(ErrorKind::OutOfRange, "q must lie in (1, 2]");
  WeightedSignReport r;
  r.q = q;
  r.p = weighted_exponent(params.alpha);
  const double gamma = q - 1.0;
  const double lam = params.lambda;
  r.drift_coefficient = -lam * r.p * r.p - (1.0 - lam) * r.p + gamma * (1.0 - 2.0 * lam);
  const double e = r.p * (params.alpha + 1.0) / gamma;
  const auto faces = grid.faces();
  const auto hf = grid.h_faces();
  for (std::size_t k = 1; k + 1 < faces.size(); ++k) {
    const double w = faces[k];
    if (w == 0.0) continue;
    ++r.faces_checked;
    // H^{a-1} |w|^{-e} [(1 - e) H - 2 a w^2]
    const double bracket = (1.0 - e) * hf[k] - 2.0 * params.alpha * w * w;
    if (bracket < 0.0) ++r.faces_negative;
  }
  r.flux_term_negative = r.faces_checked > 0 && r.faces_negative == r.faces_checked;
  return r;
}

}  // namespace cfp
