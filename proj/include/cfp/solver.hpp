#pragma once

// Conservative finite-volume solver for
//
//   f_t = d/dw [ w f (1 + beta H^alpha f^alpha) + lambda d/dw (H f) ],   H = 1 - w^2,
//
// with no-flux boundaries.  With g = H f the bracket reads
//
//   lambda g' + (w / H) g N(g),   N(g) = 1 + beta g^alpha,
//
// and every interior face uses a Scharfetter-Gummel / Chang-Cooper
// exponential-fitting flux in g.  The fitting exponent is the exact integral
// of w / (lambda H) between the two centres, multiplied by a secant mean of
// N over [g_l, g_r].  That mean is chosen so that the closed-form zero-flux
// profiles of the equilibrium module have vanishing discrete flux.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfp/error.hpp"
#include "cfp/grid.hpp"

namespace cfp {

struct ModelParams {
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.5;

  void validate() const {
    if (!std::isfinite(lambda) || !(lambda > 0.0)) {
      throw Error(ErrorKind::InvalidParameter, "lambda must be positive");
    }
    if (!std::isfinite(alpha) || alpha < 0.0) throw Error(ErrorKind::InvalidParameter, "alpha must be >= 0");
    if (!std::isfinite(beta) || beta < 0.0) throw Error(ErrorKind::InvalidParameter, "beta must be >= 0");
  }

  /// lambda* = (1 - 2 lambda) / lambda of the tau = lambda t formulation.
  double lambda_star() const { return (1.0 - 2.0 * lambda) / lambda; }
  /// beta* = beta / lambda.
  double beta_star() const { return beta / lambda; }
};

/// (lambda*, beta*) of the scaled-time formulation.
inline std::pair<double, double> rescale_params(const ModelParams& p) {
  if (!std::isfinite(p.lambda) || !(p.lambda > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "lambda must be positive");
  }
  return {p.lambda_star(), p.beta_star()};
}

struct SolverControls {
  double dt = 1e-3;
  double t_end = 1.0;
  double negativity_tol = 1e-12;
  /// Threshold on the squared L2 norm; unset means 1e6 x the initial L2 norm.
  std::optional<double> blowup_l2_threshold;
  double blowup_cell_fraction = 0.5;
  std::size_t record_every = 100;
  /// Safety cap on the number of steps; exceeding it ends the run as aborted.
  std::size_t max_steps = 200'000'000;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error(ErrorKind::InvalidArgument, "t_end must be positive");
    if (!(negativity_tol >= 0.0)) throw Error(ErrorKind::InvalidArgument, "negativity_tol must be >= 0");
    if (!(blowup_cell_fraction > 0.0 && blowup_cell_fraction <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "blowup_cell_fraction must lie in (0, 1]");
    }
    if (blowup_l2_threshold && !(*blowup_l2_threshold > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "blowup_l2_threshold must be positive");
    }
    if (record_every == 0) throw Error(ErrorKind::InvalidArgument, "record_every must be >= 1");
  }
};

enum class EventKind { BlowupDetected, NegativityAbort, Completed, Aborted };

inline const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::BlowupDetected: return "blowup_detected";
    case EventKind::NegativityAbort: return "negativity_abort";
    case EventKind::Completed: return "completed";
    case EventKind::Aborted: return "aborted";
  }
  return "unknown";
}

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Completed;
  std::string detail;
};

struct Trajectory {
  std::vector<DensityState> snapshots;
  std::vector<Event> events;
  std::size_t steps = 0;

  const DensityState& final_state() const { return snapshots.back(); }
  EventKind outcome() const { return events.empty() ? EventKind::Aborted : events.back().kind; }
};

/// Called with every recorded snapshot.
using Observer = std::function<void(const DensityState&)>;

namespace detail {

/// B(x) = x / (e^x - 1), evaluated for +x and -x at once.
inline std::pair<double, double> bernoulli_pair(double x) {
  const double ax = std::abs(x);
  if (ax < 0.05) {
    // series through x^6, next term x^8 / 1209600; B(-x) = B(x) + x
    const double x2 = x * x;
    const double bp = 1.0 - 0.5 * x + x2 * (1.0 / 12.0 - x2 * (1.0 / 720.0 - x2 / 30240.0));
    return {bp, bp + x};
  }
  if (ax > 700.0) {
    if (x > 0.0) return {x * std::exp(-x), x};
    return {-x, -x * std::exp(x)};
  }
  const double em1 = std::expm1(x);
  const double bp = x / em1;
  // B(-x) = B(x) e^x; 1 + expm1 loses digits once e^x is small
  return {bp, bp * (x > -1.0 ? em1 + 1.0 : std::exp(x))};
}

/// log(1 + e^y) without overflow.
inline double softplus(double y) { return y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y)); }

/// Secant mean of N(g) = 1 + beta g^alpha with respect to the potential
/// Psi(g) = log g - log(1 + beta g^alpha) / alpha:  N_eff = dlog g / dPsi.
/// Inputs are log g and x = beta g^alpha on both sides (log_x for overflow).
inline double secant_factor(double log_l, double log_r, double x_l, double x_r, double log_x_l, double log_x_r,
                            double alpha) {
  const double log_ratio = log_r - log_l;
  if (log_ratio == 0.0) return 1.0 + x_l;
  const double al = alpha * log_ratio;
  if (log_x_l >= 0.0 && log_x_r >= 0.0) {
    // x >= 1 on both sides: 1 - dpsi = (log1p(1/x_l) - log1p(1/x_r)) / (alpha log_ratio)
    const double y_l = std::exp(-log_x_l);
    const double y_r = std::exp(-log_x_r);
    const double d = std::log1p(-y_l * std::expm1(-al) / (1.0 + y_r)) / al;
    return 1.0 / d;
  }
  double dpsi;  // log((1 + x_r) / (1 + x_l)) / (alpha log_ratio)
  if (std::abs(al) < 0.02) {
    // |al| < 0.02 and |z| < 0.021: truncated series are exact to rounding
    static constexpr double kExp[] = {1.0, 1.0 / 2, 1.0 / 6, 1.0 / 24, 1.0 / 120, 1.0 / 720, 1.0 / 5040, 1.0 / 40320};
    static constexpr double kLog[] = {1.0, -1.0 / 2, 1.0 / 3, -1.0 / 4, 1.0 / 5,
                                      -1.0 / 6, 1.0 / 7, -1.0 / 8, 1.0 / 9, -1.0 / 10};
    double em1 = kExp[7];
    for (int k = 6; k >= 0; --k) em1 = em1 * al + kExp[k];
    const double z = x_l / (1.0 + x_l) * (al * em1);
    double l1p = kLog[9];
    for (int k = 8; k >= 0; --k) l1p = l1p * z + kLog[k];
    dpsi = z * l1p / al;
  } else if (std::isfinite(x_l) && std::isfinite(x_r)) {
    dpsi = std::log1p((x_r - x_l) / (1.0 + x_l)) / al;
  } else {
    dpsi = (softplus(log_x_r) - softplus(log_x_l)) / al;
  }
  return 1.0 / (1.0 - dpsi);
}

inline double nonlinear_face_factor(double g_l, double g_r, double alpha, double beta) {
  if (beta == 0.0) return 1.0;
  if (alpha == 0.0) return 1.0 + beta;
  if (!(g_l > 0.0) || !(g_r > 0.0)) return 1.0;
  const double ll = std::log(g_l), lr = std::log(g_r);
  const double lxl = alpha * ll + std::log(beta), lxr = alpha * lr + std::log(beta);
  return secant_factor(ll, lr, std::exp(lxl), std::exp(lxr), lxl, lxr, alpha);
}

}  // namespace detail

/// Stateless flux and step machinery for one parameter set on one grid.
class FluxOperator {
 public:
  FluxOperator(const Grid& grid, const ModelParams& params) : grid_(grid), params_(params) {
    params_.validate();
    const auto hc = grid_.h_centers();
    const std::size_t n = grid_.size();
    const double s = 1.0 / (2.0 * params_.lambda);
    log_h_ratio_.assign(n + 1, 0.0);
    linear_bern_.assign(n + 1, {1.0, 1.0});
    for (std::size_t k = 1; k < n; ++k) {
      // exact \int_{w_{k-1}}^{w_k} w / (lambda H) dw
      log_h_ratio_[k] = s * std::log(hc[k - 1] / hc[k]);
      // alpha = 0 keeps the constant factor 1 + beta
      const double factor = params_.alpha == 0.0 ? 1.0 + params_.beta : 1.0;
      linear_bern_[k] = detail::bernoulli_pair(factor * log_h_ratio_[k]);
    }
  }

  const Grid& grid() const noexcept { return grid_; }
  const ModelParams& params() const noexcept { return params_; }

  /// Fills `bracket[k]` (k = 0..n) with the face value of
  /// w f (1 + beta H^a f^a) + lambda (H f)'.  Boundary faces are zero.
  /// Returns the largest step rate: the outflow rate
  /// d_i = (lambda / h^2) H_i (B(A_{i+1}) + B(-A_i)) of the frozen-coefficient
  /// step, and for the nonlinear drift also |w_i| (1 + (alpha + 1) beta g_i^alpha) / h.
  /// Uses internal scratch space: one operator per thread.
  double brackets(std::span<const double> f, std::span<double> bracket) const {
    const std::size_t n = grid_.size();
    const auto hc = grid_.h_centers();
    const double coef = params_.lambda / grid_.h();
    const double alpha = params_.alpha;
    const double beta = params_.beta;
    bracket[0] = 0.0;
    bracket[n] = 0.0;
    const auto w = grid_.centers();
    const double rate_coef = coef / grid_.h();
    double rate = 0.0;
    double pending = 0.0;  // inflow-face share of the current cell
    if (beta == 0.0 || alpha == 0.0) {
      for (std::size_t k = 1; k < n; ++k) {
        const auto& b = linear_bern_[k];
        bracket[k] = coef * (b.second * hc[k] * f[k] - b.first * hc[k - 1] * f[k - 1]);
        rate = std::max(rate, pending + b.first * hc[k - 1]);
        pending = b.second * hc[k];
      }
      return std::max(rate, pending) * rate_coef;
    }
    log_g_.resize(n);
    x_.resize(n);
    log_x_.resize(n);
    double speed = 0.0;
    const double log_beta = std::log(beta);
    const int int_alpha = alpha == std::floor(alpha) && alpha <= 8.0 ? static_cast<int>(alpha) : 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = hc[i] * f[i];
      if (g > 0.0) {
        log_g_[i] = std::log(g);
        log_x_[i] = alpha * log_g_[i] + log_beta;
        if (int_alpha > 0) {
          double gp = g;
          for (int k = 1; k < int_alpha; ++k) gp *= g;
          x_[i] = beta * gp;
        } else {
          x_[i] = std::exp(log_x_[i]);
        }
        speed = std::max(speed, std::abs(w[i]) * (1.0 + (alpha + 1.0) * x_[i]));
      } else {
        log_g_[i] = -std::numeric_limits<double>::infinity();
        log_x_[i] = -std::numeric_limits<double>::infinity();
        x_[i] = 0.0;
      }
    }
    for (std::size_t k = 1; k < n; ++k) {
      const double g_l = hc[k - 1] * f[k - 1];
      const double g_r = hc[k] * f[k];
      double factor = 1.0;
      if (g_l > 0.0 && g_r > 0.0) {
        factor = detail::secant_factor(log_g_[k - 1], log_g_[k], x_[k - 1], x_[k], log_x_[k - 1], log_x_[k], alpha);
      }
      const auto b = detail::bernoulli_pair(factor * log_h_ratio_[k]);
      // B(-A) g_r - B(A) g_l
      bracket[k] = coef * (b.second * g_r - b.first * g_l);
      rate = std::max(rate, pending + b.first * hc[k - 1]);
      pending = b.second * hc[k];
    }
    return std::max(std::max(rate, pending) * rate_coef, speed / grid_.h());
  }

  /// dt limit for a given step rate.  dt d_i <= 1 keeps every step a
  /// nonnegative, mass-preserving map; the speed term is a CFL limit on the
  /// nonlinear drift.  The factor 0.9 leaves margin.
  static double stability_bound_from_rate(double rate) {
    return rate > 0.0 ? kStepSafety / rate : std::numeric_limits<double>::infinity();
  }

  /// dt <= 0.9 / rate.
  double stability_bound(std::span<const double> f) const {
    std::vector<double> scratch(f.size() + 1);
    return stability_bound_from_rate(brackets(f, scratch));
  }

  static constexpr double kStepSafety = 0.9;

 private:
  Grid grid_;
  ModelParams params_;
  std::vector<double> log_h_ratio_;
  std::vector<std::pair<double, double>> linear_bern_;
  mutable std::vector<double> log_g_, x_, log_x_;
};

/// Physical mass flux at the n + 1 faces: F = -(bracket), so that
/// f_i <- f_i - dt/h (F_{i+1/2} - F_{i-1/2}).  F_0 = F_n = 0.
inline std::vector<double> face_fluxes(const DensityState& state, const ModelParams& p) {
  const FluxOperator op(state.f.grid(), p);
  std::vector<double> bracket(state.f.size() + 1);
  op.brackets(state.f.values(), bracket);
  for (double& b : bracket) b = -b;
  bracket.front() = 0.0;
  bracket.back() = 0.0;
  return bracket;
}

inline double stability_bound(const DensityState& state, const ModelParams& p) {
  return FluxOperator(state.f.grid(), p).stability_bound(state.f.values());
}

namespace detail {

inline void apply_update(std::span<const double> f, std::span<const double> bracket, double ratio,
                         std::span<double> out) {
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] + ratio * (bracket[i + 1] - bracket[i]);
}

inline double central_fraction(const Grid& grid, std::span<const double> f, double total_mass) {
  const auto [a, b] = grid.central_cells();
  const double central = (a == b ? f[a] : f[a] + f[b]) * grid.h();
  return total_mass > 0.0 ? central / total_mass : 0.0;
}

inline double sum_squares(std::span<const double> f, double h) {
  double s = 0.0;
  for (double v : f) s += v * v;
  return s * h;
}

}  // namespace detail

/// One explicit step.  Throws UnstableStep when dt exceeds the stability
/// bound and NegativityAbort when a value falls below -negativity_tol.
inline DensityState step(const DensityState& state, const ModelParams& p, double dt,
                         double negativity_tol = 1e-12) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  const FluxOperator op(state.f.grid(), p);
  const auto f = state.f.values();
  std::vector<double> bracket(f.size() + 1);
  const double bound = op.stability_bound_from_rate(op.brackets(f, bracket));
  if (dt > bound) {
    throw Error(ErrorKind::UnstableStep,
                "dt=" + std::to_string(dt) + " exceeds stability bound " + std::to_string(bound));
  }
  std::vector<double> next(f.size());
  detail::apply_update(f, bracket, dt / state.f.grid().h(), next);
  const double new_time = state.time + dt;
  const double min_value = *std::min_element(next.begin(), next.end());
  if (min_value < -negativity_tol || !std::isfinite(min_value)) throw NegativityAbort(new_time, min_value);
  return DensityState{GridFunction(state.f.grid(), std::move(next)), new_time, state.scaled_time};
}

/// Steps until t_end or a terminal event.  Errors become events.
inline Trajectory evolve(const DensityState& initial, const ModelParams& p, const SolverControls& controls,
                         const std::vector<Observer>& observers = {}) {
  controls.validate();
  Trajectory traj;
  const Grid& grid = initial.f.grid();
  const double h = grid.h();
  for (double v : initial.f.values()) {
    if (v < -controls.negativity_tol) {
      throw Error(ErrorKind::InvalidInitialData, "initial state has negative values");
    }
  }
  const FluxOperator op(grid, p);

  std::vector<double> cur(initial.f.values().begin(), initial.f.values().end());
  std::vector<double> next(cur.size());
  std::vector<double> bracket(cur.size() + 1);
  double t = initial.time;
  const double t_stop = initial.time + controls.t_end;
  const double mass0 = [&] {
    double s = 0.0;
    for (double v : cur) s += v;
    return s * h;
  }();
  const double l2_threshold =
      controls.blowup_l2_threshold.value_or(1e6 * std::sqrt(detail::sum_squares(cur, h)));

  auto record = [&](double time) {
    if (!traj.snapshots.empty() && !(time > traj.snapshots.back().time)) return;
    traj.snapshots.push_back(DensityState{GridFunction(grid, cur), time, initial.scaled_time});
    for (const auto& obs : observers) obs(traj.snapshots.back());
  };
  record(t);

  std::size_t steps = 0;
  while (true) {
    if (t >= t_stop * (1.0 - 1e-15) || t_stop - t <= 1e-14 * std::max(1.0, t_stop)) {
      record(t);
      traj.events.push_back({t, EventKind::Completed, "t_end reached"});
      break;
    }
    if (steps >= controls.max_steps) {
      record(t);
      traj.events.push_back({t, EventKind::Aborted, "max_steps exceeded"});
      break;
    }
    const double bound = op.stability_bound_from_rate(op.brackets(cur, bracket));
    double dt = std::min(controls.dt, bound);
    if (t + dt > t_stop) dt = t_stop - t;
    if (!(dt > 0.0) || dt < 1e-15 * std::max(1.0, t_stop)) {
      record(t);
      traj.events.push_back({t, EventKind::Aborted, "time step underflow"});
      break;
    }
    detail::apply_update(cur, bracket, dt / h, next);
    double min_value = std::numeric_limits<double>::infinity();
    for (double v : next) min_value = std::min(min_value, v);
    if (!(min_value >= -controls.negativity_tol)) {
      // keep the last admissible state as the final snapshot
      record(t);
      traj.events.push_back({t + dt, EventKind::NegativityAbort, "min value " + std::to_string(min_value)});
      break;
    }
    cur.swap(next);
    t += dt;
    ++steps;

    const double fraction = detail::central_fraction(grid, cur, mass0);
    const double l2_sq = detail::sum_squares(cur, h);
    if (fraction > controls.blowup_cell_fraction || l2_sq > l2_threshold) {
      record(t);
      traj.events.push_back({t, EventKind::BlowupDetected,
                             fraction > controls.blowup_cell_fraction ? "central_fraction" : "l2_threshold"});
      break;
    }
    if (steps % controls.record_every == 0) record(t);
  }
  traj.steps = steps;
  return traj;
}

}  // namespace cfp
