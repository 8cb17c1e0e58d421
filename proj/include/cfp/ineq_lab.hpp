#pragma once

// Numerical checks of weighted Poincare, Nash, Gagliardo-Nirenberg and
// log-Sobolev inequalities on (-1, 1), test-function generation, and the
// discrete symmetric decreasing rearrangement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cfp/constants.hpp"
#include "cfp/diagnostics.hpp"
#include "cfp/error.hpp"
#include "cfp/grid.hpp"
#include "cfp/quadrature.hpp"
#include "cfp/report.hpp"

namespace cfp {

enum class Basis { Polynomial, Cosine };

/// phi(w) = sum c_k w^k, or sum c_k cos(k pi (w + 1) / 2).
class TestFunction {
 public:
  TestFunction() = default;
  TestFunction(Basis basis, std::vector<double> coeffs) : basis_(basis), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
    for (double c : coeffs_) {
      if (!std::isfinite(c)) throw Error(ErrorKind::NumericalInput, "non-finite coefficient");
    }
  }

  static TestFunction polynomial(std::vector<double> coeffs) { return {Basis::Polynomial, std::move(coeffs)}; }
  static TestFunction cosine(std::vector<double> coeffs) { return {Basis::Cosine, std::move(coeffs)}; }
  static TestFunction constant(double c) { return polynomial({c}); }

  Basis basis() const noexcept { return basis_; }
  const std::vector<double>& coefficients() const noexcept { return coeffs_; }
  bool nonnegative() const noexcept { return nonnegative_; }

  double operator()(double w) const {
    if (basis_ == Basis::Polynomial) {
      double r = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 0;) r = r * w + coeffs_[k];
      return r;
    }
    const double theta = 0.5 * std::numbers::pi * (w + 1.0);
    double r = 0.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) r += coeffs_[k] * std::cos(static_cast<double>(k) * theta);
    return r;
  }

  double derivative(double w) const {
    if (basis_ == Basis::Polynomial) {
      double r = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 1;) r = r * w + static_cast<double>(k) * coeffs_[k];
      return r;
    }
    const double theta = 0.5 * std::numbers::pi * (w + 1.0);
    double r = 0.0;
    for (std::size_t k = 1; k < coeffs_.size(); ++k) {
      const double kk = static_cast<double>(k);
      r -= coeffs_[k] * kk * 0.5 * std::numbers::pi * std::sin(kk * theta);
    }
    return r;
  }

  /// phi^2 in the same basis, flagged nonnegative.
  TestFunction squared() const {
    const std::size_t n = coeffs_.size();
    std::vector<double> out(2 * n - 1, 0.0);
    if (basis_ == Basis::Polynomial) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out[i + j] += coeffs_[i] * coeffs_[j];
      }
    } else {
      // cos a cos b = (cos(a - b) + cos(a + b)) / 2
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double c = 0.5 * coeffs_[i] * coeffs_[j];
          out[i + j] += c;
          out[i > j ? i - j : j - i] += c;
        }
      }
    }
    TestFunction sq(basis_, std::move(out));
    sq.nonnegative_ = true;
    return sq;
  }

  GridFunction project(const Grid& grid) const {
    return GridFunction::sample(grid, [this](double w) { return (*this)(w); });
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << (basis_ == Basis::Polynomial ? "poly" : "cos") << '[';
    for (std::size_t k = 0; k < coeffs_.size(); ++k) os << (k ? " " : "") << coeffs_[k];
    os << ']';
    return os.str();
  }

  void mark_nonnegative() { nonnegative_ = true; }

 private:
  Basis basis_ = Basis::Polynomial;
  std::vector<double> coeffs_{0.0};
  bool nonnegative_ = false;
};

struct TestFunctionSpec {
  int max_degree = 4;
  int max_modes = 4;
  double coeff_range = 1.0;
  bool nonnegative = false;
  /// alternate polynomial and cosine draws; otherwise polynomials only
  bool mix_bases = true;
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; stable across platforms.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::vector<double> draw_coeffs(std::mt19937_64& rng, int order, double range) {
  std::vector<double> c(static_cast<std::size_t>(order) + 1);
  for (double& x : c) x = range * (2.0 * unit_draw(rng) - 1.0);
  return c;
}

}  // namespace detail

inline std::vector<TestFunction> random_test_functions(std::uint64_t seed, std::size_t count,
                                                       const TestFunctionSpec& spec = {}) {
  if (spec.max_degree < 0 || spec.max_modes < 0 || !(spec.coeff_range > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "test function spec out of range");
  }
  std::mt19937_64 rng(seed);
  std::vector<TestFunction> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const bool cosine = spec.mix_bases && (i % 2 == 1);
    const int top = cosine ? spec.max_modes : spec.max_degree;
    const int order = static_cast<int>(detail::unit_draw(rng) * (top + 1));
    TestFunction psi(cosine ? Basis::Cosine : Basis::Polynomial,
                     detail::draw_coeffs(rng, std::min(order, top), spec.coeff_range));
    out.push_back(spec.nonnegative ? psi.squared() : psi);
  }
  return out;
}

/// min of phi over 2001 equispaced probes of [-1, 1].
inline double probe_minimum(const TestFunction& phi) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2000; ++i) m = std::min(m, phi(-1.0 + 2.0 * i / 2000.0));
  return m;
}

namespace detail {

/// Sign changes of phi on (a, b), refined by bisection.
inline std::vector<double> sign_changes(const TestFunction& phi, double a, double b) {
  std::vector<double> roots;
  constexpr int samples = 2000;
  double x0 = a;
  double f0 = phi(a);
  for (int i = 1; i <= samples; ++i) {
    const double x1 = a + (b - a) * i / samples;
    const double f1 = phi(x1);
    if (f0 == 0.0 && i > 1) roots.push_back(x0);
    if ((f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0)) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 100 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = phi(mid);
        if ((fm < 0.0) == (flo < 0.0) && fm != 0.0) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

}  // namespace detail

/// Integrals of expressions in (w, phi, phi') over (-R, R), split at 0 and
/// at the sign changes of phi.
class Integrator {
 public:
  explicit Integrator(const TestFunction& phi, double radius = 1.0) : phi_(phi), radius_(radius) {
    if (!(radius > 0.0 && radius <= 1.0)) throw Error(ErrorKind::OutOfRange, "radius must lie in (0, 1]");
    breaks_.push_back(-radius);
    for (double r : detail::sign_changes(phi, -radius, radius)) breaks_.push_back(r);
    breaks_.push_back(0.0);
    breaks_.push_back(radius);
    std::sort(breaks_.begin(), breaks_.end());
    breaks_.erase(std::unique(breaks_.begin(), breaks_.end(),
                              [](double x, double y) { return std::abs(x - y) < 1e-14; }),
                  breaks_.end());
  }

  double radius() const noexcept { return radius_; }
  const TestFunction& function() const noexcept { return phi_; }

  /// \int_{-R}^{R} g(w, phi(w), phi'(w)) dw
  template <class G>
  double operator()(G&& g) const {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < breaks_.size(); ++k) {
      const double a = breaks_[k];
      const double b = breaks_[k + 1];
      if (!(b > a)) continue;
      auto fn = [&](double x, double, double) { return g(x, phi_(x), phi_.derivative(x)); };
      total += tanh_sinh(fn, a, b, 1e-15, 12).value;
    }
    return total;
  }

  double abs_power(double q) const {
    return (*this)([q](double, double v, double) { return q == 1.0 ? std::abs(v) : std::pow(std::abs(v), q); });
  }

  /// \int_{-R}^{R} (1 - w^2) phi'^2
  double h_dirichlet() const {
    return (*this)([](double w, double, double d) { return (1.0 - w) * (1.0 + w) * d * d; });
  }

 private:
  TestFunction phi_;
  double radius_;
  std::vector<double> breaks_;
};

inline const char* regime_tag(bool gradient_dominated) {
  return gradient_dominated ? "gradient-dominated" : "mass-dominated";
}

/// Squared Poincare forms on (-R, R):
///   p = 0:  ||phi - <phi>||^2 <= (1/2) \int (R^2 - w^2) phi'^2
///   p > 0:  ||phi - <phi>||^2 <= 1/((2-p)(1-p)) \int (R^{2-p} - |w|^{2-p}) |w|^p phi'^2
inline InequalityReport poincare_check(const TestFunction& phi, double radius = 1.0, double p = 0.0) {
  if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorKind::OutOfRange, "Poincare weight exponent must lie in [0, 1)");
  const Integrator integ(phi, radius);
  const double mean = integ([](double, double v, double) { return v; }) / (2.0 * radius);
  const double lhs = integ([mean](double, double v, double) { return (v - mean) * (v - mean); });
  const double l2 = integ([](double, double v, double) { return v * v; });
  double rhs;
  double constant;
  if (p == 0.0) {
    constant = 0.5;
    const double r2 = radius * radius;
    rhs = constant * integ([r2](double w, double, double d) { return (r2 - w * w) * d * d; });
  } else {
    constant = 1.0 / ((2.0 - p) * (1.0 - p));
    const double rp = std::pow(radius, 2.0 - p);
    rhs = constant * integ([rp, p](double w, double, double d) {
            const double aw = std::abs(w);
            return (rp - std::pow(aw, 2.0 - p)) * std::pow(aw, p) * d * d;
          });
  }
  return make_report(p == 0.0 ? "poincare" : "poincare_p", lhs, rhs, "unconstrained",
                     {{"constant", constant}, {"R", radius}, {"p", p}}, 1e-13 * l2);
}

/// min over R in (0, 1] of a R^e + b / R, and the unconstrained minimiser.
struct RadiusMinimum {
  double value = 0.0;
  double radius = 1.0;
  double r_star = std::numeric_limits<double>::infinity();
  bool gradient_dominated = false;
};

inline RadiusMinimum minimise_over_radius(double a, double b, double e) {
  RadiusMinimum m;
  // e a R^{e-1} = b / R^2
  if (a > 0.0 && b > 0.0) m.r_star = std::pow(b / (e * a), 1.0 / (e + 1.0));
  if (a > 0.0 && b == 0.0) m.r_star = 0.0;
  m.gradient_dominated = m.r_star <= 1.0;
  m.radius = std::clamp(m.r_star, std::numeric_limits<double>::min(), 1.0);
  m.value = a * std::pow(m.radius, e) + (b > 0.0 ? b / m.radius : 0.0);
  return m;
}

/// Unconstrained (int phi^2)^3 <= (27/32) Dir (int |phi|)^4 and the
/// constrained ||phi||^2 <= min_R (a R^2 + b / R).
inline std::vector<InequalityReport> nash_check(const TestFunction& phi) {
  const Integrator integ(phi);
  const double l1 = integ.abs_power(1.0);
  const double l2 = integ.abs_power(2.0);
  const double dir = integ.h_dirichlet();
  const double a = 0.5 * dir;
  const double b = 0.5 * l1 * l1;
  const auto m = minimise_over_radius(a, b, 2.0);
  const char* regime = regime_tag(m.gradient_dominated);
  std::vector<InequalityReport> out;
  out.push_back(make_report("nash", l2 * l2 * l2, kNashConstant * dir * std::pow(l1, 4.0), regime,
                            {{"C", kNashConstant}, {"R_star", m.r_star}}));
  out.push_back(make_report("nash_constrained", l2, m.value, regime, {{"R", m.radius}, {"R_star", m.r_star}}));
  return out;
}

/// Printed (int phi^4)^3 and cube (int phi^2)^3 forms against
/// C_p \int (1 - |w|^{2-p}) |w|^p phi'^2 (int |phi|)^4, plus the constrained
/// ||phi||^2 <= min_R (R^{2-p} a_p + b / R).
inline std::vector<InequalityReport> nash_p_check(const TestFunction& phi, double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::OutOfRange, "p must lie in (0, 1)");
  const Integrator integ(phi);
  const double l1 = integ.abs_power(1.0);
  const double l2 = integ.abs_power(2.0);
  const double l4 = integ.abs_power(4.0);
  const double dir_p = integ([p](double w, double, double d) {
    const double aw = std::abs(w);
    return (1.0 - std::pow(aw, 2.0 - p)) * std::pow(aw, p) * d * d;
  });
  const double cp = nash_p_constant(p);
  const double rhs = cp * dir_p * std::pow(l1, 4.0);
  const double a = dir_p / ((2.0 - p) * (1.0 - p));
  const double b = 0.5 * l1 * l1;
  const auto m = minimise_over_radius(a, b, 2.0 - p);
  const char* regime = regime_tag(m.gradient_dominated);
  std::vector<InequalityReport> out;
  out.push_back(make_report("nash_p_l2", l2 * l2 * l2, rhs, regime, {{"C_p", cp}, {"p", p}, {"R_star", m.r_star}}));
  out.push_back(make_report("nash_p_l4", l4 * l4 * l4, rhs, regime, {{"C_p", cp}, {"p", p}, {"R_star", m.r_star}}));
  out.push_back(make_report("nash_p_constrained", l2, m.value, regime,
                            {{"p", p}, {"R", m.radius}, {"R_star", m.r_star}}));
  return out;
}

/// (int phi^4)^2 <= K Dir (int phi^2)^3 with K = (sqrt2/2)(5/3)^{5/2}, its
/// constrained form, and int phi^2 <= D Dir (int |phi|)^2 as printed.
inline std::vector<InequalityReport> l4_nash_check(const TestFunction& phi) {
  const Integrator integ(phi);
  const double l1 = integ.abs_power(1.0);
  const double l2 = integ.abs_power(2.0);
  const double l4 = integ.abs_power(4.0);
  const double dir = integ.h_dirichlet();
  const double k = l4_nash_constant();
  const double d = nash2_constant();
  // X <= (4/3) R^{3/2} sqrt(X) Dir + Y^2 / (2R)
  const auto m = minimise_over_radius(4.0 / 3.0 * std::sqrt(l4) * dir, 0.5 * l2 * l2, 1.5);
  const auto nash = minimise_over_radius(0.5 * dir, 0.5 * l1 * l1, 2.0);
  std::vector<InequalityReport> out;
  out.push_back(make_report("l4_nash", l4 * l4, k * dir * l2 * l2 * l2, regime_tag(m.gradient_dominated),
                            {{"K", k}, {"R_star", m.r_star}}));
  out.push_back(make_report("l4_nash_constrained", l4, m.value, regime_tag(m.gradient_dominated),
                            {{"R", m.radius}, {"R_star", m.r_star}}));
  out.push_back(make_report("nash2", l2, d * dir * l1 * l1, regime_tag(nash.gradient_dominated),
                            {{"D", d}, {"R_star", nash.r_star}}));
  return out;
}

/// int |phi|^p <= C_GN Dir^{(p-1)/3} (int |phi|)^{(p+2)/3} and the
/// interpolation int |phi|^p <= (int phi^4)^{(p-1)/3} (int |phi|)^{(4-p)/3}.
/// Gradient-dominated means both radius minimisers behind the constant lie in (0, 1].
inline std::vector<InequalityReport> gn_check(const TestFunction& phi, double p) {
  if (!(p > 2.0 && p < 4.0)) throw Error(ErrorKind::OutOfRange, "p must lie in (2, 4)");
  const Integrator integ(phi);
  const double l1 = integ.abs_power(1.0);
  const double l2 = integ.abs_power(2.0);
  const double l4 = integ.abs_power(4.0);
  const double lp = integ.abs_power(p);
  const double dir = integ.h_dirichlet();
  const double cgn = gn_constant(p);
  const auto nash = minimise_over_radius(0.5 * dir, 0.5 * l1 * l1, 2.0);
  const auto nn = minimise_over_radius(4.0 / 3.0 * std::sqrt(l4) * dir, 0.5 * l2 * l2, 1.5);
  const bool grad = nash.gradient_dominated && nn.gradient_dominated;
  std::vector<InequalityReport> out;
  out.push_back(make_report("gn", lp, cgn * std::pow(dir, (p - 1.0) / 3.0) * std::pow(l1, (p + 2.0) / 3.0),
                            regime_tag(grad), {{"C_GN", cgn}, {"p", p}}));
  out.push_back(make_report("interpolation", lp, std::pow(l4, (p - 1.0) / 3.0) * std::pow(l1, (4.0 - p) / 3.0),
                            "unconstrained", {{"p", p}}));
  return out;
}

/// With f = phi / ||phi||:  int f^2 log f^2 + log 2 <= 2 int H f'^2.
inline InequalityReport log_sobolev_check(const TestFunction& phi) {
  const Integrator integ(phi);
  const double l2 = integ.abs_power(2.0);
  if (!(l2 > 0.0)) return make_report("log_sobolev", 0.0, 0.0, "degenerate");
  const double c2 = 1.0 / l2;
  const double ent = integ([c2](double, double v, double) {
    const double f2 = c2 * v * v;
    return f2 > 0.0 ? f2 * std::log(f2) : 0.0;
  });
  const double lhs = ent + std::log(2.0);
  const double rhs = 2.0 * c2 * integ.h_dirichlet();
  return make_report("log_sobolev", lhs, rhs, "normalized", {{"scale", std::sqrt(c2)}}, 1e-14);
}

/// int |phi| <= 5 (2 sqrt 2)^{-4/5} (int phi^2)^{2/5} (int w^2 |phi|)^{1/5}.
inline InequalityReport l1_energy_check(const TestFunction& phi) {
  const Integrator integ(phi);
  const double l1 = integ.abs_power(1.0);
  const double l2 = integ.abs_power(2.0);
  const double e = integ([](double w, double v, double) { return w * w * std::abs(v); });
  const double k = l1_interpolation_coefficient();
  return make_report("l1_from_l2_energy", l1, k * std::pow(l2, 0.4) * std::pow(e, 0.2), "unconstrained",
                     {{"coefficient", k}});
}

/// Largest values placed at the cells nearest w = 0; ties in |w| go left first.
inline GridFunction decreasing_rearrangement(const GridFunction& phi) {
  const auto v = phi.values();
  for (double x : v) {
    if (x < 0.0) throw Error(ErrorKind::InvalidArgument, "rearrangement needs a nonnegative function");
  }
  const Grid& grid = phi.grid();
  const auto w = grid.centers();
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return std::abs(w[i]) < std::abs(w[j]); });
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < order.size(); ++k) out[order[k]] = sorted[k];
  return GridFunction(grid, std::move(out));
}

/// \sum_faces W(w_{i+1/2}) ((phi_{i+1} - phi_i)/h)^2 h with W = 1 - w^2, or
/// W = (1 - |w|^{2-p}) |w|^p for p > 0.
inline double weighted_dirichlet_form(const GridFunction& phi, double p = 0.0) {
  if (p == 0.0) return dirichlet_form(phi);
  const auto faces = phi.grid().faces();
  const auto v = phi.values();
  const double h = phi.grid().h();
  double sum = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double aw = std::abs(faces[k]);
    const double weight = (1.0 - std::pow(aw, 2.0 - p)) * std::pow(aw, p);
    const double d = (v[k] - v[k - 1]) / h;
    sum += weight * d * d;
  }
  return sum * h;
}

/// Weighted energy of the rearrangement against that of phi, slack 1e-8.
inline InequalityReport rearrangement_energy_check(const GridFunction& phi, double p = 0.0) {
  if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorKind::OutOfRange, "p must lie in [0, 1)");
  const auto star = decreasing_rearrangement(phi);
  const double before = weighted_dirichlet_form(phi, p);
  const double after = weighted_dirichlet_form(star, p);
  return make_report(p == 0.0 ? "rearrangement_energy" : "rearrangement_energy_p", after, before, "discrete",
                     {{"p", p}}, 0.0, 1e-8);
}

}  // namespace cfp
