#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "cfp/equilibrium.hpp"

using namespace cfp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

/// \int_{-1}^1 (1 - w^2)^{s-1} dw = sqrt(pi) Gamma(s) / Gamma(s + 1/2).
double beta0_unit_mass(double lambda) {
  const double s = 1.0 / (2.0 * lambda);
  return std::sqrt(std::numbers::pi) * std::tgamma(s) / std::tgamma(s + 0.5);
}

}  // namespace

TEST_CASE("critical amplitude") {
  REQUIRE_THAT(critical_amplitude({3.0, 8.0, 0.5}), WithinRel(0.5, 1e-15));
  try {
    critical_amplitude({3.0, 0.0, 0.5});
    FAIL("beta = 0 accepted");
  } catch (const Error& e) {
    REQUIRE(e.kind() == ErrorKind::NoCriticalAmplitude);
  }
}

TEST_CASE("linear profiles and their mass") {
  for (double lambda : {0.1, 0.25, 0.5, 0.8}) {
    const ModelParams p{0.0, 0.0, lambda};
    REQUIRE_THAT(steady_mass(1.0, p), WithinRel(beta0_unit_mass(lambda), 1e-13));
    const auto split = solve_amplitude_for_mass(2.0, p);
    REQUIRE_THAT(split.amplitude, WithinRel(2.0 / beta0_unit_mass(lambda), 1e-13));
    REQUIRE(split.condensate_mass == 0.0);
  }
  REQUIRE_THAT(solve_amplitude_for_mass(1.0, {0.0, 0.0, 0.25}).amplitude, WithinRel(0.75, 1e-13));
  // lambda = 1/2: the uniform density is steady
  const Grid g(51);
  const auto prof = steady_profile(0.5, {0.0, 0.0, 0.5}, g);
  for (double v : prof.values.values()) REQUIRE(v == 0.5);
}

TEST_CASE("pointwise formula") {
  const ModelParams p{2.0, 1.5, 0.2};
  const double c = 0.5;
  const Grid g(20);
  const auto prof = steady_profile(c, p, g);
  const double s = 2.5;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = g.center(i);
    const double h = 1.0 - w * w;
    const double expect = c * std::pow(h, s - 1.0) / std::pow(1.0 - p.beta * c * c * std::pow(h, s * 2.0), 0.5);
    REQUIRE_THAT(prof.values[i], WithinRel(expect, 1e-13));
  }
  REQUIRE_FALSE(prof.is_critical);
  REQUIRE_THAT(prof.grid_mass, WithinRel(mass(prof.values), 1e-14));
}

TEST_CASE("critical mass against high-precision values") {
  // 50-digit reference quadrature of the critical profile
  REQUIRE_THAT(critical_mass({3.0, 1.0, 0.5}), WithinRel(4.395875450200236, 1e-12));
  REQUIRE_THAT(critical_mass({3.0, 1.0, 0.01}), WithinRel(0.5878826245742564, 1e-11));
  REQUIRE(std::isinf(critical_mass({2.0, 1.0, 0.5})));
  REQUIRE(std::isinf(critical_mass({1.0, 1.0, 0.5})));
}

TEST_CASE("critical mass by product integration of the singular part") {
  // f = r0 |w|^{-2/3} near 0; integrate f - r0 |w|^{-2/3} by midpoints and add 2 * 3 r0 exactly
  const ModelParams p{3.0, 2.0, 0.3};
  const double c = critical_amplitude(p);
  const double s = 1.0 / (2.0 * p.lambda);
  const double r0 = c * std::pow(s * p.alpha, -1.0 / p.alpha);
  auto regular = [&](double w) {
    const double h = 1.0 - w * w;
    const double f = c * std::pow(h, s - 1.0) / std::cbrt(1.0 - std::pow(h, s * p.alpha));
    return f - r0 * std::pow(w, -2.0 / 3.0);
  };
  auto midpoint = [&](int n) {
    double sum = 0.0;
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i) sum += regular((i + 0.5) * h);
    return sum * h;
  };
  // the remainder behaves like w^{4/3}: Richardson with exponents 4/3 and 2
  const double a = midpoint(20000), b = midpoint(40000);
  const double r1 = (std::pow(2.0, 4.0 / 3.0) * b - a) / (std::pow(2.0, 4.0 / 3.0) - 1.0);
  const double oracle = 2.0 * (r1 + 3.0 * r0);
  REQUIRE_THAT(critical_mass(p), WithinRel(oracle, 1e-6));
}

TEST_CASE("mass is increasing in the amplitude and inverts") {
  const ModelParams p{3.0, 1.0, 0.25};
  const double cmax = critical_amplitude(p);
  double prev = 0.0;
  for (double frac : {0.1, 0.4, 0.7, 0.9, 0.99, 1.0}) {
    const double m = steady_mass(frac * cmax, p);
    REQUIRE(m > prev);
    prev = m;
  }
  const double mu_c = critical_mass(p);
  const auto split = solve_amplitude_for_mass(0.5 * mu_c, p);
  REQUIRE_THAT(steady_mass(split.amplitude, p), WithinRel(0.5 * mu_c, 1e-12));
  const auto over = solve_amplitude_for_mass(mu_c + 0.3, p);
  REQUIRE(over.amplitude == cmax);
  REQUIRE_THAT(over.condensate_mass, WithinRel(0.3, 1e-12));
  // alpha <= 2: every mass is carried by a regular profile
  const auto sub = solve_amplitude_for_mass(5.0, {2.0, 1.0, 0.25});
  REQUIRE(sub.condensate_mass == 0.0);
  REQUIRE_THAT(steady_mass(sub.amplitude, {2.0, 1.0, 0.25}), WithinRel(5.0, 1e-11));
  // the log-divergent mass needs C closer to 1 than one ulp
  try {
    solve_amplitude_for_mass(50.0, {2.0, 1.0, 0.25});
    FAIL("unresolvable amplitude accepted");
  } catch (const Error& e) {
    REQUIRE(e.kind() == ErrorKind::OutOfRange);
  }
}

TEST_CASE("amplitude preconditions") {
  const ModelParams p{3.0, 1.0, 0.25};
  try {
    steady_profile(1.01, p, Grid(10));
    FAIL("supercritical amplitude accepted");
  } catch (const Error& e) {
    REQUIRE(e.kind() == ErrorKind::SupercriticalAmplitude);
  }
  REQUIRE_THROWS_AS(steady_profile(-1.0, p, Grid(10)), Error);
  REQUIRE_THROWS_AS(steady_profile(1.0, {0.0, 1.0, 0.25}, Grid(10)), Error);
  REQUIRE_THROWS_AS(solve_amplitude_for_mass(0.0, p), Error);
  // critical profile with alpha <= 2 is not integrable on an odd grid
  REQUIRE_THROWS_AS(steady_profile(1.0, {2.0, 1.0, 0.25}, Grid(11)), Error);
}

TEST_CASE("discrete zero-flux residual") {
  const Grid g(800);
  SECTION("linear") {
    for (double lambda : {0.25, 0.5}) {
      const ModelParams p{0.0, 0.0, lambda};
      const auto prof = steady_profile(solve_amplitude_for_mass(1.0, p).amplitude, p, g);
      REQUIRE(residual_flux(prof, p) <= 1e-12);
    }
  }
  SECTION("nonlinear, below critical") {
    for (const ModelParams p : {ModelParams{1.0, 1.0, 0.25}, ModelParams{2.0, 3.0, 0.1}, ModelParams{4.0, 1.0, 0.5}}) {
      const auto prof = steady_profile(0.9 * critical_amplitude(p), p, g);
      REQUIRE(residual_flux(prof, p) <= 1e-9);
    }
  }
  SECTION("critical") {
    const ModelParams p{3.0, 1.0, 0.5};
    const auto prof = steady_profile(critical_amplitude(p), p, g);
    REQUIRE(prof.is_critical);
    REQUIRE_THAT(prof.mass, WithinRel(critical_mass(p), 1e-14));
    // rounding in the Psi differences dominates next to the singular centre
    REQUIRE(residual_flux(prof, p, 3) <= 1e-8);
  }
}
