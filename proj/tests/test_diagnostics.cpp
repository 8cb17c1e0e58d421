#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cfp/diagnostics.hpp"

using namespace cfp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DensityState uniform(std::size_t n, double value = 0.5) {
  return DensityState{GridFunction::constant(Grid(n), value), 0.0, false};
}

/// \int_{-1}^1 w^2 (1 - w^2)^3 dw
constexpr double kW2H3 = 2.0 * (1.0 / 3.0 - 3.0 / 5.0 + 3.0 / 7.0 - 1.0 / 9.0);

}  // namespace

TEST_CASE("moments of the uniform density") {
  const auto s = uniform(100);
  const double h = 0.02;
  const auto m = moments(s, MomentOptions{3.0, {{0.5, 1.5}}});
  REQUIRE_THAT(m.mass, WithinRel(1.0, 1e-14));
  REQUIRE_THAT(m.mean, WithinAbs(0.0, 1e-16));
  REQUIRE_THAT(m.energy, WithinRel(0.5 * (2.0 / 3.0 - h * h / 6.0), 1e-13));
  REQUIRE_THAT(m.temperature, WithinRel(m.energy, 1e-14));
  REQUIRE_THAT(m.l2_sq, WithinRel(0.5, 1e-14));
  REQUIRE(m.weighted_norms.size() == 3);
  // \int |w|^{1/4} (1/2)^2 = (1/4) (2 / (5/4))
  REQUIRE_THAT(m.weighted(0.25, 2.0), WithinRel(0.4, 1e-3));
  REQUIRE_THROWS_AS(m.weighted(0.3, 2.0), Error);
}

TEST_CASE("energy right-hand side pins") {
  // mu = 1, E = 1/3 on the uniform density
  const auto s = uniform(4000);
  REQUIRE_THAT(energy_rhs(s, {0.0, 0.0, 0.1}), WithinAbs(-0.53333, 1e-5));
  REQUIRE_THAT(energy_rhs(s, {3.0, 1.0, 0.1}), WithinAbs(-0.54603, 1e-5));
  REQUIRE_THAT(nonlinear_energy_term(s, 3.0), WithinRel(kW2H3 / 16.0, 1e-5));
}

TEST_CASE("energy right-hand side matches the solver") {
  const Grid g(200);
  const ModelParams p{2.0, 1.0, 0.25};
  auto s = project_density([](double w) { return (1.0 - w * w) * (1.0 + 0.4 * w) + 0.1; }, g, 1.0);
  const double dt = 0.5 * stability_bound(s, p);
  const double e0 = quadrature(s.f, WeightSpec::moment(2));
  const auto s1 = step(s, p, dt);
  const auto s2 = step(s1, p, dt);
  const double e2 = quadrature(s2.f, WeightSpec::moment(2));
  REQUIRE_THAT((e2 - e0) / (2.0 * dt), WithinAbs(energy_rhs(s1, p), 2e-3));
}

TEST_CASE("second moment lower bound and L1 interpolation hold") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid g(400);
  for (int k = 0; k < 50; ++k) {
    const double a = u(rng), b = u(rng), c = 0.05 + 0.5 * (1.0 + u(rng));
    const auto s = project_density([&](double w) { return std::exp(-(w - a) * (w - a) / (c * c)) * (1.2 + b * w); },
                                   g, 0.5 + 0.5 * (1.0 + u(rng)));
    const auto m = moments(s);
    REQUIRE(m.energy >= second_moment_lower_bound(m.mass, m.l2_sq));
    REQUIRE(l1_from_l2_and_energy_check(s).holds);
  }
  REQUIRE_THAT(second_moment_lower_bound(1.0, 1.0), WithinRel(0.02048, 1e-12));
  REQUIRE_THROWS_AS(second_moment_lower_bound(0.0, 1.0), Error);
}

TEST_CASE("lemma lower bound on the uniform density") {
  const auto s = uniform(800);
  const auto r = lemma_prop1_check(s, {3.0, 1.0, 0.5});
  REQUIRE(r.lower_bound);
  REQUIRE(r.holds);
  REQUIRE_THAT(r.lhs, WithinAbs(kW2H3 / 16.0, 1e-6));
  REQUIRE_THAT(r.lhs, WithinAbs(6.3492e-3, 1e-6));
  REQUIRE_THAT(lemma_prop1_rhs(3.0, 1.0, 1.0 / 3.0), WithinAbs(1.2897e-4, 1e-7));
  REQUIRE_THAT(r.rhs, WithinAbs(1.2897e-4, 1e-6));
  REQUIRE_THROWS_AS(lemma_prop1_check(s, {2.0, 1.0, 0.5}), Error);
}

TEST_CASE("Dirichlet form of a linear function") {
  const Grid g(50);
  const auto f = GridFunction::sample(g, [](double w) { return 2.0 * w; });
  double expect = 0.0;
  for (double hf : g.h_faces().subspan(1, 49)) expect += 4.0 * hf * g.h();
  REQUIRE_THAT(dirichlet_form(f), WithinRel(expect, 1e-14));
  REQUIRE_THAT(dirichlet_form(f), WithinRel(16.0 / 3.0, 1e-3));
}

TEST_CASE("a-priori L2 bound") {
  const ModelParams p{1.0, 1.0, 0.25};
  const auto b = l2_apriori_bound(p, 0.7, 1.0);
  REQUIRE(b.bound.has_value());
  REQUIRE_THAT(*b.bound, WithinRel(std::cbrt(2.0), 1e-14));
  const auto big = l2_apriori_bound(p, 3.0, 1.0);
  REQUIRE(*big.bound == 3.0);
  // the mass term grows like mu^5 for alpha = 1
  const auto heavy = l2_apriori_bound(p, 0.1, 4.0);
  REQUIRE_THAT(*heavy.bound, WithinRel(0.2048 * 1024.0, 5e-3));
  const auto crit = l2_apriori_bound({2.0, 1.0, 0.25}, 1.0, 1.0);
  REQUIRE_FALSE(crit.bound.has_value());
  REQUIRE(crit.mass_threshold.has_value());
  REQUIRE(crit.mass_condition_met == (1.0 <= *crit.mass_threshold));
  REQUIRE_THROWS_AS(l2_apriori_bound({3.0, 1.0, 0.25}, 1.0, 1.0), Error);
  REQUIRE_THAT(l2_growth_constant(p), WithinRel(std::cbrt(2.0) * 2.0 + 8.0 / 3.0, 1e-14));
}

TEST_CASE("weighted sign diagnostics") {
  const auto r = weighted_sign_diagnostics(Grid(100), {3.0, 1.0, 0.1});
  REQUIRE_THAT(r.p, WithinRel(0.25, 1e-15));
  REQUIRE_THAT(r.drift_coefficient, WithinRel(-0.1 * 0.0625 - 0.9 * 0.25 + 0.8, 1e-14));
  REQUIRE(r.faces_checked == 98);
  REQUIRE_THROWS_AS(weighted_sign_diagnostics(Grid(10), {3.0, 1.0, 0.1}, 2.5), Error);
}
