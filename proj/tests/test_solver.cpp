#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cfp/equilibrium.hpp"
#include "cfp/solver.hpp"

using namespace cfp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double total(std::span<const double> v, double h) {
  double s = 0.0;
  for (double x : v) s += x;
  return s * h;
}

DensityState smooth_state(const Grid& g) {
  return project_density([](double w) { return (1.0 - w * w) * (1.0 + 0.6 * w) + 0.05; }, g, 1.0);
}

/// Exact beta = 0 solution H^{s-1} (1 + a w e^{-t} + b (w^2 - c) e^{-mu2 lambda t}),
/// with c = 2 / mu2, mu2 = 2 + 4 s.
double exact_linear(double w, double t, double lambda) {
  const double s = 1.0 / (2.0 * lambda);
  const double mu2 = 2.0 + 4.0 * s;
  const double finf = std::pow(1.0 - w * w, s - 1.0);
  return finf * (1.0 + 0.5 * w * std::exp(-t) + 0.3 * (w * w - 2.0 / mu2) * std::exp(-mu2 * lambda * t));
}

}  // namespace

TEST_CASE("Bernoulli pair against the direct formula") {
  for (double x : {-30.0, -2.5, -1e-3, 1e-3, 0.7, 12.0}) {
    const auto [bp, bm] = detail::bernoulli_pair(x);
    REQUIRE_THAT(bp, WithinRel(x / (std::exp(x) - 1.0), 1e-12));
    REQUIRE_THAT(bm, WithinRel(-x / (std::exp(-x) - 1.0), 1e-12));
    REQUIRE_THAT(bm - bp, WithinRel(x, 1e-12));
  }
  const auto [b0, b1] = detail::bernoulli_pair(0.0);
  REQUIRE(b0 == 1.0);
  REQUIRE(b1 == 1.0);
  const auto [big_p, big_m] = detail::bernoulli_pair(800.0);
  REQUIRE(big_p == 0.0);
  REQUIRE(big_m == 800.0);
}

TEST_CASE("face factor is the secant mean of 1 + beta g^alpha in the potential") {
  const double alpha = 2.5, beta = 0.7;
  auto psi = [&](long double g) { return std::log(g) - std::log1p(beta * std::pow(g, alpha)) / alpha; };
  for (auto [gl, gr] : {std::pair{0.3, 0.9}, std::pair{2.0, 1.5}, std::pair{1.0, 1.0001}}) {
    const long double expect = (std::log((long double)gr) - std::log((long double)gl)) / (psi(gr) - psi(gl));
    REQUIRE_THAT(detail::nonlinear_face_factor(gl, gr, alpha, beta), WithinRel((double)expect, 1e-10));
  }
  REQUIRE_THAT(detail::nonlinear_face_factor(0.8, 0.8, alpha, beta), WithinRel(1.0 + beta * std::pow(0.8, alpha), 1e-15));
  REQUIRE(detail::nonlinear_face_factor(0.3, 0.9, alpha, 0.0) == 1.0);
  REQUIRE(detail::nonlinear_face_factor(0.3, 0.9, 0.0, 2.0) == 3.0);
  REQUIRE(detail::nonlinear_face_factor(0.0, 0.9, alpha, beta) == 1.0);
  // large x: the factor stays accurate
  for (auto [gl, gr] : {std::pair{1e3, 1.5e3}, std::pair{1e90, 1e90 * (1.0 + 1e-9)}, std::pair{40.0, 1e4}}) {
    const long double xl = std::pow((long double)gl, 3.0L), xr = std::pow((long double)gr, 3.0L);
    const long double num = 3.0L * std::log((long double)gr / gl);
    const long double den = std::log1p(1.0L / xl) - std::log1p(1.0L / xr);
    const double expect = static_cast<double>(num / den);
    REQUIRE_THAT(detail::nonlinear_face_factor(gl, gr, 3.0, 1.0), WithinRel(expect, 1e-9));
  }
}

TEST_CASE("model parameter validation and rescaling") {
  REQUIRE_THROWS_AS((ModelParams{1.0, 1.0, 0.0}.validate()), Error);
  REQUIRE_THROWS_AS((ModelParams{-1.0, 1.0, 0.5}.validate()), Error);
  REQUIRE_THROWS_AS((ModelParams{1.0, -1.0, 0.5}.validate()), Error);
  const auto [ls, bs] = rescale_params({3.0, 2.0, 0.25});
  REQUIRE_THAT(ls, WithinRel(2.0, 1e-15));
  REQUIRE_THAT(bs, WithinRel(8.0, 1e-15));
}

TEST_CASE("boundary fluxes vanish and the step conserves mass") {
  const Grid g(200);
  const ModelParams p{2.0, 1.0, 0.25};
  auto s = smooth_state(g);
  const auto flux = face_fluxes(s, p);
  REQUIRE(flux.front() == 0.0);
  REQUIRE(flux.back() == 0.0);
  const double m0 = mass(s.f);
  const double dt = stability_bound(s, p);
  for (int i = 0; i < 500; ++i) s = step(s, p, dt);
  REQUIRE_THAT(mass(s.f), WithinRel(m0, 1e-13));
  REQUIRE_THAT(s.time, WithinRel(500 * dt, 1e-12));
}

TEST_CASE("step rejects a time step above the stability bound") {
  const Grid g(100);
  const ModelParams p{1.0, 1.0, 0.25};
  const auto s = smooth_state(g);
  const double bound = stability_bound(s, p);
  try {
    step(s, p, 1.5 * bound);
    FAIL("unstable step accepted");
  } catch (const Error& e) {
    REQUIRE(e.kind() == ErrorKind::UnstableStep);
  }
  REQUIRE_THROWS_AS(step(s, p, -1.0), Error);
}

TEST_CASE("closed-form profiles are discrete steady states") {
  const Grid g(300);
  for (const ModelParams p : {ModelParams{0.0, 0.0, 0.25}, ModelParams{2.0, 1.0, 0.25}, ModelParams{3.0, 2.0, 0.1}}) {
    const double c = p.beta > 0.0 ? 0.6 * critical_amplitude(p) : 0.7;
    const auto prof = steady_profile(c, p, g);
    SolverControls ctl;
    ctl.t_end = 0.05;
    const auto traj = evolve(DensityState{prof.values, 0.0, false}, p, ctl);
    REQUIRE(traj.outcome() == EventKind::Completed);
    const auto v0 = prof.values.values();
    const auto v1 = traj.final_state().f.values();
    double worst = 0.0;
    for (std::size_t i = 0; i < v0.size(); ++i) worst = std::max(worst, std::abs(v1[i] - v0[i]) / v0[i]);
    REQUIRE(worst < 1e-9);
  }
}

TEST_CASE("linear case converges to an exact decaying mode") {
  // s = 2 and s = 4: profiles smooth up to the boundary
  for (double lambda : {0.25, 0.125}) {
    const ModelParams p{0.0, 0.0, lambda};
    std::vector<double> errs;
    for (std::size_t n : {50u, 100u, 200u}) {
      const Grid g(n);
      const auto s0 = project_density([&](double w) { return exact_linear(w, 0.0, lambda); }, g);
      SolverControls ctl;
      ctl.t_end = 0.2;
      // time error well below the spatial one
      ctl.dt = 1e-5;
      const auto traj = evolve(s0, p, ctl);
      const auto& f = traj.final_state().f;
      double l1 = 0.0;
      for (std::size_t i = 0; i < n; ++i) l1 += std::abs(f[i] - exact_linear(g.center(i), 0.2, lambda)) * g.h();
      errs.push_back(l1);
    }
    CAPTURE(lambda, errs);
    REQUIRE(errs[0] / errs[1] > 3.5);
    REQUIRE(errs[1] / errs[2] > 3.5);
    REQUIRE(errs[2] < 1e-4);
  }
}

TEST_CASE("evolve records snapshots and ends with an event") {
  const Grid g(100);
  const ModelParams p{1.0, 1.0, 0.25};
  SolverControls ctl;
  ctl.t_end = 0.02;
  ctl.record_every = 10;
  std::size_t seen = 0;
  const auto traj = evolve(smooth_state(g), p, ctl, {[&](const DensityState&) { ++seen; }});
  REQUIRE(traj.outcome() == EventKind::Completed);
  REQUIRE(seen == traj.snapshots.size());
  REQUIRE(traj.snapshots.front().time == 0.0);
  REQUIRE_THAT(traj.final_state().time, WithinRel(0.02, 1e-12));
  REQUIRE(traj.snapshots.size() >= traj.steps / 10);
  for (std::size_t i = 1; i < traj.snapshots.size(); ++i) {
    REQUIRE(traj.snapshots[i].time > traj.snapshots[i - 1].time);
  }
  const double m = total(traj.final_state().f.values(), g.h());
  REQUIRE_THAT(m, WithinRel(1.0, 1e-13));
}

TEST_CASE("symmetric data stay symmetric") {
  const Grid g(120);
  const auto s0 = project_density([](double w) { return 1.0 + std::cos(3.0 * w); }, g, 1.0);
  SolverControls ctl;
  ctl.t_end = 0.05;
  const auto traj = evolve(s0, {3.0, 1.0, 0.1}, ctl);
  const auto v = traj.final_state().f.values();
  for (std::size_t i = 0; i < v.size(); ++i) REQUIRE_THAT(v[i], WithinRel(v[v.size() - 1 - i], 1e-12));
}

TEST_CASE("evolve terminal events") {
  const Grid g(100);
  const ModelParams p{1.0, 1.0, 0.25};
  SolverControls ctl;
  ctl.t_end = 1.0;

  SECTION("L2 threshold") {
    ctl.blowup_l2_threshold = 1e-3;
    const auto traj = evolve(smooth_state(g), p, ctl);
    REQUIRE(traj.outcome() == EventKind::BlowupDetected);
    REQUIRE(traj.events.back().detail == "l2_threshold");
  }
  SECTION("central fraction") {
    ctl.blowup_cell_fraction = 0.01;
    const auto traj = evolve(smooth_state(g), p, ctl);
    REQUIRE(traj.outcome() == EventKind::BlowupDetected);
    REQUIRE(traj.events.back().detail == "central_fraction");
  }
  SECTION("step cap") {
    ctl.max_steps = 5;
    const auto traj = evolve(smooth_state(g), p, ctl);
    REQUIRE(traj.outcome() == EventKind::Aborted);
    REQUIRE(traj.steps == 5);
  }
  SECTION("negative initial data") {
    std::vector<double> v(100, 0.5);
    v[3] = -1e-3;
    REQUIRE_THROWS_AS(evolve(DensityState{GridFunction(g, v), 0.0, false}, p, ctl), Error);
  }
  SECTION("bad controls") {
    ctl.dt = 0.0;
    REQUIRE_THROWS_AS(evolve(smooth_state(g), p, ctl), Error);
  }
}

TEST_CASE("event names") {
  REQUIRE(std::string(to_string(EventKind::BlowupDetected)) == "blowup_detected");
  REQUIRE(std::string(to_string(EventKind::NegativityAbort)) == "negativity_abort");
  REQUIRE(std::string(to_string(EventKind::Completed)) == "completed");
}
