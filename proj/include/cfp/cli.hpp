#pragma once

// Experiment drivers behind the command-line front end.  Every runner
// validates its configuration before touching the output directory and
// writes plain CSV with 17 significant digits.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cfp/blowup.hpp"
#include "cfp/config.hpp"
#include "cfp/diagnostics.hpp"
#include "cfp/equilibrium.hpp"
#include "cfp/error.hpp"
#include "cfp/grid.hpp"
#include "cfp/ineq_lab.hpp"
#include "cfp/solver.hpp"

namespace cfp {

// ---------------------------------------------------------------------------
// CSV helpers

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_optional(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  out += '"';
  return out;
}

/// Rows are buffered and written in one go by save().
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : width_(header.size()) { append(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw Error(ErrorKind::InvalidArgument, "csv row width mismatch");
    append(cells);
  }

  const std::string& text() const noexcept { return text_; }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Config, "cannot write '" + path.string() + "'");
    out << text_;
    if (!out) throw Error(ErrorKind::Config, "write failed for '" + path.string() + "'");
  }

 private:
  void append(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += csv_escape(cells[i]);
    }
    text_ += '\n';
  }

  std::size_t width_;
  std::string text_;
};

inline void prepare_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Config, "cannot create output directory '" + dir.string() + "': " + ec.message());
}

// ---------------------------------------------------------------------------
// Run configuration

enum class InitialFamily { Uniform, Bump, Steady, CustomTable };

inline InitialFamily parse_family(const std::string& name) {
  if (name == "uniform") return InitialFamily::Uniform;
  if (name == "bump") return InitialFamily::Bump;
  if (name == "steady") return InitialFamily::Steady;
  if (name == "custom-table") return InitialFamily::CustomTable;
  throw Error(ErrorKind::Config, "unknown initial family '" + name + "'");
}

struct InitialSpec {
  InitialFamily family = InitialFamily::Uniform;
  double mass = 1.0;
  /// bump: target second moment; the width is tuned to hit it
  std::optional<double> energy;
  std::optional<double> width;
  double center = 0.0;
  /// custom-table: sorted (w, f) samples
  std::vector<std::pair<double, double>> table;
};

struct OutputSpec {
  std::filesystem::path directory = "out";
  bool snapshots = false;
};

inline std::vector<std::pair<double, double>> load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open table '" + path + "'");
  std::vector<std::pair<double, double>> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double w = 0.0;
    double f = 0.0;
    if (!(ss >> w)) continue;
    if (!(ss >> f)) throw Error(ErrorKind::Config, path + ":" + std::to_string(n) + ": expected 'w f'");
    if (!std::isfinite(w) || !std::isfinite(f) || f < 0.0) {
      throw Error(ErrorKind::Config, path + ":" + std::to_string(n) + ": values must be finite with f >= 0");
    }
    if (!out.empty() && !(w > out.back().first)) {
      throw Error(ErrorKind::Config, path + ":" + std::to_string(n) + ": w must increase strictly");
    }
    out.emplace_back(w, f);
  }
  if (out.size() < 2) throw Error(ErrorKind::Config, "table '" + path + "' needs at least two rows");
  return out;
}

struct RunConfig {
  ModelParams model{3.0, 1.0, 0.05};
  std::size_t n_cells = 400;
  InitialSpec initial;
  SolverControls controls;
  OutputSpec output;

  static RunConfig from(const ConfigFile& cfg) {
    RunConfig rc;
    rc.model.alpha = cfg.get_double("model.alpha", rc.model.alpha);
    rc.model.beta = cfg.get_double("model.beta", rc.model.beta);
    rc.model.lambda = cfg.get_double("model.lambda", rc.model.lambda);
    try {
      rc.model.validate();
    } catch (const Error& e) {
      cfg.fail("model", e.what());
    }
    const auto n = cfg.get_uint("grid.n_cells", rc.n_cells);
    if (n < 2) cfg.fail("grid.n_cells", "need at least 2 cells");
    rc.n_cells = static_cast<std::size_t>(n);

    try {
      rc.initial.family = parse_family(cfg.get_string("initial.family", "uniform"));
    } catch (const Error& e) {
      cfg.fail("initial.family", e.what());
    }
    rc.initial.mass = cfg.get_double("initial.mass", 1.0);
    if (!(rc.initial.mass > 0.0) || !std::isfinite(rc.initial.mass)) cfg.fail("initial.mass", "must be positive");
    rc.initial.energy = cfg.get_optional_double("initial.energy");
    rc.initial.width = cfg.get_optional_double("initial.width");
    rc.initial.center = cfg.get_double("initial.center", 0.0);
    if (!(std::abs(rc.initial.center) < 1.0)) cfg.fail("initial.center", "must lie in (-1, 1)");
    if (rc.initial.energy && !(*rc.initial.energy > 0.0 && *rc.initial.energy < rc.initial.mass)) {
      cfg.fail("initial.energy", "must lie in (0, initial.mass)");
    }
    if (rc.initial.width && !(*rc.initial.width > 0.0)) cfg.fail("initial.width", "must be positive");
    if (rc.initial.family == InitialFamily::Bump && rc.initial.energy && rc.initial.width) {
      cfg.fail("initial.width", "give either initial.width or initial.energy, not both");
    }
    if (rc.initial.family == InitialFamily::CustomTable) {
      if (!cfg.has("initial.table")) cfg.fail("initial.family", "custom-table needs initial.table");
      try {
        rc.initial.table = load_table(cfg.get_string("initial.table", ""));
      } catch (const Error& e) {
        cfg.fail("initial.table", e.what());
      }
    }

    rc.controls.dt = cfg.get_double("controls.dt", rc.controls.dt);
    rc.controls.t_end = cfg.get_double("controls.t_end", rc.controls.t_end);
    rc.controls.record_every = static_cast<std::size_t>(cfg.get_uint("controls.record_every", rc.controls.record_every));
    rc.controls.negativity_tol = cfg.get_double("controls.negativity_tol", rc.controls.negativity_tol);
    rc.controls.blowup_l2_threshold = cfg.get_optional_double("controls.blowup_l2_threshold");
    rc.controls.blowup_cell_fraction = cfg.get_double("controls.blowup_cell_fraction", rc.controls.blowup_cell_fraction);
    rc.controls.max_steps = static_cast<std::size_t>(cfg.get_uint("controls.max_steps", rc.controls.max_steps));
    try {
      rc.controls.validate();
    } catch (const Error& e) {
      cfg.fail("controls", e.what());
    }

    rc.output.directory = cfg.get_string("output.directory", "out");
    rc.output.snapshots = cfg.get_bool("output.snapshots", false);
    return rc;
  }
};

// ---------------------------------------------------------------------------
// Initial data

inline std::function<double(double)> bump_datum(double center, double width) {
  return [center, width](double w) {
    const double x = (w - center) / width;
    const double b = 1.0 - x * x;
    return b > 0.0 ? b * b : 0.0;
  };
}

/// (1 - ((w - c)/delta)^2)^2_+ scaled to mass mu, with delta tuned by
/// bisection until the discrete second moment equals `energy`.
inline DensityState bump_with_energy(const Grid& grid, double center, double mu, double energy) {
  auto second_moment = [&](double width) {
    return quadrature(project_density(bump_datum(center, width), grid, mu).f, WeightSpec::moment(2));
  };
  double lo = 2.0 * grid.h();
  double hi = 4.0;
  if (second_moment(lo) > energy) {
    throw Error(ErrorKind::InvalidInitialData, "target energy too small for the grid resolution");
  }
  if (second_moment(hi) < energy) throw Error(ErrorKind::InvalidInitialData, "target energy too large for a bump");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (second_moment(mid) < energy) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  auto state = project_density(bump_datum(center, 0.5 * (lo + hi)), grid, mu);
  const double got = quadrature(state.f, WeightSpec::moment(2));
  if (std::abs(got - energy) > 1e-9 * energy) {
    throw Error(ErrorKind::InvalidInitialData, "bump energy target not reachable");
  }
  return state;
}

inline DensityState make_initial_state(const RunConfig& rc, const Grid& grid) {
  const auto& in = rc.initial;
  switch (in.family) {
    case InitialFamily::Uniform:
      return project_density([](double) { return 1.0; }, grid, in.mass);
    case InitialFamily::Bump:
      if (in.energy) return bump_with_energy(grid, in.center, in.mass, *in.energy);
      return project_density(bump_datum(in.center, in.width.value_or(0.5)), grid, in.mass);
    case InitialFamily::Steady: {
      const auto split = solve_amplitude_for_mass(in.mass, rc.model);
      if (split.condensate_mass > 0.0) {
        throw Error(ErrorKind::InvalidInitialData, "mass exceeds the critical mass; the condensate has no grid representation");
      }
      const auto profile = steady_profile(split.amplitude, rc.model, grid);
      return DensityState{profile.values, 0.0, false};
    }
    case InitialFamily::CustomTable: {
      const auto& t = in.table;
      auto interp = [&t](double w) {
        if (w <= t.front().first) return t.front().second;
        if (w >= t.back().first) return t.back().second;
        const auto it = std::upper_bound(t.begin(), t.end(), w, [](double x, const auto& e) { return x < e.first; });
        const auto& [w1, f1] = *it;
        const auto& [w0, f0] = *(it - 1);
        return f0 + (f1 - f0) * (w - w0) / (w1 - w0);
      };
      return project_density(interp, grid, in.mass);
    }
  }
  throw Error(ErrorKind::Config, "unhandled initial family");
}

// ---------------------------------------------------------------------------
// simulate

inline constexpr int kExitCompleted = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBlowup = 2;

/// p used for the weighted column: (alpha - 2)/(alpha + 1) when positive, else 0.
inline double trajectory_weight_exponent(const ModelParams& p) { return std::max(weighted_exponent(p.alpha), 0.0); }

inline CsvTable trajectory_table(const Trajectory& traj, const ModelParams& p) {
  CsvTable t({"t", "tau", "mass", "mean", "energy", "temperature", "l2_sq", "l2p_sq", "bbound_lower", "energy_rhs",
              "dirichlet_form"});
  const double pw = trajectory_weight_exponent(p);
  for (const auto& s : traj.snapshots) {
    const auto m = moments(s, MomentOptions{std::nullopt, {{pw, 2.0}}});
    const double bb = m.mass > 0.0 && m.l2_sq > 0.0 ? second_moment_lower_bound(m.mass, m.l2_sq) : 0.0;
    t.row({format_double(s.time), format_double(p.lambda * s.time), format_double(m.mass), format_double(m.mean),
           format_double(m.energy), format_double(m.temperature), format_double(m.l2_sq),
           format_double(m.weighted(pw, 2.0)), format_double(bb), format_double(energy_rhs(s, p)),
           format_double(dirichlet_form(s.f))});
  }
  return t;
}

inline CsvTable events_table(const Trajectory& traj) {
  CsvTable t({"t", "event_kind", "detail"});
  for (const auto& e : traj.events) t.row({format_double(e.time), to_string(e.kind), e.detail});
  return t;
}

inline int exit_status(EventKind kind) {
  switch (kind) {
    case EventKind::Completed: return kExitCompleted;
    case EventKind::BlowupDetected: return kExitBlowup;
    default: return kExitError;
  }
}

struct SimulateResult {
  Trajectory trajectory;
  int exit_code = kExitCompleted;
};

inline SimulateResult run_simulate(const RunConfig& rc) {
  const Grid grid(rc.n_cells);
  const auto initial = make_initial_state(rc, grid);
  SimulateResult out;
  out.trajectory = evolve(initial, rc.model, rc.controls);
  out.exit_code = exit_status(out.trajectory.outcome());

  const auto traj = trajectory_table(out.trajectory, rc.model);
  const auto events = events_table(out.trajectory);
  prepare_directory(rc.output.directory);
  traj.save(rc.output.directory / "trajectory.csv");
  events.save(rc.output.directory / "events.csv");
  if (rc.output.snapshots) {
    CsvTable snaps({"t", "w", "f"});
    for (const auto& s : out.trajectory.snapshots) {
      for (std::size_t i = 0; i < s.f.size(); ++i) {
        snaps.row({format_double(s.time), format_double(grid.center(i)), format_double(s.f[i])});
      }
    }
    snaps.save(rc.output.directory / "snapshots.csv");
  }
  return out;
}

// ---------------------------------------------------------------------------
// steady

struct SteadyResult {
  AmplitudeSplit split;
  SteadyProfile profile;
  double critical_mass = 0.0;
  double residual = 0.0;
};

inline SteadyResult run_steady(const RunConfig& rc) {
  const Grid grid(rc.n_cells);
  const auto split = solve_amplitude_for_mass(rc.initial.mass, rc.model);
  auto profile = steady_profile(split.amplitude, rc.model, grid);
  double mu_c = std::numeric_limits<double>::infinity();
  if (rc.model.beta > 0.0 && rc.model.alpha > 0.0) mu_c = critical_mass(rc.model);
  const double residual = residual_flux(profile, rc.model, profile.is_critical ? 1 : 0);

  CsvTable values({"w", "f"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values.row({format_double(grid.center(i)), format_double(profile.values[i])});
  }
  CsvTable summary({"alpha", "beta", "lambda", "mass", "amplitude", "condensate_mass", "critical_mass",
                    "profile_mass", "grid_mass", "residual_flux"});
  summary.row({format_double(rc.model.alpha), format_double(rc.model.beta), format_double(rc.model.lambda),
               format_double(rc.initial.mass), format_double(split.amplitude), format_double(split.condensate_mass),
               format_double(mu_c), format_double(profile.mass), format_double(profile.grid_mass),
               format_double(residual)});
  prepare_directory(rc.output.directory);
  values.save(rc.output.directory / "steady.csv");
  summary.save(rc.output.directory / "steady_summary.csv");
  return {split, std::move(profile), mu_c, residual};
}

// ---------------------------------------------------------------------------
// blowup

inline CsvTable blowup_table(const ModelParams& p, double mu, double e0) {
  const auto k = constants(p.alpha);
  const auto tb = blowup_time_bound(e0, mu, p);
  const auto label = classify(p, mu, e0);
  const auto& info = *label.supercritical;
  CsvTable t({"alpha", "beta", "lambda", "mass", "E0", "c_alpha", "d_alpha", "s_alpha", "gamma", "Lambda", "phi",
              "psi", "E_c", "mu_star", "t_bar", "admissible_below", "regime"});
  std::optional<double> psi_value;
  if (e0 < 1.0) psi_value = psi(mu, e0, p);
  t.row({format_double(p.alpha), format_double(p.beta), format_double(p.lambda), format_double(mu),
         format_double(e0), format_double(k.c_alpha), format_double(k.d_alpha), format_double(k.s_alpha),
         format_double(k.gamma), format_double(tb.Lambda), format_double(phi(e0, mu, p)), format_optional(psi_value),
         format_optional(info.critical_energy), format_optional(info.mass_threshold), format_optional(info.t_bar),
         format_double(tb.admissible_below), to_string(label.regime)});
  return t;
}

inline void run_blowup(const RunConfig& rc) {
  if (!rc.initial.energy) throw Error(ErrorKind::Config, "blowup needs initial.energy");
  const auto t = blowup_table(rc.model, rc.initial.mass, *rc.initial.energy);
  prepare_directory(rc.output.directory);
  t.save(rc.output.directory / "blowup.csv");
}

// ---------------------------------------------------------------------------
// figure1

struct Figure1Config {
  std::vector<double> alphas{3.0, 4.0};
  std::vector<double> lambdas{0.025, 0.05, 0.1};
  double beta = 1.0;
  double mass = 1.0;
  std::size_t points = 400;
  /// grid ends as fractions of the mass
  double e0_min = 1e-8;
  double e0_max = 0.999;
  std::filesystem::path directory = "out";

  static Figure1Config from(const ConfigFile& cfg) {
    Figure1Config fc;
    fc.alphas = cfg.get_list("figure1.alphas", fc.alphas);
    fc.lambdas = cfg.get_list("figure1.lambdas", fc.lambdas);
    fc.beta = cfg.get_double("figure1.beta", fc.beta);
    fc.mass = cfg.get_double("figure1.mass", fc.mass);
    fc.points = static_cast<std::size_t>(cfg.get_uint("figure1.points", fc.points));
    fc.e0_min = cfg.get_double("figure1.e0_min", fc.e0_min);
    fc.e0_max = cfg.get_double("figure1.e0_max", fc.e0_max);
    fc.directory = cfg.get_string("output.directory", "out");
    if (!(fc.beta > 0.0)) cfg.fail("figure1.beta", "must be positive");
    if (!(fc.mass > 0.0)) cfg.fail("figure1.mass", "must be positive");
    if (fc.points < 2) cfg.fail("figure1.points", "need at least 2 points");
    if (!(fc.e0_min > 0.0 && fc.e0_min < fc.e0_max && fc.e0_max < 1.0)) {
      cfg.fail("figure1.e0_min", "need 0 < e0_min < e0_max < 1");
    }
    for (double l : fc.lambdas) {
      if (!(l > 0.0)) cfg.fail("figure1.lambdas", "entries must be positive");
    }
    for (double a : fc.alphas) {
      if (!(a >= 0.0) || !std::isfinite(a)) cfg.fail("figure1.alphas", "entries must be finite and >= 0");
    }
    return fc;
  }

  /// Log-spaced E0 values in [e0_min mu, e0_max mu].
  std::vector<double> energy_grid() const {
    std::vector<double> e(points);
    const double a = std::log(e0_min * mass);
    const double b = std::log(e0_max * mass);
    for (std::size_t i = 0; i < points; ++i) {
      e[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    return e;
  }
};

struct PhiCurve {
  double alpha = 0.0;
  double lambda = 0.0;
  std::vector<double> e0;
  std::vector<double> phi;
};

struct CriticalEnergyRow {
  double alpha = 0.0;
  double lambda = 0.0;
  std::optional<double> critical_energy;
  std::string status;
};

struct Figure1Result {
  std::vector<PhiCurve> curves;
  std::vector<CriticalEnergyRow> critical;
  std::vector<std::string> warnings;
};

inline Figure1Result run_figure1(const Figure1Config& fc) {
  Figure1Result res;
  const auto grid = fc.energy_grid();
  for (double a : fc.alphas) {
    for (double l : fc.lambdas) {
      const ModelParams p{a, fc.beta, l};
      if (!(a > 2.0)) {
        res.critical.push_back({a, l, std::nullopt, "out-of-regime"});
        res.warnings.push_back("alpha=" + format_double(a) + " is not above 2; curve skipped");
        continue;
      }
      PhiCurve c{a, l, grid, {}};
      c.phi.reserve(grid.size());
      for (double e : grid) c.phi.push_back(phi(e, fc.mass, p));
      res.curves.push_back(std::move(c));
      try {
        res.critical.push_back({a, l, critical_energy(fc.mass, p), "ok"});
      } catch (const Error& e) {
        res.critical.push_back({a, l, std::nullopt, to_string(e.kind())});
      }
    }
  }
  CsvTable curves({"alpha", "lambda", "E0", "phi"});
  for (const auto& c : res.curves) {
    for (std::size_t i = 0; i < c.e0.size(); ++i) {
      curves.row({format_double(c.alpha), format_double(c.lambda), format_double(c.e0[i]), format_double(c.phi[i])});
    }
  }
  CsvTable crit({"alpha", "lambda", "E_c", "status"});
  for (const auto& r : res.critical) {
    crit.row({format_double(r.alpha), format_double(r.lambda), format_optional(r.critical_energy), r.status});
  }
  prepare_directory(fc.directory);
  curves.save(fc.directory / "phi_curves.csv");
  crit.save(fc.directory / "critical_energy.csv");
  return res;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepConfig {
  std::vector<double> alphas{1.0, 2.0, 3.0};
  std::vector<double> betas{1.0};
  std::vector<double> lambdas{0.05};
  std::vector<double> masses{1.0};
  std::vector<double> energies{0.01};
  bool simulate = false;
  unsigned threads = 0;
  /// template for simulated points, which start from a bump with the point's mass and E0
  RunConfig base;

  static SweepConfig from(const ConfigFile& cfg) {
    SweepConfig sc;
    sc.alphas = cfg.get_list("sweep.alphas", sc.alphas);
    sc.betas = cfg.get_list("sweep.betas", sc.betas);
    sc.lambdas = cfg.get_list("sweep.lambdas", sc.lambdas);
    sc.masses = cfg.get_list("sweep.masses", sc.masses);
    sc.energies = cfg.get_list("sweep.energies", sc.energies);
    sc.simulate = cfg.get_bool("sweep.simulate", false);
    sc.threads = static_cast<unsigned>(cfg.get_uint("sweep.threads", 0));
    for (const auto* axis : {&sc.alphas, &sc.betas, &sc.lambdas, &sc.masses, &sc.energies}) {
      for (double v : *axis) {
        if (!std::isfinite(v)) cfg.fail("sweep", "axis values must be finite");
      }
    }
    sc.base = RunConfig::from(cfg);
    return sc;
  }
};

struct SweepPoint {
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double mass = 0.0;
  double energy = 0.0;
};

struct SweepRow {
  SweepPoint point;
  std::string regime;
  std::optional<int> phi_sign;
  std::optional<int> psi_sign;
  std::optional<double> critical_energy;
  std::optional<double> mass_threshold;
  std::optional<double> t_bar;
  std::string outcome;
  std::string detail;
};

inline SweepRow evaluate_sweep_point(const SweepPoint& pt, const SweepConfig& sc) {
  SweepRow row;
  row.point = pt;
  const ModelParams p{pt.alpha, pt.beta, pt.lambda};
  try {
    const auto label = classify(p, pt.mass, pt.energy);
    row.regime = to_string(label.regime);
    if (label.supercritical) {
      const auto& info = *label.supercritical;
      row.phi_sign = info.phi_sign;
      row.psi_sign = info.psi_sign;
      row.critical_energy = info.critical_energy;
      row.mass_threshold = info.mass_threshold;
      row.t_bar = info.t_bar;
    }
  } catch (const Error& e) {
    row.outcome = "error";
    row.detail = e.what();
    return row;
  }
  if (!sc.simulate) {
    row.outcome = "not_simulated";
    return row;
  }
  try {
    RunConfig rc = sc.base;
    rc.model = p;
    rc.initial.family = InitialFamily::Bump;
    rc.initial.mass = pt.mass;
    rc.initial.energy = pt.energy;
    rc.initial.width.reset();
    const Grid grid(rc.n_cells);
    const auto traj = evolve(make_initial_state(rc, grid), rc.model, rc.controls);
    row.outcome = to_string(traj.outcome());
    if (!traj.events.empty()) row.detail = traj.events.back().detail;
  } catch (const Error& e) {
    row.outcome = "error";
    row.detail = e.what();
  }
  return row;
}

/// Points in (alpha, beta, lambda, mass, E0) lexicographic order.
inline std::vector<SweepPoint> sweep_points(const SweepConfig& sc) {
  std::vector<SweepPoint> pts;
  for (double a : sc.alphas)
    for (double b : sc.betas)
      for (double l : sc.lambdas)
        for (double m : sc.masses)
          for (double e : sc.energies) pts.push_back({a, b, l, m, e});
  return pts;
}

inline CsvTable sweep_table(const std::vector<SweepRow>& rows) {
  CsvTable t({"alpha", "beta", "lambda", "mass", "E0", "regime", "phi_sign", "psi_sign", "E_c", "mu_star", "t_bar",
              "outcome", "detail"});
  auto sign = [](const std::optional<int>& s) { return s ? std::to_string(*s) : std::string(); };
  for (const auto& r : rows) {
    t.row({format_double(r.point.alpha), format_double(r.point.beta), format_double(r.point.lambda),
           format_double(r.point.mass), format_double(r.point.energy), r.regime, sign(r.phi_sign), sign(r.psi_sign),
           format_optional(r.critical_energy), format_optional(r.mass_threshold), format_optional(r.t_bar), r.outcome,
           r.detail});
  }
  return t;
}

inline std::vector<SweepRow> run_sweep(const SweepConfig& sc) {
  const auto pts = sweep_points(sc);
  std::vector<SweepRow> rows(pts.size());
  unsigned workers = sc.threads ? sc.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(pts.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < pts.size(); i = next++) rows[i] = evaluate_sweep_point(pts[i], sc);
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < workers; ++k) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  const auto table = sweep_table(rows);
  prepare_directory(sc.base.output.directory);
  table.save(sc.base.output.directory / "sweep.csv");
  return rows;
}

// ---------------------------------------------------------------------------
// inequalities

struct InequalityConfig {
  std::uint64_t seed = 1;
  std::size_t count = 1000;
  TestFunctionSpec spec;
  /// grid for the rearrangement checks
  std::size_t cells = 800;
  std::filesystem::path directory = "out";

  static InequalityConfig from(const ConfigFile& cfg) {
    InequalityConfig ic;
    ic.seed = cfg.get_uint("inequalities.seed", ic.seed);
    ic.count = static_cast<std::size_t>(cfg.get_uint("inequalities.count", ic.count));
    if (ic.count < 1) cfg.fail("inequalities.count", "must be at least 1");
    ic.spec.max_degree = static_cast<int>(cfg.get_uint("inequalities.max_degree", 4));
    ic.spec.max_modes = static_cast<int>(cfg.get_uint("inequalities.max_modes", 4));
    ic.spec.coeff_range = cfg.get_double("inequalities.coeff_range", 1.0);
    if (!(ic.spec.coeff_range > 0.0)) cfg.fail("inequalities.coeff_range", "must be positive");
    ic.cells = static_cast<std::size_t>(cfg.get_uint("inequalities.cells", cfg.get_uint("grid.n_cells", 800)));
    if (ic.cells < 2) cfg.fail("inequalities.cells", "need at least 2 cells");
    ic.directory = cfg.get_string("output.directory", "out");
    return ic;
  }
};

/// Every check run per test function, in output order.  The rearrangement
/// checks act on phi^2 projected to `grid`.
inline std::vector<InequalityReport> inequality_reports(const TestFunction& phi, const Grid& grid) {
  std::vector<InequalityReport> out;
  auto add = [&out](std::vector<InequalityReport> rs) {
    for (auto& r : rs) out.push_back(std::move(r));
  };
  out.push_back(poincare_check(phi, 1.0, 0.0));
  out.push_back(poincare_check(phi, 1.0, 0.25));
  out.push_back(poincare_check(phi, 1.0, 0.5));
  add(nash_check(phi));
  add(nash_p_check(phi, 0.5));
  add(l4_nash_check(phi));
  for (double p : {2.5, 3.0, 3.5}) add(gn_check(phi, p));
  out.push_back(log_sobolev_check(phi));
  out.push_back(l1_energy_check(phi));
  const auto sq = phi.squared().project(grid);
  out.push_back(rearrangement_energy_check(sq, 0.0));
  out.push_back(rearrangement_energy_check(sq, 0.5));
  return out;
}

struct InequalityRow {
  std::string kind;
  std::size_t function_id = 0;
  std::string function;
  InequalityReport report;
};

struct InequalitySummary {
  std::string name;
  std::string regime;
  std::size_t count = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;
};

struct InequalityResult {
  std::vector<InequalityRow> rows;
  std::vector<InequalitySummary> summary;
};

inline std::vector<TestFunction> witness_functions() {
  return {TestFunction::polynomial({0.0, 1.0}), TestFunction::constant(1.0),
          TestFunction::polynomial({0.0, 0.0, 1.0})};
}

inline InequalityResult run_inequalities(const InequalityConfig& ic) {
  InequalityResult res;
  const Grid grid(ic.cells);
  const auto witnesses = witness_functions();
  const auto random = random_test_functions(ic.seed, ic.count, ic.spec);
  std::size_t id = 0;
  auto run = [&](const char* kind, const TestFunction& phi) {
    for (auto& r : inequality_reports(phi, grid)) res.rows.push_back({kind, id, phi.describe(), std::move(r)});
    ++id;
  };
  for (const auto& w : witnesses) run("witness", w);
  for (const auto& f : random) run("random", f);

  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& row : res.rows) {
    if (row.kind != "random") continue;
    const auto key = std::make_pair(row.report.name, row.report.regime);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, res.summary.size()).first;
      res.summary.push_back({row.report.name, row.report.regime});
    }
    auto& s = res.summary[it->second];
    ++s.count;
    if (!row.report.holds) ++s.violations;
    if (!std::isnan(row.report.ratio)) s.max_ratio = std::max(s.max_ratio, row.report.ratio);
  }

  CsvTable t({"kind", "function_id", "function", "inequality", "regime", "lhs", "rhs", "ratio", "holds", "count",
              "violations", "max_ratio"});
  for (const auto& row : res.rows) {
    const auto& r = row.report;
    t.row({row.kind, std::to_string(row.function_id), row.function, r.name, r.regime, format_double(r.lhs),
           format_double(r.rhs), format_double(r.ratio), r.holds ? "true" : "false", "", "", ""});
  }
  for (const auto& s : res.summary) {
    t.row({"summary", "", "", s.name, s.regime, "", "", "", s.violations == 0 ? "true" : "false",
           std::to_string(s.count), std::to_string(s.violations), format_double(s.max_ratio)});
  }
  prepare_directory(ic.directory);
  t.save(ic.directory / "inequalities.csv");
  return res;
}

}  // namespace cfp
