// Command-line front end: simulate, steady, blowup, figure1, sweep, inequalities.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cfp/cli.hpp"
#include "cfp/config.hpp"

namespace {

struct GlobalOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cells;
};

cfp::ConfigFile load_config(const GlobalOptions& g) {
  auto cfg = g.config.empty() ? cfp::ConfigFile::parse_string("") : cfp::ConfigFile::load(g.config);
  if (!g.out.empty()) cfg.set("output.directory", g.out);
  if (g.seed) cfg.set("inequalities.seed", std::to_string(*g.seed));
  if (g.cells) cfg.set("grid.n_cells", std::to_string(*g.cells));
  return cfg;
}

int dispatch(const std::string& command, const GlobalOptions& g) {
  const auto cfg = load_config(g);
  if (command == "simulate") {
    const auto rc = cfp::RunConfig::from(cfg);
    const auto res = cfp::run_simulate(rc);
    const auto& last = res.trajectory.events.back();
    std::cout << cfp::to_string(last.kind) << " at t=" << cfp::format_double(last.time) << " after "
              << res.trajectory.steps << " steps (" << last.detail << ")\n";
    return res.exit_code;
  }
  if (command == "steady") {
    const auto res = cfp::run_steady(cfp::RunConfig::from(cfg));
    std::cout << "amplitude " << cfp::format_double(res.split.amplitude) << ", condensate "
              << cfp::format_double(res.split.condensate_mass) << ", residual flux "
              << cfp::format_double(res.residual) << "\n";
    return 0;
  }
  if (command == "blowup") {
    cfp::run_blowup(cfp::RunConfig::from(cfg));
    return 0;
  }
  if (command == "figure1") {
    const auto res = cfp::run_figure1(cfp::Figure1Config::from(cfg));
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& r : res.critical) {
      std::cout << "alpha=" << r.alpha << " lambda=" << r.lambda << " E_c="
                << (r.critical_energy ? cfp::format_double(*r.critical_energy) : r.status) << "\n";
    }
    return 0;
  }
  if (command == "sweep") {
    const auto rows = cfp::run_sweep(cfp::SweepConfig::from(cfg));
    std::cout << rows.size() << " sweep points\n";
    return 0;
  }
  if (command == "inequalities") {
    const auto res = cfp::run_inequalities(cfp::InequalityConfig::from(cfg));
    for (const auto& s : res.summary) {
      std::cout << s.name << " [" << s.regime << "]: " << s.violations << "/" << s.count
                << " violations, max ratio " << cfp::format_double(s.max_ratio) << "\n";
    }
    return 0;
  }
  throw cfp::Error(cfp::ErrorKind::Config, "unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus Fokker-Planck lab"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "configuration file (key = value)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "seed for random test functions");
  app.add_option("--cells", g.cells, "number of grid cells");
  for (const char* name : {"simulate", "steady", "blowup", "figure1", "sweep", "inequalities"}) {
    app.add_subcommand(name)->fallthrough();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cfp::kExitError;
  }
  try {
    return dispatch(app.get_subcommands().front()->get_name(), g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cfp::kExitError;
  }
}
