#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cfp/cli.hpp"

using namespace cfp;
namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("cfp_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

RunConfig config(const std::string& text) { return RunConfig::from(ConfigFile::parse_string(text)); }

int run_binary(const std::string& args) {
  const char* bin = std::getenv("CFP_BIN");
  REQUIRE(bin != nullptr);
  const int raw = std::system((std::string(bin) + " " + args + " >/dev/null 2>&1").c_str());
  REQUIRE(WIFEXITED(raw));
  return WEXITSTATUS(raw);
}

}  // namespace

TEST_CASE("csv formatting") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) REQUIRE(std::stod(format_double(x)) == x);
  REQUIRE(format_optional(std::nullopt).empty());
  REQUIRE(csv_escape("plain") == "plain");
  REQUIRE(csv_escape("a,b") == "\"a,b\"");
  REQUIRE(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CsvTable t({"a", "b"});
  t.row({"1", "x,y"});
  REQUIRE(t.text() == "a,b\n1,\"x,y\"\n");
  REQUIRE_THROWS_AS(t.row({"1"}), Error);
}

TEST_CASE("run configuration validation") {
  const auto rc = config("model.alpha = 2\nmodel.beta = 0.5\nmodel.lambda = 0.2\ngrid.n_cells = 64\n");
  REQUIRE(rc.model.alpha == 2.0);
  REQUIRE(rc.n_cells == 64);
  REQUIRE(rc.initial.family == InitialFamily::Uniform);
  REQUIRE_THROWS_WITH(config("model.lambda = 0\n"), ContainsSubstring("model"));
  REQUIRE_THROWS_WITH(config("grid.n_cells = 1\n"), ContainsSubstring("<config>:1: grid.n_cells"));
  REQUIRE_THROWS_WITH(config("initial.family = wave\n"), ContainsSubstring("initial.family"));
  REQUIRE_THROWS_WITH(config("initial.energy = 2\n"), ContainsSubstring("initial.energy"));
  REQUIRE_THROWS_WITH(config("initial.family = bump\ninitial.energy = 0.1\ninitial.width = 0.2\n"),
                      ContainsSubstring("initial.width"));
  REQUIRE_THROWS_WITH(config("initial.family = custom-table\n"), ContainsSubstring("initial.table"));
  REQUIRE_THROWS_WITH(config("controls.dt = -1\n"), ContainsSubstring("controls"));
}

TEST_CASE("bump initial data hits the requested energy") {
  const Grid g(400);
  for (double e : {0.005, 0.05, 0.2}) {
    const auto s = bump_with_energy(g, 0.0, 2.0, e);
    REQUIRE_THAT(mass(s.f), WithinRel(2.0, 1e-13));
    REQUIRE_THAT(quadrature(s.f, WeightSpec::moment(2)), WithinRel(e, 1e-9));
  }
  REQUIRE_THROWS_AS(bump_with_energy(g, 0.0, 1.0, 1e-9), Error);
  REQUIRE_THROWS_AS(bump_with_energy(g, 0.0, 1.0, 0.9), Error);
}

TEST_CASE("figure1 writes curves and critical energies") {
  TempDir tmp;
  Figure1Config fc;
  fc.directory = tmp.path;
  fc.points = 50;
  const auto res = run_figure1(fc);
  REQUIRE(res.curves.size() == 6);
  REQUIRE(res.warnings.empty());
  const auto curves = slurp(tmp.path / "phi_curves.csv");
  REQUIRE(curves.rfind("alpha,lambda,E0,phi\n", 0) == 0);
  REQUIRE(line_count(curves) == 1 + 6 * 50);
  const auto crit = slurp(tmp.path / "critical_energy.csv");
  REQUIRE(line_count(crit) == 7);
  for (const auto& r : res.critical) REQUIRE(r.status == "ok");

  fc.alphas = {2.0, 3.0};
  fc.lambdas = {0.05};
  const auto low = run_figure1(fc);
  REQUIRE(low.curves.size() == 1);
  REQUIRE(low.warnings.size() == 1);
  REQUIRE(low.critical.front().status == "out-of-regime");
  REQUIRE_THAT(slurp(tmp.path / "critical_energy.csv"), ContainsSubstring("2,0.050000000000000003,,out-of-regime"));
}

TEST_CASE("sweep with an empty axis writes a header") {
  TempDir tmp;
  SweepConfig sc;
  sc.alphas.clear();
  sc.base.output.directory = tmp.path;
  REQUIRE(run_sweep(sc).empty());
  REQUIRE(line_count(slurp(tmp.path / "sweep.csv")) == 1);
}

TEST_CASE("sweep rows follow the axis order") {
  TempDir tmp;
  SweepConfig sc;
  sc.alphas = {1.0, 3.0};
  sc.lambdas = {0.05, 0.1};
  sc.threads = 3;
  sc.base.output.directory = tmp.path;
  const auto rows = run_sweep(sc);
  REQUIRE(rows.size() == 4);
  const auto text = slurp(tmp.path / "sweep.csv");
  REQUIRE(line_count(text) == 5);
  sc.threads = 1;
  run_sweep(sc);
  REQUIRE(slurp(tmp.path / "sweep.csv") == text);
}

TEST_CASE("inequality runs are reproducible") {
  TempDir tmp;
  InequalityConfig ic;
  ic.count = 20;
  ic.cells = 100;
  ic.directory = tmp.path;
  const auto res = run_inequalities(ic);
  const std::size_t per = inequality_reports(TestFunction::constant(1.0), Grid(10)).size();
  REQUIRE(res.rows.size() == 23 * per);
  REQUIRE_FALSE(res.summary.empty());
  std::size_t counted = 0;
  for (const auto& s : res.summary) counted += s.count;
  REQUIRE(counted == 20 * per);
  const auto first = slurp(tmp.path / "inequalities.csv");
  run_inequalities(ic);
  REQUIRE(slurp(tmp.path / "inequalities.csv") == first);
  ic.seed = 2;
  run_inequalities(ic);
  REQUIRE(slurp(tmp.path / "inequalities.csv") != first);
}

TEST_CASE("simulate writes trajectory and events") {
  TempDir tmp;
  auto rc = config("model.alpha = 1\nmodel.lambda = 0.25\ngrid.n_cells = 50\ncontrols.t_end = 0.01\n");
  rc.output.directory = tmp.path;
  const auto res = run_simulate(rc);
  REQUIRE(res.exit_code == kExitCompleted);
  const auto traj = slurp(tmp.path / "trajectory.csv");
  REQUIRE(traj.rfind("t,tau,mass,mean,energy,temperature,l2_sq,l2p_sq,bbound_lower,energy_rhs,dirichlet_form\n", 0) ==
          0);
  REQUIRE_THAT(slurp(tmp.path / "events.csv"), ContainsSubstring("completed"));
}

TEST_CASE("binary exit codes") {
  TempDir tmp;
  const auto bad = tmp.path / "bad.cfg";
  std::ofstream(bad) << "model.alpha = 3\nbogus = 1\n";
  const auto out = tmp.path / "bad_out";
  REQUIRE(run_binary("simulate --config " + bad.string() + " --out " + out.string()) == kExitError);
  REQUIRE_FALSE(fs::exists(out));

  const auto blow = tmp.path / "blow.cfg";
  std::ofstream(blow) << "model.alpha = 3\nmodel.beta = 5\nmodel.lambda = 0.01\ngrid.n_cells = 100\n"
                         "initial.family = bump\ninitial.energy = 0.01\ncontrols.t_end = 5\n";
  REQUIRE(run_binary("simulate --config " + blow.string() + " --out " + (tmp.path / "b").string()) == kExitBlowup);
  REQUIRE_THAT(slurp(tmp.path / "b" / "events.csv"), ContainsSubstring("blowup_detected"));
  REQUIRE(run_binary("figure1 --out " + (tmp.path / "f").string()) == kExitCompleted);
  REQUIRE(fs::exists(tmp.path / "f" / "critical_energy.csv"));
  REQUIRE(run_binary("nonsense") != 0);
}
