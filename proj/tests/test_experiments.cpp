#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "skinpar/errors.hpp"
#include "skinpar/experiments.hpp"
#include "skinpar/field_io.hpp"

using namespace skinpar;
namespace fs = std::filesystem;

namespace {

const std::string kTiny = R"([problem]
cells = 8 8 8
layers = 2
brick_extent = 3 3 2
t_end = 20

[solver]
coarsest_max_unknowns = 64

[parareal]
coarse_steps = 8
fine_steps = 64
n_sub = 2 4
max_iter = 4

[experiment]
refinement = 2
)";

ExperimentConfig tiny() { return parse_config_string(kTiny); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("skinpar_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const Table& table(const ExperimentOutput& out, const std::string& name) {
  for (const auto& t : out.tables)
    if (t.name == name) return t;
  FAIL("missing table " << name);
  throw std::logic_error("unreachable");
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SKINPAR_CLI) + " " + args + " -q > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("convergence") {
  const auto out = cmd_convergence(tiny());
  const Table& t = table(out, "convergence");
  CHECK(t.rows.size() == 3 + 5);
  const double e_fine = t.at(0, "e_fine");
  CHECK(e_fine > 0.0);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const int n = int(t.at(r, "n_sub")), k = int(t.at(r, "iteration"));
    if (k == n) CHECK(t.at(r, "defect_T") <= 1e-12);
    if (k >= 1) CHECK(t.at(r, "defect_T") <= t.at(r - 1, "defect_T"));
  }
  CHECK(table(out, "trace_nsub4").rows.size() == 5 * 5);

  // One subinterval: exact after one iteration.
  ExperimentConfig one = tiny();
  one.time.n_sub = {1};
  const Table& t1 = table(cmd_convergence(one), "convergence");
  REQUIRE(t1.rows.size() == 2);
  CHECK(t1.at(1, "defect_T") == 0.0);

  // Coarse equal to fine: converged after the first iteration.
  ExperimentConfig same = tiny();
  same.time.coarse_steps = 64;
  same.time.n_sub = {4};
  const Table& ts = table(cmd_convergence(same), "convergence");
  CHECK(ts.at(1, "defect_T") <= 1e-12);
}

TEST_CASE("coefficients") {
  const auto out = cmd_coefficients(tiny());
  const Table& t = out.tables.front();
  CHECK(t.name == "coefficients");
  CHECK(t.rows.size() == 3);
  CHECK(t.at(0, "e_fine_constant") > 0.0);
  CHECK(t.at(1, "defect_constant") < t.at(0, "defect_constant"));
  CHECK(t.at(1, "defect_jumping") < t.at(0, "defect_jumping"));
  CHECK(t.at(0, "defect_constant") != t.at(0, "defect_jumping"));
}

TEST_CASE("error over time") {
  const auto out = cmd_error_over_time(tiny());
  const Table& t = out.tables.front();
  REQUIRE(t.rows.size() == 5);
  for (std::size_t n = 0; n < 5; ++n) {
    CHECK(t.at(n, "time") == doctest::Approx(5.0 * n));
    if (n <= 1) CHECK(t.at(n, "d1") <= 1e-12);
    if (n <= 2) CHECK(t.at(n, "d2") <= 1e-12);
    if (n > 0) CHECK(t.at(n, "coarse_error") >= t.at(n, "fine_error"));
  }
}

TEST_CASE("speedup falls back to simulation without cores") {
  RunOptions opt;
  opt.cores = 1;
  const auto out = cmd_speedup(tiny(), opt);
  const Table& t = table(out, "speedup");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.notes.size() == 2);
  CHECK(t.notes[0].find("WARNING") == 0);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(t.at(r, "simulated") == 1.0);
    CHECK(t.at(r, "measured_speedup") <= t.at(r, "predicted_general") * (1.0 + 1e-9));
  }
  const Table& m = table(out, "model_imbalance");
  CHECK(m.rows.size() == 31 + 29 + 29);
  for (std::size_t r = 0; r < m.rows.size(); ++r)
    CHECK(m.at(r, "speedup_imbalanced") <= m.at(r, "speedup_ideal"));
}

TEST_CASE("weak scaling ladder") {
  ExperimentConfig c = tiny();
  c.problem.cells = {4, 4, 4};
  c.problem.spacing = {2, 2, 2};
  c.problem.geometry.layers = 1;
  c.problem.geometry.brick_extent = {3, 3, 2};
  c.problem.geometry.mortar_width = 2;
  c.time.coarse_steps = 4;
  c.time.fine_steps = 32;
  c.time.n_sub = {2};
  c.weak_scaling.rungs = 2;
  const auto out = cmd_weak_scaling(c);
  const Table& t = table(out, "weak_scaling");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.at(1, "nx") == 8);
  CHECK(t.at(1, "n_sub") == 4);
  CHECK(t.at(1, "fine_steps") == 64);
  CHECK(t.at(0, "fine_steps") / t.at(0, "n_sub") == t.at(1, "fine_steps") / t.at(1, "n_sub"));
  CHECK(std::isnan(t.at(0, "factor")));
  CHECK(t.at(1, "factor") == doctest::Approx(t.at(1, "runtime_seconds") / t.at(0, "runtime_seconds")));
  CHECK(t.at(0, "iterations") == 1);
  const Table& e = table(out, "weak_scaling_efficiency");
  for (std::size_t r = 0; r < e.rows.size(); ++r) CHECK(e.at(r, "efficiency") < 1.0);
}

TEST_CASE("export") {
  ExperimentConfig c = tiny();
  c.experiment.snapshot_fractions = {0.0, 0.0625 * 2, 0.5, 1.0};
  const auto out = cmd_export_solution(c);
  REQUIRE(out.snapshots.size() == 4);
  for (double v : out.snapshots[0].state.values) CHECK(v == 0.0);
  double prev = -1.0;
  for (const auto& s : out.snapshots) {
    double mean = 0.0;
    for (double v : s.state.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      mean += v;
    }
    CHECK(mean >= prev);
    prev = mean;
  }
  CHECK(out.snapshots[3].state.time == 20.0);

  c.experiment.snapshot_fractions = {0.3};  // not on the fine step grid
  CHECK_THROWS_AS(cmd_export_solution(c), StepCountError);
}

TEST_CASE("csv output and reruns") {
  const ExperimentConfig c = tiny();
  const auto a = cmd_convergence(c);
  const auto b = cmd_convergence(c);
  const Table& ta = table(a, "convergence");
  const Table& tb = table(b, "convergence");
  for (std::size_t r = 0; r < ta.rows.size(); ++r)
    for (const char* col : {"n_sub", "iteration", "defect_T", "e_fine"}) CHECK(ta.at(r, col) == tb.at(r, col));

  std::ostringstream s;
  write_csv(s, ta, "convergence", c);
  std::istringstream in(s.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# skinpar convergence table=convergence config_hash=" + config_hash(c) + " seed=1");
  std::getline(in, line);
  CHECK(line == "n_sub,iteration,defect_T,e_fine,parallel_seconds");

  const fs::path dir = scratch("csv");
  const auto files = write_outputs(cmd_export_solution(c), dir, "export", c);
  CHECK(files.size() == 4);
  const StateVector back = read_field(dir / "snapshot_2.field");
  CHECK(back.time == 20.0);
  CHECK(back.values.size() == 512);
  fs::remove_all(dir);
}

TEST_CASE("dispatch") {
  ExperimentConfig c = tiny();
  CHECK_THROWS_AS(run_experiment("plot", c), ConfigError);
  c.experiment.name = "speedup";
  CHECK_THROWS_AS(run_experiment("export", c), ConfigError);
  CHECK(iterations_to_accuracy({1.0, 0.1, 0.01}, 0.05) == 2);
  CHECK(iterations_to_accuracy({1.0, 0.1}, 0.01) == -1);
}

TEST_CASE("command line") {
  const fs::path dir = scratch("cli");
  const fs::path good = dir / "tiny.cfg";
  std::ofstream(good) << kTiny;
  CHECK(run_cli("export --config " + good.string() + " --out " + (dir / "o").string()) == 0);
  CHECK(fs::exists(dir / "o" / "snapshots.csv"));
  CHECK(run_cli("convergence --config " + good.string() + " --out " + (dir / "p").string() +
                " --backend par") == 0);
  CHECK(fs::exists(dir / "p" / "trace_nsub4.csv"));

  const fs::path bad = dir / "bad.cfg";
  std::ofstream(bad) << "[problem]\ncolour = red\n";
  CHECK(run_cli("convergence --config " + bad.string()) == 2);
  CHECK(run_cli("convergence --config " + (dir / "missing.cfg").string()) == 2);
  CHECK(run_cli("convergence --config " + good.string() + " --backend gpu") == 2);
  CHECK(run_cli("teleport --config " + good.string()) == 2);

  const fs::path failing = dir / "failing.cfg";
  {
    // The solver gets one V-cycle to reach an unreachable tolerance.
    std::string text = kTiny;
    text.replace(text.find("coarsest_max_unknowns = 64"), 26,
                 "coarsest_max_unknowns = 8\nmax_cycles = 1\nrel_tol = 1e-14");
    std::ofstream(failing) << text;
  }
  CHECK(run_cli("export --config " + failing.string() + " --out " + (dir / "f").string()) == 3);
  fs::remove_all(dir);
}
