// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run everything
//   acceptance 1 5 6      run a subset
//
// Problem definitions are read from the configs/ directory.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "oracles.hpp"
#include "skinpar/config.hpp"
#include "skinpar/experiments.hpp"
#include "skinpar/multigrid.hpp"
#include "skinpar/parareal.hpp"
#include "skinpar/perf_model.hpp"

using namespace skinpar;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

ExperimentConfig config(const std::string& name) {
  return load_config(std::string(SKINPAR_CONFIG_DIR) + "/" + name);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// Problem, propagators and serial reference of a config with one n_sub.
struct Case {
  CoefficientField field;
  BoundarySpec bc;
  double t_end;
  std::unique_ptr<ImplicitEulerPropagator> coarse, fine;
  StateVector c0;

  explicit Case(const ExperimentConfig& cfg)
      : field(problem_field(cfg.problem)),
        bc(cfg.problem.bc),
        t_end(resolve_t_end(cfg.problem, field)),
        coarse(std::make_unique<ImplicitEulerPropagator>(field, bc, coarse_spec(cfg, t_end))),
        fine(std::make_unique<ImplicitEulerPropagator>(field, bc, fine_spec(cfg, t_end))),
        c0(StateVector::zeros(field.grid)) {}
};

bool identical(const PararealTrace& a, const PararealTrace& b) {
  if (a.iterations != b.iterations) return false;
  for (int k = 0; k <= a.iterations; ++k)
    for (int n = 0; n <= a.n_sub; ++n)
      if (a.iterates[k][n].values != b.iterates[k][n].values) return false;
  return true;
}

// Relative 2-norm difference, written out here rather than taken from the library.
double rel(const std::vector<double>& a, const std::vector<double>& b) { return oracle::rel_diff(a, b); }

Outcome exactness_ladder() {
  const ExperimentConfig cfg = config("exactness.cfg");
  const Case c(cfg);
  const PararealConfig pc = parareal_config(cfg, 8, c.t_end);
  const SerialRun ref = run_serial(pc, *c.fine, c.c0);
  const PararealTrace t = run_parareal(pc, *c.coarse, *c.fine, c.c0);
  double worst = 0.0;
  for (int k = 1; k <= 8; ++k)
    for (int n = 0; n <= k; ++n) worst = std::max(worst, rel(t.iterates[k][n].values, ref.states[n].values));
  return {t.iterations == 8 && worst <= 1e-12,
          "16^3, N_t = 8, max d^k_n over n <= k, k = 1..8: " + fmt(worst)};
}

Outcome trivial_coarse() {
  const ExperimentConfig cfg = config("exactness.cfg");
  const Case c(cfg);
  PararealConfig pc = parareal_config(cfg, 8, c.t_end);
  pc.max_iter = 1;
  const SerialRun ref = run_serial(pc, *c.fine, c.c0);
  const PararealTrace t = run_parareal(pc, *c.fine, *c.fine, c.c0);
  double worst = 0.0;
  for (int n = 1; n <= 8; ++n) worst = std::max(worst, rel(t.iterates[1][n].values, ref.states[n].values));
  return {worst <= 1e-12, "C = F, one iteration, max boundary difference " + fmt(worst)};
}

Outcome convergence_desk() {
  const ExperimentConfig cfg = config("desk.cfg");
  const ExperimentOutput out = cmd_convergence(cfg, {std::nullopt, 0, &std::cout});
  const Table& t = out.tables.front();
  bool ok = true;
  std::ostringstream d;
  d << "e_fine " << fmt(t.at(0, "e_fine"));
  for (int n_sub : cfg.time.n_sub) {
    std::vector<double> defects;
    double e_fine = 0.0;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      if (int(t.at(r, "n_sub")) == n_sub) defects.push_back(t.at(r, "defect_T")), e_fine = t.at(r, "e_fine");
    const bool first = defects.size() > 1 && defects[1] < e_fine;
    bool monotone = true, reached = false;
    for (std::size_t k = 1; k < defects.size() && !reached; ++k) {
      if (defects[k - 1] <= 1e-10) reached = true;
      else if (!(defects[k] < defects[k - 1])) monotone = false;
    }
    reached = reached || defects.back() <= 1e-10;
    ok = ok && first && monotone && reached;
    d << "; N_t=" << n_sub << ": d^1 " << fmt(defects.size() > 1 ? defects[1] : NAN)
      << (monotone ? ", monotone" : ", NOT monotone") << ", final " << fmt(defects.back());
  }
  return {ok, d.str()};
}

Outcome coefficient_jump() {
  const ExperimentConfig cfg = config("coefficients.cfg");
  const ExperimentOutput out = cmd_coefficients(cfg);
  const Table& t = out.tables.front();
  std::vector<double> a, b;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    a.push_back(t.at(r, "defect_jumping"));
    b.push_back(t.at(r, "defect_constant"));
  }
  const int ka = iterations_to_accuracy(a, t.at(0, "e_fine_jumping"));
  const int kb = iterations_to_accuracy(b, t.at(0, "e_fine_constant"));
  return {ka >= 0 && kb >= 0 && std::abs(ka - kb) <= 1,
          "iterations to fine accuracy: jumping " + std::to_string(ka) + ", constant D = 1e-3 " +
              std::to_string(kb)};
}

Outcome model_identities() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lg(-3.0, 2.0);
  double worst = 0.0;
  bool below_one = true;
  for (int i = 0; i < 1000; ++i) {
    const int nt = std::uniform_int_distribution<int>(1, 256)(rng);
    const int ni = std::uniform_int_distribution<int>(1, nt)(rng);
    const double nc = std::pow(10.0, lg(rng)), nf = std::pow(10.0, lg(rng));
    const double tc = std::pow(10.0, lg(rng)), tf = std::pow(10.0, lg(rng));
    const CostProfile p{std::vector<double>(std::size_t(nt), nc * tc), std::vector<double>(std::size_t(nt), nf * tf)};
    const double g = speedup_general(p, ni).value, s = speedup_simple(ni, nt, nc / nf, tc / tf);
    worst = std::max(worst, std::abs(g - s) / s);
    below_one = below_one && weak_scaling_efficiency(nt, ni, nc / nf) < 1.0;
  }
  const double s1 = speedup_simple(1, 4, 0.1, 1.0), e1 = weak_scaling_efficiency(2, 1, 0.1);
  const bool spots = std::abs(s1 - 8.0 / 3.0) <= 1e-12 * 8.0 / 3.0 && std::abs(e1 - 13.0 / 15.0) <= 1e-12;
  return {worst <= 1e-12 && below_one && spots,
          "sweep max rel diff " + fmt(worst) + ", efficiency < 1: " + (below_one ? "yes" : "no") +
              ", S(4,1,1/10,1) = " + std::to_string(s1) + ", E(2,1,0.1) = " + std::to_string(e1)};
}

Outcome imbalance_figure() {
  std::vector<int> ns;
  for (int n = 2; n <= 32; ++n) ns.push_back(n);
  const std::vector<double> bs{0.0, 0.5, 0.75};
  const auto pts = imbalance_curves(ns, bs, 1);
  double worst = 0.0;
  bool below = true, monotone = true;
  std::map<int, std::vector<double>> by_n;
  for (const auto& p : pts) {
    // Spreadsheet-style evaluation: Gamma_f / (Gamma_c + max(gamma_c + gamma_f)).
    const double n = p.n_sub;
    const double ideal = 10.0 * n / (n + 11.0);
    const double peak = p.n_sub >= 4 ? 1.0 + (1.0 + p.b) * 10.0 : 11.0;
    const double imb = 10.0 * n / (n + peak);
    worst = std::max({worst, std::abs(p.speedup_ideal - ideal) / ideal, std::abs(p.speedup_imbalanced - imb) / imb});
    below = below && p.speedup_imbalanced <= p.speedup_ideal;
    by_n[p.n_sub].push_back(p.speedup_imbalanced);
  }
  // b = 0 reproduces the ideal curve, so N_t < 4 compare against it.
  for (const auto& [n, v] : by_n)
    for (std::size_t i = 1; i < v.size(); ++i) monotone = monotone && v[i] <= v[i - 1];
  return {worst <= 1e-12 && below && monotone,
          std::to_string(pts.size()) + " points, max deviation from hand evaluation " + fmt(worst) +
              ", imbalanced <= ideal: " + (below ? "yes" : "no") + ", monotone in b: " + (monotone ? "yes" : "no") +
              " (b > 0 needs N_t >= 4)"};
}

Outcome temporal_order() {
  const ExperimentConfig cfg = config("small.cfg");
  const auto field = problem_field(cfg.problem);
  const double t_end = resolve_t_end(cfg.problem, field);
  const StateVector c0 = StateVector::zeros(field.grid);
  auto end_state = [&](int steps) {
    PropagatorSpec s = fine_spec(cfg, t_end);
    s.dt = t_end / steps;
    return ImplicitEulerPropagator(field, cfg.problem.bc, s).propagate(c0, 0.0, t_end).values;
  };
  const auto u64 = end_state(64), u128 = end_state(128), u256 = end_state(256), u512 = end_state(512);
  const double e1 = rel(u64, u256), e2 = rel(u128, u512);
  const double ratio = e1 / e2;
  return {ratio >= 1.7 && ratio <= 2.3, "16^3, error vs dt/4 reference: " + fmt(e1) + " -> " + fmt(e2) +
                                            ", ratio " + fmt(ratio)};
}

Outcome multigrid_robustness() {
  std::vector<int> cycles;
  bool converged = true;
  std::ostringstream d;
  for (int n : {16, 32, 64}) {
    // Same physical domain refined: spacing 16/n.
    const auto field = build_brick_mortar(oracle::small_spec(), oracle::cube(n, 16.0 / n));
    MGConfig mg;
    mg.coarsest_max_unknowns = 512;
    mg.max_cycles = 30;
    const MGHierarchy h(field, BoundarySpec{}, 1.0, mg.coarsest_max_unknowns);
    // First implicit Euler step from the zero initial state.
    const StateVector c0 = StateVector::zeros(field.grid);
    const MGResult r = solve(h, c0, c0, mg);
    converged = converged && r.converged;
    cycles.push_back(r.cycles);
    d << n << "^3: " << r.cycles << " cycles (" << h.levels() << " levels); ";
  }
  const bool growth = cycles[1] - cycles[0] <= 5 && cycles[2] - cycles[1] <= 5 && cycles[2] - cycles[0] <= 5;

  const auto field = build_brick_mortar(oracle::tiny_spec(), oracle::cube(8));
  MGConfig mg;
  mg.coarsest_max_unknowns = 8;
  mg.rel_tol = 1e-12;
  const MGHierarchy h(field, BoundarySpec{}, 1.0, mg.coarsest_max_unknowns);
  const StateVector b{field.grid, oracle::random_vector(field.grid.size(), 6, 0.0, 1.0), 0.0};
  const MGResult r = solve(h, b, StateVector::zeros(field.grid), mg);
  const auto sys = oracle::dense_system(field.grid, field.values, BoundarySpec{}, 1.0);
  const Eigen::VectorXd x = sys.A.partialPivLu().solve(oracle::to_eigen(b.values) + sys.r);
  const double diff = rel(r.x.values, {x.data(), x.data() + x.size()});
  d << "8^3 vs dense LU " << fmt(diff);
  return {converged && growth && diff <= 1e-8, d.str()};
}

Outcome measured_speedup() {
  const ExperimentConfig cfg = config("speedup.cfg");
  const Case c(cfg);
  PararealConfig pc = parareal_config(cfg, 4, c.t_end);
  pc.max_iter = 1;
  const SerialRun serial = run_serial(pc, *c.fine, c.c0);
  pc.backend = Backend::sequential;
  const ModelReport seq = validate_model(run_parareal(pc, *c.coarse, *c.fine, c.c0), serial);
  const double seq_diff = std::abs(seq.measured_speedup - seq.predicted.value) / seq.predicted.value;
  std::ostringstream d;
  d << "sequential: simulated " << fmt(seq.measured_speedup) << " vs model " << fmt(seq.predicted.value)
    << " (rel diff " << fmt(seq_diff) << ")";

  const unsigned cores = std::thread::hardware_concurrency();
  pc.backend = Backend::concurrent;
  const ModelReport par = validate_model(run_parareal(pc, *c.coarse, *c.fine, c.c0), serial);
  d << "; concurrent on " << cores << " core(s): measured " << fmt(par.measured_speedup) << ", "
    << fmt(100.0 * par.ratio) << "% of model";
  bool ok = seq_diff <= 1e-9;
  if (cores >= 4) {
    ok = ok && par.ratio >= 0.5;
  } else {
    d << " [needs >= 4 cores, not checked here]";
  }
  return {ok, d.str()};
}

Outcome weak_scaling() {
  const ExperimentConfig cfg = config("weak_scaling.cfg");
  const ExperimentOutput out = cmd_weak_scaling(cfg, {std::nullopt, 0, &std::cout});
  const Table& t = out.tables.front();
  std::ostringstream d;
  bool ok = t.rows.size() == 3;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double e = t.at(r, "e_fine"), d1 = t.at(r, "d1");
    ok = ok && d1 < e && t.at(r, "iterations") == 1;
    d << "rung " << r << ": e_fine " << fmt(e) << ", d1 " << fmt(d1);
    if (r > 0) {
      const double ratio = t.at(r - 1, "e_fine") / e, factor = t.at(r, "factor");
      ok = ok && ratio >= 1.7 && ratio <= 2.3 && factor < 16.0;
      ok = ok && t.at(r, "fine_steps") / t.at(r, "n_sub") == t.at(0, "fine_steps") / t.at(0, "n_sub");
      ok = ok && t.at(r, "coarse_steps") / t.at(r, "n_sub") == t.at(0, "coarse_steps") / t.at(0, "n_sub");
      d << ", e ratio " << fmt(ratio) << ", factor " << fmt(factor);
    }
    d << "; ";
  }
  d << "runtimes are " << (t.rows.empty() || t.at(0, "simulated") ? "simulated schedules" : "wall clock");
  return {ok, d.str()};
}

Outcome backend_equivalence() {
  const ExperimentConfig cfg = config("exactness.cfg");
  const Case c(cfg);
  bool ok = true;
  for (bool retire : {true, false}) {
    PararealConfig pc = parareal_config(cfg, 8, c.t_end);
    pc.retirement = retire;
    pc.backend = Backend::sequential;
    const PararealTrace a = run_parareal(pc, *c.coarse, *c.fine, c.c0);
    pc.backend = Backend::concurrent;
    const PararealTrace b = run_parareal(pc, *c.coarse, *c.fine, c.c0);
    ok = ok && identical(a, b);
  }
  return {ok, "16^3, N_t = 8, 8 iterations, retirement on and off: iterates " +
                  std::string(ok ? "bit-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"exactness ladder", exactness_ladder},
      {"trivial coarse propagator", trivial_coarse},
      {"desk convergence", convergence_desk},
      {"jumping vs constant coefficients", coefficient_jump},
      {"performance-model identities", model_identities},
      {"imbalance curves", imbalance_figure},
      {"temporal order", temporal_order},
      {"multigrid robustness", multigrid_robustness},
      {"measured speedup", measured_speedup},
      {"weak-scaling ladder", weak_scaling},
      {"backend equivalence", backend_equivalence},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << ", "
              << fmt(secs) << " s): " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
