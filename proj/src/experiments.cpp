#include "skinpar/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "skinpar/errors.hpp"
#include "skinpar/field_io.hpp"
#include "skinpar/perf_model.hpp"

namespace skinpar {

std::size_t Table::column(const std::string& c) const {
  const auto it = std::find(columns.begin(), columns.end(), c);
  if (it == columns.end()) throw std::out_of_range("no column '" + c + "' in " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

int iterations_to_accuracy(const std::vector<double>& defect_at_end, double threshold) {
  for (std::size_t k = 0; k < defect_at_end.size(); ++k) {
    if (defect_at_end[k] < threshold) return static_cast<int>(k);
  }
  return -1;
}

namespace {

struct Problem {
  CoefficientField field;
  BoundarySpec bc;
  double t_end = 0.0;
  StateVector c0;
};

Problem make_problem(const ProblemConfig& p, std::optional<double> t_end = std::nullopt) {
  Problem pr;
  pr.field = problem_field(p);
  pr.bc = p.bc;
  pr.t_end = t_end ? *t_end : resolve_t_end(p, pr.field);
  pr.c0 = StateVector::zeros(pr.field.grid);
  return pr;
}

void log(const RunOptions& opt, const std::string& line) {
  if (opt.log) *opt.log << line << std::endl;
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

int cores_available(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (opt.cores > 0) return opt.cores;
  if (cfg.experiment.cores > 0) return cfg.experiment.cores;
  return std::max(1u, std::thread::hardware_concurrency());
}

Backend backend_of(const ExperimentConfig& cfg, const RunOptions& opt) {
  return opt.backend.value_or(cfg.time.backend);
}

/// Serial fine run whose boundaries include those of every n in `n_subs`.
SerialRun shared_serial(const Problem& pr, const Propagator& prop, const std::vector<int>& n_subs) {
  int l = 1;
  for (int n : n_subs) l = std::lcm(l, n);
  PararealConfig pc;
  pc.n_sub = l;
  pc.t_end = pr.t_end;
  pc.max_iter = 1;
  return run_serial(pc, prop, pr.c0);
}

/// Restricts a serial run to n_sub equal subintervals.
SerialRun coarsen_run(const SerialRun& r, int n_sub) {
  const int l = static_cast<int>(r.costs.size());
  if (l % n_sub != 0) throw std::logic_error("serial run does not contain the requested boundaries");
  const int stride = l / n_sub;
  SerialRun out;
  for (int n = 0; n <= n_sub; ++n) out.states.push_back(r.states[static_cast<std::size_t>(n * stride)]);
  out.costs.resize(static_cast<std::size_t>(n_sub));
  for (int n = 0; n < l; ++n) {
    auto& dst = out.costs[static_cast<std::size_t>(n / stride)].steps;
    for (auto e : r.costs[static_cast<std::size_t>(n)].steps) {
      e.step_index = static_cast<int>(dst.size());
      dst.push_back(e);
    }
  }
  return out;
}

/// d^k at the final boundary for every iteration of a trace.
std::vector<double> defects_at_end(const PararealTrace& t, const StateVector& fine_end) {
  std::vector<double> d;
  for (int k = 0; k <= t.iterations; ++k) d.push_back(defect(t.iterates[k].back(), fine_end));
  return d;
}

/// Relative error at T of the fine run against the dt/refinement reference.
double end_error(const Problem& pr, const PropagatorSpec& fine, const StateVector& fine_end,
                 int refinement) {
  if (refinement == 1) return 0.0;
  PropagatorSpec ref = fine;
  ref.dt = fine.dt / refinement;
  const ImplicitEulerPropagator p(pr.field, pr.bc, ref);
  return defect(fine_end, p.propagate(pr.c0, 0.0, pr.t_end));
}

Table trace_table(const std::string& name, const PararealTrace& t, const SerialRun& fine) {
  Table tab{name,
            {"iteration", "boundary_index", "defect", "update_norm", "coarse_seconds", "fine_seconds",
             "retired_flag"},
            {},
            {}};
  for (int k = 0; k <= t.iterations; ++k) {
    const auto d = compute_defects(t.iterates[k], fine.states);
    for (int n = 0; n <= t.n_sub; ++n) {
      double cs = 0.0, fs = 0.0, retired = 0.0;
      if (n > 0) {
        cs = t.coarse_costs[k][n - 1].total_seconds();
        fs = t.fine_costs[k][n - 1].total_seconds();
        retired = t.active[k][n - 1] ? 0.0 : 1.0;
      }
      tab.rows.push_back({double(k), double(n), d[n], t.update_norms[k][n], cs, fs, retired});
    }
  }
  return tab;
}

}  // namespace

ExperimentOutput cmd_convergence(const ExperimentConfig& cfg, const RunOptions& opt) {
  const Problem pr = make_problem(cfg.problem);
  const PropagatorSpec cs = coarse_spec(cfg, pr.t_end), fs = fine_spec(cfg, pr.t_end);
  const ImplicitEulerPropagator coarse(pr.field, pr.bc, cs), fine(pr.field, pr.bc, fs);
  log(opt, "convergence: T = " + num(pr.t_end) + ", Dt = " + num(cs.dt) + ", dt = " + num(fs.dt));

  const SerialRun serial = shared_serial(pr, fine, cfg.time.n_sub);
  const double e_fine = end_error(pr, fs, serial.states.back(), cfg.experiment.refinement);
  log(opt, "  fine discretization error at T: " + num(e_fine));

  ExperimentOutput out;
  Table tab{"convergence", {"n_sub", "iteration", "defect_T", "e_fine", "parallel_seconds"}, {}, {}};
  for (int n_sub : cfg.time.n_sub) {
    PararealConfig pc = parareal_config(cfg, n_sub, pr.t_end);
    pc.backend = backend_of(cfg, opt);
    const PararealTrace t = run_parareal(pc, coarse, fine, pr.c0);
    const auto d = defects_at_end(t, serial.states.back());
    for (int k = 0; k <= t.iterations; ++k) {
      tab.rows.push_back({double(n_sub), double(k), d[k], e_fine, t.wall_seconds});
    }
    const int k_acc = iterations_to_accuracy(d, e_fine);
    out.summary.push_back("n_sub " + std::to_string(n_sub) + ": d^1(T) = " +
                          (t.iterations >= 1 ? num(d[1]) : std::string("-")) + ", e_fine = " +
                          num(e_fine) + ", iterations to fine accuracy = " + std::to_string(k_acc));
    log(opt, "  " + out.summary.back());
    out.tables.push_back(trace_table("trace_nsub" + std::to_string(n_sub), t, coarsen_run(serial, n_sub)));
  }
  out.tables.insert(out.tables.begin(), std::move(tab));
  return out;
}

ExperimentOutput cmd_coefficients(const ExperimentConfig& cfg, const RunOptions& opt) {
  const Problem jump = make_problem(cfg.problem);
  ProblemConfig flat_cfg = cfg.problem;
  flat_cfg.coefficients = CoefficientKind::uniform;
  flat_cfg.uniform_d = cfg.problem.geometry.d_cor;
  const Problem flat = make_problem(flat_cfg, jump.t_end);
  const int n_sub = cfg.time.n_sub.front();
  log(opt, "coefficients: T = " + num(jump.t_end) + ", n_sub = " + std::to_string(n_sub) +
               ", constant D = " + num(flat_cfg.uniform_d));

  struct Column {
    std::vector<double> d;
    double e_fine;
  };
  auto run = [&](const Problem& pr) {
    const PropagatorSpec cs = coarse_spec(cfg, pr.t_end), fs = fine_spec(cfg, pr.t_end);
    const ImplicitEulerPropagator coarse(pr.field, pr.bc, cs), fine(pr.field, pr.bc, fs);
    PararealConfig pc = parareal_config(cfg, n_sub, pr.t_end);
    pc.backend = backend_of(cfg, opt);
    const SerialRun serial = run_serial(pc, fine, pr.c0);
    const PararealTrace t = run_parareal(pc, coarse, fine, pr.c0);
    return Column{defects_at_end(t, serial.states.back()),
                  end_error(pr, fs, serial.states.back(), cfg.experiment.refinement)};
  };
  const Column a = run(jump), b = run(flat);

  ExperimentOutput out;
  Table tab{"coefficients",
            {"iteration", "defect_jumping", "defect_constant", "e_fine_jumping", "e_fine_constant"},
            {},
            {}};
  const std::size_t rows = std::min(a.d.size(), b.d.size());
  for (std::size_t k = 0; k < rows; ++k) {
    tab.rows.push_back({double(k), a.d[k], b.d[k], a.e_fine, b.e_fine});
  }
  const int ka = iterations_to_accuracy(a.d, a.e_fine), kb = iterations_to_accuracy(b.d, b.e_fine);
  out.summary.push_back("iterations to fine accuracy: jumping " + std::to_string(ka) + ", constant " +
                        std::to_string(kb));
  log(opt, "  " + out.summary.back());
  out.tables.push_back(std::move(tab));
  return out;
}

ExperimentOutput cmd_error_over_time(const ExperimentConfig& cfg, const RunOptions& opt) {
  const Problem pr = make_problem(cfg.problem);
  const PropagatorSpec cs = coarse_spec(cfg, pr.t_end), fs = fine_spec(cfg, pr.t_end);
  const ImplicitEulerPropagator coarse(pr.field, pr.bc, cs), fine(pr.field, pr.bc, fs);
  const int n_sub = cfg.time.n_sub.back();
  PararealConfig pc = parareal_config(cfg, n_sub, pr.t_end);
  pc.backend = backend_of(cfg, opt);
  pc.max_iter = std::min(2, n_sub);
  pc.defect_tol.reset();
  log(opt, "error-over-time: n_sub = " + std::to_string(n_sub));

  const SerialRun serial_f = run_serial(pc, fine, pr.c0);
  const SerialRun serial_c = run_serial(pc, coarse, pr.c0);
  PropagatorSpec rs = fs;
  rs.dt = fs.dt / cfg.experiment.refinement;
  const ImplicitEulerPropagator reference(pr.field, pr.bc, rs);
  const SerialRun serial_r = run_serial(pc, reference, pr.c0);
  const PararealTrace t = run_parareal(pc, coarse, fine, pr.c0);

  const auto e_c = compute_defects(serial_c.states, serial_r.states);
  const auto e_f = compute_defects(serial_f.states, serial_r.states);
  const auto d1 = compute_defects(t.iterates[std::min(1, t.iterations)], serial_f.states);
  const auto d2 = compute_defects(t.iterates[std::min(2, t.iterations)], serial_f.states);

  ExperimentOutput out;
  Table tab{"error_over_time", {"boundary_index", "time", "coarse_error", "fine_error", "d1", "d2"}, {}, {}};
  for (int n = 0; n <= n_sub; ++n) {
    tab.rows.push_back({double(n), pc.boundary_time(n), e_c[n], e_f[n], d1[n], d2[n]});
  }
  out.tables.push_back(std::move(tab));
  out.tables.push_back(trace_table("trace_nsub" + std::to_string(n_sub), t, serial_f));
  return out;
}

ExperimentOutput cmd_speedup(const ExperimentConfig& cfg, const RunOptions& opt) {
  const Problem pr = make_problem(cfg.problem);
  const PropagatorSpec cs = coarse_spec(cfg, pr.t_end), fs = fine_spec(cfg, pr.t_end);
  const ImplicitEulerPropagator coarse(pr.field, pr.bc, cs), fine(pr.field, pr.bc, fs);
  const int cores = cores_available(cfg, opt);
  const Backend wanted = opt.backend.value_or(Backend::concurrent);

  ExperimentOutput out;
  Table tab{"speedup",
            {"n_sub", "n_iter", "serial_seconds", "parallel_seconds", "simulated", "measured_speedup",
             "predicted_ideal", "predicted_general", "ratio", "flagged"},
            {},
            {}};
  for (int n_sub : cfg.time.n_sub) {
    PararealConfig pc = parareal_config(cfg, n_sub, pr.t_end);
    pc.backend = wanted;
    if (wanted == Backend::concurrent && cores < n_sub) {
      pc.backend = Backend::sequential;
      tab.notes.push_back("WARNING n_sub " + std::to_string(n_sub) + " needs " + std::to_string(n_sub) +
                          " cores, " + std::to_string(cores) +
                          " available: parallel time is the simulated schedule");
      log(opt, tab.notes.back());
    }
    const SerialRun serial = run_serial(pc, fine, pr.c0);
    const PararealTrace t = run_parareal(pc, coarse, fine, pr.c0);
    const ModelReport rep = validate_model(t, serial, cfg.experiment.flag_below);

    double coarse_seconds = 0.0;
    std::size_t coarse_steps = 0, fine_steps = 0;
    for (const auto& c : t.coarse_costs[0]) coarse_seconds += c.total_seconds(), coarse_steps += c.steps.size();
    for (const auto& c : serial.costs) fine_steps += c.steps.size();
    const double tau_ratio = (coarse_seconds / coarse_steps) / (serial.total_seconds() / fine_steps);
    const double ideal = speedup_simple(t.iterations, n_sub, double(coarse_steps) / double(fine_steps), tau_ratio);

    tab.rows.push_back({double(n_sub), double(t.iterations), rep.serial_seconds, rep.parallel_seconds,
                        rep.simulated ? 1.0 : 0.0, rep.measured_speedup, ideal, rep.predicted.value,
                        rep.ratio, rep.flagged ? 1.0 : 0.0});
    out.summary.push_back("n_sub " + std::to_string(n_sub) + ": measured " + num(rep.measured_speedup) +
                          (rep.simulated ? " (simulated)" : "") + ", general model " +
                          num(rep.predicted.value) + ", ideal " + num(ideal));
    log(opt, "  " + out.summary.back());
  }
  out.tables.push_back(std::move(tab));

  Table model{"model_imbalance", {"n_sub", "b", "n_iter", "speedup_ideal", "speedup_imbalanced"}, {}, {}};
  std::vector<int> ns(31);
  std::iota(ns.begin(), ns.end(), 2);
  for (const auto& c : imbalance_curves(ns, cfg.experiment.imbalance_b, cfg.experiment.imbalance_n_iter)) {
    model.rows.push_back({double(c.n_sub), c.b, double(c.n_iter), c.speedup_ideal, c.speedup_imbalanced});
  }
  model.notes.push_back("gamma_c = 1, gamma_f = 10; slices 2 and 3 (0-based) unbalanced by b; n_sub < 4 only for b = 0");
  out.tables.push_back(std::move(model));
  return out;
}

ExperimentOutput cmd_weak_scaling(const ExperimentConfig& cfg, const RunOptions& opt) {
  const Problem base = make_problem(cfg.problem);
  const double t_end = base.t_end;
  ExperimentOutput out;
  Table tab{"weak_scaling",
            {"rung", "nx", "ny", "nz", "coarse_steps", "fine_steps", "n_sub", "e_fine", "d1", "iterations",
             "runtime_seconds", "simulated", "factor", "sigma"},
            {},
            {}};
  const long pages = sysconf(_SC_PHYS_PAGES), page = sysconf(_SC_PAGE_SIZE);
  const double memory = pages > 0 && page > 0 ? double(pages) * double(page) : 0.0;
  const int cores = cores_available(cfg, opt);
  double previous = 0.0, sigma_last = 0.0;
  for (int r = 0; r < cfg.weak_scaling.rungs; ++r) {
    const int f = 1 << r;
    ExperimentConfig rc = cfg;
    for (int a = 0; a < 3; ++a) {
      rc.problem.cells[a] = cfg.problem.cells[a] * f;
      rc.problem.spacing[a] = cfg.problem.spacing[a] / f;
    }
    rc.time.coarse_steps = cfg.time.coarse_steps * f;
    rc.time.fine_steps = cfg.time.fine_steps * f;
    const int n_sub = cfg.time.n_sub.front() * f;
    const std::size_t cells = std::size_t(rc.problem.cells[0]) * rc.problem.cells[1] * rc.problem.cells[2];
    // Boundary states kept per iteration and subinterval plus a serial reference.
    const double need = 8.0 * double(cells) * double(n_sub + 1) * (cfg.time.max_iter + 4) * 2.0;
    if (memory > 0.0 && need > 0.5 * memory) {
      tab.notes.push_back("rung " + std::to_string(r) + " skipped: needs about " + num(need / 1e9) +
                          " GB of memory");
      log(opt, tab.notes.back());
      continue;
    }
    const Problem pr = make_problem(rc.problem, t_end);
    const PropagatorSpec cs = coarse_spec(rc, t_end), fs = fine_spec(rc, t_end);
    const ImplicitEulerPropagator coarse(pr.field, pr.bc, cs), fine(pr.field, pr.bc, fs);
    PararealConfig pc = parareal_config(rc, n_sub, t_end);
    pc.max_iter = 1;
    pc.defect_tol.reset();
    pc.backend = backend_of(cfg, opt);
    if (pc.backend == Backend::concurrent && cores < n_sub) pc.backend = Backend::sequential;
    log(opt, "weak-scaling rung " + std::to_string(r) + ": " + std::to_string(cells) + " cells, n_sub " +
                 std::to_string(n_sub) + ", backend " + to_string(pc.backend));

    const SerialRun serial = run_serial(pc, fine, pr.c0);
    const PararealTrace t = run_parareal(pc, coarse, fine, pr.c0);
    const double e_fine = end_error(pr, fs, serial.states.back(), cfg.experiment.refinement);
    const double d1 = defect(t.iterates[1].back(), serial.states.back());
    const double runtime = t.wall_seconds;
    const double factor = previous > 0.0 ? runtime / previous : std::nan("");
    double gc = 0.0;
    for (const auto& c : t.coarse_costs[0]) gc += c.total_seconds();
    sigma_last = gc / serial.total_seconds();
    previous = runtime;
    tab.rows.push_back({double(r), double(rc.problem.cells[0]), double(rc.problem.cells[1]),
                        double(rc.problem.cells[2]), double(rc.time.coarse_steps), double(rc.time.fine_steps),
                        double(n_sub), e_fine, d1, double(t.iterations), runtime,
                        t.wall_simulated ? 1.0 : 0.0, factor, sigma_last});
    out.summary.push_back("rung " + std::to_string(r) + ": e_fine " + num(e_fine) + ", d1 " + num(d1) +
                          ", runtime " + num(runtime) + " s" +
                          (std::isnan(factor) ? std::string() : ", factor " + num(factor)));
    log(opt, "  " + out.summary.back());
  }
  tab.notes.push_back("no spatial parallelism: per-core spatial work grows 8x per rung");
  out.tables.push_back(std::move(tab));

  Table eff{"weak_scaling_efficiency", {"n_sub", "n_iter", "sigma", "efficiency"}, {}, {}};
  std::vector<double> sigmas{0.01, 0.1, 1.0};
  if (sigma_last > 0.0) sigmas.push_back(sigma_last);
  for (double s : sigmas) {
    for (int n = 1; n <= 1024; n *= 2) eff.rows.push_back({double(n), 1.0, s, weak_scaling_efficiency(n, 1, s)});
  }
  if (sigma_last > 0.0) eff.notes.push_back("last sigma is the measured coarse/fine cost ratio of the final rung");
  out.tables.push_back(std::move(eff));
  return out;
}

ExperimentOutput cmd_export_solution(const ExperimentConfig& cfg, const RunOptions& opt) {
  const Problem pr = make_problem(cfg.problem);
  const PropagatorSpec fs = fine_spec(cfg, pr.t_end);
  const ImplicitEulerPropagator fine(pr.field, pr.bc, fs);
  std::vector<double> times;
  for (double frac : cfg.experiment.snapshot_fractions) {
    const double t = frac * pr.t_end;
    if (t < 0.0 || t > pr.t_end * (1.0 + 1e-12)) throw ConfigError("snapshot time outside [0, T]");
    times.push_back(t);
  }
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });
  log(opt, "export: T = " + num(pr.t_end) + ", " + std::to_string(times.size()) + " snapshots");

  ExperimentOutput out;
  out.snapshots.resize(times.size());
  Table tab{"snapshots", {"index", "time", "mean", "min", "max"}, {}, {}};
  StateVector s = pr.c0;
  double now = 0.0;
  for (std::size_t i : order) {
    if (times[i] > now) {
      // Snap to the fine step grid; the step count check rejects off-grid times.
      s = fine.propagate(s, now, times[i]);
      now = times[i];
    }
    s.time = times[i];
    std::ostringstream name;
    name << "snapshot_" << i << ".field";
    out.snapshots[i] = {name.str(), s};
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto& v = out.snapshots[i].state.values;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    tab.rows.push_back({double(i), times[i], mean, *lo, *hi});
  }
  out.tables.push_back(std::move(tab));
  return out;
}

ExperimentOutput run_experiment(const std::string& command, const ExperimentConfig& cfg,
                                const RunOptions& opt) {
  if (!cfg.experiment.name.empty() && cfg.experiment.name != command) {
    throw ConfigError("config selects experiment '" + cfg.experiment.name + "', not '" + command + "'");
  }
  if (command == "convergence") return cmd_convergence(cfg, opt);
  if (command == "coefficients") return cmd_coefficients(cfg, opt);
  if (command == "error-over-time") return cmd_error_over_time(cfg, opt);
  if (command == "speedup") return cmd_speedup(cfg, opt);
  if (command == "weak-scaling") return cmd_weak_scaling(cfg, opt);
  if (command == "export") return cmd_export_solution(cfg, opt);
  throw ConfigError("unknown experiment '" + command + "'");
}

void write_csv(std::ostream& out, const Table& table, const std::string& command,
               const ExperimentConfig& cfg) {
  out << "# skinpar " << command << " table=" << table.name << " config_hash=" << config_hash(cfg)
      << " seed=" << cfg.experiment.seed << '\n';
  for (const auto& n : table.notes) out << "# " << n << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  const auto prec = out.precision();
  out << std::setprecision(17);
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
  out.precision(prec);
}

std::vector<std::filesystem::path> write_outputs(const ExperimentOutput& out,
                                                 const std::filesystem::path& dir,
                                                 const std::string& command,
                                                 const ExperimentConfig& cfg) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files;
  for (const auto& t : out.tables) {
    const auto path = dir / (t.name + ".csv");
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    write_csv(f, t, command, cfg);
    files.push_back(path);
  }
  for (const auto& s : out.snapshots) {
    const auto path = dir / s.file;
    write_field(path, s.state);
    files.push_back(path);
  }
  return files;
}

}  // namespace skinpar
