#include "skinpar/parareal.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "skinpar/errors.hpp"
#include "skinpar/perf_model.hpp"

namespace skinpar {

Backend parse_backend(const std::string& name) {
  if (name == "seq" || name == "sequential") return Backend::sequential;
  if (name == "par" || name == "concurrent") return Backend::concurrent;
  throw std::invalid_argument("unknown backend '" + name + "' (expected seq or par)");
}

std::string to_string(Backend b) { return b == Backend::sequential ? "seq" : "par"; }

void PararealConfig::validate() const {
  if (n_sub < 1) throw std::invalid_argument("need at least one subinterval");
  if (!(t_end > 0.0)) throw std::invalid_argument("end time must be positive");
  if (max_iter < 1 || max_iter > n_sub) {
    throw std::invalid_argument("iteration budget must lie in [1, n_sub]");
  }
  if (defect_tol && !(*defect_tol > 0.0)) throw std::invalid_argument("defect tolerance must be positive");
}

bool subinterval_active(int iteration, int subinterval, bool retirement) {
  return iteration == 0 || !retirement || subinterval >= iteration - 1;
}

namespace {

std::vector<std::vector<double>> seconds_of(const std::vector<std::vector<CostRecord>>& costs) {
  std::vector<std::vector<double>> out(costs.size());
  for (std::size_t k = 0; k < costs.size(); ++k) {
    for (const auto& c : costs[k]) out[k].push_back(c.total_seconds());
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> PararealTrace::coarse_seconds() const { return seconds_of(coarse_costs); }

std::vector<std::vector<double>> PararealTrace::fine_seconds() const {
  auto s = seconds_of(fine_costs);
  if (!s.empty()) s[0].assign(static_cast<std::size_t>(n_sub), 0.0);
  return s;
}

double SerialRun::total_seconds() const {
  double s = 0.0;
  for (const auto& c : costs) s += c.total_seconds();
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

void check_divisible(const PararealConfig& cfg, const Propagator& p) {
  const double len = cfg.t_end / cfg.n_sub;
  step_count(0.0, len, p.step_size());
}

/// Runs one propagate call for task (iteration, subinterval), tagging failures.
StateVector run_task(const Propagator& p, const StateVector& in, const PararealConfig& cfg, int n,
                     int k, CostRecord& cost) {
  try {
    return p.propagate(in, cfg.boundary_time(n), cfg.boundary_time(n + 1), cost);
  } catch (const StepFailure& e) {
    throw StepFailure(e.what(), k, n);
  }
}

/// (g_new - g_old) + f, evaluated left to right per entry.
StateVector combine(const StateVector& g_new, const StateVector& g_old, const StateVector& f) {
  StateVector out = f;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = (g_new.values[i] - g_old.values[i]) + f.values[i];
  }
  out.time = g_new.time;
  return out;
}

double relative_update(const StateVector& now, const StateVector& before) {
  const double d = distance2(now.values, before.values);
  const double ref = norm2(before.values);
  if (ref == 0.0) return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return d / ref;
}

void init_trace(PararealTrace& t, const PararealConfig& cfg) {
  const auto rows = static_cast<std::size_t>(cfg.max_iter) + 1;
  const auto n_sub = static_cast<std::size_t>(cfg.n_sub);
  t.n_sub = cfg.n_sub;
  t.backend = cfg.backend;
  t.retirement = cfg.retirement;
  t.iterates.assign(rows, std::vector<StateVector>(n_sub + 1));
  t.update_norms.assign(rows, std::vector<double>(n_sub + 1, 0.0));
  t.coarse_costs.assign(rows, std::vector<CostRecord>(n_sub));
  t.fine_costs.assign(rows, std::vector<CostRecord>(n_sub));
  t.active.assign(rows, std::vector<bool>(n_sub, true));
  for (std::size_t k = 0; k < rows; ++k) {
    for (std::size_t n = 0; n < n_sub; ++n) {
      t.active[k][n] = subinterval_active(static_cast<int>(k), static_cast<int>(n), cfg.retirement);
    }
  }
  t.retired_at.assign(n_sub, -1);
}

void finish_trace(PararealTrace& t, int iterations) {
  t.iterations = iterations;
  const auto rows = static_cast<std::size_t>(iterations) + 1;
  t.iterates.resize(rows);
  t.update_norms.resize(rows);
  t.coarse_costs.resize(rows);
  t.fine_costs.resize(rows);
  t.active.resize(rows);
  for (std::size_t n = 0; n < t.retired_at.size(); ++n) {
    for (std::size_t k = 1; k < rows; ++k) {
      if (!t.active[k][n]) {
        t.retired_at[n] = static_cast<int>(k);
        break;
      }
    }
  }
}

bool converged(const PararealConfig& cfg, const std::vector<double>& norms) {
  if (!cfg.defect_tol) return false;
  return std::all_of(norms.begin(), norms.end(), [&](double v) { return v <= *cfg.defect_tol; });
}

PararealTrace run_sequential(const PararealConfig& cfg, const Propagator& coarse,
                             const Propagator& fine, const StateVector& c0) {
  PararealTrace t;
  init_trace(t, cfg);
  const int N = cfg.n_sub;
  std::vector<StateVector> g(static_cast<std::size_t>(N));

  auto& row0 = t.iterates[0];
  row0[0] = c0;
  row0[0].time = 0.0;
  for (int n = 0; n < N; ++n) {
    g[n] = run_task(coarse, row0[n], cfg, n, 0, t.coarse_costs[0][n]);
    row0[n + 1] = g[n];
  }

  int k = 1;
  for (; k <= cfg.max_iter; ++k) {
    const auto& prev = t.iterates[k - 1];
    auto& row = t.iterates[k];
    row[0] = prev[0];
    for (int n = 0; n < N; ++n) {
      if (!t.active[k][n]) {
        row[n + 1] = prev[n + 1];
        continue;
      }
      const StateVector f = run_task(fine, prev[n], cfg, n, k, t.fine_costs[k][n]);
      StateVector g_new = run_task(coarse, row[n], cfg, n, k, t.coarse_costs[k][n]);
      row[n + 1] = combine(g_new, g[n], f);
      g[n] = std::move(g_new);
      t.update_norms[k][n + 1] = relative_update(row[n + 1], prev[n + 1]);
    }
    if (converged(cfg, t.update_norms[k])) break;
  }
  finish_trace(t, std::min(k, cfg.max_iter));
  t.wall_seconds = simulate_pipeline(t.coarse_seconds(), t.fine_seconds(), t.active);
  t.wall_simulated = true;
  return t;
}

/// Point-to-point channels along the rank order plus run-wide control state.
/// Boundary n carries messages from worker n - 1 to worker n, in iteration order.
class Pipeline {
 public:
  Pipeline(int n_sub, int max_iter)
      : queues_(static_cast<std::size_t>(n_sub) + 1),
        reported_(static_cast<std::size_t>(max_iter) + 1, 0) {}

  void send(int boundary, int iteration, StateVector s) {
    {
      std::lock_guard lock(m_);
      queues_[boundary].emplace_back(iteration, std::move(s));
    }
    cv_.notify_all();
  }

  /// Blocks until the message for `iteration` arrives. Returns nullopt when
  /// the run was aborted or stopped before `iteration`.
  std::optional<StateVector> recv(int boundary, int iteration) {
    std::unique_lock lock(m_);
    auto& q = queues_[boundary];
    cv_.wait(lock, [&] { return aborted_ || iteration > stop_after_ || !q.empty(); });
    if (aborted_ || iteration > stop_after_) return std::nullopt;
    if (q.front().first != iteration) throw std::logic_error("pipeline message out of order");
    StateVector s = std::move(q.front().second);
    q.pop_front();
    return s;
  }

  bool cancelled(int iteration) {
    std::lock_guard lock(m_);
    return aborted_ || iteration > stop_after_;
  }

  /// Records that one worker finished `iteration`; the last of `expected`
  /// workers evaluates `done` and, if it holds, ends the run after it.
  template <class Pred>
  void report(int iteration, int expected, Pred done) {
    bool stop = false;
    {
      std::lock_guard lock(m_);
      if (++reported_[iteration] == expected && done()) {
        stop_after_ = std::min(stop_after_, iteration);
        stop = true;
      }
    }
    if (stop) cv_.notify_all();
  }

  void abort(std::exception_ptr e) {
    {
      std::lock_guard lock(m_);
      if (!error_) error_ = e;
      aborted_ = true;
    }
    cv_.notify_all();
  }

  std::exception_ptr error() const { return error_; }
  int stop_after() const { return stop_after_; }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  std::vector<std::deque<std::pair<int, StateVector>>> queues_;
  std::vector<int> reported_;
  int stop_after_ = INT_MAX;
  bool aborted_ = false;
  std::exception_ptr error_;
};

PararealTrace run_concurrent(const PararealConfig& cfg, const Propagator& coarse,
                             const Propagator& fine, const StateVector& c0) {
  PararealTrace t;
  init_trace(t, cfg);
  const int N = cfg.n_sub;
  const int K = cfg.max_iter;
  Pipeline pipe(N, K);
  StateVector start = c0;
  start.time = 0.0;

  std::vector<int> active_count(static_cast<std::size_t>(K) + 1, 0);
  for (int k = 0; k <= K; ++k) {
    for (int n = 0; n < N; ++n) active_count[k] += t.active[k][n] ? 1 : 0;
  }

  auto worker = [&](int n) {
    try {
      const bool last = n + 1 == N;
      // Iteration 0: serial coarse sweep, one hop per worker.
      StateVector in;
      if (n == 0) {
        in = start;
      } else {
        auto msg = pipe.recv(n, 0);
        if (!msg) return;
        in = std::move(*msg);
      }
      StateVector g = run_task(coarse, in, cfg, n, 0, t.coarse_costs[0][n]);
      StateVector out = g;
      if (n == 0) t.iterates[0][0] = in;
      t.iterates[0][n + 1] = out;
      if (!last) pipe.send(n + 1, 0, out);

      for (int k = 1; k <= K; ++k) {
        if (pipe.cancelled(k)) return;
        if (!t.active[k][n]) {
          // Frozen: hand the unchanged boundary value on while the successor
          // still needs it, then leave.
          if (last || !t.active[k][n + 1]) return;
          pipe.send(n + 1, k, out);
          continue;
        }
        const StateVector f = run_task(fine, in, cfg, n, k, t.fine_costs[k][n]);
        StateVector next_in;
        if (n == 0) {
          next_in = start;
        } else {
          auto msg = pipe.recv(n, k);
          if (!msg) return;
          next_in = std::move(*msg);
        }
        StateVector g_new = run_task(coarse, next_in, cfg, n, k, t.coarse_costs[k][n]);
        StateVector next_out = combine(g_new, g, f);
        t.update_norms[k][n + 1] = relative_update(next_out, out);
        t.iterates[k][n + 1] = next_out;
        if (!last) pipe.send(n + 1, k, next_out);
        g = std::move(g_new);
        in = std::move(next_in);
        out = std::move(next_out);
        pipe.report(k, active_count[k], [&] { return converged(cfg, t.update_norms[k]); });
      }
    } catch (...) {
      pipe.abort(std::current_exception());
    }
  };

  const auto t0 = Clock::now();
  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) threads.emplace_back(worker, n);
  }
  t.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  t.wall_simulated = false;
  if (pipe.error()) std::rethrow_exception(pipe.error());

  const int iterations = std::min(K, pipe.stop_after());
  for (int k = 1; k <= iterations; ++k) {
    t.iterates[k][0] = t.iterates[k - 1][0];
    for (int n = 0; n < N; ++n) {
      if (!t.active[k][n]) t.iterates[k][n + 1] = t.iterates[k - 1][n + 1];
    }
  }
  finish_trace(t, iterations);
  return t;
}

}  // namespace

SerialRun run_serial(const PararealConfig& cfg, const Propagator& prop, const StateVector& c0) {
  cfg.validate();
  check_divisible(cfg, prop);
  SerialRun r;
  r.states.reserve(static_cast<std::size_t>(cfg.n_sub) + 1);
  r.costs.resize(static_cast<std::size_t>(cfg.n_sub));
  r.states.push_back(c0);
  r.states.back().time = 0.0;
  for (int n = 0; n < cfg.n_sub; ++n) {
    r.states.push_back(prop.propagate(r.states.back(), cfg.boundary_time(n), cfg.boundary_time(n + 1),
                                      r.costs[n]));
  }
  return r;
}

PararealTrace run_parareal(const PararealConfig& cfg, const Propagator& coarse, const Propagator& fine,
                           const StateVector& c0) {
  cfg.validate();
  check_divisible(cfg, coarse);
  check_divisible(cfg, fine);
  return cfg.backend == Backend::sequential ? run_sequential(cfg, coarse, fine, c0)
                                            : run_concurrent(cfg, coarse, fine, c0);
}

double defect(const StateVector& a, const StateVector& ref) {
  if (a.values.size() != ref.values.size()) throw GridMismatch("defect of states on different grids");
  const double r = norm2(ref.values);
  if (r == 0.0) throw std::domain_error("defect against a zero reference state");
  return distance2(a.values, ref.values) / r;
}

std::vector<double> compute_defects(const std::vector<StateVector>& states,
                                    const std::vector<StateVector>& reference) {
  if (states.size() != reference.size()) throw std::invalid_argument("trajectories differ in length");
  std::vector<double> d(states.size(), 0.0);
  for (std::size_t n = 0; n < states.size(); ++n) {
    if (norm2(reference[n].values) == 0.0 && states[n].values == reference[n].values) continue;
    d[n] = defect(states[n], reference[n]);
  }
  return d;
}

std::vector<double> discretization_error_estimate(const PararealConfig& cfg,
                                                  const CoefficientField& field,
                                                  const BoundarySpec& bc, const PropagatorSpec& fine,
                                                  const SerialRun& fine_run, int refinement) {
  if (refinement < 1) throw std::invalid_argument("refinement must be >= 1");
  if (refinement == 1) return std::vector<double>(fine_run.states.size(), 0.0);
  PropagatorSpec ref = fine;
  ref.dt = fine.dt / refinement;
  const ImplicitEulerPropagator p(field, bc, ref);
  const SerialRun r = run_serial(cfg, p, fine_run.states.front());
  return compute_defects(fine_run.states, r.states);
}

std::vector<double> discretization_error_estimate(const PararealConfig& cfg,
                                                  const CoefficientField& field,
                                                  const BoundarySpec& bc, const PropagatorSpec& fine,
                                                  const StateVector& c0, int refinement) {
  const ImplicitEulerPropagator p(field, bc, fine);
  return discretization_error_estimate(cfg, field, bc, fine, run_serial(cfg, p, c0), refinement);
}

void write_trace_csv(std::ostream& out, const PararealTrace& trace,
                     const std::vector<StateVector>& reference) {
  out << "iteration,boundary_index,defect,update_norm,coarse_seconds,fine_seconds,retired_flag\n";
  const auto prec = out.precision();
  out << std::setprecision(17);
  for (int k = 0; k <= trace.iterations; ++k) {
    const auto d = compute_defects(trace.iterates[k], reference);
    for (int n = 0; n <= trace.n_sub; ++n) {
      double cs = 0.0, fs = 0.0;
      int retired = 0;
      if (n > 0) {
        cs = trace.coarse_costs[k][n - 1].total_seconds();
        fs = trace.fine_costs[k][n - 1].total_seconds();
        retired = trace.active[k][n - 1] ? 0 : 1;
      }
      out << k << ',' << n << ',' << d[n] << ',' << trace.update_norms[k][n] << ',' << cs << ','
          << fs << ',' << retired << '\n';
    }
  }
  out.precision(prec);
}

}  // namespace skinpar
