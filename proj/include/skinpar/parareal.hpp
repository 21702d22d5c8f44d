#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "skinpar/propagators.hpp"

namespace skinpar {

enum class Backend { sequential, concurrent };

Backend parse_backend(const std::string& name);  // "seq" | "par"
std::string to_string(Backend b);

struct PararealConfig {
  int n_sub = 1;
  double t_end = 1.0;
  int max_iter = 1;
  /// Stop once every boundary's relative update falls below this.
  std::optional<double> defect_tol;
  Backend backend = Backend::sequential;
  bool retirement = true;

  /// n_sub >= 1, t_end > 0, 1 <= max_iter <= n_sub, defect_tol > 0.
  void validate() const;
  double boundary_time(int n) const { return t_end * n / n_sub; }
  bool operator==(const PararealConfig&) const = default;
};

/// Subinterval n takes part in iteration k >= 1 unless retirement is on and
/// its end boundary was already exact after iteration k - 1 (n <= k - 2).
bool subinterval_active(int iteration, int subinterval, bool retirement);

struct PararealTrace {
  int n_sub = 0;
  Backend backend = Backend::sequential;
  bool retirement = true;
  /// Completed Parareal iterations K (iteration 0 is the coarse sweep).
  int iterations = 0;
  /// iterates[k][n]: boundary state n = 0 .. N_t after iteration k = 0 .. K.
  std::vector<std::vector<StateVector>> iterates;
  /// update_norms[k][n] = |c^k_n - c^{k-1}_n| / |c^{k-1}_n|; row 0 is zero.
  std::vector<std::vector<double>> update_norms;
  /// Costs of subinterval n = 0 .. N_t - 1 in iteration k. fine_costs[0] is empty.
  std::vector<std::vector<CostRecord>> coarse_costs;
  std::vector<std::vector<CostRecord>> fine_costs;
  /// active[k][n]; every subinterval is active in iteration 0.
  std::vector<std::vector<bool>> active;
  /// Iteration from which subinterval n is frozen, -1 if never.
  std::vector<int> retired_at;
  /// Measured (concurrent) or simulated (sequential) time to solution.
  double wall_seconds = 0.0;
  bool wall_simulated = false;

  std::vector<std::vector<double>> coarse_seconds() const;
  std::vector<std::vector<double>> fine_seconds() const;
};

/// Boundary states of a serial run of one propagator across the subintervals.
struct SerialRun {
  std::vector<StateVector> states;  // n = 0 .. N_t
  std::vector<CostRecord> costs;    // per subinterval
  double total_seconds() const;
};

SerialRun run_serial(const PararealConfig& cfg, const Propagator& prop, const StateVector& c0);
inline SerialRun run_serial_fine(const PararealConfig& cfg, const Propagator& fine,
                                 const StateVector& c0) {
  return run_serial(cfg, fine, c0);
}

/// Parareal with c^{k+1}_{n+1} = (C(c^{k+1}_n) - C(c^k_n)) + F(c^k_n),
/// starting from a serial coarse sweep. Both backends perform the same
/// floating-point operations in the same order. Step failures are rethrown
/// as StepFailure tagged with (iteration, subinterval).
PararealTrace run_parareal(const PararealConfig& cfg, const Propagator& coarse,
                           const Propagator& fine, const StateVector& c0);

/// |a - ref| / |ref| in the Euclidean norm. Throws std::domain_error when
/// |ref| = 0.
double defect(const StateVector& a, const StateVector& ref);

/// Defects per boundary; boundary states with zero norm (the initial value)
/// count as 0 when they match the reference exactly.
std::vector<double> compute_defects(const std::vector<StateVector>& states,
                                    const std::vector<StateVector>& reference);

/// Relative difference per boundary between the fine run at dt and at
/// dt / refinement.
std::vector<double> discretization_error_estimate(const PararealConfig& cfg,
                                                  const CoefficientField& field,
                                                  const BoundarySpec& bc, const PropagatorSpec& fine,
                                                  const StateVector& c0, int refinement = 4);
/// Same, with the fine trajectory already at hand.
std::vector<double> discretization_error_estimate(const PararealConfig& cfg,
                                                  const CoefficientField& field,
                                                  const BoundarySpec& bc, const PropagatorSpec& fine,
                                                  const SerialRun& fine_run, int refinement = 4);

/// Trace CSV: iteration,boundary_index,defect,update_norm,coarse_seconds,
/// fine_seconds,retired_flag. Costs belong to the subinterval ending at the
/// boundary; boundary 0 reports zero cost.
void write_trace_csv(std::ostream& out, const PararealTrace& trace,
                     const std::vector<StateVector>& reference);

}  // namespace skinpar
