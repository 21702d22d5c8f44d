#pragma once

#include <string>
#include <vector>

namespace skinpar {

struct PararealTrace;
struct SerialRun;

/// Per-subinterval coarse and fine costs (seconds), n = 0 .. N_t - 1.
struct CostProfile {
  std::vector<double> gamma_c;
  std::vector<double> gamma_f;

  std::size_t n_sub() const { return gamma_c.size(); }
  double total_coarse() const;
  double total_fine() const;
  /// Throws std::invalid_argument on negative entries or unequal lengths.
  void validate() const;
};

struct SpeedupEstimate {
  std::string model;  // "simple" or "general"
  int n_sub = 0;
  int n_iter = 0;
  double value = 0.0;
  double total_coarse = 0.0;  // Gamma_c
  double total_fine = 0.0;    // Gamma_f
  double gamma_x = 0.0;       // max_n (gamma_c_n + gamma_f_n)
};

/// 1 / ((1 + N_i/N_t) (N_c/N_f) (tau_c/tau_f) + N_i/N_t).
double speedup_simple(int n_iter, int n_sub, double nc_over_nf, double tauc_over_tauf);

/// Gamma_f / (Gamma_c + N_i max_n (gamma_c_n + gamma_f_n)).
SpeedupEstimate speedup_general(const CostProfile& profile, int n_iter);

/// gamma_c = 1 and gamma_f = 10 everywhere, except gamma_f[3] = (1 + b) 10
/// and gamma_f[2] = (1 - b) 10 (0-based). Needs n_sub >= 4, b in [0, 1].
CostProfile imbalance_scenario(int n_sub, double b);

/// (N_t s + N_i (1 + s)) / (2 N_t s + N_i (1 + s)).
double weak_scaling_efficiency(int n_sub, int n_iter, double sigma);

/// Finish time of the pipelined schedule for measured per-task costs.
///
/// coarse[k][n] and fine[k][n] are the costs of subinterval n in iteration k
/// (fine[0] is unused); active[k][n] is false for retired subintervals, which
/// hand on their frozen value at no cost. Every worker runs its own tasks in
/// order: iteration 0 coarse, then for k >= 1 fine followed by coarse, and a
/// coarse task starts only once the predecessor's coarse task of the same
/// iteration has finished. Communication is free.
double simulate_pipeline(const std::vector<std::vector<double>>& coarse,
                         const std::vector<std::vector<double>>& fine,
                         const std::vector<std::vector<bool>>& active);

/// Same schedule with every iteration costing `profile`, no retirement.
double simulate_pipeline(const CostProfile& profile, int n_iter);

struct ModelReport {
  double serial_seconds = 0.0;    // Gamma_f of the serial fine run
  double parallel_seconds = 0.0;  // measured, or simulated for the sequential backend
  bool simulated = false;
  double measured_speedup = 0.0;
  SpeedupEstimate predicted;
  /// measured / predicted
  double ratio = 0.0;
  bool flagged = false;
};

/// Compares a Parareal run against the general model fed with measured costs:
/// gamma_c from the trace's iteration-0 coarse sweep and gamma_f from the
/// serial fine run. For the sequential backend the parallel time is the
/// simulated schedule of that same profile. `flag_below` is the fraction of
/// the prediction under which the report is flagged.
ModelReport validate_model(const PararealTrace& trace, const SerialRun& serial,
                           double flag_below = 0.5);

struct CurvePoint {
  int n_sub;
  double b;
  int n_iter;
  double speedup_ideal;
  double speedup_imbalanced;
};

/// General-model speedups of the balanced profile and of
/// imbalance_scenario(n_sub, b). Below four subintervals only b = 0 exists.
std::vector<CurvePoint> imbalance_curves(const std::vector<int>& n_subs, const std::vector<double>& bs,
                                         int n_iter);

}  // namespace skinpar
