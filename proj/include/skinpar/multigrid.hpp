#pragma once

#include <memory>
#include <vector>

#include "skinpar/banded_lu.hpp"
#include "skinpar/discretization.hpp"

namespace skinpar {

struct MGConfig {
  double omega = 0.6;
  int pre_smooth = 3;
  int post_smooth = 3;
  int max_cycles = 50;
  /// Relative to ||b - K||, the right-hand side of the linear system.
  double rel_tol = 1e-8;
  std::size_t coarsest_max_unknowns = 4096;

  void validate() const;
  bool operator==(const MGConfig&) const = default;
};

/// Halves every axis with an even cell count and doubles its width. Odd axes
/// are kept, so a coarse cell always covers whole fine cells.
Grid3D coarsen(const Grid3D& fine);

/// One level of a hierarchy. Only the finest level carries Dirichlet data in
/// `op.constant`; coarse levels act on corrections and have K = 0.
struct MGLevel {
  Grid3D grid;
  /// Cell coefficients, block-averaged from the level above.
  std::vector<double> coefficients;
  StencilOperator op;
};

/// Fine-to-coarse list of re-discretized operators for one time step size.
/// Immutable after construction; `solve` may be called concurrently.
class MGHierarchy {
 public:
  MGHierarchy(const Grid3D& grid, std::span<const double> coefficients, const BoundarySpec& bc,
              double dt, std::size_t coarsest_max_unknowns);
  MGHierarchy(const CoefficientField& field, const BoundarySpec& bc, double dt,
              std::size_t coarsest_max_unknowns = MGConfig{}.coarsest_max_unknowns);

  std::size_t levels() const { return levels_.size(); }
  const MGLevel& level(std::size_t l) const { return levels_[l]; }
  const StencilOperator& fine_operator() const { return levels_.front().op; }
  double dt() const { return dt_; }
  const BandedLU& coarse_factorization() const { return *coarse_lu_; }

 private:
  double dt_;
  std::vector<MGLevel> levels_;
  std::shared_ptr<const BandedLU> coarse_lu_;
};

/// x <- x + omega D^-1 (b - apply(op, x)), `steps` times.
void smooth(const StencilOperator& op, std::span<double> x, std::span<const double> b, double omega,
            int steps);
StateVector smooth(const StencilOperator& op, const StateVector& x, const StateVector& b,
                   double omega, int steps);

/// Block average over the children of each coarse cell (2 per halved axis).
void restrict_to_coarse(const Grid3D& fine, std::span<const double> fine_values,
                        const Grid3D& coarse, std::span<double> coarse_values);
StateVector restrict_to_coarse(const StateVector& fine);

/// Piecewise-constant injection into the children; adds into `fine_values`
/// when `accumulate` is set.
void prolong_to_fine(const Grid3D& coarse, std::span<const double> coarse_values, const Grid3D& fine,
                     std::span<double> fine_values, bool accumulate = false);
StateVector prolong_to_fine(const StateVector& coarse, const Grid3D& fine);

/// Cell-centered (tri)linear interpolation with weights 3/4, 1/4 per refined
/// axis. Used for the V-cycle correction. Near the top and bottom walls the
/// value is interpolated towards zero, elsewhere it is held constant.
void interpolate_to_fine(const Grid3D& coarse, std::span<const double> coarse_values,
                         const Grid3D& fine, std::span<double> fine_values, bool accumulate = false);
StateVector interpolate_to_fine(const StateVector& coarse, const Grid3D& fine);

/// Band LU of the operator's matrix.
BandedLU factorize(const StencilOperator& op);

/// Direct solve of apply(op, x) = b.
StateVector coarse_solve(const StencilOperator& op, const StateVector& b);

struct MGResult {
  StateVector x;
  int cycles = 0;
  double initial_residual = 0.0;
  /// Relative residual after each V-cycle.
  std::vector<double> residual_history;
  bool converged = false;
};

/// V-cycles on apply(fine_operator, x) = b, starting from x0, until the
/// relative residual drops to cfg.rel_tol or cfg.max_cycles is spent.
/// Exhausting the budget is reported through `converged`, not thrown.
MGResult solve(const MGHierarchy& hierarchy, const StateVector& b, const StateVector& x0,
               const MGConfig& cfg);

}  // namespace skinpar
