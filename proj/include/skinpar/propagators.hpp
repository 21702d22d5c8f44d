#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "skinpar/discretization.hpp"
#include "skinpar/multigrid.hpp"

namespace skinpar {

struct PropagatorSpec {
  double dt = 1.0;
  MGConfig mg;
  /// "coarse" or "fine"; only used to label cost records.
  std::string label = "fine";

  void validate() const;
  bool operator==(const PropagatorSpec&) const = default;
};

struct StepCost {
  int step_index = 0;
  int mg_cycles = 0;
  double seconds = 0.0;
};

/// Per-step costs of one propagate call (or a concatenation of them).
struct CostRecord {
  std::vector<StepCost> steps;

  double total_seconds() const;
  long total_cycles() const;
  bool empty() const { return steps.empty(); }
};

/// Number of steps of size dt covering [t0, t1]. Throws StepCountError unless
/// the ratio is within 1e-9 (relative) of an integer.
int step_count(double t0, double t1, double dt);

/// Time integrator over an interval. Implementations are immutable after
/// construction; concurrent propagate calls are safe.
class Propagator {
 public:
  virtual ~Propagator() = default;

  virtual double step_size() const = 0;
  virtual const std::string& label() const = 0;

  /// Advances `state` (taken to be at t0) to t1 in step_count(t0, t1) steps
  /// and appends one entry per step to `cost`. The result is stamped t1.
  /// Same input gives bit-identical output.
  virtual StateVector propagate(const StateVector& state, double t0, double t1,
                                CostRecord& cost) const = 0;

  StateVector propagate(const StateVector& state, double t0, double t1) const {
    CostRecord ignored;
    return propagate(state, t0, t1, ignored);
  }
};

/// Implicit Euler on a fixed coefficient field, solved by multigrid warm
/// started from the previous state. The hierarchy is built once.
class ImplicitEulerPropagator final : public Propagator {
 public:
  ImplicitEulerPropagator(const CoefficientField& field, const BoundarySpec& bc, PropagatorSpec spec);

  double step_size() const override { return spec_.dt; }
  const std::string& label() const override { return spec_.label; }
  const PropagatorSpec& spec() const { return spec_; }
  const MGHierarchy& hierarchy() const { return *hierarchy_; }

  /// One step; throws StepFailure when multigrid exhausts its budget.
  StateVector step(const StateVector& state, StepCost* cost = nullptr) const;

  using Propagator::propagate;
  StateVector propagate(const StateVector& state, double t0, double t1,
                        CostRecord& cost) const override;

 private:
  PropagatorSpec spec_;
  std::shared_ptr<const MGHierarchy> hierarchy_;
};

/// Synthetic propagator with a controlled cost: every step sleeps for a fixed
/// time and scales the state by `decay`. Sleeping threads do not compete for
/// cores, so concurrency can be measured on small machines.
class FixedCostPropagator final : public Propagator {
 public:
  FixedCostPropagator(double dt, double seconds_per_step, double decay, std::string label);

  double step_size() const override { return dt_; }
  const std::string& label() const override { return label_; }

  using Propagator::propagate;
  StateVector propagate(const StateVector& state, double t0, double t1,
                        CostRecord& cost) const override;

 private:
  double dt_, seconds_, decay_;
  std::string label_;
};

/// One implicit-Euler step built from scratch (hierarchy included).
std::pair<StateVector, StepCost> step(const StateVector& state, const PropagatorSpec& spec,
                                      const CoefficientField& field, const BoundarySpec& bc);

/// Propagates with a freshly built ImplicitEulerPropagator.
std::pair<StateVector, CostRecord> propagate(const StateVector& state, double t0, double t1,
                                             const PropagatorSpec& spec,
                                             const CoefficientField& field, const BoundarySpec& bc);

/// Header row "subinterval_index,label,step_index,mg_cycles,seconds".
void write_cost_header(std::ostream& out);
void write_cost_rows(std::ostream& out, int subinterval, const std::string& label,
                     const CostRecord& cost);

}  // namespace skinpar
