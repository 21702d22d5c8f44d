#include "skinpar/propagators.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "skinpar/errors.hpp"

namespace skinpar {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

void PropagatorSpec::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  mg.validate();
}

double CostRecord::total_seconds() const {
  double s = 0.0;
  for (const auto& e : steps) s += e.seconds;
  return s;
}

long CostRecord::total_cycles() const {
  long c = 0;
  for (const auto& e : steps) c += e.mg_cycles;
  return c;
}

int step_count(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (t1 < t0) throw std::invalid_argument("interval end precedes its start");
  const double ratio = (t1 - t0) / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
    throw StepCountError("interval of length " + std::to_string(t1 - t0) +
                         " is not a multiple of the step " + std::to_string(dt));
  }
  if (n > 1e9) throw StepCountError("too many steps");
  return static_cast<int>(n);
}

ImplicitEulerPropagator::ImplicitEulerPropagator(const CoefficientField& field, const BoundarySpec& bc,
                                                 PropagatorSpec spec)
    : spec_(std::move(spec)) {
  spec_.validate();
  hierarchy_ = std::make_shared<const MGHierarchy>(field.grid, field.values, bc, spec_.dt,
                                                   spec_.mg.coarsest_max_unknowns);
}

StateVector ImplicitEulerPropagator::step(const StateVector& state, StepCost* cost) const {
  if (!(state.grid == hierarchy_->fine_operator().grid)) {
    throw GridMismatch("state and propagator grids differ");
  }
  const auto start = Clock::now();
  MGResult r = solve(*hierarchy_, state, state, spec_.mg);
  const double elapsed = seconds_since(start);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "multigrid residual " << r.residual_history.back() << " above " << spec_.mg.rel_tol << " after "
        << spec_.mg.max_cycles << " cycles (" << spec_.label << " step)";
    throw StepFailure(msg.str());
  }
  if (cost) cost->mg_cycles = r.cycles, cost->seconds = elapsed;
  r.x.time = state.time + spec_.dt;
  return std::move(r.x);
}

StateVector ImplicitEulerPropagator::propagate(const StateVector& state, double t0, double t1,
                                               CostRecord& cost) const {
  const int n = step_count(t0, t1, spec_.dt);
  StateVector s = state;
  s.time = t0;
  for (int i = 0; i < n; ++i) {
    StepCost c{i, 0, 0.0};
    s = step(s, &c);
    cost.steps.push_back(c);
  }
  s.time = t1;
  return s;
}

FixedCostPropagator::FixedCostPropagator(double dt, double seconds_per_step, double decay,
                                         std::string label)
    : dt_(dt), seconds_(seconds_per_step), decay_(decay), label_(std::move(label)) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (seconds_per_step < 0.0) throw std::invalid_argument("negative step cost");
}

StateVector FixedCostPropagator::propagate(const StateVector& state, double t0, double t1,
                                           CostRecord& cost) const {
  const int n = step_count(t0, t1, dt_);
  StateVector s = state;
  for (int i = 0; i < n; ++i) {
    const auto start = Clock::now();
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds_));
    for (double& v : s.values) v *= decay_;
    cost.steps.push_back({i, 0, seconds_since(start)});
  }
  s.time = t1;
  return s;
}

std::pair<StateVector, StepCost> step(const StateVector& state, const PropagatorSpec& spec,
                                      const CoefficientField& field, const BoundarySpec& bc) {
  if (!(state.grid == field.grid)) throw GridMismatch("state and coefficient grids differ");
  const ImplicitEulerPropagator p(field, bc, spec);
  StepCost c;
  StateVector next = p.step(state, &c);
  return {std::move(next), c};
}

std::pair<StateVector, CostRecord> propagate(const StateVector& state, double t0, double t1,
                                             const PropagatorSpec& spec,
                                             const CoefficientField& field, const BoundarySpec& bc) {
  if (!(state.grid == field.grid)) throw GridMismatch("state and coefficient grids differ");
  const ImplicitEulerPropagator p(field, bc, spec);
  CostRecord cost;
  StateVector out = p.propagate(state, t0, t1, cost);
  return {std::move(out), std::move(cost)};
}

void write_cost_header(std::ostream& out) {
  out << "subinterval_index,label,step_index,mg_cycles,seconds\n";
}

void write_cost_rows(std::ostream& out, int subinterval, const std::string& label,
                     const CostRecord& cost) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(9);
  for (const auto& e : cost.steps) {
    out << subinterval << ',' << label << ',' << e.step_index << ',' << e.mg_cycles << ','
        << e.seconds << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

}  // namespace skinpar
