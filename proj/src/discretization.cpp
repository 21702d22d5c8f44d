#include "skinpar/discretization.hpp"

#include <cmath>
#include <stdexcept>

#include "skinpar/errors.hpp"

namespace skinpar {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw GridMismatch("vectors differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double face_coefficient(double d_left, double d_right) {
  if (!(d_left > 0.0) || !(d_right > 0.0)) {
    throw std::invalid_argument("face coefficients need positive cell coefficients");
  }
  return 2.0 * d_left * d_right / (d_left + d_right);
}

StencilOperator assemble(const Grid3D& grid, std::span<const double> d, const BoundarySpec& bc,
                         double dt) {
  grid.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (d.size() != grid.size()) {
    throw GridMismatch("coefficient field and boundary data live on different grids");
  }
  if (!bc.lateral_neumann) throw std::invalid_argument("lateral faces must be homogeneous Neumann");

  StencilOperator op;
  op.grid = grid;
  op.dt = dt;
  op.weights.assign(grid.size(), {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  op.constant.assign(grid.size(), 0.0);

  const double sx = dt / (grid.hx * grid.hx);
  const double sy = dt / (grid.hy * grid.hy);
  const double sz = dt / (grid.hz * grid.hz);
  const std::size_t stride_y = static_cast<std::size_t>(grid.nx);
  const std::size_t stride_z = stride_y * static_cast<std::size_t>(grid.ny);

  // Interior faces: each coupling is computed once and written to both rows,
  // which keeps the non-Dirichlet part exactly symmetric.
  auto couple = [&](std::size_t a, std::size_t b, int slot_a, int slot_b, double scale) {
    const double w = scale * face_coefficient(d[a], d[b]);
    op.weights[a][slot_a] = -w;
    op.weights[b][slot_b] = -w;
    op.weights[a][StencilOperator::center] += w;
    op.weights[b][StencilOperator::center] += w;
  };

  for (int k = 0; k < grid.nz; ++k) {
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) {
        const std::size_t c = grid.index(i, j, k);
        if (i + 1 < grid.nx) couple(c, c + 1, StencilOperator::xp, StencilOperator::xm, sx);
        if (j + 1 < grid.ny) couple(c, c + stride_y, StencilOperator::yp, StencilOperator::ym, sy);
        if (k + 1 < grid.nz) couple(c, c + stride_z, StencilOperator::zp, StencilOperator::zm, sz);
      }
    }
  }

  // Dirichlet faces: ghost value eliminated across half a cell, so the
  // boundary coupling is 2 D / h^2 with the cell's own coefficient.
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t bottom = grid.index(i, j, 0);
      const std::size_t top = grid.index(i, j, grid.nz - 1);
      const double wb = 2.0 * sz * d[bottom];
      const double wt = 2.0 * sz * d[top];
      op.weights[bottom][StencilOperator::center] += wb;
      op.constant[bottom] -= wb * bc.bottom;
      op.weights[top][StencilOperator::center] += wt;
      op.constant[top] -= wt * bc.top;
    }
  }
  return op;
}

StencilOperator assemble(const CoefficientField& field, const BoundarySpec& bc, double dt) {
  return assemble(field.grid, field.values, bc, dt);
}

namespace {

void check_sizes(const StencilOperator& op, std::size_t a, std::size_t b) {
  const std::size_t n = op.grid.size();
  if (a != n || b != n) throw GridMismatch("vector size does not match the operator grid");
}

template <bool WithConstant>
void apply_impl(const StencilOperator& op, std::span<const double> x, std::span<double> out) {
  check_sizes(op, x.size(), out.size());
  const Grid3D& g = op.grid;
  const std::size_t sy = static_cast<std::size_t>(g.nx);
  const std::size_t sz = sy * static_cast<std::size_t>(g.ny);
  for (int k = 0; k < g.nz; ++k) {
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t row = g.index(0, j, k);
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t c = row + static_cast<std::size_t>(i);
        const auto& w = op.weights[c];
        double s = w[StencilOperator::center] * x[c];
        if (i > 0) s += w[StencilOperator::xm] * x[c - 1];
        if (i + 1 < g.nx) s += w[StencilOperator::xp] * x[c + 1];
        if (j > 0) s += w[StencilOperator::ym] * x[c - sy];
        if (j + 1 < g.ny) s += w[StencilOperator::yp] * x[c + sy];
        if (k > 0) s += w[StencilOperator::zm] * x[c - sz];
        if (k + 1 < g.nz) s += w[StencilOperator::zp] * x[c + sz];
        if constexpr (WithConstant) s += op.constant[c];
        out[c] = s;
      }
    }
  }
}

}  // namespace

void apply(const StencilOperator& op, std::span<const double> x, std::span<double> out) {
  apply_impl<true>(op, x, out);
}

void apply_linear(const StencilOperator& op, std::span<const double> x, std::span<double> out) {
  apply_impl<false>(op, x, out);
}

StateVector apply(const StencilOperator& op, const StateVector& x) {
  if (!(x.grid == op.grid)) throw GridMismatch("state and operator live on different grids");
  StateVector out{x.grid, std::vector<double>(x.values.size()), x.time};
  apply(op, x.values, out.values);
  return out;
}

double residual(const StencilOperator& op, std::span<const double> x, std::span<const double> b,
                std::span<double> r) {
  check_sizes(op, b.size(), r.size());
  apply(op, x, r);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = b[i] - r[i];
    s += r[i] * r[i];
  }
  return std::sqrt(s);
}

std::pair<StateVector, double> residual(const StencilOperator& op, const StateVector& x,
                                        const StateVector& b) {
  if (!(x.grid == op.grid) || !(b.grid == op.grid)) {
    throw GridMismatch("states and operator live on different grids");
  }
  StateVector r{x.grid, std::vector<double>(x.values.size()), b.time};
  const double n = residual(op, x.values, b.values, r.values);
  return {std::move(r), n};
}

}  // namespace skinpar
