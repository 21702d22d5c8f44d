#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "skinpar/grid_geometry.hpp"

namespace skinpar {

/// Cell-centered concentration field at one instant.
struct StateVector {
  Grid3D grid;
  std::vector<double> values;
  double time = 0.0;

  static StateVector zeros(const Grid3D& grid, double time = 0.0) {
    return {grid, std::vector<double>(grid.size(), 0.0), time};
  }
};

double norm2(std::span<const double> v);
/// Euclidean norm of a - b.
double distance2(std::span<const double> a, std::span<const double> b);

/// Dirichlet data on the top (k = nz-1) and bottom (k = 0) faces. Lateral
/// faces are always homogeneous Neumann.
struct BoundarySpec {
  double top = 1.0;
  double bottom = 0.0;
  bool lateral_neumann = true;

  bool operator==(const BoundarySpec&) const = default;
};

/// Seven-point stencil of the implicit-Euler matrix A = I - dt L plus the
/// Dirichlet contribution K, so that apply(x) = A x + K.
struct StencilOperator {
  enum Slot : int { center = 0, xm, xp, ym, yp, zm, zp };

  Grid3D grid;
  double dt = 0.0;
  /// Per cell: diagonal, then the six neighbor couplings (non-positive).
  std::vector<std::array<double, 7>> weights;
  /// Dirichlet ghost-value contribution; solving apply(x) = b means A x = b - K.
  std::vector<double> constant;
};

/// Two-point flux coefficient of a face between cells with coefficients
/// d_left and d_right; the harmonic mean keeps the discrete flux continuous.
double face_coefficient(double d_left, double d_right);

/// Assembles I - dt L for coefficient values living on `grid`.
StencilOperator assemble(const Grid3D& grid, std::span<const double> coefficients,
                         const BoundarySpec& bc, double dt);
StencilOperator assemble(const CoefficientField& field, const BoundarySpec& bc, double dt);

/// out = A x + K. Throws GridMismatch when sizes disagree.
void apply(const StencilOperator& op, std::span<const double> x, std::span<double> out);
StateVector apply(const StencilOperator& op, const StateVector& x);

/// out = A x (the constant part left out).
void apply_linear(const StencilOperator& op, std::span<const double> x, std::span<double> out);

/// r = b - apply(op, x); returns ||r||_2.
double residual(const StencilOperator& op, std::span<const double> x, std::span<const double> b,
                std::span<double> r);
std::pair<StateVector, double> residual(const StencilOperator& op, const StateVector& x,
                                        const StateVector& b);

}  // namespace skinpar
