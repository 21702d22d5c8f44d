#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace skinpar {

/// Uniform cell-centered Cartesian grid.
///
/// Cells are linearized x-fastest: index(i, j, k) = i + nx * (j + ny * k).
/// The z axis is the permeation axis; k = nz - 1 touches the top face.
struct Grid3D {
  int nx = 2, ny = 2, nz = 2;
  double hx = 1.0, hy = 1.0, hz = 1.0;
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  std::size_t size() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(k));
  }
  std::array<double, 3> center(int i, int j, int k) const {
    return {origin[0] + (i + 0.5) * hx, origin[1] + (j + 0.5) * hy, origin[2] + (k + 0.5) * hz};
  }
  std::array<double, 3> extent() const { return {nx * hx, ny * hy, nz * hz}; }
  double cell_volume() const { return hx * hy * hz; }

  /// Throws std::invalid_argument unless all counts are >= 1 and widths > 0.
  /// Multigrid levels may legitimately collapse an axis to a single cell;
  /// problem grids are held to the stricter `validate_problem_grid`.
  void validate() const;

  bool operator==(const Grid3D&) const = default;
};

/// Problem grids need at least two cells along every axis.
void validate_problem_grid(const Grid3D& grid);

enum class Phase : std::uint8_t { corneocyte, lipid };

/// Idealized stratum-corneum layout: `layers` staggered layers of
/// corneocyte bricks embedded in lipid mortar. Lengths are absolute.
struct BrickMortarSpec {
  int layers = 10;
  std::array<double, 3> brick_extent{40.0, 40.0, 1.0};
  double mortar_width = 1.0;
  /// Lateral shift of every odd layer, as a fraction of the brick pitch.
  double stagger_offset = 0.5;
  double d_cor = 1e-3;
  double d_lip = 1.0;

  /// Height of the brick stack including the lipid sheets above and below.
  double stack_height() const {
    return layers * (brick_extent[2] + mortar_width) + mortar_width;
  }
  bool operator==(const BrickMortarSpec&) const = default;
};

/// Piecewise-constant diffusion coefficient with its phase labels.
struct CoefficientField {
  Grid3D grid;
  std::vector<double> values;
  std::vector<Phase> phase;

  double min() const;
  double max() const;
  /// Fraction of cells labelled corneocyte.
  double corneocyte_fraction() const;
};

/// Rasterizes the brick-and-mortar layout onto `grid` by classifying cell
/// centers. The stack is centered vertically; surplus height is lipid.
///
/// Throws GeometryError for degenerate bricks or a domain that cannot hold
/// the stack (or one lateral brick pitch), ResolutionError when a cell is
/// wider than the mortar, std::invalid_argument for non-positive coefficients.
CoefficientField build_brick_mortar(const BrickMortarSpec& spec, const Grid3D& grid);

/// Field with the same value everywhere, labelled lipid.
CoefficientField uniform_field(const Grid3D& grid, double d);

/// Characteristic lag time lambda^2 / (6 d_eff).
double lag_time(double lambda, double d_eff);

/// Harmonic mean along z of the xy-averaged coefficient profile.
double effective_coefficient_1d(const CoefficientField& field);

}  // namespace skinpar
