#include "skinpar/grid_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "skinpar/errors.hpp"

namespace skinpar {

void Grid3D::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw std::invalid_argument("grid cell counts must be positive");
  }
  if (!(hx > 0.0) || !(hy > 0.0) || !(hz > 0.0)) {
    throw std::invalid_argument("grid cell widths must be positive");
  }
}

void validate_problem_grid(const Grid3D& grid) {
  grid.validate();
  if (grid.nx < 2 || grid.ny < 2 || grid.nz < 2) {
    throw std::invalid_argument("problem grids need at least two cells per axis");
  }
}

double CoefficientField::min() const { return *std::min_element(values.begin(), values.end()); }

double CoefficientField::max() const { return *std::max_element(values.begin(), values.end()); }

double CoefficientField::corneocyte_fraction() const {
  const auto n = std::count(phase.begin(), phase.end(), Phase::corneocyte);
  return static_cast<double>(n) / static_cast<double>(phase.size());
}

namespace {

// Position inside a periodic lateral pattern [channel | brick] of the given pitch.
bool inside_lateral_brick(double x, double shift, double brick, double pitch, double mortar) {
  double u = std::fmod(x - mortar - shift, pitch);
  if (u < 0.0) u += pitch;
  return u < brick;
}

}  // namespace

CoefficientField build_brick_mortar(const BrickMortarSpec& spec, const Grid3D& grid) {
  validate_problem_grid(grid);
  if (!(spec.d_cor > 0.0) || !(spec.d_lip > 0.0)) {
    throw std::invalid_argument("diffusion coefficients must be positive");
  }
  if (spec.layers < 1) throw GeometryError("at least one corneocyte layer is required");
  if (!(spec.mortar_width > 0.0)) throw GeometryError("mortar width must be positive");
  for (double e : spec.brick_extent) {
    if (!(e > 0.0)) throw GeometryError("corneocyte bricks must have positive extent");
  }
  if (!(spec.stagger_offset >= 0.0 && spec.stagger_offset < 1.0)) {
    throw GeometryError("stagger offset must lie in [0, 1)");
  }

  const double m = spec.mortar_width;
  if (grid.hx > m || grid.hy > m || grid.hz > m) {
    throw ResolutionError("cells wider than the mortar width leave lipid channels unresolved");
  }
  const auto ext = grid.extent();
  const double pitch_x = spec.brick_extent[0] + m;
  const double pitch_y = spec.brick_extent[1] + m;
  const double pitch_z = spec.brick_extent[2] + m;
  if (ext[2] < spec.stack_height()) {
    throw GeometryError("domain height " + std::to_string(ext[2]) + " is below the stack height " +
                        std::to_string(spec.stack_height()));
  }
  if (ext[0] < pitch_x || ext[1] < pitch_y) {
    throw GeometryError("domain must hold at least one lateral brick pitch");
  }

  const double pad = 0.5 * (ext[2] - spec.stack_height());

  CoefficientField field;
  field.grid = grid;
  field.values.resize(grid.size());
  field.phase.resize(grid.size());
  for (int k = 0; k < grid.nz; ++k) {
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) {
        const auto c = grid.center(i, j, k);
        const double z = c[2] - grid.origin[2] - pad - m;
        bool brick = false;
        if (z >= 0.0) {
          const int layer = static_cast<int>(std::floor(z / pitch_z));
          if (layer < spec.layers && z - layer * pitch_z < spec.brick_extent[2]) {
            const double sx = (layer % 2 == 1) ? spec.stagger_offset * pitch_x : 0.0;
            const double sy = (layer % 2 == 1) ? spec.stagger_offset * pitch_y : 0.0;
            brick = inside_lateral_brick(c[0] - grid.origin[0], sx, spec.brick_extent[0], pitch_x, m) &&
                    inside_lateral_brick(c[1] - grid.origin[1], sy, spec.brick_extent[1], pitch_y, m);
          }
        }
        const auto idx = grid.index(i, j, k);
        field.phase[idx] = brick ? Phase::corneocyte : Phase::lipid;
        field.values[idx] = brick ? spec.d_cor : spec.d_lip;
      }
    }
  }
  return field;
}

CoefficientField uniform_field(const Grid3D& grid, double d) {
  grid.validate();
  if (!(d > 0.0)) throw std::invalid_argument("diffusion coefficient must be positive");
  CoefficientField field;
  field.grid = grid;
  field.values.assign(grid.size(), d);
  field.phase.assign(grid.size(), Phase::lipid);
  return field;
}

double lag_time(double lambda, double d_eff) {
  if (!(lambda > 0.0) || !(d_eff > 0.0)) {
    throw std::invalid_argument("lag time needs positive thickness and diffusivity");
  }
  return lambda * lambda / (6.0 * d_eff);
}

double effective_coefficient_1d(const CoefficientField& field) {
  const auto& g = field.grid;
  if (field.values.size() != g.size()) throw std::invalid_argument("field size does not match its grid");
  const std::size_t plane = static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny);
  double resistance = 0.0;
  for (int k = 0; k < g.nz; ++k) {
    const auto first = field.values.begin() + static_cast<std::ptrdiff_t>(k * plane);
    const double mean = std::accumulate(first, first + static_cast<std::ptrdiff_t>(plane), 0.0) /
                        static_cast<double>(plane);
    if (!(mean > 0.0)) throw std::invalid_argument("field values must be positive");
    resistance += 1.0 / mean;
  }
  return static_cast<double>(g.nz) / resistance;
}

}  // namespace skinpar
