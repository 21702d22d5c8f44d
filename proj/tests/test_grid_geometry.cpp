#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "skinpar/errors.hpp"
#include "skinpar/grid_geometry.hpp"

using namespace skinpar;

namespace {

struct Box {
  double lo[3], hi[3];
};

// Bricks written out one by one, independently of the periodic classifier.
std::vector<Box> enumerate_bricks(const BrickMortarSpec& s, const Grid3D& g) {
  const auto ext = g.extent();
  const double m = s.mortar_width;
  const double pad = 0.5 * (ext[2] - s.stack_height());
  std::vector<Box> out;
  for (int l = 0; l < s.layers; ++l) {
    const double z0 = pad + m + l * (s.brick_extent[2] + m);
    const double px = s.brick_extent[0] + m, py = s.brick_extent[1] + m;
    const double sx = l % 2 ? s.stagger_offset * px : 0.0, sy = l % 2 ? s.stagger_offset * py : 0.0;
    for (int a = -2; a * px < ext[0] + px; ++a)
      for (int b = -2; b * py < ext[1] + py; ++b) {
        Box box{{m + sx + a * px, m + sy + b * py, z0},
                {m + sx + a * px + s.brick_extent[0], m + sy + b * py + s.brick_extent[1], z0 + s.brick_extent[2]}};
        out.push_back(box);
      }
  }
  return out;
}

bool in_any(const std::vector<Box>& boxes, double x, double y, double z) {
  for (const auto& b : boxes)
    if (x >= b.lo[0] && x < b.hi[0] && y >= b.lo[1] && y < b.hi[1] && z >= b.lo[2] && z < b.hi[2]) return true;
  return false;
}

double clipped_volume(const std::vector<Box>& boxes, const Grid3D& g) {
  const auto e = g.extent();
  double v = 0.0;
  for (const auto& b : boxes) {
    double p = 1.0;
    for (int a = 0; a < 3; ++a) p *= std::max(0.0, std::min(b.hi[a], e[a]) - std::max(b.lo[a], 0.0));
    v += p;
  }
  return v;
}

}  // namespace

TEST_CASE("default layout matches brute-force point-in-brick classification") {
  const BrickMortarSpec spec;  // 10 layers, 40 x 40 x 1 bricks
  Grid3D g;
  g.nx = g.ny = 82;
  g.nz = 21;
  const CoefficientField f = build_brick_mortar(spec, g);
  const auto boxes = enumerate_bricks(spec, g);
  std::size_t mismatches = 0, bricks = 0;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const auto c = g.center(i, j, k);
        const bool b = in_any(boxes, c[0], c[1], c[2]);
        bricks += b;
        mismatches += b != (f.phase[g.index(i, j, k)] == Phase::corneocyte);
      }
  CHECK(mismatches == 0);
  CHECK(f.corneocyte_fraction() == doctest::Approx(double(bricks) / g.size()).epsilon(1e-15));

  // Analytic fraction, within one cell layer of every brick face.
  const double analytic = clipped_volume(boxes, g) / (82.0 * 82.0 * 21.0);
  CHECK(analytic == doctest::Approx(10.0 * 80 * 80 / (82.0 * 82 * 21)).epsilon(1e-12));
  const double face_layer = 10.0 * 2 * (2 * 80.0 + 2 * 80.0) * 1.0 / (82.0 * 82 * 21);
  CHECK(std::abs(f.corneocyte_fraction() - analytic) <= face_layer);
  CHECK(f.min() == 1e-3);
  CHECK(f.max() == 1.0);
}

TEST_CASE("staggering moves odd layers by half a pitch") {
  BrickMortarSpec s = oracle::small_spec();
  const Grid3D g = oracle::cube(16);
  const CoefficientField f = build_brick_mortar(s, g);
  const auto boxes = enumerate_bricks(s, g);
  for (int k = 0; k < 16; ++k)
    for (int j = 0; j < 16; ++j)
      for (int i = 0; i < 16; ++i) {
        const auto c = g.center(i, j, k);
        REQUIRE(in_any(boxes, c[0], c[1], c[2]) == (f.phase[g.index(i, j, k)] == Phase::corneocyte));
      }
  s.stagger_offset = 0.0;
  const CoefficientField aligned = build_brick_mortar(s, g);
  CHECK(aligned.values != f.values);
}

TEST_CASE("geometry errors") {
  const Grid3D g = oracle::cube(16);
  BrickMortarSpec s = oracle::small_spec();
  SUBCASE("stack taller than the domain") {
    s.layers = 5;
    CHECK_THROWS_AS(build_brick_mortar(s, g), GeometryError);
  }
  SUBCASE("zero-volume brick") {
    s.brick_extent[2] = 0.0;
    CHECK_THROWS_AS(build_brick_mortar(s, g), GeometryError);
  }
  SUBCASE("no layers") {
    s.layers = 0;
    CHECK_THROWS_AS(build_brick_mortar(s, g), GeometryError);
  }
  SUBCASE("stagger outside [0, 1)") {
    s.stagger_offset = 1.0;
    CHECK_THROWS_AS(build_brick_mortar(s, g), GeometryError);
  }
  SUBCASE("lateral extent below one pitch") {
    s.brick_extent[0] = 20.0;
    CHECK_THROWS_AS(build_brick_mortar(s, g), GeometryError);
  }
  SUBCASE("unresolved mortar") {
    s.mortar_width = 0.5;
    CHECK_THROWS_AS(build_brick_mortar(s, g), ResolutionError);
  }
  SUBCASE("non-positive coefficient") {
    s.d_cor = 0.0;
    CHECK_THROWS_AS(build_brick_mortar(s, g), std::invalid_argument);
  }
  SUBCASE("degenerate grid") {
    Grid3D flat = g;
    flat.nz = 1;
    CHECK_THROWS_AS(build_brick_mortar(s, flat), std::invalid_argument);
  }
}

TEST_CASE("uniform field and grid basics") {
  const Grid3D g = oracle::cube(4, 0.5);
  const CoefficientField f = uniform_field(g, 0.25);
  CHECK(f.min() == 0.25);
  CHECK(f.max() == 0.25);
  CHECK(f.corneocyte_fraction() == 0.0);
  CHECK(g.index(1, 2, 3) == 1 + 4 * (2 + 4 * 3));
  CHECK(g.center(0, 0, 3)[2] == doctest::Approx(1.75));
  CHECK(g.cell_volume() == 0.125);
  CHECK_THROWS_AS(uniform_field(g, -1.0), std::invalid_argument);
  Grid3D bad = g;
  bad.hx = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("lag time and effective coefficient") {
  CHECK(lag_time(6.0, 1.0) == doctest::Approx(6.0));
  CHECK_THROWS_AS(lag_time(0.0, 1.0), std::invalid_argument);

  // Uniform field: the effective coefficient is the coefficient itself.
  CHECK(effective_coefficient_1d(uniform_field(oracle::cube(4), 0.3)) == doctest::Approx(0.3));

  // Two plane layers in series: harmonic mean.
  Grid3D g = oracle::cube(2);
  CoefficientField f = uniform_field(g, 1.0);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) f.values[g.index(i, j, 1)] = 0.25;
  CHECK(effective_coefficient_1d(f) == doctest::Approx(2.0 / (1.0 + 4.0)));

  // Brick-mortar lies strictly between the two phases.
  const auto bm = build_brick_mortar(oracle::small_spec(), oracle::cube(16));
  const double d = effective_coefficient_1d(bm);
  CHECK(d > 1e-3);
  CHECK(d < 1.0);
}
