#include "skinpar/multigrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skinpar/errors.hpp"

namespace skinpar {

void MGConfig::validate() const {
  if (!(omega > 0.0 && omega < 1.0)) throw std::invalid_argument("Jacobi damping must lie in (0, 1)");
  if (pre_smooth < 1 || post_smooth < 1) throw std::invalid_argument("smoothing steps must be >= 1");
  if (max_cycles < 1) throw std::invalid_argument("cycle budget must be >= 1");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("relative tolerance must be positive");
  if (coarsest_max_unknowns < 1) throw std::invalid_argument("coarsest level needs unknowns");
}

Grid3D coarsen(const Grid3D& fine) {
  Grid3D c = fine;
  if (fine.nx % 2 == 0) c.nx = fine.nx / 2, c.hx = 2.0 * fine.hx;
  if (fine.ny % 2 == 0) c.ny = fine.ny / 2, c.hy = 2.0 * fine.hy;
  if (fine.nz % 2 == 0) c.nz = fine.nz / 2, c.hz = 2.0 * fine.hz;
  return c;
}

namespace {

bool is_coarsening_of(const Grid3D& fine, const Grid3D& coarse) { return coarsen(fine) == coarse; }

// Child index range [lo, hi) of coarse index I along one axis.
inline std::pair<int, int> children(int I, int n_fine, int n_coarse) {
  if (n_fine == n_coarse) return {I, I + 1};
  return {2 * I, 2 * I + 2};
}

}  // namespace

MGHierarchy::MGHierarchy(const Grid3D& grid, std::span<const double> coefficients,
                         const BoundarySpec& bc, double dt, std::size_t coarsest_max_unknowns)
    : dt_(dt) {
  if (coarsest_max_unknowns < 1) throw std::invalid_argument("coarsest level needs unknowns");
  {
    std::vector<double> d(coefficients.begin(), coefficients.end());
    StencilOperator op = assemble(grid, d, bc, dt);
    levels_.push_back({grid, std::move(d), std::move(op)});
  }
  const BoundarySpec homogeneous{0.0, 0.0, true};
  while (levels_.back().grid.size() > coarsest_max_unknowns) {
    const MGLevel& f = levels_.back();
    const Grid3D cg = coarsen(f.grid);
    if (cg.size() == f.grid.size()) break;
    std::vector<double> cc(cg.size());
    restrict_to_coarse(f.grid, f.coefficients, cg, cc);
    StencilOperator cop = assemble(cg, cc, homogeneous, dt);
    levels_.push_back({cg, std::move(cc), std::move(cop)});
  }
  coarse_lu_ = std::make_shared<const BandedLU>(factorize(levels_.back().op));
}

MGHierarchy::MGHierarchy(const CoefficientField& field, const BoundarySpec& bc, double dt,
                         std::size_t coarsest_max_unknowns)
    : MGHierarchy(field.grid, field.values, bc, dt, coarsest_max_unknowns) {}

namespace {

void smooth_with(const StencilOperator& op, std::span<double> x, std::span<const double> b,
                 double omega, int steps, std::span<double> scratch) {
  for (int s = 0; s < steps; ++s) {
    apply(op, x, scratch);
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double d = op.weights[c][StencilOperator::center];
      x[c] += omega * (b[c] - scratch[c]) / d;
    }
  }
}

void check_diagonal(const StencilOperator& op) {
  for (const auto& w : op.weights) {
    if (w[StencilOperator::center] == 0.0) throw SingularMatrix("zero diagonal in Jacobi smoother");
  }
}

}  // namespace

void smooth(const StencilOperator& op, std::span<double> x, std::span<const double> b, double omega,
            int steps) {
  if (steps < 0) throw std::invalid_argument("negative smoothing step count");
  if (x.size() != op.grid.size() || b.size() != op.grid.size()) {
    throw GridMismatch("vector size does not match the operator grid");
  }
  check_diagonal(op);
  std::vector<double> scratch(x.size());
  smooth_with(op, x, b, omega, steps, scratch);
}

StateVector smooth(const StencilOperator& op, const StateVector& x, const StateVector& b,
                   double omega, int steps) {
  if (!(x.grid == op.grid) || !(b.grid == op.grid)) throw GridMismatch("smoother grid mismatch");
  StateVector out = x;
  smooth(op, out.values, b.values, omega, steps);
  return out;
}

void restrict_to_coarse(const Grid3D& fine, std::span<const double> fine_values, const Grid3D& coarse,
                        std::span<double> coarse_values) {
  if (!is_coarsening_of(fine, coarse)) throw GridMismatch("restriction between non-adjacent levels");
  if (fine_values.size() != fine.size() || coarse_values.size() != coarse.size()) {
    throw GridMismatch("restriction vector sizes do not match the grids");
  }
  for (int K = 0; K < coarse.nz; ++K) {
    const auto [k0, k1] = children(K, fine.nz, coarse.nz);
    for (int J = 0; J < coarse.ny; ++J) {
      const auto [j0, j1] = children(J, fine.ny, coarse.ny);
      for (int I = 0; I < coarse.nx; ++I) {
        const auto [i0, i1] = children(I, fine.nx, coarse.nx);
        double s = 0.0;
        int count = 0;
        for (int k = k0; k < k1; ++k)
          for (int j = j0; j < j1; ++j)
            for (int i = i0; i < i1; ++i, ++count) s += fine_values[fine.index(i, j, k)];
        coarse_values[coarse.index(I, J, K)] = s / count;
      }
    }
  }
}

StateVector restrict_to_coarse(const StateVector& fine) {
  const Grid3D cg = coarsen(fine.grid);
  StateVector out{cg, std::vector<double>(cg.size()), fine.time};
  restrict_to_coarse(fine.grid, fine.values, cg, out.values);
  return out;
}

void prolong_to_fine(const Grid3D& coarse, std::span<const double> coarse_values, const Grid3D& fine,
                     std::span<double> fine_values, bool accumulate) {
  if (!is_coarsening_of(fine, coarse)) throw GridMismatch("prolongation between non-adjacent levels");
  if (fine_values.size() != fine.size() || coarse_values.size() != coarse.size()) {
    throw GridMismatch("prolongation vector sizes do not match the grids");
  }
  const int rx = fine.nx == coarse.nx ? 1 : 2;
  const int ry = fine.ny == coarse.ny ? 1 : 2;
  const int rz = fine.nz == coarse.nz ? 1 : 2;
  for (int k = 0; k < fine.nz; ++k) {
    for (int j = 0; j < fine.ny; ++j) {
      const std::size_t crow = coarse.index(0, j / ry, k / rz);
      const std::size_t frow = fine.index(0, j, k);
      for (int i = 0; i < fine.nx; ++i) {
        const double v = coarse_values[crow + static_cast<std::size_t>(i / rx)];
        if (accumulate) {
          fine_values[frow + static_cast<std::size_t>(i)] += v;
        } else {
          fine_values[frow + static_cast<std::size_t>(i)] = v;
        }
      }
    }
  }
}

StateVector prolong_to_fine(const StateVector& coarse, const Grid3D& fine) {
  StateVector out{fine, std::vector<double>(fine.size()), coarse.time};
  prolong_to_fine(coarse.grid, coarse.values, fine, out.values);
  return out;
}

BandedLU factorize(const StencilOperator& op) {
  const Grid3D& g = op.grid;
  const std::size_t n = g.size();
  const std::size_t band = static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny);
  const std::size_t bw = std::min(band, n - 1);
  BandedLU lu(n, bw, bw);
  const std::size_t sy = static_cast<std::size_t>(g.nx);
  for (int k = 0; k < g.nz; ++k) {
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t c = g.index(i, j, k);
        const auto& w = op.weights[c];
        lu.set(c, c, w[StencilOperator::center]);
        if (i > 0) lu.set(c, c - 1, w[StencilOperator::xm]);
        if (i + 1 < g.nx) lu.set(c, c + 1, w[StencilOperator::xp]);
        if (j > 0) lu.set(c, c - sy, w[StencilOperator::ym]);
        if (j + 1 < g.ny) lu.set(c, c + sy, w[StencilOperator::yp]);
        if (k > 0) lu.set(c, c - band, w[StencilOperator::zm]);
        if (k + 1 < g.nz) lu.set(c, c + band, w[StencilOperator::zp]);
      }
    }
  }
  lu.factorize();
  return lu;
}

StateVector coarse_solve(const StencilOperator& op, const StateVector& b) {
  if (!(b.grid == op.grid)) throw GridMismatch("right-hand side and operator grids differ");
  const BandedLU lu = factorize(op);
  StateVector x = b;
  for (std::size_t c = 0; c < x.values.size(); ++c) x.values[c] -= op.constant[c];
  lu.solve(x.values);
  return x;
}

namespace {

// Per-axis cell-centered linear interpolation stencil for fine index i. Next
// to a Dirichlet wall the correction is interpolated towards zero at the wall.
struct Axis1D {
  int c0, c1;
  double w0, w1;
};

Axis1D linear_axis(int i, int n_fine, int n_coarse, bool dirichlet) {
  if (n_fine == n_coarse) return {i, i, 1.0, 0.0};
  const int I = i / 2;
  const int nb = (i % 2 == 0) ? I - 1 : I + 1;
  if (nb < 0 || nb >= n_coarse) {
    if (dirichlet) return {I, I, 0.5, 0.0};
    return {I, I, 1.0, 0.0};
  }
  return {I, nb, 0.75, 0.25};
}

}  // namespace

void interpolate_to_fine(const Grid3D& coarse, std::span<const double> xc, const Grid3D& fine,
                         std::span<double> xf, bool accumulate) {
  if (!is_coarsening_of(fine, coarse)) throw GridMismatch("interpolation between non-adjacent levels");
  if (xf.size() != fine.size() || xc.size() != coarse.size()) {
    throw GridMismatch("interpolation vector sizes do not match the grids");
  }
  for (int k = 0; k < fine.nz; ++k) {
    const Axis1D az = linear_axis(k, fine.nz, coarse.nz, true);
    for (int j = 0; j < fine.ny; ++j) {
      const Axis1D ay = linear_axis(j, fine.ny, coarse.ny, false);
      for (int i = 0; i < fine.nx; ++i) {
        const Axis1D ax = linear_axis(i, fine.nx, coarse.nx, false);
        double s = 0.0;
        for (int a = 0; a < 2; ++a) {
          const double wz = a ? az.w1 : az.w0;
          if (wz == 0.0) continue;
          const int kk = a ? az.c1 : az.c0;
          for (int bb = 0; bb < 2; ++bb) {
            const double wy = bb ? ay.w1 : ay.w0;
            if (wy == 0.0) continue;
            const int jj = bb ? ay.c1 : ay.c0;
            s += wz * wy * (ax.w0 * xc[coarse.index(ax.c0, jj, kk)] +
                            (ax.w1 != 0.0 ? ax.w1 * xc[coarse.index(ax.c1, jj, kk)] : 0.0));
          }
        }
        double& out = xf[fine.index(i, j, k)];
        out = accumulate ? out + s : s;
      }
    }
  }
}

StateVector interpolate_to_fine(const StateVector& coarse, const Grid3D& fine) {
  StateVector out{fine, std::vector<double>(fine.size()), coarse.time};
  interpolate_to_fine(coarse.grid, coarse.values, fine, out.values);
  return out;
}

namespace {

struct Workspace {
  std::vector<std::vector<double>> x, b, r;
};

void vcycle(const MGHierarchy& h, const MGConfig& cfg, std::size_t l, std::span<double> x,
            std::span<const double> b, Workspace& ws) {
  const MGLevel& lev = h.level(l);
  if (l + 1 == h.levels()) {
    for (std::size_t c = 0; c < x.size(); ++c) x[c] = b[c] - lev.op.constant[c];
    h.coarse_factorization().solve(x);
    return;
  }
  std::vector<double>& r = ws.r[l];
  smooth_with(lev.op, x, b, cfg.omega, cfg.pre_smooth, r);
  apply(lev.op, x, r);
  for (std::size_t c = 0; c < r.size(); ++c) r[c] = b[c] - r[c];

  const MGLevel& coarse = h.level(l + 1);
  std::vector<double>& bc = ws.b[l + 1];
  std::vector<double>& xc = ws.x[l + 1];
  restrict_to_coarse(lev.grid, r, coarse.grid, bc);
  std::fill(xc.begin(), xc.end(), 0.0);
  vcycle(h, cfg, l + 1, xc, bc, ws);
  interpolate_to_fine(coarse.grid, xc, lev.grid, x, true);
  smooth_with(lev.op, x, b, cfg.omega, cfg.post_smooth, r);
}

}  // namespace

MGResult solve(const MGHierarchy& hierarchy, const StateVector& b, const StateVector& x0,
               const MGConfig& cfg) {
  cfg.validate();
  const StencilOperator& op = hierarchy.fine_operator();
  if (!(b.grid == op.grid) || !(x0.grid == op.grid)) throw GridMismatch("solve grid mismatch");

  Workspace ws;
  ws.x.resize(hierarchy.levels());
  ws.b.resize(hierarchy.levels());
  ws.r.resize(hierarchy.levels());
  for (std::size_t l = 0; l < hierarchy.levels(); ++l) {
    const std::size_t n = hierarchy.level(l).grid.size();
    ws.r[l].resize(n);
    if (l > 0) ws.x[l].resize(n), ws.b[l].resize(n);
  }

  double ref = 0.0;
  for (std::size_t c = 0; c < b.values.size(); ++c) {
    const double v = b.values[c] - op.constant[c];
    ref += v * v;
  }
  ref = std::sqrt(ref);
  if (ref == 0.0) ref = 1.0;

  MGResult out;
  out.x = x0;
  out.x.time = b.time;
  std::vector<double>& r = ws.r[0];
  double rel = residual(op, out.x.values, b.values, r) / ref;
  out.initial_residual = rel;
  while (rel > cfg.rel_tol && out.cycles < cfg.max_cycles) {
    vcycle(hierarchy, cfg, 0, out.x.values, b.values, ws);
    ++out.cycles;
    rel = residual(op, out.x.values, b.values, r) / ref;
    out.residual_history.push_back(rel);
  }
  out.converged = rel <= cfg.rel_tol;
  return out;
}

}  // namespace skinpar
