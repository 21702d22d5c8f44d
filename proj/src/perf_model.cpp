#include "skinpar/perf_model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "skinpar/errors.hpp"
#include "skinpar/parareal.hpp"

namespace skinpar {

double CostProfile::total_coarse() const {
  return std::accumulate(gamma_c.begin(), gamma_c.end(), 0.0);
}

double CostProfile::total_fine() const {
  return std::accumulate(gamma_f.begin(), gamma_f.end(), 0.0);
}

void CostProfile::validate() const {
  if (gamma_c.size() != gamma_f.size()) throw std::invalid_argument("cost profile lengths differ");
  if (gamma_c.empty()) throw std::invalid_argument("empty cost profile");
  for (double v : gamma_c)
    if (!(v >= 0.0)) throw std::invalid_argument("negative coarse cost");
  for (double v : gamma_f)
    if (!(v >= 0.0)) throw std::invalid_argument("negative fine cost");
}

double speedup_simple(int n_iter, int n_sub, double nc_over_nf, double tauc_over_tauf) {
  if (n_iter < 1 || n_sub < 1 || !(nc_over_nf > 0.0) || !(tauc_over_tauf > 0.0)) {
    throw std::invalid_argument("speedup model needs positive inputs");
  }
  const double r = static_cast<double>(n_iter) / n_sub;
  return 1.0 / ((1.0 + r) * nc_over_nf * tauc_over_tauf + r);
}

SpeedupEstimate speedup_general(const CostProfile& profile, int n_iter) {
  profile.validate();
  if (n_iter < 1) throw std::invalid_argument("speedup model needs at least one iteration");
  SpeedupEstimate e;
  e.model = "general";
  e.n_sub = static_cast<int>(profile.n_sub());
  e.n_iter = n_iter;
  e.total_coarse = profile.total_coarse();
  e.total_fine = profile.total_fine();
  if (!(e.total_fine > 0.0)) throw std::invalid_argument("degenerate profile: no fine work");
  for (std::size_t n = 0; n < profile.n_sub(); ++n) {
    e.gamma_x = std::max(e.gamma_x, profile.gamma_c[n] + profile.gamma_f[n]);
  }
  e.value = e.total_fine / (e.total_coarse + n_iter * e.gamma_x);
  return e;
}

CostProfile imbalance_scenario(int n_sub, double b) {
  if (n_sub < 4) throw std::invalid_argument("imbalance scenario needs at least 4 subintervals");
  if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("imbalance factor must lie in [0, 1]");
  CostProfile p;
  p.gamma_c.assign(static_cast<std::size_t>(n_sub), 1.0);
  p.gamma_f.assign(static_cast<std::size_t>(n_sub), 10.0);
  p.gamma_f[3] = (1.0 + b) * 10.0;
  p.gamma_f[2] = (1.0 - b) * 10.0;
  return p;
}

double weak_scaling_efficiency(int n_sub, int n_iter, double sigma) {
  if (n_sub < 1 || n_iter < 1 || !(sigma > 0.0)) {
    throw std::invalid_argument("efficiency model needs positive inputs");
  }
  const double a = n_sub * sigma;
  const double c = n_iter * (1.0 + sigma);
  return (a + c) / (2.0 * a + c);
}

double simulate_pipeline(const std::vector<std::vector<double>>& coarse,
                         const std::vector<std::vector<double>>& fine,
                         const std::vector<std::vector<bool>>& active) {
  if (coarse.empty()) throw std::invalid_argument("no iterations to simulate");
  const std::size_t iters = coarse.size();
  const std::size_t n_sub = coarse[0].size();
  if (fine.size() != iters || active.size() != iters) {
    throw std::invalid_argument("cost tables disagree on the iteration count");
  }
  // avail: when the worker is free; out: when its latest boundary value was sent.
  std::vector<double> avail(n_sub, 0.0), out(n_sub, 0.0);
  double upstream = 0.0;
  for (std::size_t n = 0; n < n_sub; ++n) {
    avail[n] = std::max(avail[n], upstream) + coarse[0][n];
    out[n] = upstream = avail[n];
  }
  for (std::size_t k = 1; k < iters; ++k) {
    if (coarse[k].size() != n_sub || fine[k].size() != n_sub || active[k].size() != n_sub) {
      throw std::invalid_argument("cost table row has the wrong length");
    }
    upstream = 0.0;
    for (std::size_t n = 0; n < n_sub; ++n) {
      if (!active[k][n]) {
        upstream = out[n];
        continue;
      }
      const double fine_done = avail[n] + fine[k][n];
      avail[n] = std::max(fine_done, upstream) + coarse[k][n];
      out[n] = upstream = avail[n];
    }
  }
  return *std::max_element(avail.begin(), avail.end());
}

double simulate_pipeline(const CostProfile& profile, int n_iter) {
  profile.validate();
  if (n_iter < 0) throw std::invalid_argument("negative iteration count");
  const auto rows = static_cast<std::size_t>(n_iter) + 1;
  std::vector<std::vector<double>> c(rows, profile.gamma_c), f(rows, profile.gamma_f);
  std::vector<std::vector<bool>> a(rows, std::vector<bool>(profile.n_sub(), true));
  return simulate_pipeline(c, f, a);
}

ModelReport validate_model(const PararealTrace& trace, const SerialRun& serial, double flag_below) {
  if (trace.coarse_costs.empty() || trace.iterations < 1) {
    throw std::invalid_argument("trace holds no Parareal iteration");
  }
  const auto n_sub = static_cast<std::size_t>(trace.n_sub);
  if (serial.costs.size() != n_sub || trace.coarse_costs[0].size() != n_sub) {
    throw std::invalid_argument("trace and serial run cover different subintervals");
  }
  CostProfile profile;
  for (std::size_t n = 0; n < n_sub; ++n) {
    if (trace.coarse_costs[0][n].empty() || serial.costs[n].empty()) {
      throw std::invalid_argument("missing cost data for subinterval " + std::to_string(n));
    }
    profile.gamma_c.push_back(trace.coarse_costs[0][n].total_seconds());
    profile.gamma_f.push_back(serial.costs[n].total_seconds());
  }
  ModelReport r;
  r.predicted = speedup_general(profile, trace.iterations);
  r.serial_seconds = profile.total_fine();
  r.simulated = trace.backend == Backend::sequential;
  r.parallel_seconds = r.simulated ? simulate_pipeline(profile, trace.iterations) : trace.wall_seconds;
  if (!(r.parallel_seconds > 0.0)) throw std::invalid_argument("parallel run has no duration");
  r.measured_speedup = r.serial_seconds / r.parallel_seconds;
  r.ratio = r.measured_speedup / r.predicted.value;
  r.flagged = r.ratio < flag_below;
  return r;
}

std::vector<CurvePoint> imbalance_curves(const std::vector<int>& n_subs, const std::vector<double>& bs,
                                         int n_iter) {
  std::vector<CurvePoint> out;
  for (double b : bs) {
    for (int n : n_subs) {
      if (n < 4 && b != 0.0) continue;
      const CostProfile flat{std::vector<double>(static_cast<std::size_t>(n), 1.0),
                             std::vector<double>(static_cast<std::size_t>(n), 10.0)};
      const double ideal = speedup_general(flat, n_iter).value;
      const double imb = n < 4 ? ideal : speedup_general(imbalance_scenario(n, b), n_iter).value;
      out.push_back({n, b, n_iter, ideal, imb});
    }
  }
  return out;
}

}  // namespace skinpar
