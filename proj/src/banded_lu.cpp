#include "skinpar/banded_lu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "skinpar/errors.hpp"

namespace skinpar {

BandedLU::BandedLU(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), kv_(kl + ku), ldab_(2 * kl + ku + 1), ab_(n * (2 * kl + ku + 1), 0.0),
      pivots_(n, 0) {}

void BandedLU::set(std::size_t i, std::size_t j, double value) {
  if (i >= n_ || j >= n_ || (i > j && i - j > kl_) || (j > i && j - i > ku_)) {
    throw std::out_of_range("entry outside the band");
  }
  at(i, j) = value;
  factorized_ = false;
}

void BandedLU::factorize() {
  // Right-looking elimination; ju tracks the last column touched by fill-in.
  std::size_t ju = 0;
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t km = std::min(kl_, n_ - 1 - j);
    std::size_t jp = 0;
    double best = std::abs(at(j, j));
    for (std::size_t r = 1; r <= km; ++r) {
      const double v = std::abs(at(j + r, j));
      if (v > best) {
        best = v;
        jp = r;
      }
    }
    pivots_[j] = j + jp;
    if (best == 0.0) throw SingularMatrix("zero pivot in column " + std::to_string(j));

    ju = std::max(ju, std::min(j + ku_ + jp, n_ - 1));
    if (jp != 0) {
      for (std::size_t c = j; c <= ju; ++c) std::swap(at(j, c), at(j + jp, c));
    }
    if (km == 0) continue;

    const double inv = 1.0 / at(j, j);
    double* lcol = &at(j + 1, j);
    for (std::size_t r = 0; r < km; ++r) lcol[r] *= inv;
    for (std::size_t c = j + 1; c <= ju; ++c) {
      const double u = at(j, c);
      if (u == 0.0) continue;
      double* col = &at(j + 1, c);
      for (std::size_t r = 0; r < km; ++r) col[r] -= lcol[r] * u;
    }
  }
  factorized_ = true;
}

void BandedLU::solve(std::span<double> b) const {
  if (!factorized_) throw std::logic_error("BandedLU::solve before factorize");
  if (b.size() != n_) throw std::invalid_argument("right-hand side has the wrong length");
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t p = pivots_[j];
    if (p != j) std::swap(b[j], b[p]);
    const std::size_t km = std::min(kl_, n_ - 1 - j);
    const double bj = b[j];
    if (bj == 0.0) continue;
    for (std::size_t r = 1; r <= km; ++r) b[j + r] -= at(j + r, j) * bj;
  }
  for (std::size_t jj = n_; jj-- > 0;) {
    b[jj] /= at(jj, jj);
    const double bj = b[jj];
    if (bj == 0.0) continue;
    const std::size_t lo = jj > kv_ ? jj - kv_ : 0;
    for (std::size_t i = lo; i < jj; ++i) b[i] -= at(i, jj) * bj;
  }
}

}  // namespace skinpar
