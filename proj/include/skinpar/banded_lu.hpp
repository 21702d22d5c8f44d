#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace skinpar {

/// LU factorization with partial pivoting of a banded matrix.
///
/// Storage follows the LAPACK general-band layout: column j keeps rows
/// j-ku-kl .. j+kl, the top kl rows reserved for pivoting fill-in.
class BandedLU {
 public:
  BandedLU() = default;
  BandedLU(std::size_t n, std::size_t kl, std::size_t ku);

  std::size_t size() const { return n_; }
  std::size_t lower_bandwidth() const { return kl_; }
  std::size_t upper_bandwidth() const { return ku_; }

  /// Sets A(i, j) before factorization; |i - j| must lie within the band.
  void set(std::size_t i, std::size_t j, double value);

  /// In-place factorization. Throws SingularMatrix on an exactly zero pivot.
  void factorize();
  bool factorized() const { return factorized_; }

  /// Overwrites b with the solution of A x = b.
  void solve(std::span<double> b) const;

 private:
  double& at(std::size_t i, std::size_t j) { return ab_[j * ldab_ + kv_ + i - j]; }
  double at(std::size_t i, std::size_t j) const { return ab_[j * ldab_ + kv_ + i - j]; }

  std::size_t n_ = 0, kl_ = 0, ku_ = 0, kv_ = 0, ldab_ = 0;
  std::vector<double> ab_;
  std::vector<std::size_t> pivots_;
  bool factorized_ = false;
};

}  // namespace skinpar
