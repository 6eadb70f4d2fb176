#pragma once

#include <cstddef>

#include "distseq/types.hpp"

namespace distseq {

inline constexpr std::size_t kDefaultRefreshEvery = 512;

/// Incremental sufficient statistics of one least-squares stream.
///
/// Holds the Gram matrix sum(x x^T), the cross moments sum(x y) and sum(y^2).
/// Once the Gram matrix reaches full rank the state also carries its inverse
/// and log-determinant, which are then maintained by Sherman-Morrison updates
/// and re-derived from a Cholesky factorization every `refresh_every` updates.
class GramState {
 public:
  explicit GramState(Index p, std::size_t refresh_every = kDefaultRefreshEvery);

  /// Absorb one observation (x, y). Throws std::invalid_argument on
  /// non-finite input or a dimension mismatch.
  void absorb(const Eigen::Ref<const Vector>& x, double y);

  /// Recompute inverse and log-determinant from the Gram matrix.
  /// Throws RankDeficient when the Gram matrix is not positive definite.
  void refresh();

  std::size_t n() const { return n_; }
  Index p() const { return p_; }
  bool invertible() const { return invertible_; }
  std::size_t refresh_every() const { return refresh_every_; }

  const Matrix& gram() const { return gram_; }
  const Vector& xty() const { return xty_; }
  double yty() const { return yty_; }

  // Both throw RankDeficient before the Gram matrix is invertible.
  const Matrix& gram_inv() const;
  double log_det() const;

 private:
  bool try_establish();

  std::size_t n_ = 0;
  Index p_;
  std::size_t refresh_every_;
  std::size_t since_refresh_ = 0;
  bool invertible_ = false;
  Matrix gram_;
  Matrix gram_inv_;
  double log_det_ = 0.0;
  Vector xty_;
  double yty_ = 0.0;
};

// Value-style wrappers around the member operations.
GramState rank_one_update(GramState state, const Eigen::Ref<const Vector>& x, double y);
GramState direct_refresh(GramState state);

/// Inverse and log-determinant of an SPD matrix by Cholesky factorization.
struct Factorization {
  Matrix inverse;
  double log_det;
};
Factorization factorize_spd(const Matrix& a);

/// Extreme eigenvalues of a symmetric matrix. Throws std::invalid_argument if
/// `s` is not square, not finite, or asymmetric beyond 1e-8 (relative).
double min_eig(const Matrix& s);
double max_eig(const Matrix& s);

}  // namespace distseq
