#include "distseq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace distseq {

namespace {

// Cholesky pivots below this fraction of the largest diagonal entry are
// treated as rank deficiency.
constexpr double kPivotTolerance = 1e-12;

void check_symmetric(const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() == 0) {
    throw std::invalid_argument("eigenvalue: matrix must be square and non-empty");
  }
  if (!s.allFinite()) {
    throw std::invalid_argument("eigenvalue: matrix has non-finite entries");
  }
  const double scale = std::max(1.0, s.cwiseAbs().rowwise().sum().maxCoeff());
  const double skew = (s - s.transpose()).cwiseAbs().rowwise().sum().maxCoeff();
  if (skew > 1e-8 * scale) {
    throw std::invalid_argument("eigenvalue: matrix is not symmetric");
  }
}

Vector eigenvalues(const Matrix& s) {
  check_symmetric(s);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue: solver did not converge");
  }
  return solver.eigenvalues();
}

}  // namespace

Factorization factorize_spd(const Matrix& a) {
  const Index p = a.rows();
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw RankDeficient("Cholesky factorization failed");
  }
  const auto l = llt.matrixLLT().diagonal();
  const double max_diag = a.diagonal().maxCoeff();
  double log_det = 0.0;
  for (Index i = 0; i < p; ++i) {
    if (!(l(i) * l(i) > kPivotTolerance * max_diag)) {
      throw RankDeficient("pivot " + std::to_string(i) + " vanishes");
    }
    log_det += 2.0 * std::log(l(i));
  }
  Matrix inverse = llt.solve(Matrix::Identity(p, p));
  inverse = 0.5 * (inverse + inverse.transpose()).eval();
  return {std::move(inverse), log_det};
}

GramState::GramState(Index p, std::size_t refresh_every)
    : p_(p),
      refresh_every_(refresh_every),
      gram_(Matrix::Zero(p, p)),
      xty_(Vector::Zero(p)) {
  if (p <= 0) {
    throw std::invalid_argument("GramState: dimension must be positive");
  }
  if (refresh_every_ == 0) {
    throw std::invalid_argument("GramState: refresh cadence must be positive");
  }
}

const Matrix& GramState::gram_inv() const {
  if (!invertible_) {
    throw RankDeficient("Gram matrix not yet invertible (n=" + std::to_string(n_) + ")");
  }
  return gram_inv_;
}

double GramState::log_det() const {
  if (!invertible_) {
    throw RankDeficient("Gram matrix not yet invertible (n=" + std::to_string(n_) + ")");
  }
  return log_det_;
}

void GramState::absorb(const Eigen::Ref<const Vector>& x, double y) {
  if (x.size() != p_) {
    throw std::invalid_argument("GramState::absorb: dimension mismatch");
  }
  if (!x.allFinite() || !std::isfinite(y)) {
    throw std::invalid_argument("GramState::absorb: non-finite observation");
  }

  if (invertible_) {
    const Vector v = gram_inv_ * x;
    const double growth = 1.0 + x.dot(v);
    gram_.noalias() += x * x.transpose();
    if (growth > 0.0 && std::isfinite(growth)) {
      // w w^T is elementwise symmetric, so the inverse stays exactly symmetric.
      const Vector w = v / std::sqrt(growth);
      gram_inv_.noalias() -= w * w.transpose();
      log_det_ += std::log(growth);
      ++since_refresh_;
    } else {
      refresh();
    }
  } else {
    gram_.noalias() += x * x.transpose();
  }
  xty_.noalias() += x * y;
  yty_ += y * y;
  ++n_;

  if (!invertible_) {
    if (n_ >= static_cast<std::size_t>(p_)) {
      try_establish();
    }
  } else if (since_refresh_ >= refresh_every_) {
    refresh();
  }
}

bool GramState::try_establish() {
  try {
    refresh();
  } catch (const RankDeficient&) {
    return false;
  }
  return true;
}

void GramState::refresh() {
  auto f = factorize_spd(gram_);
  gram_inv_ = std::move(f.inverse);
  log_det_ = f.log_det;
  invertible_ = true;
  since_refresh_ = 0;
}

GramState rank_one_update(GramState state, const Eigen::Ref<const Vector>& x, double y) {
  state.absorb(x, y);
  return state;
}

GramState direct_refresh(GramState state) {
  state.refresh();
  return state;
}

double min_eig(const Matrix& s) { return eigenvalues(s).minCoeff(); }

double max_eig(const Matrix& s) { return eigenvalues(s).maxCoeff(); }

}  // namespace distseq
