#pragma once

#include <cmath>
#include <random>

#include "distseq/linalg.hpp"
#include "distseq/types.hpp"

namespace testsupport {

using distseq::Matrix;
using distseq::Vector;

inline double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

// Plain std::normal_distribution is fine here: test data only has to be random,
// not portable.
inline Matrix random_matrix(std::mt19937_64& g, long rows, long cols) {
  std::normal_distribution<double> n;
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = n(g);
  return m;
}

inline Matrix random_spd(std::mt19937_64& g, long p) {
  const Matrix a = random_matrix(g, p, p);
  return a * a.transpose() + static_cast<double>(p) * Matrix::Identity(p, p);
}

inline distseq::GramState state_from(const Matrix& X, const Vector& y) {
  distseq::GramState s(X.cols());
  for (long i = 0; i < X.rows(); ++i) s.absorb(X.row(i).transpose(), y(i));
  return s;
}

// Density of chi-square(k), integrated by composite Simpson on [0, q].
inline double chi2_cdf_simpson(int k, double q) {
  const double half = 0.5 * k;
  const double lognorm = half * std::log(2.0) + std::lgamma(half);
  auto f = [&](double x) {
    if (x <= 0.0) return k == 2 ? 0.5 : 0.0;
    return std::exp((half - 1.0) * std::log(x) - 0.5 * x - lognorm);
  };
  // Substitute x = t^2 to tame the x^(-1/2) singularity at 0 for k = 1.
  const int n = 20000;
  const double b = std::sqrt(q);
  const double h = b / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double g = t == 0.0 ? (k == 1 ? 2.0 / std::exp(lognorm) : 0.0) : f(t * t) * 2.0 * t;
    sum += w * g;
  }
  return sum * h / 3.0;
}

}  // namespace testsupport
