#include "distseq/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <boost/random/normal_distribution.hpp>

#include "distseq/linalg.hpp"
#include "distseq/pool.hpp"

namespace distseq {

namespace {

void require_results(std::span<const ProcedureResult> results) {
  if (results.empty()) {
    throw std::invalid_argument("aggregate: no procedure results");
  }
  const Index p = results.front().beta_hat.size();
  for (const auto& r : results) {
    if (r.beta_hat.size() != p || r.gram.rows() != p || r.gram_inv.rows() != p || r.N == 0) {
      throw std::invalid_argument("aggregate: inconsistent procedure results");
    }
  }
}

Matrix summed_gram(std::span<const ProcedureResult> results) {
  Matrix sum = results.front().gram;
  for (std::size_t j = 1; j < results.size(); ++j) {
    sum += results[j].gram;
  }
  return sum;
}

std::vector<Index> active_coordinates(const ConfidenceEllipsoid& set) {
  std::vector<Index> idx;
  for (Index k = 0; k < set.center.size(); ++k) {
    if (!set.active || (*set.active)(k) != 0) {
      idx.push_back(k);
    }
  }
  return idx;
}

Matrix sub_matrix(const Matrix& m, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) {
      out(static_cast<Index>(a), static_cast<Index>(b)) = m(rows[a], cols[b]);
    }
  }
  return out;
}

}  // namespace

CombinedEstimate combine(std::span<const ProcedureResult> results) {
  require_results(results);
  const Index p = results.front().beta_hat.size();
  const auto M = static_cast<Index>(results.size());

  CombinedEstimate est;
  for (const auto& r : results) {
    est.N_star += r.N;
    est.exhausted = est.exhausted || !r.stopped_naturally;
  }
  if (M == 1) {
    const auto& r = results.front();
    est.beta_hat = r.beta_hat;
    est.rho = Vector::Ones(1);
    est.mu_star = r.mu;
    est.sigma2_pooled = r.sigma2_hat;
    if (r.indicator) {
      est.indicator_star = r.indicator;
      est.beta_hat = (r.indicator->array() != 0).select(r.beta_hat, 0.0);
    }
    return est;
  }

  est.rho.resize(M);
  est.beta_hat = Vector::Zero(p);
  for (Index j = 0; j < M; ++j) {
    const auto& r = results[static_cast<std::size_t>(j)];
    est.rho(j) = static_cast<double>(r.N) / static_cast<double>(est.N_star);
    est.beta_hat += est.rho(j) * r.beta_hat;
    est.mu_star += est.rho(j) * r.mu;
    est.sigma2_pooled += est.rho(j) * r.sigma2_hat;
  }

  const bool all_indicators =
      std::all_of(results.begin(), results.end(), [](const auto& r) { return r.indicator.has_value(); });
  if (all_indicators) {
    Indicator star = Indicator::Ones(p);
    for (const auto& r : results) {
      star = star.cwiseProduct(*r.indicator);
    }
    // I* zeroes every coordinate any I_j zeroes, so I* sum(rho_j I_j b_j) = I* sum(rho_j b_j).
    est.beta_hat = (star.array() != 0).select(est.beta_hat, 0.0);
    est.indicator_star = std::move(star);
  }
  return est;
}

ConfidenceEllipsoid procedure_ellipsoid(const ProcedureResult& result, double d) {
  ConfidenceEllipsoid set;
  set.center = result.beta_hat;
  set.shape = result.gram;
  set.radius = static_cast<double>(result.N) * d * d / result.mu;
  return set;
}

ConfidenceEllipsoid ellipsoid_exact(const CombinedEstimate& est,
                                    std::span<const ProcedureResult> results, double d) {
  require_results(results);
  ConfidenceEllipsoid set;
  set.center = est.beta_hat;
  set.radius = static_cast<double>(est.N_star) * d * d / est.mu_star;
  if (results.size() == 1) {
    set.shape = results.front().gram;
    return set;
  }
  Matrix weighted_inv = Matrix::Zero(est.beta_hat.size(), est.beta_hat.size());
  for (std::size_t j = 0; j < results.size(); ++j) {
    const double rho = est.rho(static_cast<Index>(j));
    weighted_inv += rho * rho * results[j].gram_inv;
  }
  set.shape = factorize_spd(weighted_inv).inverse;
  return set;
}

ConfidenceEllipsoid ellipsoid_approx(const CombinedEstimate& est,
                                     std::span<const ProcedureResult> results, double d) {
  require_results(results);
  ConfidenceEllipsoid set;
  set.center = est.beta_hat;
  set.shape = summed_gram(results);
  set.radius = static_cast<double>(est.N_star) * d * d / est.mu_star;
  return set;
}

ConfidenceEllipsoid ellipsoid_ase(std::span<const ProcedureResult> results, double d) {
  require_results(results);
  const CombinedEstimate est = combine(results);
  if (!est.indicator_star) {
    throw std::invalid_argument("ellipsoid_ase: results carry no indicators");
  }
  const Index p = est.beta_hat.size();
  const Indicator& star = *est.indicator_star;

  ConfidenceEllipsoid set;
  set.center = est.beta_hat;
  set.active = star;
  set.shape = Matrix::Zero(p, p);

  std::vector<Index> on;
  std::vector<Index> off;
  for (Index k = 0; k < p; ++k) {
    (star(k) != 0 ? on : off).push_back(k);
  }
  if (on.empty()) {
    set.degenerate = true;
    return set;
  }

  const Matrix total = summed_gram(results);
  const Matrix s11 = sub_matrix(total, on, on);
  Matrix schur = s11;
  if (!off.empty()) {
    const Matrix s12 = sub_matrix(total, on, off);
    const Matrix s22 = sub_matrix(total, off, off);
    Matrix s22_inv;
    try {
      s22_inv = factorize_spd(s22).inverse;
    } catch (const RankDeficient&) {
      s22_inv = s22.completeOrthogonalDecomposition().pseudoInverse();
      set.pseudo_inverse_used = true;
    }
    schur = s11 - s12 * s22_inv * s12.transpose();
    schur = 0.5 * (schur + schur.transpose()).eval();
  }
  for (std::size_t a = 0; a < on.size(); ++a) {
    for (std::size_t b = 0; b < on.size(); ++b) {
      set.shape(on[a], on[b]) = schur(static_cast<Index>(a), static_cast<Index>(b));
    }
  }

  const Matrix total_inv = factorize_spd(total).inverse;
  const double nu = max_eig(static_cast<double>(est.N_star) * sub_matrix(total_inv, on, on));
  set.radius = static_cast<double>(est.N_star) * d * d / nu;
  return set;
}

bool contains(const ConfidenceEllipsoid& set, const Vector& z) {
  if (z.size() != set.center.size()) {
    throw std::invalid_argument("contains: dimension mismatch");
  }
  if (set.active) {
    for (Index k = 0; k < z.size(); ++k) {
      if ((*set.active)(k) == 0 && z(k) != 0.0) {
        return false;
      }
    }
  }
  const Vector delta = z - set.center;
  return delta.dot(set.shape * delta) <= set.radius;
}

double max_axis(const ConfidenceEllipsoid& set) {
  const auto idx = active_coordinates(set);
  if (idx.empty() || set.degenerate) {
    return 0.0;
  }
  const Matrix q = sub_matrix(set.shape, idx, idx);
  return 2.0 * std::sqrt(set.radius / min_eig(q));
}

std::vector<Vector> sample_boundary(const ConfidenceEllipsoid& set, std::size_t count, Rng& rng) {
  const auto idx = active_coordinates(set);
  std::vector<Vector> points;
  if (idx.empty()) {
    return points;
  }
  boost::random::normal_distribution<double> normal;
  points.reserve(count);
  const Index p = set.center.size();
  while (points.size() < count) {
    Vector u = Vector::Zero(p);
    for (Index k : idx) {
      u(k) = normal(rng);
    }
    const double q = u.dot(set.shape * u);
    if (!(q > 0.0)) {
      continue;
    }
    points.push_back(set.center + std::sqrt(set.radius / q) * u);
  }
  return points;
}

bool claims_consistent(const DataPool& pool, std::span<const ProcedureResult> results) {
  std::unordered_set<std::size_t> seen;
  for (std::size_t j = 0; j < results.size(); ++j) {
    for (std::size_t id : results[j].claimed_ids) {
      if (id >= pool.rows() || !seen.insert(id).second ||
          pool.claimed_by(id) != static_cast<int>(j)) {
        return false;
      }
    }
  }
  return seen.size() == pool.claimed_count();
}

}  // namespace distseq
