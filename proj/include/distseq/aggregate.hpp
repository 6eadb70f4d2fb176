#pragma once

#include <optional>
#include <span>
#include <vector>

#include "distseq/seqcore.hpp"
#include "distseq/types.hpp"

namespace distseq {

/// Merge of M stopped procedures, weighted by their stopping times.
struct CombinedEstimate {
  Vector beta_hat;
  std::size_t N_star = 0;
  Vector rho;
  double mu_star = 0.0;
  double sigma2_pooled = 0.0;
  // Elementwise product of the per-procedure indicators (shrinkage runs only).
  std::optional<Indicator> indicator_star;
  // Some procedure ran out of rows before its stopping rule held.
  bool exhausted = false;
};

/// {z : z_k = 0 where active(k) = 0, and (z - center)^T shape (z - center) <= radius}.
struct ConfidenceEllipsoid {
  Vector center;
  Matrix shape;
  double radius = 0.0;
  // Set only for shrinkage sets; inactive coordinates of members are zero.
  std::optional<Indicator> active;
  // Degenerate set (no active coordinate) or pseudo-inverse fallback used.
  bool degenerate = false;
  bool pseudo_inverse_used = false;
};

CombinedEstimate combine(std::span<const ProcedureResult> results);

ConfidenceEllipsoid ellipsoid_exact(const CombinedEstimate& est,
                                    std::span<const ProcedureResult> results, double d);

ConfidenceEllipsoid ellipsoid_approx(const CombinedEstimate& est,
                                     std::span<const ProcedureResult> results, double d);

/// Shrinkage confidence set. The quadratic form on the active block is the
/// Schur complement of the summed Gram matrix; the radius uses
/// nu = lambda_max[N * I* (sum gram)^-1 I*].
ConfidenceEllipsoid ellipsoid_ase(std::span<const ProcedureResult> results, double d);

/// Ellipsoid of a single procedure: shape gram, radius N d^2 / mu.
ConfidenceEllipsoid procedure_ellipsoid(const ProcedureResult& result, double d);

bool contains(const ConfidenceEllipsoid& set, const Vector& z);

/// Length of the longest axis, 2 sqrt(radius * lambda_max(shape_active^-1)).
double max_axis(const ConfidenceEllipsoid& set);

/// Points on the boundary of `set` along `count` random directions.
std::vector<Vector> sample_boundary(const ConfidenceEllipsoid& set, std::size_t count, Rng& rng);

/// Whether every row id is claimed by exactly one procedure and the pool's
/// claim marks agree with the results.
class DataPool;
bool claims_consistent(const DataPool& pool, std::span<const ProcedureResult> results);

}  // namespace distseq
