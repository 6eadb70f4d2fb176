#pragma once

#include <cstddef>

#include "distseq/types.hpp"

namespace distseq {

class GramState;
struct ProcedureConfig;

/// Tuning of the adaptive shrinkage rule.
///
/// The penalty on coordinate k after n observations is
/// lambda(n) * |beta_k|^-gamma with lambda(n) = n^-lambda_exponent; the
/// coordinate is kept while sqrt(n) times its penalty stays below epsilon.
/// Any exponent in (1/2, 1) with gamma = 1 meets the rate condition
/// sqrt(n) * lambda -> 0 and n^(1/2 + gamma * delta) * lambda -> inf for some
/// delta in (0, 1/2).
struct AseConfig {
  double lambda_exponent = 0.75;
  double gamma = 1.0;
  double epsilon = 1.0;
  // Records the delta of the rate condition; unused at runtime.
  double delta_note = 0.4;

  void validate() const;
};

struct AseState {
  Indicator indicator;
  Vector beta_star;
  int p0_hat = 0;
};

AseState shrink(const Vector& beta_hat, std::size_t n, const AseConfig& cfg);

/// Inverse CDF of the chi-square distribution. Throws std::invalid_argument
/// unless dof >= 1 and prob lies strictly inside (0, 1).
double chi2_quantile(int dof, double prob);

/// lambda_max of n * I * gram_inv * I restricted to the active coordinates.
double restricted_mu(const GramState& state, const Indicator& indicator);

bool should_stop_ase(const GramState& state, const AseState& ase, const ProcedureConfig& cfg);

}  // namespace distseq
