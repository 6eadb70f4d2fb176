#include "distseq/shrinkage.hpp"

#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "distseq/linalg.hpp"
#include "distseq/seqcore.hpp"

namespace distseq {

void AseConfig::validate() const {
  if (!(lambda_exponent > 0.5 && lambda_exponent < 1.0)) {
    throw std::invalid_argument("AseConfig: lambda exponent must lie in (1/2, 1)");
  }
  if (!(gamma > 0.0) || !(epsilon > 0.0)) {
    throw std::invalid_argument("AseConfig: gamma and epsilon must be positive");
  }
}

AseState shrink(const Vector& beta_hat, std::size_t n, const AseConfig& cfg) {
  if (n == 0) {
    throw std::invalid_argument("shrink: n must be at least 1");
  }
  const Index p = beta_hat.size();
  AseState out{Indicator::Zero(p), Vector::Zero(p), 0};
  // sqrt(n) * lambda(n)
  const double scaled_lambda = std::pow(static_cast<double>(n), 0.5 - cfg.lambda_exponent);
  for (Index k = 0; k < p; ++k) {
    const double magnitude = std::abs(beta_hat(k));
    if (magnitude == 0.0) {
      continue;  // infinite penalty
    }
    const double penalty = scaled_lambda * std::pow(magnitude, -cfg.gamma);
    if (penalty < cfg.epsilon) {
      out.indicator(k) = 1;
      out.beta_star(k) = beta_hat(k);
      ++out.p0_hat;
    }
  }
  return out;
}

double chi2_quantile(int dof, double prob) {
  if (dof < 1) {
    throw std::invalid_argument("chi2_quantile: degrees of freedom must be >= 1");
  }
  if (!(prob > 0.0 && prob < 1.0)) {
    throw std::invalid_argument("chi2_quantile: probability must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), prob);
}

double restricted_mu(const GramState& state, const Indicator& indicator) {
  std::vector<Index> active;
  for (Index k = 0; k < indicator.size(); ++k) {
    if (indicator(k) != 0) {
      active.push_back(k);
    }
  }
  if (active.empty()) {
    return 0.0;
  }
  const Matrix& inv = state.gram_inv();
  const double n = static_cast<double>(state.n());
  const auto m = static_cast<Index>(active.size());
  Matrix block(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) {
      block(a, b) = n * inv(active[a], active[b]);
    }
  }
  return max_eig(block);
}

bool should_stop_ase(const GramState& state, const AseState& ase, const ProcedureConfig& cfg) {
  if (ase.p0_hat == 0 || state.n() < cfg.n0 || !state.invertible() ||
      state.n() <= static_cast<std::size_t>(state.p())) {
    return false;
  }
  const double a_tilde_sq = chi2_quantile(ase.p0_hat, 1.0 - cfg.alpha) / cfg.M;
  return stopping_inequality(state.n(), sigma2_hat(state), restricted_mu(state, ase.indicator),
                             a_tilde_sq, cfg.d);
}

}  // namespace distseq
