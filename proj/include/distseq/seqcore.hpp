#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "distseq/linalg.hpp"
#include "distseq/shrinkage.hpp"
#include "distseq/types.hpp"

namespace distseq {

class PoolHandle;

enum class Selection { random, d_optimal };

/// Configuration shared by every procedure of one run.
struct ProcedureConfig {
  double d = 0.2;
  double alpha = 0.05;
  int M = 1;
  // Per-procedure chi-square threshold; the M thresholds sum to a^2.
  double a_tilde_sq = 0.0;
  std::size_t n0 = 0;
  Selection selection = Selection::random;
  std::optional<AseConfig> ase;
  std::size_t max_steps = 0;  // 0: bounded only by the pool
  std::size_t check_every = 1;
  std::size_t refresh_every = kDefaultRefreshEvery;

  /// Fills a_tilde_sq = chi2_{p}(1 - alpha) / M and n0 = p + 5 when unset.
  static ProcedureConfig make(Index p, double d, double alpha, int M);

  void validate(Index p) const;
};

struct ProcedureResult {
  std::size_t N = 0;
  Vector beta_hat;
  double sigma2_hat = 0.0;
  Matrix gram;
  Matrix gram_inv;
  double mu = 0.0;
  std::optional<Indicator> indicator;
  bool stopped_naturally = false;
  std::vector<std::size_t> claimed_ids;
  double elapsed_seconds = 0.0;

  int p0_hat() const { return indicator ? indicator->sum() : static_cast<int>(beta_hat.size()); }
};

Vector beta_hat(const GramState& state);

/// Unbiased residual variance (yty - beta^T xty) / (n - p).
double sigma2_hat(const GramState& state);

/// lambda_max[n * gram_inv], i.e. 1 / lambda_min[gram / n].
double mu_n(const GramState& state);

/// sigma2 + 1/n <= d^2 n / (a_tilde_sq * mu)
bool stopping_inequality(std::size_t n, double sigma2, double mu, double a_tilde_sq, double d);

bool should_stop(const GramState& state, const ProcedureConfig& cfg);

/// One sequential procedure advanced an observation at a time.
///
/// `start` claims the n0 initial rows; each `step` claims one more row and
/// re-checks the stopping rule. The procedure is done once the rule holds or
/// the handle runs dry.
class SequentialProcedure {
 public:
  SequentialProcedure(PoolHandle& handle, const ProcedureConfig& cfg, Rng rng);

  void start();
  void step();
  bool done() const { return done_; }
  ProcedureResult finish() const;

  const GramState& state() const { return state_; }

 private:
  bool check();
  bool claim_next();

  PoolHandle* handle_;
  ProcedureConfig cfg_;
  Rng rng_;
  GramState state_;
  std::vector<std::size_t> claimed_;
  bool started_ = false;
  bool done_ = false;
  bool stopped_naturally_ = false;
  std::size_t since_check_ = 0;
  double elapsed_ = 0.0;
};

ProcedureResult run_procedure(PoolHandle& handle, const ProcedureConfig& cfg, Rng rng);

enum class Executor { sequential, parallel };

/// Runs one procedure per handle. The sequential executor advances the
/// procedures round-robin, one observation each, and is bit-reproducible in
/// both pool modes. The parallel executor gives every procedure its own thread.
std::vector<ProcedureResult> run_procedures(std::vector<PoolHandle>& handles,
                                            const ProcedureConfig& cfg, std::vector<Rng> rngs,
                                            Executor executor);

}  // namespace distseq
