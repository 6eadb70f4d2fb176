#include "distseq/seqcore.hpp"

#include <chrono>
#include <string>
#include <thread>

#include "distseq/pool.hpp"

namespace distseq {

ProcedureConfig ProcedureConfig::make(Index p, double d, double alpha, int M) {
  ProcedureConfig cfg;
  cfg.d = d;
  cfg.alpha = alpha;
  cfg.M = M;
  cfg.a_tilde_sq = chi2_quantile(static_cast<int>(p), 1.0 - alpha) / M;
  cfg.n0 = static_cast<std::size_t>(p) + 5;
  return cfg;
}

void ProcedureConfig::validate(Index p) const {
  if (!(d > 0.0)) {
    throw std::invalid_argument("ProcedureConfig: d must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("ProcedureConfig: alpha must lie in (0, 1)");
  }
  if (M < 1) {
    throw std::invalid_argument("ProcedureConfig: M must be at least 1");
  }
  if (!(a_tilde_sq > 0.0)) {
    throw std::invalid_argument("ProcedureConfig: a_tilde_sq must be positive");
  }
  if (n0 < static_cast<std::size_t>(p) + 2) {
    throw std::invalid_argument("ProcedureConfig: n0 must be at least p + 2");
  }
  if (check_every == 0) {
    throw std::invalid_argument("ProcedureConfig: check_every must be positive");
  }
  if (ase) {
    ase->validate();
  }
}

Vector beta_hat(const GramState& state) { return state.gram_inv() * state.xty(); }

double sigma2_hat(const GramState& state) {
  const auto p = static_cast<std::size_t>(state.p());
  if (state.n() <= p) {
    throw UndefinedVariance("n=" + std::to_string(state.n()) + " <= p=" + std::to_string(p));
  }
  const double rss = state.yty() - beta_hat(state).dot(state.xty());
  // Cancellation can push an exact-fit RSS slightly negative.
  return std::max(rss, 0.0) / static_cast<double>(state.n() - p);
}

double mu_n(const GramState& state) {
  return max_eig(static_cast<double>(state.n()) * state.gram_inv());
}

bool stopping_inequality(std::size_t n, double sigma2, double mu, double a_tilde_sq, double d) {
  const double dn = static_cast<double>(n);
  return sigma2 + 1.0 / dn <= d * d * dn / (a_tilde_sq * mu);
}

bool should_stop(const GramState& state, const ProcedureConfig& cfg) {
  if (state.n() < cfg.n0 || !state.invertible() ||
      state.n() <= static_cast<std::size_t>(state.p())) {
    return false;
  }
  return stopping_inequality(state.n(), sigma2_hat(state), mu_n(state), cfg.a_tilde_sq, cfg.d);
}

SequentialProcedure::SequentialProcedure(PoolHandle& handle, const ProcedureConfig& cfg, Rng rng)
    : handle_(&handle),
      cfg_(cfg),
      rng_(std::move(rng)),
      state_(handle.pool().p(), cfg.refresh_every) {
  cfg_.validate(handle.pool().p());
}

bool SequentialProcedure::claim_next() {
  std::optional<Observation> obs;
  if (cfg_.selection == Selection::d_optimal && state_.invertible()) {
    obs = claim_d_optimal(*handle_, state_.gram_inv());
  } else {
    obs = claim_random(*handle_, rng_);
  }
  if (!obs) {
    return false;
  }
  state_.absorb(obs->x, obs->y);
  claimed_.push_back(obs->id);
  return true;
}

bool SequentialProcedure::check() {
  if (cfg_.ase) {
    if (!state_.invertible() || state_.n() <= static_cast<std::size_t>(state_.p())) {
      return false;
    }
    const AseState ase = shrink(beta_hat(state_), state_.n(), *cfg_.ase);
    return should_stop_ase(state_, ase, cfg_);
  }
  return should_stop(state_, cfg_);
}

void SequentialProcedure::start() {
  if (started_) {
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  started_ = true;
  if (handle_->remaining() < cfg_.n0) {
    throw SetupError("procedure " + std::to_string(handle_->procedure()) + " sees only " +
                     std::to_string(handle_->remaining()) + " rows, needs n0=" +
                     std::to_string(cfg_.n0));
  }
  // Initial sample is always random, whatever the selection rule.
  for (std::size_t i = 0; i < cfg_.n0; ++i) {
    auto obs = claim_random(*handle_, rng_);
    if (!obs) {
      throw SetupError("pool exhausted while drawing the initial sample");
    }
    state_.absorb(obs->x, obs->y);
    claimed_.push_back(obs->id);
  }
  if (check()) {
    done_ = true;
    stopped_naturally_ = true;
  }
  elapsed_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void SequentialProcedure::step() {
  if (!started_) {
    start();
    return;
  }
  if (done_) {
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  if ((cfg_.max_steps != 0 && state_.n() >= cfg_.max_steps) || !claim_next()) {
    done_ = true;
  } else if (++since_check_ >= cfg_.check_every) {
    since_check_ = 0;
    if (check()) {
      done_ = true;
      stopped_naturally_ = true;
    }
  }
  elapsed_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ProcedureResult SequentialProcedure::finish() const {
  ProcedureResult r;
  r.N = state_.n();
  r.gram = state_.gram();
  r.gram_inv = state_.gram_inv();
  r.beta_hat = beta_hat(state_);
  r.sigma2_hat = sigma2_hat(state_);
  r.mu = mu_n(state_);
  if (cfg_.ase) {
    r.indicator = shrink(r.beta_hat, r.N, *cfg_.ase).indicator;
  }
  r.stopped_naturally = stopped_naturally_;
  r.claimed_ids = claimed_;
  r.elapsed_seconds = elapsed_;
  return r;
}

ProcedureResult run_procedure(PoolHandle& handle, const ProcedureConfig& cfg, Rng rng) {
  SequentialProcedure proc(handle, cfg, std::move(rng));
  proc.start();
  while (!proc.done()) {
    proc.step();
  }
  return proc.finish();
}

std::vector<ProcedureResult> run_procedures(std::vector<PoolHandle>& handles,
                                            const ProcedureConfig& cfg, std::vector<Rng> rngs,
                                            Executor executor) {
  if (rngs.size() != handles.size()) {
    throw std::invalid_argument("run_procedures: one RNG per handle required");
  }
  std::vector<ProcedureResult> results(handles.size());
  if (executor == Executor::parallel && handles.size() > 1) {
    std::vector<std::exception_ptr> errors(handles.size());
    {
      std::vector<std::jthread> workers;
      workers.reserve(handles.size());
      for (std::size_t j = 0; j < handles.size(); ++j) {
        workers.emplace_back([&, j] {
          try {
            results[j] = run_procedure(handles[j], cfg, std::move(rngs[j]));
          } catch (...) {
            errors[j] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
    return results;
  }

  std::vector<SequentialProcedure> procs;
  procs.reserve(handles.size());
  for (std::size_t j = 0; j < handles.size(); ++j) {
    procs.emplace_back(handles[j], cfg, std::move(rngs[j]));
  }
  for (auto& proc : procs) {
    proc.start();
  }
  bool pending = true;
  while (pending) {
    pending = false;
    for (auto& proc : procs) {
      if (!proc.done()) {
        proc.step();
        pending = pending || !proc.done();
      }
    }
  }
  for (std::size_t j = 0; j < procs.size(); ++j) {
    results[j] = procs[j].finish();
  }
  return results;
}

}  // namespace distseq
