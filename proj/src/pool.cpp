#include "distseq/pool.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include <boost/random/uniform_int_distribution.hpp>

namespace distseq {

DataPool::DataPool(Matrix X, Vector y, PoolMode mode)
    : X_(std::move(X)), y_(std::move(y)), mode_(mode) {
  if (X_.rows() != y_.size()) {
    throw std::invalid_argument("DataPool: X and y row counts differ");
  }
  if (!X_.allFinite() || !y_.allFinite()) {
    throw std::invalid_argument("DataPool: non-finite observation");
  }
  claims_ = std::make_unique<std::atomic<int>[]>(rows());
  for (std::size_t i = 0; i < rows(); ++i) {
    claims_[i].store(kUnclaimed, std::memory_order_relaxed);
  }
}

Observation DataPool::row(std::size_t id) const {
  return Observation{X_.row(static_cast<Index>(id)).transpose(), y_(static_cast<Index>(id)), id};
}

bool DataPool::try_claim(std::size_t id, int procedure) {
  int expected = kUnclaimed;
  return claims_[id].compare_exchange_strong(expected, procedure, std::memory_order_acq_rel);
}

int DataPool::claimed_by(std::size_t id) const { return claims_[id].load(std::memory_order_acquire); }

std::size_t DataPool::claimed_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < rows(); ++i) {
    count += claimed_by(i) != kUnclaimed;
  }
  return count;
}

PoolHandle::PoolHandle(DataPool& pool, int procedure, std::vector<std::size_t> visible)
    : pool_(&pool), procedure_(procedure), visible_(std::move(visible)), remaining_(visible_) {}

std::vector<PoolHandle> partition(DataPool& pool, std::size_t M, Rng& rng, std::size_t n0) {
  const std::size_t rows = pool.rows();
  if (M == 0) {
    throw SetupError("partition: M must be at least 1");
  }
  if (rows < M * (n0 + 1)) {
    throw SetupError("partition: " + std::to_string(rows) + " rows cannot feed " +
                     std::to_string(M) + " procedures with n0=" + std::to_string(n0));
  }

  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<PoolHandle> handles;
  handles.reserve(M);
  if (pool.mode() == PoolMode::shared) {
    for (std::size_t j = 0; j < M; ++j) {
      handles.emplace_back(pool, static_cast<int>(j), order);
    }
    return handles;
  }
  if (M == 1) {
    handles.emplace_back(pool, 0, std::move(order));
    return handles;
  }

  // Fisher-Yates with a Boost distribution keeps the permutation portable.
  for (std::size_t i = rows - 1; i > 0; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  const std::size_t base = rows / M;
  const std::size_t extra = rows % M;
  auto begin = order.begin();
  for (std::size_t j = 0; j < M; ++j) {
    const std::size_t size = base + (j < extra ? 1 : 0);
    handles.emplace_back(pool, static_cast<int>(j), std::vector<std::size_t>(begin, begin + size));
    begin += size;
  }
  return handles;
}

std::optional<Observation> claim_random(PoolHandle& handle, Rng& rng) {
  auto& remaining = handle.remaining_;
  while (!remaining.empty()) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
    const std::size_t slot = pick(rng);
    const std::size_t id = remaining[slot];
    remaining[slot] = remaining.back();
    remaining.pop_back();
    if (handle.pool_->try_claim(id, handle.procedure_)) {
      return handle.pool_->row(id);
    }
  }
  return std::nullopt;
}

double d_optimal_score(const Eigen::Ref<const Vector>& x, const Matrix& gram_inv) {
  return 1.0 + x.dot(gram_inv * x);
}

std::optional<Observation> claim_d_optimal(PoolHandle& handle, const Matrix& gram_inv) {
  auto& remaining = handle.remaining_;
  DataPool& pool = *handle.pool_;
  const Matrix& X = pool.X();
  if (gram_inv.rows() != X.cols() || gram_inv.cols() != X.cols() || !gram_inv.allFinite()) {
    throw std::invalid_argument("claim_d_optimal: gram_inv must be a finite p x p matrix");
  }

  Vector scratch(X.cols());
  while (!remaining.empty()) {
    std::erase_if(remaining,
                  [&](std::size_t id) { return pool.claimed_by(id) != DataPool::kUnclaimed; });
    if (remaining.empty()) {
      break;
    }
    std::size_t best_slot = 0;
    double best_score = -1.0;
    for (std::size_t slot = 0; slot < remaining.size(); ++slot) {
      const std::size_t id = remaining[slot];
      const auto x = X.row(static_cast<Index>(id)).transpose();
      scratch.noalias() = gram_inv * x;
      const double score = 1.0 + x.dot(scratch);
      if (slot == 0 || score > best_score ||
          (score == best_score && id < remaining[best_slot])) {
        best_slot = slot;
        best_score = score;
      }
    }
    const std::size_t id = remaining[best_slot];
    remaining[best_slot] = remaining.back();
    remaining.pop_back();
    if (pool.try_claim(id, handle.procedure_)) {
      return pool.row(id);
    }
  }
  return std::nullopt;
}

}  // namespace distseq
