#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "distseq/types.hpp"

namespace distseq {

struct Observation {
  Vector x;
  double y = 0.0;
  std::size_t id = 0;
};

enum class PoolMode { partitioned, shared };

/// Observation store with append-only, without-replacement claims.
///
/// Every row carries one claim mark. A claim is a compare-and-swap from
/// "unclaimed" to the claiming procedure's id, so two procedures can never
/// hold the same row even when they run on different threads.
class DataPool {
 public:
  static constexpr int kUnclaimed = -1;

  DataPool(Matrix X, Vector y, PoolMode mode = PoolMode::partitioned);

  DataPool(const DataPool&) = delete;
  DataPool& operator=(const DataPool&) = delete;

  std::size_t rows() const { return static_cast<std::size_t>(X_.rows()); }
  Index p() const { return X_.cols(); }
  PoolMode mode() const { return mode_; }
  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }

  Observation row(std::size_t id) const;

  bool try_claim(std::size_t id, int procedure);
  int claimed_by(std::size_t id) const;
  std::size_t claimed_count() const;

 private:
  Matrix X_;
  Vector y_;
  PoolMode mode_;
  std::unique_ptr<std::atomic<int>[]> claims_;
};

/// One procedure's view of a pool: the rows it may claim from.
class PoolHandle {
 public:
  PoolHandle(DataPool& pool, int procedure, std::vector<std::size_t> visible);

  DataPool& pool() const { return *pool_; }
  int procedure() const { return procedure_; }
  const std::vector<std::size_t>& visible() const { return visible_; }
  std::size_t remaining() const { return remaining_.size(); }

 private:
  friend std::optional<Observation> claim_random(PoolHandle&, Rng&);
  friend std::optional<Observation> claim_d_optimal(PoolHandle&, const Matrix&);

  DataPool* pool_;
  int procedure_;
  std::vector<std::size_t> visible_;
  // Candidates not yet claimed by this handle; rows claimed elsewhere are
  // dropped lazily.
  std::vector<std::size_t> remaining_;
};

/// Splits the pool among M procedures. Partitioned mode permutes the rows and
/// cuts them into contiguous blocks whose sizes differ by at most one (larger
/// blocks first); M = 1 keeps the original order. Shared mode hands every
/// procedure the whole pool. Throws SetupError if rows < M * (n0 + 1).
std::vector<PoolHandle> partition(DataPool& pool, std::size_t M, Rng& rng, std::size_t n0 = 0);

/// Uniformly random unclaimed visible row, or nullopt once none remain.
std::optional<Observation> claim_random(PoolHandle& handle, Rng& rng);

/// Unclaimed visible row maximizing 1 + x^T gram_inv x (lowest id on ties).
std::optional<Observation> claim_d_optimal(PoolHandle& handle, const Matrix& gram_inv);

/// Determinant growth factor of adding x to a Gram matrix with inverse gram_inv.
double d_optimal_score(const Eigen::Ref<const Vector>& x, const Matrix& gram_inv);

}  // namespace distseq
