#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mtest/common.hpp"
#include "mtest/matrix.hpp"

namespace mtest {

/// Query-metered read access to a DistanceMatrix.
///
/// Single-owner: counters are plain integers and the object must not be
/// shared between threads. Concurrent experiments make one oracle per trial
/// (see `fresh()`); the underlying matrix is only read and may be shared.
///
/// Off-diagonal reads are charged once per unordered pair, so reading (i,j)
/// and later (j,i) costs one query. Diagonal reads are free but still mark
/// the index as sampled.
class QueryOracle {
 public:
  explicit QueryOracle(const DistanceMatrix& target,
                       std::optional<std::uint64_t> budget = std::nullopt);

  std::size_t n() const { return target_->size(); }
  const DistanceMatrix& target() const { return *target_; }
  std::optional<std::uint64_t> budget() const { return budget_; }

  /// Returns M(i,j) exactly as stored (asymmetric content is passed through).
  /// Throws BudgetExhausted if this would be a new pair beyond the budget.
  double read(Index i, Index j);

  /// Marks an index as sampled without reading any entry.
  void touch(Index i);

  std::uint64_t queried_entries() const { return queried_; }
  std::size_t sampled_count() const { return sampled_order_.size(); }
  /// Distinct sampled indices in first-touch order.
  const std::vector<Index>& sampled_indices() const { return sampled_order_; }
  bool was_sampled(Index i) const { return sampled_mark_[i]; }
  bool was_queried(Index i, Index j) const;

  /// When enabled, every read (including repeats and diagonal reads) is
  /// appended to the log in call order.
  void enable_log(bool on = true) { logging_ = on; }
  const std::vector<std::pair<Index, Index>>& log() const { return log_; }

  /// A new oracle over the same matrix and budget with zeroed counters.
  QueryOracle fresh() const { return QueryOracle(*target_, budget_); }

 private:
  std::size_t pair_slot(Index i, Index j) const;

  const DistanceMatrix* target_;
  std::optional<std::uint64_t> budget_;
  std::uint64_t queried_ = 0;
  std::vector<std::uint64_t> seen_;
  std::vector<bool> sampled_mark_;
  std::vector<Index> sampled_order_;
  bool logging_ = false;
  std::vector<std::pair<Index, Index>> log_;
};

}  // namespace mtest
