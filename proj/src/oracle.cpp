#include "mtest/oracle.hpp"

namespace mtest {

QueryOracle::QueryOracle(const DistanceMatrix& target, std::optional<std::uint64_t> budget)
    : target_(&target),
      budget_(budget),
      seen_((choose2(target.size()) + 63) / 64, 0),
      sampled_mark_(target.size(), false) {}

std::size_t QueryOracle::pair_slot(Index i, Index j) const {
  if (i > j) std::swap(i, j);
  const std::size_t nn = n();
  return static_cast<std::size_t>(i) * nn - static_cast<std::size_t>(i) * (i + 1) / 2 +
         (j - i - 1);
}

void QueryOracle::touch(Index i) {
  if (i >= n()) throw std::out_of_range("QueryOracle: index out of range");
  if (!sampled_mark_[i]) {
    sampled_mark_[i] = true;
    sampled_order_.push_back(i);
  }
}

bool QueryOracle::was_queried(Index i, Index j) const {
  if (i == j) return false;
  const std::size_t slot = pair_slot(i, j);
  return (seen_[slot / 64] >> (slot % 64)) & 1u;
}

double QueryOracle::read(Index i, Index j) {
  if (i >= n() || j >= n()) throw std::out_of_range("QueryOracle: index out of range");
  if (i != j) {
    const std::size_t slot = pair_slot(i, j);
    std::uint64_t& word = seen_[slot / 64];
    const std::uint64_t bit = std::uint64_t{1} << (slot % 64);
    if (!(word & bit)) {
      if (budget_ && queried_ >= *budget_)
        throw BudgetExhausted("query budget of " + std::to_string(*budget_) + " exhausted");
      word |= bit;
      ++queried_;
    }
  }
  touch(i);
  touch(j);
  if (logging_) log_.emplace_back(i, j);
  return (*target_)(i, j);
}

}  // namespace mtest
