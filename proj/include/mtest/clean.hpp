#pragma once

#include <optional>
#include <string_view>

#include "mtest/oracle.hpp"
#include "mtest/rng.hpp"

namespace mtest {

enum class CleanCondition { asymmetry, negative, zero_off_diagonal, nonzero_diagonal };

std::string_view to_string(CleanCondition c);

struct CleanWitness {
  Index i = 0;
  Index j = 0;
  CleanCondition condition = CleanCondition::asymmetry;
};

struct CleanReport {
  bool clean = true;
  std::optional<CleanWitness> witness;
};

/// Default number of sampled pairs: ceil(coeff / eps).
std::uint64_t clean_trials(double eps, double coeff = 10.0);

/// Samples `trials` uniform ordered pairs and checks each for symmetry,
/// non-negativity and zero-iff-diagonal. When n <= trials every diagonal
/// entry is checked first; when trials >= n*n the whole matrix is scanned in
/// row-major order instead of sampling.
CleanReport clean_check(QueryOracle& oracle, double eps, std::uint64_t trials, Rng& rng);
CleanReport clean_check(QueryOracle& oracle, double eps, Rng& rng);

/// Direct full scan with no oracle, for cross-checking.
CleanReport clean_scan(const DistanceMatrix& m);

/// True iff the witness condition actually holds in `m`.
bool witness_holds(const DistanceMatrix& m, const CleanWitness& w);

}  // namespace mtest
