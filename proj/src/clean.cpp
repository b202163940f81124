#include "mtest/clean.hpp"

#include <cmath>

namespace mtest {

std::string_view to_string(CleanCondition c) {
  switch (c) {
    case CleanCondition::asymmetry: return "asymmetry";
    case CleanCondition::negative: return "negative";
    case CleanCondition::zero_off_diagonal: return "zero-off-diagonal";
    case CleanCondition::nonzero_diagonal: return "nonzero-diagonal";
  }
  return "unknown";
}

std::uint64_t clean_trials(double eps, double coeff) {
  if (!(eps > 0)) throw InvalidArgument("eps must be positive");
  return static_cast<std::uint64_t>(std::ceil(coeff / eps));
}

namespace {

// Checks the pair (i,j) through the oracle; i == j inspects the diagonal.
std::optional<CleanWitness> check_pair(QueryOracle& o, Index i, Index j) {
  if (i == j) {
    if (o.read(i, i) != 0.0) return CleanWitness{i, i, CleanCondition::nonzero_diagonal};
    return std::nullopt;
  }
  const double a = o.read(i, j);
  const double b = o.read(j, i);
  const Index lo = std::min(i, j), hi = std::max(i, j);
  if (a != b) return CleanWitness{lo, hi, CleanCondition::asymmetry};
  if (a < 0) return CleanWitness{lo, hi, CleanCondition::negative};
  if (a == 0) return CleanWitness{lo, hi, CleanCondition::zero_off_diagonal};
  return std::nullopt;
}

CleanReport from(std::optional<CleanWitness> w) {
  CleanReport r;
  if (w) {
    r.clean = false;
    r.witness = w;
  }
  return r;
}

}  // namespace

CleanReport clean_check(QueryOracle& oracle, double eps, std::uint64_t trials, Rng& rng) {
  if (!(eps > 0 && eps < 1)) throw InvalidArgument("eps must lie in (0,1)");
  const std::size_t n = oracle.n();
  const auto nn = static_cast<std::uint64_t>(n) * n;

  if (trials >= nn) {
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j)
        if (auto w = check_pair(oracle, i, j)) return from(w);
    return {};
  }
  if (n <= trials) {
    for (Index i = 0; i < n; ++i)
      if (auto w = check_pair(oracle, i, i)) return from(w);
  }
  for (std::uint64_t t = 0; t < trials; ++t) {
    const Index i = rng.index(n);
    const Index j = rng.index(n);
    if (auto w = check_pair(oracle, i, j)) return from(w);
  }
  return {};
}

CleanReport clean_check(QueryOracle& oracle, double eps, Rng& rng) {
  return clean_check(oracle, eps, clean_trials(eps), rng);
}

CleanReport clean_scan(const DistanceMatrix& m) {
  QueryOracle o(m);
  for (Index i = 0; i < m.size(); ++i)
    for (Index j = i; j < m.size(); ++j)
      if (auto w = check_pair(o, i, j)) return from(w);
  return {};
}

bool witness_holds(const DistanceMatrix& m, const CleanWitness& w) {
  const double a = m(w.i, w.j);
  switch (w.condition) {
    case CleanCondition::asymmetry: return a != m(w.j, w.i);
    case CleanCondition::negative: return w.i != w.j && a < 0;
    case CleanCondition::zero_off_diagonal: return w.i != w.j && a == 0;
    case CleanCondition::nonzero_diagonal: return w.i == w.j && a != 0;
  }
  return false;
}

}  // namespace mtest
