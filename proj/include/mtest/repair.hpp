#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mtest/instance.hpp"
#include "mtest/violations.hpp"

namespace mtest {

using Pair = std::pair<Index, Index>;

// Entry accounting: counts are ordered off-diagonal entries, so changing one
// unordered pair counts as 2. The diagonal is never counted.

struct Completion {
  DistanceMatrix matrix;
  /// Kept pairs whose completed value differs from the input. Empty whenever
  /// the kept pairs are consistent with some metric.
  std::vector<Pair> disagreements;
};

/// All-pairs shortest paths over the graph whose edges are `keep` weighted by
/// M. Components are joined by edges of weight max kept weight (1 when keep
/// is empty).
Completion shortest_path_completion(const DistanceMatrix& m, std::span<const Pair> keep);

struct FarnessBounds {
  std::size_t n = 0;
  std::uint64_t lower_entries = 0;
  std::uint64_t upper_entries = 0;
  std::vector<Violation> lower_certificate;
  DistanceMatrix upper_certificate;
};

/// Keeps every pair that lies in no violating triangle and completes.
/// Fills the upper side only.
FarnessBounds repair_upper_bound(const DistanceMatrix& m, const EnumerateOptions& opt = {});
/// 2 x the greedy edge-disjoint packing size. Fills the lower side only.
FarnessBounds farness_lower_bound(const DistanceMatrix& m, const EnumerateOptions& opt = {});
FarnessBounds farness_bounds(const DistanceMatrix& m, const EnumerateOptions& opt = {});

nlohmann::json to_json(const FarnessBounds& b);

/// Replaces every 4 by 3. Requires a behrend-provenance instance.
DistanceMatrix behrend_direct_repair(const GeneratedInstance& inst);

struct IntervalStab {
  double value = 0;
  std::uint64_t hit_count = 0;
  std::vector<std::pair<double, double>> intervals;
};

/// Number of closed intervals containing x.
std::uint64_t stab_count(std::span<const std::pair<double, double>> intervals, double x);

/// Smallest value covered by the most closed intervals.
IntervalStab stab_intervals(std::vector<std::pair<double, double>> intervals);

/// Best single value for M(i,j): the intervals are
/// [|M(i,k) - M(j,k)|, M(i,k) + M(j,k)] over all third points k.
IntervalStab optimal_edge_value(const DistanceMatrix& m, Index i, Index j);

/// Exact minimum number of ordered entries to change to reach a metric, by
/// trying pair subsets of increasing size. Returns nullopt if none of size at
/// most `max_pairs` works. Only sensible for n <= 7.
std::optional<std::uint64_t> brute_force_min_repair(const DistanceMatrix& m,
                                                    std::size_t max_pairs);

}  // namespace mtest
