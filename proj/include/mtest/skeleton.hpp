#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mtest/matrix.hpp"
#include "mtest/rng.hpp"
#include "mtest/violations.hpp"

namespace mtest {

enum class SkeletonKind { ultra, tree };
std::string_view to_string(SkeletonKind k);
SkeletonKind parse_skeleton_kind(std::string_view s);

enum class PartClass { easy, versatile_proxy, active };
std::string_view to_string(PartClass c);

enum class CorruptionClass { none, separator_corruption, easy_to_detect };
std::string_view to_string(CorruptionClass c);

struct SkeletonState {
  std::vector<Index> S;  // sorted
  SkeletonKind kind = SkeletonKind::ultra;
  bool consistent = true;
  std::vector<Index> inconsistent_points;
  std::vector<std::vector<Index>> parts;  // each sorted; ordered by first member
  std::vector<PartClass> part_classes;
  std::optional<Index> pivot;  // tree kind: min(S)
  bool sc_counted = false;
  std::uint64_t sc_count = 0;  // ordered pairs
  std::uint64_t ec_count = 0;  // ordered pairs
  std::uint64_t active_entries = 0;
  double active_mass = 0;
};

nlohmann::json to_json(const SkeletonState& s);

struct SkeletonOptions {
  double eps = 0.1;
  /// SC counting scans every cross-part pair against its separators and is
  /// the expensive part; the decay experiment turns it off.
  bool count_sc = true;
};

/// Maintains the skeleton of a growing index set S. Consistency of points,
/// the partition and the per-point easy-to-detect thresholds are updated
/// incrementally as points are added.
///
/// When S itself is inconsistent, a point outside S is still called
/// consistent if it forms no violation together with points of S.
class SkeletonBuilder {
 public:
  SkeletonBuilder(const DistanceMatrix& m, SkeletonKind kind);

  /// Adds i to S; a repeat is a no-op.
  void add(Index i);
  const std::vector<Index>& S() const { return order_; }
  bool in_S(Index i) const { return in_s_[i]; }
  bool point_consistent(Index j) const { return consistent_[j]; }

  /// Ordered easy-to-detect test for j != k in the same part.
  bool easy_to_detect(Index j, Index k) const;

  SkeletonState state(const SkeletonOptions& opt) const;
  /// |A(M,S)| without building the full state.
  std::uint64_t active_entries(double eps) const;

 private:
  std::vector<std::vector<Index>> current_parts() const;
  PartClass classify(std::span<const Index> part, double eps, std::uint64_t* ec_out) const;

  const DistanceMatrix& m_;
  SkeletonKind kind_;
  std::size_t n_;
  std::vector<Index> order_;
  std::vector<bool> in_s_;
  bool s_consistent_ = true;
  std::vector<bool> consistent_;
  std::vector<std::uint32_t> part_;  // part label per point outside S
  std::uint32_t next_label_ = 1;
  // ultra: min over S of M(j, i); tree: max over u != v in S of
  // M(u,v) - M(j,u) - M(j,v).
  std::vector<double> ec_bound_;
  bool ec_bound_valid_ = false;
  Index pivot_ = 0;
};

SkeletonState build_skeleton(const DistanceMatrix& m, std::span<const Index> S,
                             SkeletonKind kind, const SkeletonOptions& opt = {});

/// Direct scans against the definitions; reference for the builder.
bool is_consistent_set(const DistanceMatrix& m, std::span<const Index> S, SkeletonKind kind);
CorruptionClass classify_corruption_pair(const DistanceMatrix& m, std::span<const Index> S,
                                         Index j, Index k, SkeletonKind kind);
/// The violating triple/quadruple formed by (j,k) with an S witness, if the
/// pair is a separator or easy-to-detect corruption.
std::optional<Violation> corruption_witness(const DistanceMatrix& m, std::span<const Index> S,
                                            Index j, Index k, SkeletonKind kind);
PartClass classify_part(const DistanceMatrix& m, std::span<const Index> S,
                        std::span<const Index> part, double eps, SkeletonKind kind);

struct DecayRow {
  std::size_t step = 0;  // |S| draws so far
  double mean = 0;
  double stderr_ = 0;
  double half_width = 0;  // 1.96 * stderr
};

struct DecayOptions {
  double eps = 0.1;
  std::size_t steps = 40;
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

/// For each trial grows S by one uniform index per step and records |A|
/// after every addition (row 0 is S empty).
std::vector<DecayRow> decay_experiment(const DistanceMatrix& m, SkeletonKind kind,
                                       const DecayOptions& opt);
/// The per-trial trajectories behind decay_experiment.
std::vector<std::vector<std::uint64_t>> decay_trajectories(const DistanceMatrix& m,
                                                           SkeletonKind kind,
                                                           const DecayOptions& opt);

}  // namespace mtest
