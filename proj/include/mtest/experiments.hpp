#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mtest/generators.hpp"
#include "mtest/testers.hpp"

namespace mtest {

struct Interval {
  double low = 0;
  double high = 0;
};

/// Wilson score interval for `successes` out of `trials` (z = 1.96 by default).
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

/// Builds an instance from a JSON description such as
///   {"kind": "query-lb", "n": 400, "eps": 0.1}
///   {"kind": "behrend", "n": 20, "X": [1, 3]}
///   {"kind": "corrupt", "base": {...}, "eps": 0.5, "mode": "uniform"}
/// Kinds: behrend, twin-good, twin-bad, sample-lb, query-lb, random-metric,
/// random-ultra, random-tree, corrupt. An optional "shuffle": false pins the
/// identity permutation.
GeneratedInstance generate_instance(const nlohmann::json& spec, std::uint64_t seed);

enum class Shape { clique, path, star, random_gnm, grid };
std::string_view to_string(Shape s);
Shape parse_shape(std::string_view s);

/// A query graph on local vertex ids 0..vertices-1, which the sweep maps to
/// sampled indices through a per-trial random order.
struct QueryGraph {
  std::size_t vertices = 0;
  std::vector<std::pair<Index, Index>> edges;
};

/// Graph of the given shape with at most `budget` edges on at most n vertices.
/// clique: the largest s with C(s,2) <= budget; path/star: budget edges;
/// grid: the largest k x k grid that fits; random_gnm: budget random edges on
/// 2x the clique vertex count, drawn from `rng`.
QueryGraph make_query_graph(Shape shape, std::uint64_t budget, std::size_t n, Rng& rng);

/// True iff some triple (or quadruple for the tree kind) whose pairs are all
/// in the graph violates, reading M(order[a], order[b]).
bool graph_detects(const DistanceMatrix& m, const QueryGraph& g, std::span<const Index> order,
                   ViolationKind kind);

struct SweepSpec {
  nlohmann::json instance;
  std::vector<Shape> strategies{Shape::clique};
  ViolationKind detector = ViolationKind::ultra;
  std::vector<std::uint64_t> budgets;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  static SweepSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

struct SweepRow {
  std::uint64_t budget = 0;
  std::size_t trials = 0;
  std::uint64_t detections = 0;
  double rate = 0;
  double ci_low = 0;
  double ci_high = 0;
  std::uint64_t seed = 0;
  std::string instance;
  std::string strategy;
};

/// Each trial draws a fresh instance and a random index order from
/// derive_seed(seed, trial) and keeps both fixed across budgets, so the
/// query sets of nested shapes grow with the budget.
std::vector<SweepRow> detection_sweep(const SweepSpec& spec);

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct RateReport {
  std::string name;
  std::size_t trials = 0;
  std::uint64_t successes = 0;
  std::size_t skipped = 0;
  double rate = 0;
  double ci_low = 0;
  double ci_high = 0;
  double threshold = 0;
  bool pass = false;
  std::uint64_t max_queries = 0;
};

nlohmann::json to_json(const RateReport& r);
std::string rate_csv(const std::vector<RateReport>& rows);

struct SoundnessSpec {
  TesterKind tester = TesterKind::metric;
  nlohmann::json instance;
  double eps = 0.1;
  ConstantsProfile profile = ConstantsProfile::desk();
  std::size_t trials = 300;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  /// Extra seeds tried for uncertified instances before giving up.
  std::size_t max_attempts_per_trial = 20;

  static SoundnessSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// True when `inst` is eps-far from the tester's class by construction or
/// by its recorded farness certificate. Corrupted instances certify with
/// certified_lower_entries >= eps * n^2.
bool certified_far(const GeneratedInstance& inst, TesterKind tester, double eps);

/// Reject rate on certified-far instances; PASS iff ci_low >= 2/3 - 0.05.
RateReport soundness_campaign(const SoundnessSpec& spec);

struct CompletenessSpec {
  /// The in-class family; every tester in `testers` runs on each instance.
  Provenance family = Provenance::random_metric;
  std::vector<TesterKind> testers{TesterKind::metric};
  std::vector<ConstantsProfile> profiles{ConstantsProfile::desk()};
  std::size_t trials = 500;
  std::size_t n_min = 16;
  std::size_t n_max = 128;
  double eps = 0.1;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  static CompletenessSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Accept rate over in-class instances; PASS iff every run accepts.
RateReport completeness_campaign(const CompletenessSpec& spec);

struct GatingReport {
  std::size_t trials = 0;
  std::size_t avoided_bad = 0;
  std::uint64_t detections = 0;
  std::uint64_t detections_without_bad = 0;
};

/// Runs `tester` with `sample_size` forced samples on fresh sample_lb
/// instances and splits detections by whether the sampled indices hit the
/// bad group (read from the permutation record).
GatingReport sample_lb_gating(std::size_t n, double eps, TesterKind tester,
                              std::size_t sample_size, std::size_t trials, std::uint64_t seed);

}  // namespace mtest
