#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mtest/clean.hpp"
#include "mtest/oracle.hpp"
#include "mtest/rng.hpp"
#include "mtest/violations.hpp"

namespace mtest {

/// Sample-size constants. Sizes are
///   clean pairs   ceil(clean_coeff / eps)
///   u             ceil(metric_u_coeff / eps)
///   pairs         ceil(metric_pair_coeff * n^(2/3) / eps^(1/3))
///   metric s      ceil(metric_s_coeff * n^(1/3) / eps^(2/3))
///   ultra s       ceil(ultra_s_coeff * ln(ultra_log_arg / eps) / eps)
///                 + 2 * ceil(ultra_pair_coeff / eps)
/// and the same shape for tree s.
struct ConstantsProfile {
  std::string name;
  double clean_coeff = 10;
  double metric_u_coeff = 0;
  double metric_pair_coeff = 0;
  double metric_s_coeff = 0;
  double ultra_s_coeff = 0;
  double ultra_log_arg = 0;
  double ultra_pair_coeff = 0;
  double tree_s_coeff = 0;
  double tree_log_arg = 0;
  double tree_pair_coeff = 0;

  static ConstantsProfile paper();
  static ConstantsProfile desk();
  static ConstantsProfile by_name(std::string_view name);

  void validate() const;
  nlohmann::json to_json() const;

  std::size_t metric_u(double eps) const;
  std::size_t metric_pairs(std::size_t n, double eps) const;
  std::size_t metric_s(std::size_t n, double eps) const;
  std::size_t ultra_s(double eps) const;
  std::size_t tree_s(double eps) const;
  /// Base part of ultra_s / tree_s, without the pair slots.
  std::size_t ultra_base_s(double eps) const;
  std::size_t tree_base_s(double eps) const;

  /// C * n^(2/3) / eps^(4/3) with
  /// C = (clean+1) + 3 (u+1)(pair+1) + (s+1)^2 / 2.
  double metric_query_ceiling(std::size_t n, double eps) const;
};

enum class Verdict { accept, reject };
enum class TesterKind { metric, ultra, tree };

std::string_view to_string(Verdict v);
std::string_view to_string(TesterKind k);
TesterKind parse_tester_kind(std::string_view s);
ViolationKind violation_kind_of(TesterKind k);

struct TestReport {
  Verdict verdict = Verdict::accept;
  std::optional<Violation> certificate;
  std::uint64_t samples_used = 0;
  std::uint64_t queries_used = 0;
  std::uint64_t seed = 0;
  std::string profile;
  TesterKind tester = TesterKind::metric;
  std::uint64_t elapsed_ms = 0;
};

nlohmann::json to_json(const TestReport& r);

struct TestOptions {
  double eps = 0.1;
  ConstantsProfile profile = ConstantsProfile::desk();
  bool skip_clean = false;
  double tol = 0.0;
  /// Ultra/tree only: the two-phase form (sample a base set, then probe
  /// ceil(pair_coeff/eps) random pairs against it) instead of one batch.
  bool two_phase = false;
  /// Wall-clock time goes into elapsed_ms only when set, so reports are
  /// reproducible by default.
  bool record_time = false;
  /// Overrides for the computed sample sizes (tests and replay).
  std::optional<std::size_t> force_u, force_pairs, force_s;
};

/// `count` iid uniform indices, deduplicated in first-occurrence order; all
/// of [0, n) in order when count >= n.
std::vector<Index> sample_indices(std::size_t n, std::size_t count, Rng& rng);
/// `count` iid uniform unordered pairs (i<j), deduplicated; every pair in
/// lexicographic order when count >= C(n,2).
std::vector<std::pair<Index, Index>> sample_pairs(std::size_t n, std::size_t count, Rng& rng);

TestReport check_hi_degree(QueryOracle& oracle, const TestOptions& opt, Rng& rng);
TestReport check_violation(QueryOracle& oracle, const TestOptions& opt, Rng& rng);
TestReport metric_test(QueryOracle& oracle, const TestOptions& opt, Rng& rng);
TestReport ultra_test(QueryOracle& oracle, const TestOptions& opt, Rng& rng);
TestReport tree_test(QueryOracle& oracle, const TestOptions& opt, Rng& rng);

/// Runs the named tester with a fresh Rng(seed); report.seed is filled in.
TestReport run_tester(TesterKind kind, QueryOracle& oracle, const TestOptions& opt,
                      std::uint64_t seed);

}  // namespace mtest
