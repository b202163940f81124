#include <gtest/gtest.h>

#include "mtest/generators.hpp"
#include "mtest/repair.hpp"
#include "mtest/violations.hpp"
#include "oracles.hpp"

using namespace mtest;

namespace {

DistanceMatrix from_rows(std::size_t n, std::initializer_list<double> upper) {
  DistanceMatrix m(n);
  auto it = upper.begin();
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) m.set(i, j, *it++);
  return m;
}

bool violation_free(const DistanceMatrix& m) { return oracle::triples(m, false).empty(); }

}  // namespace

TEST(Completion, PathThroughKeptPairs) {
  const auto m = from_rows(3, {3, 100, 4});
  const std::vector<Pair> keep{{0, 1}, {1, 2}};
  const auto c = shortest_path_completion(m, keep);
  EXPECT_EQ(c.matrix(0, 2), 7.0);
  EXPECT_EQ(c.matrix(2, 0), 7.0);
  EXPECT_TRUE(c.disagreements.empty());
}

TEST(Completion, ExactMetricIsPreserved) {
  const auto inst = gen_random_metric(15, 4);
  std::vector<Pair> all;
  for (Index i = 0; i < 15; ++i)
    for (Index j = i + 1; j < 15; ++j) all.emplace_back(i, j);
  const auto c = shortest_path_completion(inst.matrix, all);
  EXPECT_EQ(c.matrix.count_differences(inst.matrix), 0u);
  EXPECT_TRUE(c.disagreements.empty());
}

TEST(Completion, NonViolatingKeepGivesMetric) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const auto m = oracle::random_int_matrix(12, 1, 6, rng);
    std::vector<bool> bad(144, false);
    for (const auto& t : oracle::triples(m, false)) {
      bad[t[0] * 12 + t[1]] = bad[t[0] * 12 + t[2]] = bad[t[1] * 12 + t[2]] = true;
    }
    std::vector<Pair> keep;
    for (Index i = 0; i < 12; ++i)
      for (Index j = i + 1; j < 12; ++j)
        if (!bad[i * 12 + j]) keep.emplace_back(i, j);
    const auto c = shortest_path_completion(m, keep);
    EXPECT_TRUE(violation_free(c.matrix)) << "seed " << seed;
    EXPECT_TRUE(c.matrix.is_symmetric());
    for (Index i = 0; i < 12; ++i) EXPECT_EQ(c.matrix(i, i), 0.0);
  }
}

TEST(Completion, EmptyKeepBridgesThroughZero) {
  DistanceMatrix m(5);
  const auto c = shortest_path_completion(m, {});
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) {
      const double want = i == j ? 0.0 : (i == 0 || j == 0) ? 1.0 : 2.0;
      EXPECT_EQ(c.matrix(i, j), want) << i << "," << j;
    }
}

TEST(Completion, ReportsDisagreements) {
  const auto m = from_rows(3, {1, 5, 1});
  const std::vector<Pair> keep{{0, 1}, {0, 2}, {1, 2}};
  const auto c = shortest_path_completion(m, keep);
  ASSERT_EQ(c.disagreements.size(), 1u);
  EXPECT_EQ(c.disagreements[0], (Pair{0, 2}));
  EXPECT_EQ(c.matrix(0, 2), 2.0);
}

TEST(UpperBound, ExactMetricNeedsNothing) {
  const auto inst = gen_random_metric(20, 9);
  const auto b = repair_upper_bound(inst.matrix);
  EXPECT_EQ(b.upper_entries, 0u);
}

TEST(UpperBound, BehrendSmall) {
  const auto inst = gen_behrend(5, make_salem_spencer(5, {1}), 3);
  const auto b = repair_upper_bound(inst.matrix);
  EXPECT_LE(b.upper_entries, 30u);
  EXPECT_GT(b.upper_entries, 0u);
  EXPECT_TRUE(violation_free(b.upper_certificate));
  EXPECT_EQ(b.upper_certificate.count_differences(inst.matrix), b.upper_entries);
}

TEST(UpperBound, CertificateIsAlwaysMetric) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto m = oracle::random_int_matrix(3 + rng.below(20), 1, 10, rng);
    const auto b = repair_upper_bound(m);
    EXPECT_TRUE(violation_free(b.upper_certificate)) << "seed " << seed;
    EXPECT_EQ(b.upper_certificate.count_differences(m), b.upper_entries);
    EXPECT_EQ(b.upper_entries % 2, 0u);
  }
}

TEST(DirectRepair, BehrendExamples) {
  struct Case {
    std::size_t n;
    std::vector<std::uint64_t> x;
    std::uint64_t changed;
  };
  for (const auto& c : {Case{5, {1}, 10}, Case{5, {}, 0}, Case{7, {1, 2}, 28}}) {
    const auto inst = gen_behrend(c.n, make_salem_spencer(c.n, c.x), 1);
    const auto fixed = behrend_direct_repair(inst);
    EXPECT_EQ(fixed.count_differences(inst.matrix), c.changed) << "n=" << c.n;
    EXPECT_TRUE(violation_free(fixed));
  }
}

TEST(DirectRepair, RejectsOtherProvenance) {
  const auto inst = gen_random_metric(6, 1);
  EXPECT_THROW(behrend_direct_repair(inst), ProvenanceError);
}

TEST(LowerBound, BehrendDisjointPack) {
  const auto inst = gen_behrend(5, make_salem_spencer(5, {1}), 2);
  const auto b = farness_lower_bound(inst.matrix);
  EXPECT_EQ(b.lower_entries, 10u);
  EXPECT_EQ(b.lower_certificate.size(), 5u);
}

TEST(Bounds, LowerNeverExceedsUpper) {
  const auto base = gen_random_metric(40, 5);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = corrupt(base, 0.2, seed, CorruptMode::uniform_rewrite);
    const auto b = farness_bounds(inst.matrix);
    EXPECT_LE(b.lower_entries, b.upper_entries) << "seed " << seed;
    const auto j = to_json(b);
    EXPECT_EQ(j.at("n"), 40);
    EXPECT_EQ(j.at("lower_entries"), b.lower_entries);
    EXPECT_EQ(j.at("upper_entries"), b.upper_entries);
  }
}

TEST(Stab, SmallExample) {
  const auto r = stab_intervals({{1, 3}, {2, 5}, {6, 8}});
  EXPECT_EQ(r.value, 2.0);
  EXPECT_EQ(r.hit_count, 2u);
  EXPECT_EQ(stab_count(r.intervals, 7), 1u);
  EXPECT_EQ(stab_count(r.intervals, 5.5), 0u);
}

TEST(Stab, ExactMetricHitsEveryInterval) {
  const auto inst = gen_random_metric(14, 2);
  for (Index i = 0; i < 14; ++i)
    for (Index j = i + 1; j < 14; ++j) {
      const auto r = optimal_edge_value(inst.matrix, i, j);
      EXPECT_EQ(r.hit_count, 12u);
      EXPECT_EQ(stab_count(r.intervals, inst.matrix(i, j)), 12u);
    }
}

// The best value must beat every candidate on a fine grid.
TEST(Stab, OptimalOverGrid) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const std::size_t n = 3 + rng.below(10);
    const auto m = oracle::random_int_matrix(n, 1, 8, rng);
    const auto r = optimal_edge_value(m, 0, 1);
    EXPECT_EQ(stab_count(r.intervals, r.value), r.hit_count);
    for (int g = 0; g <= 400; ++g) {
      const double x = g * 0.05;
      EXPECT_LE(stab_count(r.intervals, x), r.hit_count) << "seed " << seed << " x " << x;
    }
  }
}

TEST(Stab, AssignedValueLeavesComplementViolated) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const std::size_t n = 3 + rng.below(12);
    auto m = oracle::random_int_matrix(n, 1, 9, rng);
    const Index i = Index(rng.index(n));
    Index j = Index(rng.index(n));
    if (j == i) j = Index((i + 1) % n);
    const auto r = optimal_edge_value(m, i, j);
    m.set(i, j, r.value);
    std::uint64_t incident = 0;
    for (const auto& t : oracle::triples(m, false)) {
      const bool hi = t[0] == i || t[1] == i || t[2] == i;
      const bool hj = t[0] == j || t[1] == j || t[2] == j;
      if (hi && hj) ++incident;
    }
    EXPECT_EQ(incident, n - 2 - r.hit_count) << "seed " << seed;
  }
}

TEST(Stab, RejectsTinyOrDiagonal) {
  DistanceMatrix m(2);
  EXPECT_THROW(optimal_edge_value(m, 0, 1), InvalidArgument);
  DistanceMatrix k(4);
  EXPECT_THROW(optimal_edge_value(k, 2, 2), InvalidArgument);
}

TEST(BruteForce, SmallCases) {
  EXPECT_EQ(brute_force_min_repair(gen_random_metric(5, 1).matrix, 10), std::optional<std::uint64_t>(0));
  EXPECT_EQ(brute_force_min_repair(from_rows(3, {1, 5, 1}), 3), std::optional<std::uint64_t>(2));
  // Both bad triangles share the long pair, so one change suffices.
  const auto m = from_rows(4, {1, 1, 9, 1, 1, 1});
  EXPECT_EQ(brute_force_min_repair(m, 6), std::optional<std::uint64_t>(2));
  EXPECT_EQ(brute_force_min_repair(from_rows(3, {1, 5, 1}), 0), std::nullopt);
}

TEST(BruteForce, SandwichedByBounds) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(seed);
    const std::size_t n = 3 + rng.below(3);
    const auto m = oracle::random_int_matrix(n, 1, 7, rng);
    const auto exact = brute_force_min_repair(m, 21);
    ASSERT_TRUE(exact.has_value());
    const auto b = farness_bounds(m);
    EXPECT_LE(b.lower_entries, *exact) << "seed " << seed;
    EXPECT_LE(*exact, b.upper_entries) << "seed " << seed;
  }
}
