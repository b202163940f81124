#include <gtest/gtest.h>

#include <set>

#include "mtest/clean.hpp"
#include "mtest/generators.hpp"
#include "mtest/oracle.hpp"
#include "mtest/parallel.hpp"

using namespace mtest;

TEST(Oracle, ChargesUnorderedPairsOnce) {
  DistanceMatrix m(4);
  m.set(0, 1, 1);
  m.set(1, 2, 2);
  QueryOracle o(m);
  o.read(0, 1);
  o.read(1, 0);
  o.read(2, 2);  // diagonal: free
  EXPECT_EQ(o.queried_entries(), 1u);
  o.read(2, 1);
  EXPECT_EQ(o.queried_entries(), 2u);
  EXPECT_EQ(o.sampled_indices(), (std::vector<Index>{0, 1, 2}));
  EXPECT_TRUE(o.was_queried(1, 0));
  EXPECT_FALSE(o.was_queried(0, 2));
}

TEST(Oracle, CounterMatchesReplayedLog) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.below(30);
    DistanceMatrix m(n);
    QueryOracle o(m);
    o.enable_log();
    for (int k = 0; k < 200; ++k) o.read(rng.index(n), rng.index(n));
    std::set<std::pair<Index, Index>> pairs;
    std::set<Index> touched;
    for (auto [i, j] : o.log()) {
      if (i != j) pairs.emplace(std::min(i, j), std::max(i, j));
      touched.insert(i);
      touched.insert(j);
    }
    EXPECT_EQ(o.queried_entries(), pairs.size());
    for (Index i : touched) EXPECT_TRUE(o.was_sampled(i));
    EXPECT_EQ(o.sampled_count(), touched.size());
  }
}

TEST(Oracle, BudgetStopsNewPairsOnly) {
  DistanceMatrix m(5);
  QueryOracle o(m, 2);
  o.read(0, 1);
  o.read(0, 2);
  EXPECT_NO_THROW(o.read(1, 0));
  EXPECT_NO_THROW(o.read(3, 3));
  EXPECT_THROW(o.read(0, 3), BudgetExhausted);
  EXPECT_EQ(o.queried_entries(), 2u);

  auto f = o.fresh();
  EXPECT_EQ(f.queried_entries(), 0u);
  EXPECT_EQ(f.budget(), std::optional<std::uint64_t>(2));
}

TEST(Oracle, PerTrialClonesIsolateCounters) {
  const auto inst = gen_random_metric(30, 1);
  QueryOracle base(inst.matrix);
  auto run = [&](std::size_t threads) {
    std::vector<std::uint64_t> counts(40);
    parallel_for(counts.size(), threads, [&](std::size_t t) {
      auto o = base.fresh();
      Rng rng(t);
      for (int k = 0; k < 100; ++k) o.read(rng.index(30), rng.index(30));
      counts[t] = o.queried_entries();
    });
    return counts;
  };
  EXPECT_EQ(run(1), run(4));
  EXPECT_EQ(base.queried_entries(), 0u);
}

TEST(Clean, TrialCount) {
  EXPECT_EQ(clean_trials(0.1), 100u);
  EXPECT_EQ(clean_trials(0.3), 34u);
  EXPECT_EQ(clean_trials(0.5, 4), 8u);
}

TEST(Clean, ExactMetricIsClean) {
  const auto inst = gen_random_metric(20, 3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    QueryOracle o(inst.matrix);
    Rng rng(seed);
    const auto r = clean_check(o, 0.1, rng);
    EXPECT_TRUE(r.clean);
    EXPECT_FALSE(r.witness.has_value());
  }
}

TEST(Clean, ExhaustiveWitnesses) {
  const auto base = gen_random_metric(6, 2).matrix;
  auto asym = base;
  asym.set_entry(1, 2, 3);
  asym.set_entry(2, 1, 4);
  QueryOracle o1(asym);
  Rng r1(0);
  auto rep = clean_check(o1, 0.5, 36, r1);
  ASSERT_TRUE(rep.witness);
  EXPECT_EQ(rep.witness->i, 1u);
  EXPECT_EQ(rep.witness->j, 2u);
  EXPECT_EQ(rep.witness->condition, CleanCondition::asymmetry);

  auto diag = base;
  diag.set_entry(4, 4, 1);
  QueryOracle o2(diag);
  Rng r2(0);
  rep = clean_check(o2, 0.5, 1000, r2);
  ASSERT_TRUE(rep.witness);
  EXPECT_EQ(rep.witness->i, 4u);
  EXPECT_EQ(rep.witness->j, 4u);
  EXPECT_EQ(rep.witness->condition, CleanCondition::nonzero_diagonal);

  auto neg = base;
  neg.set(0, 3, -1);
  QueryOracle o3(neg);
  Rng r3(0);
  rep = clean_check(o3, 0.5, 36, r3);
  ASSERT_TRUE(rep.witness);
  EXPECT_EQ(rep.witness->condition, CleanCondition::negative);

  auto zero = base;
  zero.set(2, 5, 0);
  QueryOracle o4(zero);
  Rng r4(0);
  rep = clean_check(o4, 0.5, 36, r4);
  ASSERT_TRUE(rep.witness);
  EXPECT_EQ(rep.witness->condition, CleanCondition::zero_off_diagonal);
  EXPECT_EQ(rep.witness->i, 2u);
  EXPECT_EQ(rep.witness->j, 5u);
}

TEST(Clean, ExhaustiveAgreesWithDirectScan) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.below(64);
    DistanceMatrix m(n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) m.set(i, j, double(rng.between(1, 9)));
    // A few random defects, sometimes none.
    const auto defects = rng.below(3);
    for (std::uint64_t d = 0; d < defects; ++d)
      m.set_entry(rng.index(n), rng.index(n), double(rng.between(-2, 3)));
    QueryOracle o(m);
    Rng r(seed);
    const auto rep = clean_check(o, 0.5, n * n, r);
    const auto direct = clean_scan(m);
    ASSERT_EQ(rep.clean, direct.clean) << "seed " << seed;
    EXPECT_EQ(rep.witness.has_value(), !rep.clean);
    if (rep.witness) {
      EXPECT_TRUE(witness_holds(m, *rep.witness));
    }
  }
}
