#include <gtest/gtest.h>

#include <cstring>

#include "mtest/kernels.hpp"
#include "mtest/rng.hpp"
#include "oracles.hpp"

using namespace mtest;

namespace {

// Symmetric s x s block; `ints` gives small integers so ties are common.
std::vector<double> random_block(std::size_t s, bool ints, Rng& rng) {
  std::vector<double> w(s * s, 0.0);
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = a + 1; b < s; ++b) {
      const double v = ints ? double(rng.between(1, 4)) : rng.uniform(0.5, 3.0);
      w[a * s + b] = w[b * s + a] = v;
    }
  return w;
}

DistanceMatrix as_matrix(const std::vector<double>& w, std::size_t s) {
  return DistanceMatrix(s, w);
}

}  // namespace

TEST(Kernels, ScalarCollectMatchesBruteForce) {
  const auto& k = kernel_table(Isa::scalar);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    const std::size_t s = rng.below(14);
    const auto w = random_block(s, seed % 2 == 0, rng);
    const auto m = as_matrix(w, s);
    std::vector<std::array<Index, 3>> t, u;
    std::vector<std::array<Index, 4>> q;
    k.collect_triangles(w.data(), s, 0.0, t);
    k.collect_ultra(w.data(), s, 0.0, u);
    k.collect_tree(w.data(), s, 0.0, q);
    EXPECT_EQ(t, oracle::triples(m, false));
    EXPECT_EQ(u, oracle::triples(m, true));
    EXPECT_EQ(q, oracle::quadruples(m));
    std::array<Index, 3> first;
    EXPECT_EQ(k.first_triangle(w.data(), s, 0.0, first), !t.empty());
    if (!t.empty()) {
      EXPECT_EQ(first, t.front());
    }
  }
}

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!isa_available(Isa::avx2)) GTEST_SKIP() << "AVX2 not available on this machine";
  }
};

TEST_F(KernelEquivalence, ScanAndCollectAgreeWithScalar) {
  const auto& ref = kernel_table(Isa::scalar);
  const auto& simd = kernel_table(Isa::avx2);
  ASSERT_EQ(simd.isa, Isa::avx2);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    const std::size_t s = rng.below(seed < 150 ? 20 : 45);
    const bool ints = seed % 3 != 0;
    auto w = random_block(s, ints, rng);
    // Plant a late violation sometimes so the first-hit search runs far.
    if (s >= 4 && seed % 5 == 0) {
      for (auto& v : w) v = v == 0 ? 0 : 2.0;
      const Index a = Index(s - 3), b = Index(s - 2), c = Index(s - 1);
      w[a * s + c] = w[c * s + a] = 5.0;
      (void)b;
    }
    for (double tol : {0.0, 0.25}) {
      std::array<Index, 3> x{}, y{};
      std::array<Index, 4> qx{}, qy{};
      ASSERT_EQ(ref.first_triangle(w.data(), s, tol, x), simd.first_triangle(w.data(), s, tol, y));
      EXPECT_EQ(x, y);
      ASSERT_EQ(ref.first_ultra(w.data(), s, tol, x), simd.first_ultra(w.data(), s, tol, y));
      EXPECT_EQ(x, y);
      ASSERT_EQ(ref.first_tree(w.data(), s, tol, qx), simd.first_tree(w.data(), s, tol, qy));
      EXPECT_EQ(qx, qy);

      std::vector<std::array<Index, 3>> ta, tb, ua, ub;
      std::vector<std::array<Index, 4>> qa, qb;
      ref.collect_triangles(w.data(), s, tol, ta);
      simd.collect_triangles(w.data(), s, tol, tb);
      ref.collect_ultra(w.data(), s, tol, ua);
      simd.collect_ultra(w.data(), s, tol, ub);
      if (s <= 24) {
        ref.collect_tree(w.data(), s, tol, qa);
        simd.collect_tree(w.data(), s, tol, qb);
      }
      EXPECT_EQ(ta, tb) << "seed " << seed;
      EXPECT_EQ(ua, ub) << "seed " << seed;
      EXPECT_EQ(qa, qb) << "seed " << seed;
    }
  }
}

TEST_F(KernelEquivalence, MinPlusRelaxAgreesBitForBit) {
  const auto& ref = kernel_table(Isa::scalar);
  const auto& simd = kernel_table(Isa::avx2);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const std::size_t len = rng.below(70);
    std::vector<double> dst(len), src(len);
    for (auto& v : dst) v = rng.coin() ? rng.uniform(0, 100) : std::numeric_limits<double>::infinity();
    for (auto& v : src) v = rng.uniform(0, 100);
    const double base = rng.uniform(0, 50);
    auto a = dst, b = dst;
    ref.minplus_relax(a.data(), src.data(), base, len);
    simd.minplus_relax(b.data(), src.data(), base, len);
    ASSERT_EQ(std::memcmp(a.data(), b.data(), len * sizeof(double)), 0);
  }
}

TEST(Kernels, IsaSelection) {
  const Isa before = active_isa();
  set_isa(Isa::scalar);
  EXPECT_EQ(active_isa(), Isa::scalar);
  EXPECT_EQ(kernels().isa, Isa::scalar);
  if (isa_available(Isa::avx2)) {
    set_isa(Isa::avx2);
    EXPECT_EQ(kernels().isa, Isa::avx2);
  }
  set_isa(before);
  EXPECT_TRUE(isa_available(Isa::scalar));
  EXPECT_EQ(to_string(Isa::scalar), "scalar");
}
