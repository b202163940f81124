#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "mtest/instance.hpp"
#include "mtest/rng.hpp"

namespace mtest {

struct SalemSpencerSet {
  std::size_t n = 0;
  std::vector<std::uint64_t> members;  // sorted residues in [0, n)
};

/// True iff x + y = 2z (mod n) forces x = y = z over `members`.
bool is_salem_spencer(std::size_t n, std::span<const std::uint64_t> members);

/// Behrend's digit construction restricted to [0, floor(n/2)), greedily
/// extended; a plain greedy set is built as well and the larger one wins.
SalemSpencerSet salem_spencer(std::size_t n);

/// Validates a caller-supplied set (also requires 2x distinct mod n).
SalemSpencerSet make_salem_spencer(std::size_t n, std::vector<std::uint64_t> members);

/// floor(a * b) robust against products that land a hair below an integer.
std::size_t floor_product(double a, double b);

// Every generator is deterministic in (arguments, seed). With shuffle=false
// the identity permutation is used, which tests rely on for fixed layouts.

GeneratedInstance gen_behrend(std::size_t n, const SalemSpencerSet& x, std::uint64_t seed,
                              bool shuffle = true);

/// (twin_good, twin_bad), sharing one permutation.
std::pair<GeneratedInstance, GeneratedInstance> gen_twin(std::size_t n, const SalemSpencerSet& x,
                                                         std::uint64_t seed,
                                                         bool shuffle = true);

GeneratedInstance gen_sample_lb(std::size_t n, double eps, std::uint64_t seed,
                                bool shuffle = true);
GeneratedInstance gen_query_lb(std::size_t n, double eps, std::uint64_t seed,
                               bool shuffle = true);

struct RandomParams {
  std::uint64_t min_weight = 1;
  std::uint64_t max_weight = 100;
};

GeneratedInstance gen_random_metric(std::size_t n, std::uint64_t seed,
                                    const RandomParams& p = {});
GeneratedInstance gen_random_ultra(std::size_t n, std::uint64_t seed,
                                   const RandomParams& p = {});
GeneratedInstance gen_random_tree(std::size_t n, std::uint64_t seed,
                                  const RandomParams& p = {1, 10});

enum class CorruptMode { uniform_rewrite, d_s_style };
CorruptMode parse_corrupt_mode(std::string_view s);

/// uniform_rewrite: ceil(eps*n^2/2) distinct pairs get a fresh value drawn
/// from [0.1*min_offdiag, 3*max]. d_s_style: floor(eps*n) random points
/// become "bad" and the entry between good point number i (1-based) and any
/// bad point becomes max_offdiag + i. The achieved farness lower bound is
/// recorded in params when n is within the enumeration cap.
GeneratedInstance corrupt(const GeneratedInstance& base, double eps, std::uint64_t seed,
                          CorruptMode mode);

/// Final indices of the bad group of a sample_lb instance.
std::vector<Index> sample_lb_bad_indices(const GeneratedInstance& inst);
/// Block id of every final index of a query_lb instance, -1 for the remainder.
std::vector<int> query_lb_blocks(const GeneratedInstance& inst);

}  // namespace mtest
