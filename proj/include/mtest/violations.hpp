#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mtest/matrix.hpp"
#include "mtest/predicates.hpp"

namespace mtest {

enum class ViolationKind { triangle, ultra, tree };

/// Serialised names: "Triangle", "UltraTriple", "TreeQuadruple".
std::string_view to_string(ViolationKind k);
/// Accepts the serialised names and the CLI spellings
/// triangle(s) / ultra / triple(s) / tree / quadruple(s).
ViolationKind parse_violation_kind(std::string_view s);
std::size_t arity(ViolationKind k);

/// A certificate. Indices are strictly increasing; values are the pairwise
/// distances in sorted pair order: (ij, ik, jk) or (ij, ik, il, jk, jl, kl).
struct Violation {
  ViolationKind kind = ViolationKind::triangle;
  std::vector<Index> indices;
  std::vector<double> values;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Builds the canonical certificate for `indices` (any order) from `m`.
Violation make_violation(const DistanceMatrix& m, ViolationKind kind,
                         std::span<const Index> indices);

/// Re-evaluates the predicate on the stored values.
bool predicate_holds(const Violation& v, double tol = 0.0);
/// Checks that the stored values match `m` and that the predicate holds.
bool verify_against(const DistanceMatrix& m, const Violation& v, double tol = 0.0);

struct EnumerateOptions {
  std::size_t triple_cap = 512;
  std::size_t quadruple_cap = 128;
  double tol = 0.0;
};

/// Every violating set of the given kind in lexicographic order.
/// Throws CapExceeded when n is above the kind's cap.
std::vector<Violation> enumerate_violations(const DistanceMatrix& m, ViolationKind kind,
                                            const EnumerateOptions& opt = {});
std::size_t count_violations(const DistanceMatrix& m, ViolationKind kind,
                             const EnumerateOptions& opt = {});

struct TriangleDegreeCensus {
  std::size_t n = 0;
  std::vector<std::uint64_t> vertex_degree;
  std::vector<std::uint64_t> pair_degree_flat;  // n*n, symmetric
  std::uint64_t total = 0;

  std::uint64_t pair_degree(Index i, Index j) const { return pair_degree_flat[i * n + j]; }
  std::uint64_t max_pair_degree() const;
};

TriangleDegreeCensus triangle_census(const DistanceMatrix& m, const EnumerateOptions& opt = {});

/// Greedy maximal set of pairwise edge-disjoint violating triangles, taken
/// in lexicographic order.
std::vector<Violation> greedy_edge_disjoint_pack(const DistanceMatrix& m,
                                                 const EnumerateOptions& opt = {});

nlohmann::json to_json(const Violation& v);
Violation violation_from_json(const nlohmann::json& j);
/// One JSON object per line.
std::string to_jsonl(std::span<const Violation> vs);

}  // namespace mtest
