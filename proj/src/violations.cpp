#include "mtest/violations.hpp"

#include <algorithm>

#include "mtest/kernels.hpp"

namespace mtest {

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::triangle: return "Triangle";
    case ViolationKind::ultra: return "UltraTriple";
    case ViolationKind::tree: return "TreeQuadruple";
  }
  return "unknown";
}

ViolationKind parse_violation_kind(std::string_view s) {
  if (s == "Triangle" || s == "triangle" || s == "triangles" || s == "metric")
    return ViolationKind::triangle;
  if (s == "UltraTriple" || s == "ultra" || s == "triple" || s == "triples")
    return ViolationKind::ultra;
  if (s == "TreeQuadruple" || s == "tree" || s == "quadruple" || s == "quadruples")
    return ViolationKind::tree;
  throw InvalidArgument("unknown violation kind: " + std::string(s));
}

std::size_t arity(ViolationKind k) { return k == ViolationKind::tree ? 4 : 3; }

Violation make_violation(const DistanceMatrix& m, ViolationKind kind,
                         std::span<const Index> indices) {
  if (indices.size() != arity(kind)) throw InvalidArgument("make_violation: wrong arity");
  Violation v;
  v.kind = kind;
  v.indices.assign(indices.begin(), indices.end());
  std::sort(v.indices.begin(), v.indices.end());
  for (std::size_t a = 0; a < v.indices.size(); ++a)
    for (std::size_t b = a + 1; b < v.indices.size(); ++b)
      v.values.push_back(m(v.indices[a], v.indices[b]));
  return v;
}

bool predicate_holds(const Violation& v, double tol) {
  const auto& x = v.values;
  switch (v.kind) {
    case ViolationKind::triangle:
      return x.size() == 3 && is_violating_triangle(x[0], x[1], x[2], tol);
    case ViolationKind::ultra:
      return x.size() == 3 && is_violating_ultra_triple(x[0], x[1], x[2], tol);
    case ViolationKind::tree:
      return x.size() == 6 &&
             is_violating_tree_quadruple(x[0], x[1], x[2], x[3], x[4], x[5], tol);
  }
  return false;
}

bool verify_against(const DistanceMatrix& m, const Violation& v, double tol) {
  if (v.indices.size() != arity(v.kind)) return false;
  if (!std::is_sorted(v.indices.begin(), v.indices.end())) return false;
  if (std::adjacent_find(v.indices.begin(), v.indices.end()) != v.indices.end()) return false;
  for (Index i : v.indices)
    if (i >= m.size()) return false;
  std::size_t k = 0;
  for (std::size_t a = 0; a < v.indices.size(); ++a)
    for (std::size_t b = a + 1; b < v.indices.size(); ++b)
      if (v.values.size() <= k || v.values[k++] != m(v.indices[a], v.indices[b])) return false;
  return k == v.values.size() && predicate_holds(v, tol);
}

namespace {

void check_cap(const DistanceMatrix& m, ViolationKind kind, const EnumerateOptions& opt) {
  const std::size_t cap = kind == ViolationKind::tree ? opt.quadruple_cap : opt.triple_cap;
  if (m.size() > cap)
    throw CapExceeded("n=" + std::to_string(m.size()) + " exceeds enumeration cap " +
                      std::to_string(cap) + " for " + std::string(to_string(kind)));
}

template <std::size_t K>
std::vector<Violation> to_violations(const DistanceMatrix& m, ViolationKind kind,
                                     const std::vector<std::array<Index, K>>& raw) {
  std::vector<Violation> out;
  out.reserve(raw.size());
  for (const auto& t : raw) out.push_back(make_violation(m, kind, t));
  return out;
}

std::vector<std::array<Index, 3>> raw_triples(const DistanceMatrix& m, ViolationKind kind,
                                              double tol) {
  std::vector<std::array<Index, 3>> raw;
  const auto& k = kernels();
  if (kind == ViolationKind::triangle)
    k.collect_triangles(m.data().data(), m.size(), tol, raw);
  else
    k.collect_ultra(m.data().data(), m.size(), tol, raw);
  return raw;
}

}  // namespace

std::vector<Violation> enumerate_violations(const DistanceMatrix& m, ViolationKind kind,
                                            const EnumerateOptions& opt) {
  check_cap(m, kind, opt);
  if (kind == ViolationKind::tree) {
    std::vector<std::array<Index, 4>> raw;
    kernels().collect_tree(m.data().data(), m.size(), opt.tol, raw);
    return to_violations(m, kind, raw);
  }
  return to_violations(m, kind, raw_triples(m, kind, opt.tol));
}

std::size_t count_violations(const DistanceMatrix& m, ViolationKind kind,
                             const EnumerateOptions& opt) {
  check_cap(m, kind, opt);
  if (kind == ViolationKind::tree) {
    std::vector<std::array<Index, 4>> raw;
    kernels().collect_tree(m.data().data(), m.size(), opt.tol, raw);
    return raw.size();
  }
  return raw_triples(m, kind, opt.tol).size();
}

std::uint64_t TriangleDegreeCensus::max_pair_degree() const {
  std::uint64_t best = 0;
  for (auto d : pair_degree_flat) best = std::max(best, d);
  return best;
}

TriangleDegreeCensus triangle_census(const DistanceMatrix& m, const EnumerateOptions& opt) {
  check_cap(m, ViolationKind::triangle, opt);
  const std::size_t n = m.size();
  TriangleDegreeCensus c;
  c.n = n;
  c.vertex_degree.assign(n, 0);
  c.pair_degree_flat.assign(n * n, 0);
  for (const auto& t : raw_triples(m, ViolationKind::triangle, opt.tol)) {
    ++c.total;
    for (Index v : t) ++c.vertex_degree[v];
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        ++c.pair_degree_flat[t[a] * n + t[b]];
        ++c.pair_degree_flat[t[b] * n + t[a]];
      }
  }
  return c;
}

std::vector<Violation> greedy_edge_disjoint_pack(const DistanceMatrix& m,
                                                 const EnumerateOptions& opt) {
  check_cap(m, ViolationKind::triangle, opt);
  const std::size_t n = m.size();
  std::vector<bool> used(n * n, false);
  std::vector<std::array<Index, 3>> picked;
  for (const auto& t : raw_triples(m, ViolationKind::triangle, opt.tol)) {
    const std::size_t e0 = t[0] * n + t[1], e1 = t[0] * n + t[2], e2 = t[1] * n + t[2];
    if (used[e0] || used[e1] || used[e2]) continue;
    used[e0] = used[e1] = used[e2] = true;
    picked.push_back(t);
  }
  return to_violations(m, ViolationKind::triangle, picked);
}

nlohmann::json to_json(const Violation& v) {
  return nlohmann::json{{"kind", to_string(v.kind)}, {"indices", v.indices}, {"values", v.values}};
}

Violation violation_from_json(const nlohmann::json& j) {
  Violation v;
  v.kind = parse_violation_kind(j.at("kind").get<std::string>());
  v.indices = j.at("indices").get<std::vector<Index>>();
  v.values = j.at("values").get<std::vector<double>>();
  return v;
}

std::string to_jsonl(std::span<const Violation> vs) {
  std::string out;
  for (const auto& v : vs) {
    out += to_json(v).dump();
    out += '\n';
  }
  return out;
}

}  // namespace mtest
