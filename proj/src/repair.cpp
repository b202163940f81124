#include "mtest/repair.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "mtest/kernels.hpp"

namespace mtest {

namespace {

Index find_root(std::vector<Index>& parent, Index x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

void floyd_warshall(std::vector<double>& d, std::size_t n) {
  const auto& k_table = kernels();
  for (std::size_t k = 0; k < n; ++k) {
    const double* rk = d.data() + k * n;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const double dik = d[i * n + k];
      if (dik == std::numeric_limits<double>::infinity()) continue;
      k_table.minplus_relax(d.data() + i * n, rk, dik, n);
    }
  }
}

}  // namespace

Completion shortest_path_completion(const DistanceMatrix& m, std::span<const Pair> keep) {
  const std::size_t n = m.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(n * n, inf);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0;

  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), Index{0});
  double max_kept = 0;
  bool any = false;
  for (auto [i, j] : keep) {
    if (i == j) continue;
    const double w = m(i, j);
    d[i * n + j] = std::min(d[i * n + j], w);
    d[j * n + i] = std::min(d[j * n + i], w);
    max_kept = any ? std::max(max_kept, w) : w;
    any = true;
    parent[find_root(parent, i)] = find_root(parent, j);
  }
  const double bridge = any ? max_kept : 1.0;

  // Star of bridges from the component holding point 0 to the smallest
  // member of every other component.
  std::vector<bool> bridged(n, false);
  if (n > 0) {
    const Index hub_root = find_root(parent, 0);
    bridged[hub_root] = true;
    for (Index v = 1; v < n; ++v) {
      const Index r = find_root(parent, v);
      if (bridged[r]) continue;
      bridged[r] = true;
      d[v] = std::min(d[v], bridge);
      d[v * n] = std::min(d[v * n], bridge);
    }
  }

  floyd_warshall(d, n);

  Completion out{DistanceMatrix(n, std::move(d)), {}};
  for (auto [i, j] : keep) {
    if (i != j && out.matrix(i, j) != m(i, j)) out.disagreements.emplace_back(i, j);
  }
  return out;
}

FarnessBounds repair_upper_bound(const DistanceMatrix& m, const EnumerateOptions& opt) {
  const std::size_t n = m.size();
  std::vector<bool> bad(n * n, false);
  for (const auto& v : enumerate_violations(m, ViolationKind::triangle, opt)) {
    const auto& t = v.indices;
    bad[t[0] * n + t[1]] = bad[t[0] * n + t[2]] = bad[t[1] * n + t[2]] = true;
  }
  std::vector<Pair> keep;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (!bad[i * n + j]) keep.emplace_back(i, j);

  FarnessBounds b;
  b.n = n;
  b.upper_certificate = shortest_path_completion(m, keep).matrix;
  b.upper_entries = b.upper_certificate.count_differences(m);
  return b;
}

FarnessBounds farness_lower_bound(const DistanceMatrix& m, const EnumerateOptions& opt) {
  FarnessBounds b;
  b.n = m.size();
  b.lower_certificate = greedy_edge_disjoint_pack(m, opt);
  b.lower_entries = 2 * b.lower_certificate.size();
  return b;
}

FarnessBounds farness_bounds(const DistanceMatrix& m, const EnumerateOptions& opt) {
  FarnessBounds b = repair_upper_bound(m, opt);
  FarnessBounds lo = farness_lower_bound(m, opt);
  b.lower_entries = lo.lower_entries;
  b.lower_certificate = std::move(lo.lower_certificate);
  return b;
}

nlohmann::json to_json(const FarnessBounds& b) {
  return nlohmann::json{
      {"n", b.n}, {"lower_entries", b.lower_entries}, {"upper_entries", b.upper_entries}};
}

DistanceMatrix behrend_direct_repair(const GeneratedInstance& inst) {
  if (inst.provenance != Provenance::behrend)
    throw ProvenanceError("behrend_direct_repair needs a behrend instance, got " +
                          std::string(to_string(inst.provenance)));
  DistanceMatrix out = inst.matrix;
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (out(i, j) == 4.0) out.set_entry(i, j, 3.0);
  return out;
}

std::uint64_t stab_count(std::span<const std::pair<double, double>> intervals, double x) {
  std::uint64_t c = 0;
  for (auto [lo, hi] : intervals)
    if (lo <= x && x <= hi) ++c;
  return c;
}

IntervalStab stab_intervals(std::vector<std::pair<double, double>> intervals) {
  IntervalStab r;
  std::vector<double> lows, highs;
  lows.reserve(intervals.size());
  highs.reserve(intervals.size());
  for (auto [lo, hi] : intervals) {
    lows.push_back(lo);
    highs.push_back(hi);
  }
  std::sort(lows.begin(), lows.end());
  std::sort(highs.begin(), highs.end());
  // Coverage only rises at a left endpoint, so the smallest maximiser is one.
  bool first = true;
  for (double x : lows) {
    const auto opened = std::upper_bound(lows.begin(), lows.end(), x) - lows.begin();
    const auto closed = std::lower_bound(highs.begin(), highs.end(), x) - highs.begin();
    const auto cover = static_cast<std::uint64_t>(opened - closed);
    if (first || cover > r.hit_count) {
      r.value = x;
      r.hit_count = cover;
      first = false;
    }
  }
  r.intervals = std::move(intervals);
  return r;
}

IntervalStab optimal_edge_value(const DistanceMatrix& m, Index i, Index j) {
  const std::size_t n = m.size();
  if (n < 3) throw InvalidArgument("optimal_edge_value needs n >= 3");
  if (i == j || i >= n || j >= n) throw InvalidArgument("optimal_edge_value needs i != j");
  std::vector<std::pair<double, double>> iv;
  iv.reserve(n - 2);
  for (Index k = 0; k < n; ++k) {
    if (k == i || k == j) continue;
    const double a = m(i, k), b = m(j, k);
    iv.emplace_back(a > b ? a - b : b - a, a + b);
  }
  return stab_intervals(std::move(iv));
}

namespace {

// Visits size-k subsets of [0, p) in lexicographic order until f returns true.
template <class F>
bool any_subset(std::size_t p, std::size_t k, F f) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k > p) return false;
  while (true) {
    if (f(idx)) return true;
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == p - k + pos - 1) --pos;
    if (pos == 0) return false;
    ++idx[pos - 1];
    for (std::size_t q = pos; q < k; ++q) idx[q] = idx[q - 1] + 1;
  }
}

}  // namespace

std::optional<std::uint64_t> brute_force_min_repair(const DistanceMatrix& m,
                                                    std::size_t max_pairs) {
  const std::size_t n = m.size();
  std::vector<Pair> pairs;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  for (std::size_t k = 0; k <= std::min(max_pairs, pairs.size()); ++k) {
    const bool found = any_subset(pairs.size(), k, [&](const std::vector<std::size_t>& drop) {
      std::vector<Pair> keep;
      std::size_t d = 0;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (d < drop.size() && drop[d] == p) {
          ++d;
          continue;
        }
        keep.push_back(pairs[p]);
      }
      return shortest_path_completion(m, keep).disagreements.empty();
    });
    if (found) return 2 * k;
  }
  return std::nullopt;
}

}  // namespace mtest
