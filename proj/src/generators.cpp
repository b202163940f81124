#include "mtest/generators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_set>

#include "mtest/repair.hpp"

namespace mtest {

// ---------------------------------------------------------------------------
// Salem-Spencer sets

bool is_salem_spencer(std::size_t n, std::span<const std::uint64_t> members) {
  if (n == 0) return members.empty();
  std::vector<bool> in(n, false);
  for (auto x : members) {
    if (x >= n) return false;
    in[x] = true;
  }
  for (auto x : members) {
    for (auto y : members) {
      const std::uint64_t sum = (x + y) % n;
      // Solve 2z = sum (mod n).
      std::uint64_t roots[2];
      int count = 0;
      if (n % 2 == 1) {
        const std::uint64_t half = sum % 2 == 0 ? sum / 2 : (sum + n) / 2;
        roots[count++] = half;
      } else if (sum % 2 == 0) {
        roots[count++] = sum / 2;
        roots[count++] = sum / 2 + n / 2;
      }
      for (int r = 0; r < count; ++r) {
        const std::uint64_t z = roots[r];
        if (in[z] && !(x == y && y == z)) return false;
      }
    }
  }
  return true;
}

namespace {

// Adds candidates in increasing order when they close no 3-term progression
// (integers; all values stay below n/2 so this is also the modular test).
void greedy_extend(std::vector<std::uint64_t>& set, std::uint64_t limit) {
  std::vector<bool> in(limit, false);
  for (auto x : set) in[x] = true;
  for (std::uint64_t x = 0; x < limit; ++x) {
    if (in[x]) continue;
    bool ok = true;
    for (auto y : set) {
      // x as an endpoint with y the other endpoint: midpoint (x+y)/2.
      if ((x + y) % 2 == 0 && in[(x + y) / 2]) { ok = false; break; }
      // x as an endpoint with y the midpoint: other endpoint 2y - x.
      if (2 * y >= x && 2 * y - x < limit && in[2 * y - x]) { ok = false; break; }
      // x as the midpoint of y and 2x - y.
      if (2 * x >= y && 2 * x - y < limit && 2 * x - y != y && in[2 * x - y]) { ok = false; break; }
    }
    if (ok) {
      in[x] = true;
      set.push_back(x);
    }
  }
  std::sort(set.begin(), set.end());
}

std::vector<std::uint64_t> behrend_digits(std::uint64_t limit) {
  std::vector<std::uint64_t> best;
  for (std::uint64_t d = 2; d <= 64; ++d) {
    const std::uint64_t base = 2 * d - 1;
    for (std::uint64_t k = 2;; ++k) {
      // Stop once the smallest number with a nonzero top digit is too big,
      // or the digit space would be too large to walk.
      std::uint64_t top = 1;
      for (std::uint64_t i = 1; i < k; ++i) top *= base;
      if (top >= limit) break;
      double space = std::pow(double(d), double(k));
      if (space > 2e6) break;
      std::map<std::uint64_t, std::vector<std::uint64_t>> by_norm;
      std::vector<std::uint64_t> digits(k, 0);
      while (true) {
        std::uint64_t value = 0, norm = 0;
        for (std::uint64_t i = k; i-- > 0;) value = value * base + digits[i];
        for (auto g : digits) norm += g * g;
        if (value < limit) by_norm[norm].push_back(value);
        std::size_t pos = 0;
        while (pos < k && ++digits[pos] == d) digits[pos++] = 0;
        if (pos == k) break;
      }
      for (auto& [norm, vals] : by_norm)
        if (vals.size() > best.size()) best = vals;
    }
  }
  std::sort(best.begin(), best.end());
  return best;
}

}  // namespace

SalemSpencerSet salem_spencer(std::size_t n) {
  if (n < 3) throw InvalidArgument("salem_spencer needs n >= 3");
  const std::uint64_t limit = n / 2;
  std::vector<std::uint64_t> behrend = behrend_digits(limit);
  greedy_extend(behrend, limit);
  std::vector<std::uint64_t> greedy;
  greedy_extend(greedy, limit);
  SalemSpencerSet out;
  out.n = n;
  out.members = behrend.size() >= greedy.size() ? behrend : greedy;
  if (out.members.empty()) out.members.push_back(0);
  if (!is_salem_spencer(n, out.members))
    throw std::logic_error("salem_spencer produced a set with a 3-term progression");
  return out;
}

SalemSpencerSet make_salem_spencer(std::size_t n, std::vector<std::uint64_t> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (!is_salem_spencer(n, members))
    throw InvalidArgument("set is not free of 3-term progressions mod n");
  std::unordered_set<std::uint64_t> doubled;
  for (auto x : members)
    if (!doubled.insert((2 * x) % n).second)
      throw InvalidArgument("set has two members with equal doubles mod n");
  return SalemSpencerSet{n, std::move(members)};
}

std::size_t floor_product(double a, double b) {
  const double p = a * b;
  return static_cast<std::size_t>(std::floor(p + 1e-9 * std::max(1.0, std::abs(p))));
}

// ---------------------------------------------------------------------------
// Lower-bound constructions

namespace {

std::vector<Index> make_permutation(std::size_t n, Rng& rng, bool shuffle) {
  if (shuffle) return rng.permutation(n);
  std::vector<Index> p(n);
  std::iota(p.begin(), p.end(), Index{0});
  return p;
}

GeneratedInstance finish(DistanceMatrix base, Provenance prov, nlohmann::json params,
                         std::vector<Index> perm) {
  GeneratedInstance g;
  g.matrix = base.permuted(perm);
  g.provenance = prov;
  g.params = std::move(params);
  g.permutation = std::move(perm);
  return g;
}

std::vector<bool> membership(const SalemSpencerSet& x, bool doubled) {
  std::vector<bool> in(x.n, false);
  for (auto v : x.members) in[doubled ? (2 * v) % x.n : v] = true;
  return in;
}

std::size_t mod_diff(std::size_t a, std::size_t b, std::size_t n) { return (b + n - a) % n; }

}  // namespace

GeneratedInstance gen_behrend(std::size_t n, const SalemSpencerSet& x, std::uint64_t seed,
                              bool shuffle) {
  if (x.n != n) throw InvalidArgument("gen_behrend: set modulus differs from n");
  Rng rng(seed);
  const std::size_t N = 3 * n;
  const auto in_x = membership(x, false);
  const auto in_2x = membership(x, true);
  DistanceMatrix m(N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) m.set(i, j, 2.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      m.set(a, n + b, in_x[mod_diff(a, b, n)] ? 1.0 : 2.0);
      m.set(n + a, 2 * n + b, in_x[mod_diff(a, b, n)] ? 2.0 : 3.0);
      m.set(a, 2 * n + b, in_2x[mod_diff(a, b, n)] ? 4.0 : 2.0);
    }
  nlohmann::json params{{"n", n}, {"seed", seed}, {"X", x.members}, {"X_size", x.members.size()}};
  return finish(std::move(m), Provenance::behrend, std::move(params),
                make_permutation(N, rng, shuffle));
}

std::pair<GeneratedInstance, GeneratedInstance> gen_twin(std::size_t n, const SalemSpencerSet& x,
                                                         std::uint64_t seed, bool shuffle) {
  if (x.n != n) throw InvalidArgument("gen_twin: set modulus differs from n");
  Rng rng(seed);
  const std::size_t N = 6 * n;
  const auto in_x = membership(x, false);
  const auto in_2x = membership(x, true);
  DistanceMatrix good(N), bad(N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      good.set(i, j, 2.0);
      bad.set(i, j, 2.0);
    }
  // Part P copy c (0 plain, 1 primed) of point i sits at 2n*P + c*n + i.
  auto at = [n](std::size_t part, std::size_t copy, std::size_t i) {
    return 2 * n * part + copy * n + i;
  };
  struct Rule {
    std::size_t p, q;
    const std::vector<bool>* special;
    double hit, miss;
  };
  const Rule rules[] = {{0, 1, &in_x, 1.0, 2.0}, {1, 2, &in_x, 2.0, 3.0}, {0, 2, &in_2x, 4.0, 2.0}};
  for (const auto& r : rules)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const bool s = (*r.special)[mod_diff(i, j, n)];
        for (std::size_t ci = 0; ci < 2; ++ci)
          for (std::size_t cj = 0; cj < 2; ++cj) {
            const bool same = ci == cj;
            bad.set(at(r.p, ci, i), at(r.q, cj, j), s && same ? r.hit : r.miss);
            good.set(at(r.p, ci, i), at(r.q, cj, j), s && !same ? r.hit : r.miss);
          }
      }
  auto perm = make_permutation(N, rng, shuffle);
  nlohmann::json params{{"n", n}, {"seed", seed}, {"X", x.members}, {"X_size", x.members.size()}};
  return {finish(std::move(good), Provenance::twin_good, params, perm),
          finish(std::move(bad), Provenance::twin_bad, params, perm)};
}

GeneratedInstance gen_sample_lb(std::size_t n, double eps, std::uint64_t seed, bool shuffle) {
  const std::size_t s = floor_product(eps, double(n));
  if (s < 1) throw InvalidArgument("gen_sample_lb needs floor(eps*n) >= 1");
  if (s >= n) throw InvalidArgument("gen_sample_lb needs at least one good point");
  Rng rng(seed);
  const std::size_t r = n - s;
  const double two_n = 2.0 * double(n);
  DistanceMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (i < r && j >= r)
        m.set(i, j, two_n + double(i + 1));
      else
        m.set(i, j, two_n);
    }
  nlohmann::json params{{"n", n}, {"eps", eps}, {"seed", seed}, {"r", r}, {"s", s}};
  return finish(std::move(m), Provenance::sample_lb, std::move(params),
                make_permutation(n, rng, shuffle));
}

GeneratedInstance gen_query_lb(std::size_t n, double eps, std::uint64_t seed, bool shuffle) {
  const std::size_t r = floor_product(eps, double(n));
  if (r < 3) throw InvalidArgument("gen_query_lb needs floor(eps*n) >= 3");
  const std::size_t l = floor_product(1.0 / eps, 1.0);
  if (l * r > n) throw InvalidArgument("gen_query_lb: blocks do not fit");
  Rng rng(seed);
  DistanceMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, 10.0);
  for (std::size_t b = 0; b < l; ++b)
    for (std::size_t i = b * r; i < (b + 1) * r; ++i)
      for (std::size_t j = i + 1; j < (b + 1) * r; ++j) m.set(i, j, rng.coin() ? 1.0 : 2.0);
  nlohmann::json params{{"n", n}, {"eps", eps}, {"seed", seed}, {"r", r}, {"l", l}};
  return finish(std::move(m), Provenance::query_lb, std::move(params),
                make_permutation(n, rng, shuffle));
}

std::vector<Index> sample_lb_bad_indices(const GeneratedInstance& inst) {
  if (inst.provenance != Provenance::sample_lb)
    throw ProvenanceError("not a sample_lb instance");
  const std::size_t r = inst.params.at("r").get<std::size_t>();
  std::vector<Index> out(inst.permutation.begin() + r, inst.permutation.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> query_lb_blocks(const GeneratedInstance& inst) {
  if (inst.provenance != Provenance::query_lb) throw ProvenanceError("not a query_lb instance");
  const std::size_t r = inst.params.at("r").get<std::size_t>();
  const std::size_t l = inst.params.at("l").get<std::size_t>();
  std::vector<int> block(inst.permutation.size(), -1);
  for (std::size_t i = 0; i < inst.permutation.size(); ++i)
    block[inst.permutation[i]] = i < l * r ? int(i / r) : -1;
  return block;
}

// ---------------------------------------------------------------------------
// In-class random instances

GeneratedInstance gen_random_metric(std::size_t n, std::uint64_t seed, const RandomParams& p) {
  if (n < 2) throw InvalidArgument("gen_random_metric needs n >= 2");
  Rng rng(seed);
  DistanceMatrix w(n);
  std::vector<Pair> all;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      w.set(i, j, double(rng.between(std::int64_t(p.min_weight), std::int64_t(p.max_weight))));
      all.emplace_back(i, j);
    }
  DistanceMatrix m = shortest_path_completion(w, all).matrix;
  std::vector<Index> ident(n);
  std::iota(ident.begin(), ident.end(), Index{0});
  nlohmann::json params{{"n", n},
                        {"seed", seed},
                        {"min_weight", p.min_weight},
                        {"max_weight", p.max_weight}};
  return finish(std::move(m), Provenance::random_metric, std::move(params), std::move(ident));
}

GeneratedInstance gen_random_ultra(std::size_t n, std::uint64_t seed, const RandomParams& p) {
  if (n < 2) throw InvalidArgument("gen_random_ultra needs n >= 2");
  Rng rng(seed);
  DistanceMatrix m(n);
  // Contiguous ranges in construction order; heights drop by 1..3 per level
  // so every merge height stays above max_weight.
  struct Node {
    std::size_t lo, hi;
    std::int64_t height;
  };
  std::vector<Node> stack{{0, n, std::int64_t(p.max_weight + 3 * n)}};
  while (!stack.empty()) {
    Node node = stack.back();
    stack.pop_back();
    if (node.hi - node.lo < 2) continue;
    const std::size_t split = node.lo + std::size_t(rng.between(1, std::int64_t(node.hi - node.lo - 1)));
    for (std::size_t i = node.lo; i < split; ++i)
      for (std::size_t j = split; j < node.hi; ++j) m.set(i, j, double(node.height));
    stack.push_back({node.lo, split, node.height - rng.between(1, 3)});
    stack.push_back({split, node.hi, node.height - rng.between(1, 3)});
  }
  nlohmann::json params{{"n", n}, {"seed", seed}, {"max_weight", p.max_weight}};
  return finish(std::move(m), Provenance::random_ultra, std::move(params),
                rng.permutation(n));
}

GeneratedInstance gen_random_tree(std::size_t n, std::uint64_t seed, const RandomParams& p) {
  if (n < 2) throw InvalidArgument("gen_random_tree needs n >= 2");
  Rng rng(seed);
  auto weight = [&] {
    return double(rng.between(std::int64_t(p.min_weight), std::int64_t(p.max_weight)));
  };
  // Leaves are nodes 0..n-1; internal nodes are appended after them.
  struct Edge {
    std::size_t u, v;
    double w;
  };
  std::vector<Edge> edges{{0, 1, weight()}};
  std::size_t next_node = n;
  for (std::size_t leaf = 2; leaf < n; ++leaf) {
    const std::size_t e = rng.index(edges.size());
    const Edge old = edges[e];
    const std::size_t mid = next_node++;
    edges[e] = {old.u, mid, weight()};
    edges.push_back({mid, old.v, weight()});
    edges.push_back({mid, leaf, weight()});
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(next_node);
  for (const auto& e : edges) {
    adj[e.u].emplace_back(e.v, e.w);
    adj[e.v].emplace_back(e.u, e.w);
  }
  DistanceMatrix m(n);
  std::vector<double> dist(next_node);
  std::vector<std::size_t> stack;
  for (std::size_t src = 0; src < n; ++src) {
    std::fill(dist.begin(), dist.end(), -1.0);
    dist[src] = 0;
    stack.assign(1, src);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (auto [v, w] : adj[u])
        if (dist[v] < 0) {
          dist[v] = dist[u] + w;
          stack.push_back(v);
        }
    }
    for (std::size_t t = 0; t < n; ++t) m.set_entry(src, t, dist[t]);
  }
  nlohmann::json params{{"n", n},
                        {"seed", seed},
                        {"min_weight", p.min_weight},
                        {"max_weight", p.max_weight}};
  return finish(std::move(m), Provenance::random_tree, std::move(params), rng.permutation(n));
}

// ---------------------------------------------------------------------------
// Corruption

CorruptMode parse_corrupt_mode(std::string_view s) {
  if (s == "uniform" || s == "uniform-rewrite" || s == "uniform_rewrite")
    return CorruptMode::uniform_rewrite;
  if (s == "d_s" || s == "d_s-style" || s == "d_s_style" || s == "ds")
    return CorruptMode::d_s_style;
  throw InvalidArgument("unknown corruption mode: " + std::string(s));
}

GeneratedInstance corrupt(const GeneratedInstance& base, double eps, std::uint64_t seed,
                          CorruptMode mode) {
  if (!(eps >= 0 && eps <= 1)) throw InvalidArgument("corrupt: eps must lie in [0,1]");
  const DistanceMatrix& src = base.matrix;
  const std::size_t n = src.size();
  Rng rng(seed);
  DistanceMatrix m = src;
  double lo = 0, hi = 0;
  bool first = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = src(i, j);
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }

  nlohmann::json params{{"base", provenance_json(base)["params"]},
                        {"base_provenance", to_string(base.provenance)},
                        {"n", n},
                        {"eps", eps},
                        {"seed", seed}};
  std::uint64_t changed_pairs = 0;

  if (mode == CorruptMode::uniform_rewrite) {
    const auto total = choose2(n);
    const auto want = std::min<std::uint64_t>(
        total, static_cast<std::uint64_t>(std::ceil(eps * double(n) * double(n) / 2 - 1e-9)));
    // Partial Fisher-Yates over pair slots picks distinct pairs.
    std::vector<std::uint64_t> slots(total);
    std::iota(slots.begin(), slots.end(), 0);
    const double vlo = 0.1 * lo, vhi = 3.0 * hi;
    for (std::uint64_t t = 0; t < want; ++t) {
      const std::uint64_t pick = t + rng.below(total - t);
      std::swap(slots[t], slots[pick]);
      std::uint64_t slot = slots[t];
      Index i = 0;
      while (slot >= n - 1 - i) {
        slot -= n - 1 - i;
        ++i;
      }
      const Index j = Index(i + 1 + slot);
      double v;
      do {
        v = rng.uniform(vlo, vhi);
      } while (v == src(i, j) || v <= 0);
      m.set(i, j, v);
    }
    changed_pairs = want;
    params["mode"] = "uniform-rewrite";
  } else {
    const std::size_t s = floor_product(eps, double(n));
    auto order = rng.permutation(n);
    // First n-s entries of `order` are the good points in numbering order.
    const std::size_t r = n - s;
    for (std::size_t gi = 0; gi < r; ++gi)
      for (std::size_t b = r; b < n; ++b) m.set(order[gi], order[b], hi + double(gi + 1));
    std::vector<Index> bad(order.begin() + r, order.end());
    std::sort(bad.begin(), bad.end());
    params["mode"] = "d_s-style";
    params["bad_indices"] = bad;
    changed_pairs = std::uint64_t(r) * s;
  }
  params["rewritten_pairs"] = changed_pairs;
  params["changed_entries"] = m.count_differences(src);

  if (n <= EnumerateOptions{}.triple_cap) {
    const auto lower = farness_lower_bound(m).lower_entries;
    params["certified_lower_entries"] = lower;
    params["certified_eps"] = double(lower) / (double(n) * double(n));
  }

  GeneratedInstance out;
  out.matrix = std::move(m);
  out.provenance = Provenance::corrupted;
  out.params = std::move(params);
  out.permutation = base.permutation;
  return out;
}

}  // namespace mtest
