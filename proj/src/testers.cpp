#include "mtest/testers.hpp"

#include <chrono>
#include <cmath>
#include <unordered_set>

#include "mtest/kernels.hpp"

namespace mtest {

// ---------------------------------------------------------------------------
// Profiles

ConstantsProfile ConstantsProfile::paper() {
  ConstantsProfile p;
  p.name = "paper";
  p.metric_u_coeff = 12;
  p.metric_pair_coeff = 48;
  p.metric_s_coeff = 8;
  p.ultra_s_coeff = 192;
  p.ultra_log_arg = 48;
  p.ultra_pair_coeff = 16;
  p.tree_s_coeff = 192;
  p.tree_log_arg = 48;
  p.tree_pair_coeff = 16;
  return p;
}

ConstantsProfile ConstantsProfile::desk() {
  ConstantsProfile p;
  p.name = "desk";
  p.metric_u_coeff = 4;
  p.metric_pair_coeff = 8;
  p.metric_s_coeff = 4;
  p.ultra_s_coeff = 8;
  p.ultra_log_arg = 8;
  p.ultra_pair_coeff = 0;
  p.tree_s_coeff = 8;
  p.tree_log_arg = 8;
  p.tree_pair_coeff = 0;
  return p;
}

ConstantsProfile ConstantsProfile::by_name(std::string_view name) {
  if (name == "paper") return paper();
  if (name == "desk") return desk();
  throw InvalidArgument("unknown profile: " + std::string(name));
}

void ConstantsProfile::validate() const {
  for (double c : {clean_coeff, metric_u_coeff, metric_pair_coeff, metric_s_coeff,
                   ultra_s_coeff, ultra_log_arg, tree_s_coeff, tree_log_arg})
    if (!(c > 0)) throw InvalidArgument("profile " + name + ": coefficients must be positive");
  if (ultra_pair_coeff < 0 || tree_pair_coeff < 0)
    throw InvalidArgument("profile " + name + ": pair coefficients must be non-negative");
}

nlohmann::json ConstantsProfile::to_json() const {
  return nlohmann::json{{"name", name},
                        {"clean_coeff", clean_coeff},
                        {"metric_u_coeff", metric_u_coeff},
                        {"metric_pair_coeff", metric_pair_coeff},
                        {"metric_s_coeff", metric_s_coeff},
                        {"ultra_s_coeff", ultra_s_coeff},
                        {"ultra_log_arg", ultra_log_arg},
                        {"ultra_pair_coeff", ultra_pair_coeff},
                        {"tree_s_coeff", tree_s_coeff},
                        {"tree_log_arg", tree_log_arg},
                        {"tree_pair_coeff", tree_pair_coeff}};
}

namespace {

std::size_t ceil_size(double x) { return static_cast<std::size_t>(std::ceil(x - 1e-9)); }

void check_eps(double eps) {
  if (!(eps > 0 && eps < 1)) throw InvalidArgument("eps must lie in (0,1)");
}

}  // namespace

std::size_t ConstantsProfile::metric_u(double eps) const {
  return ceil_size(metric_u_coeff / eps);
}

std::size_t ConstantsProfile::metric_pairs(std::size_t n, double eps) const {
  return ceil_size(metric_pair_coeff * std::cbrt(double(n) * double(n)) / std::cbrt(eps));
}

std::size_t ConstantsProfile::metric_s(std::size_t n, double eps) const {
  return ceil_size(metric_s_coeff * std::cbrt(double(n)) / std::cbrt(eps * eps));
}

std::size_t ConstantsProfile::ultra_base_s(double eps) const {
  return ceil_size(ultra_s_coeff * std::log(ultra_log_arg / eps) / eps);
}

std::size_t ConstantsProfile::tree_base_s(double eps) const {
  return ceil_size(tree_s_coeff * std::log(tree_log_arg / eps) / eps);
}

std::size_t ConstantsProfile::ultra_s(double eps) const {
  return ultra_base_s(eps) + 2 * ceil_size(ultra_pair_coeff / eps);
}

std::size_t ConstantsProfile::tree_s(double eps) const {
  return tree_base_s(eps) + 2 * ceil_size(tree_pair_coeff / eps);
}

double ConstantsProfile::metric_query_ceiling(std::size_t n, double eps) const {
  const double c = (clean_coeff + 1) + 3 * (metric_u_coeff + 1) * (metric_pair_coeff + 1) +
                   (metric_s_coeff + 1) * (metric_s_coeff + 1) / 2;
  return c * std::cbrt(double(n) * double(n)) / std::cbrt(eps * eps * eps * eps);
}

// ---------------------------------------------------------------------------
// Names and JSON

std::string_view to_string(Verdict v) { return v == Verdict::accept ? "accept" : "reject"; }

std::string_view to_string(TesterKind k) {
  switch (k) {
    case TesterKind::metric: return "metric";
    case TesterKind::ultra: return "ultra";
    case TesterKind::tree: return "tree";
  }
  return "unknown";
}

TesterKind parse_tester_kind(std::string_view s) {
  if (s == "metric") return TesterKind::metric;
  if (s == "ultra") return TesterKind::ultra;
  if (s == "tree") return TesterKind::tree;
  throw InvalidArgument("unknown tester kind: " + std::string(s));
}

ViolationKind violation_kind_of(TesterKind k) {
  switch (k) {
    case TesterKind::metric: return ViolationKind::triangle;
    case TesterKind::ultra: return ViolationKind::ultra;
    case TesterKind::tree: return ViolationKind::tree;
  }
  return ViolationKind::triangle;
}

nlohmann::json to_json(const TestReport& r) {
  return nlohmann::json{
      {"verdict", to_string(r.verdict)},
      {"certificate", r.certificate ? to_json(*r.certificate) : nlohmann::json(nullptr)},
      {"samples_used", r.samples_used},
      {"queries_used", r.queries_used},
      {"seed", r.seed},
      {"profile", r.profile},
      {"tester", to_string(r.tester)},
      {"elapsed_ms", r.elapsed_ms}};
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<Index> sample_indices(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<Index> out;
  if (count >= n) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = Index(i);
    return out;
  }
  std::vector<bool> seen(n, false);
  for (std::size_t t = 0; t < count; ++t) {
    const Index i = rng.index(n);
    if (!seen[i]) {
      seen[i] = true;
      out.push_back(i);
    }
  }
  return out;
}

std::vector<std::pair<Index, Index>> sample_pairs(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::pair<Index, Index>> out;
  if (n < 2) return out;
  if (count >= choose2(n)) {
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) out.emplace_back(i, j);
    return out;
  }
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t t = 0; t < count; ++t) {
    Index i = rng.index(n);
    Index j = rng.index(n - 1);
    if (j >= i) ++j;
    if (i > j) std::swap(i, j);
    if (seen.insert(std::uint64_t(i) * n + j).second) out.emplace_back(i, j);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Testers

namespace {

struct Timer {
  bool on;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::uint64_t ms() const {
    if (!on) return 0;
    return std::uint64_t(std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count());
  }
};

void finish(TestReport& r, const QueryOracle& o, const TestOptions& opt, TesterKind kind,
            const Timer& t, const Rng& rng) {
  r.seed = rng.seed();
  r.samples_used = o.sampled_count();
  r.queries_used = o.queried_entries();
  r.profile = opt.profile.name;
  r.tester = kind;
  r.elapsed_ms = t.ms();
}

void reject(TestReport& r, const QueryOracle& o, ViolationKind kind,
            std::span<const Index> indices) {
  r.verdict = Verdict::reject;
  r.certificate = make_violation(o.target(), kind, indices);
}

void require_clean(QueryOracle& oracle, const TestOptions& opt, Rng& rng) {
  if (opt.skip_clean) return;
  const auto trials = clean_trials(opt.eps, opt.profile.clean_coeff);
  const CleanReport c = clean_check(oracle, opt.eps, trials, rng);
  if (!c.clean) {
    const auto& w = *c.witness;
    throw NotClean("input is not clean: " + std::string(to_string(w.condition)) + " at (" +
                   std::to_string(w.i) + "," + std::to_string(w.j) + ")");
  }
}

// Reads every pair of `idx` into a dense block; the diagonal stays zero.
std::vector<double> read_block(QueryOracle& oracle, std::span<const Index> idx) {
  const std::size_t s = idx.size();
  std::vector<double> w(s * s, 0.0);
  for (std::size_t a = 0; a < s; ++a) {
    oracle.touch(idx[a]);
    for (std::size_t b = a + 1; b < s; ++b) {
      const double v = oracle.read(idx[a], idx[b]);
      w[a * s + b] = v;
      w[b * s + a] = v;
    }
  }
  return w;
}

bool hi_degree_scan(QueryOracle& oracle, const TestOptions& opt, Rng& rng, TestReport& r) {
  const std::size_t n = oracle.n();
  const std::size_t u = opt.force_u.value_or(opt.profile.metric_u(opt.eps));
  const std::size_t p = opt.force_pairs.value_or(opt.profile.metric_pairs(n, opt.eps));
  const auto indices = sample_indices(n, u, rng);
  const auto pairs = sample_pairs(n, p, rng);
  for (Index i : indices) {
    oracle.touch(i);
    for (auto [j, k] : pairs) {
      if (i == j || i == k) continue;
      const double a = oracle.read(i, j);
      const double b = oracle.read(i, k);
      const double c = oracle.read(j, k);
      if (is_violating_triangle(a, b, c, opt.tol)) {
        const Index t[3] = {i, j, k};
        reject(r, oracle, ViolationKind::triangle, t);
        return true;
      }
    }
  }
  return false;
}

bool violation_scan(QueryOracle& oracle, const TestOptions& opt, Rng& rng, TestReport& r) {
  const std::size_t n = oracle.n();
  const std::size_t s = opt.force_s.value_or(opt.profile.metric_s(n, opt.eps));
  const auto idx = sample_indices(n, s, rng);
  const auto w = read_block(oracle, idx);
  std::array<Index, 3> hit{};
  if (kernels().first_triangle(w.data(), idx.size(), opt.tol, hit)) {
    const Index t[3] = {idx[hit[0]], idx[hit[1]], idx[hit[2]]};
    reject(r, oracle, ViolationKind::triangle, t);
    return true;
  }
  return false;
}

bool batch_scan(QueryOracle& oracle, ViolationKind kind, std::span<const Index> idx, double tol,
                TestReport& r) {
  const auto w = read_block(oracle, idx);
  if (kind == ViolationKind::ultra) {
    std::array<Index, 3> hit{};
    if (kernels().first_ultra(w.data(), idx.size(), tol, hit)) {
      const Index t[3] = {idx[hit[0]], idx[hit[1]], idx[hit[2]]};
      reject(r, oracle, kind, t);
      return true;
    }
  } else {
    std::array<Index, 4> hit{};
    if (kernels().first_tree(w.data(), idx.size(), tol, hit)) {
      const Index q[4] = {idx[hit[0]], idx[hit[1]], idx[hit[2]], idx[hit[3]]};
      reject(r, oracle, kind, q);
      return true;
    }
  }
  return false;
}

// Checks every triple/quadruple of base ∪ {j, k} that uses j or k.
bool probe_pair(QueryOracle& oracle, ViolationKind kind, std::vector<Index> base, Index j,
                Index k, double tol, TestReport& r) {
  std::erase(base, j);
  std::erase(base, k);
  std::vector<Index> all = base;
  all.push_back(j);
  all.push_back(k);
  const std::size_t m = all.size();
  const auto w = read_block(oracle, all);
  auto d = [&](std::size_t a, std::size_t b) { return w[a * m + b]; };
  const std::size_t first_new = m - 2;
  if (kind == ViolationKind::ultra) {
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b)
        for (std::size_t c = std::max(b + 1, first_new); c < m; ++c)
          if (is_violating_ultra_triple(d(a, b), d(a, c), d(b, c), tol)) {
            const Index t[3] = {all[a], all[b], all[c]};
            reject(r, oracle, kind, t);
            return true;
          }
    return false;
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      for (std::size_t c = b + 1; c < m; ++c)
        for (std::size_t e = std::max(c + 1, first_new); e < m; ++e)
          if (is_violating_tree_quadruple(d(a, b), d(a, c), d(a, e), d(b, c), d(b, e), d(c, e),
                                          tol)) {
            const Index q[4] = {all[a], all[b], all[c], all[e]};
            reject(r, oracle, kind, q);
            return true;
          }
  return false;
}

TestReport sample_test(QueryOracle& oracle, const TestOptions& opt, Rng& rng, TesterKind tk) {
  check_eps(opt.eps);
  opt.profile.validate();
  Timer timer{opt.record_time};
  TestReport r;
  require_clean(oracle, opt, rng);
  const std::size_t n = oracle.n();
  const ViolationKind vk = violation_kind_of(tk);
  const bool ultra = tk == TesterKind::ultra;
  if (!opt.two_phase) {
    const std::size_t s = opt.force_s.value_or(ultra ? opt.profile.ultra_s(opt.eps)
                                                     : opt.profile.tree_s(opt.eps));
    const auto idx = sample_indices(n, s, rng);
    batch_scan(oracle, vk, idx, opt.tol, r);
  } else {
    const std::size_t s = opt.force_s.value_or(ultra ? opt.profile.ultra_base_s(opt.eps)
                                                     : opt.profile.tree_base_s(opt.eps));
    const double pc = ultra ? opt.profile.ultra_pair_coeff : opt.profile.tree_pair_coeff;
    const auto base = sample_indices(n, s, rng);
    if (!batch_scan(oracle, vk, base, opt.tol, r)) {
      const auto pairs = sample_pairs(n, opt.force_pairs.value_or(ceil_size(pc / opt.eps)), rng);
      for (auto [j, k] : pairs)
        if (probe_pair(oracle, vk, base, j, k, opt.tol, r)) break;
    }
  }
  finish(r, oracle, opt, tk, timer, rng);
  return r;
}

}  // namespace

TestReport check_hi_degree(QueryOracle& oracle, const TestOptions& opt, Rng& rng) {
  check_eps(opt.eps);
  opt.profile.validate();
  Timer timer{opt.record_time};
  TestReport r;
  hi_degree_scan(oracle, opt, rng, r);
  finish(r, oracle, opt, TesterKind::metric, timer, rng);
  return r;
}

TestReport check_violation(QueryOracle& oracle, const TestOptions& opt, Rng& rng) {
  check_eps(opt.eps);
  opt.profile.validate();
  Timer timer{opt.record_time};
  TestReport r;
  violation_scan(oracle, opt, rng, r);
  finish(r, oracle, opt, TesterKind::metric, timer, rng);
  return r;
}

TestReport metric_test(QueryOracle& oracle, const TestOptions& opt, Rng& rng) {
  check_eps(opt.eps);
  opt.profile.validate();
  Timer timer{opt.record_time};
  TestReport r;
  require_clean(oracle, opt, rng);
  if (!hi_degree_scan(oracle, opt, rng, r)) violation_scan(oracle, opt, rng, r);
  finish(r, oracle, opt, TesterKind::metric, timer, rng);
  return r;
}

TestReport ultra_test(QueryOracle& oracle, const TestOptions& opt, Rng& rng) {
  return sample_test(oracle, opt, rng, TesterKind::ultra);
}

TestReport tree_test(QueryOracle& oracle, const TestOptions& opt, Rng& rng) {
  return sample_test(oracle, opt, rng, TesterKind::tree);
}

TestReport run_tester(TesterKind kind, QueryOracle& oracle, const TestOptions& opt,
                      std::uint64_t seed) {
  Rng rng(seed);
  TestReport r;
  switch (kind) {
    case TesterKind::metric: r = metric_test(oracle, opt, rng); break;
    case TesterKind::ultra: r = ultra_test(oracle, opt, rng); break;
    case TesterKind::tree: r = tree_test(oracle, opt, rng); break;
  }
  r.seed = seed;
  return r;
}

}  // namespace mtest
