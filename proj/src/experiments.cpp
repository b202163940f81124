#include "mtest/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mtest/kernels.hpp"
#include "mtest/parallel.hpp"
#include "mtest/predicates.hpp"
#include "mtest/repair.hpp"

namespace mtest {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = double(trials);
  const double p = double(successes) / n;
  const double z2 = z * z;
  const double denom = 1 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

std::string normalise(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

SalemSpencerSet salem_from(const nlohmann::json& spec, std::size_t n) {
  if (spec.contains("X")) return make_salem_spencer(n, spec.at("X").get<std::vector<std::uint64_t>>());
  return salem_spencer(n);
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

GeneratedInstance generate_instance(const nlohmann::json& spec, std::uint64_t seed) {
  if (!spec.is_object() || !spec.contains("kind"))
    throw InvalidArgument("instance spec needs a \"kind\"");
  const std::string kind = normalise(spec.at("kind").get<std::string>());
  const bool shuffle = spec.value("shuffle", true);
  auto n_of = [&] {
    if (!spec.contains("n")) throw InvalidArgument("instance spec needs \"n\"");
    const auto n = spec.at("n").get<std::size_t>();
    if (n == 0) throw InvalidArgument("n must be positive");
    return n;
  };
  auto eps_of = [&] {
    const double e = spec.value("eps", 0.1);
    if (!(e > 0 && e < 1)) throw InvalidArgument("eps must lie in (0, 1)");
    return e;
  };
  RandomParams rp;
  if (kind == "random-tree") rp = {1, 10};
  rp.min_weight = spec.value("min_weight", rp.min_weight);
  rp.max_weight = spec.value("max_weight", rp.max_weight);

  if (kind == "behrend") {
    const auto n = n_of();
    return gen_behrend(n, salem_from(spec, n), seed, shuffle);
  }
  if (kind == "twin-good" || kind == "twin-bad") {
    const auto n = n_of();
    auto pair = gen_twin(n, salem_from(spec, n), seed, shuffle);
    return kind == "twin-good" ? std::move(pair.first) : std::move(pair.second);
  }
  if (kind == "sample-lb" || kind == "d-s") return gen_sample_lb(n_of(), eps_of(), seed, shuffle);
  if (kind == "query-lb" || kind == "d-q") return gen_query_lb(n_of(), eps_of(), seed, shuffle);
  if (kind == "random-metric") return gen_random_metric(n_of(), seed, rp);
  if (kind == "random-ultra") return gen_random_ultra(n_of(), seed, rp);
  if (kind == "random-tree") return gen_random_tree(n_of(), seed, rp);
  if (kind == "corrupt" || kind == "corrupted") {
    if (!spec.contains("base")) throw InvalidArgument("corrupt spec needs a \"base\"");
    const auto base = generate_instance(spec.at("base"), derive_seed(seed, 0));
    return corrupt(base, eps_of(), derive_seed(seed, 1),
                   parse_corrupt_mode(spec.value("mode", std::string("uniform"))));
  }
  throw InvalidArgument("unknown instance kind: " + kind);
}

std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::clique: return "clique";
    case Shape::path: return "path";
    case Shape::star: return "star";
    case Shape::random_gnm: return "random_gnm";
    case Shape::grid: return "grid";
  }
  return "unknown";
}

Shape parse_shape(std::string_view s) {
  const std::string k = normalise(std::string(s));
  if (k == "clique") return Shape::clique;
  if (k == "path") return Shape::path;
  if (k == "star") return Shape::star;
  if (k == "random-gnm" || k == "gnm") return Shape::random_gnm;
  if (k == "grid") return Shape::grid;
  throw InvalidArgument("unknown query strategy: " + std::string(s));
}

namespace {

std::size_t clique_size(std::uint64_t budget, std::size_t n) {
  std::size_t s = 1;
  while (s < n && choose2(s + 1) <= budget) ++s;
  return budget == 0 ? 0 : s;
}

}  // namespace

QueryGraph make_query_graph(Shape shape, std::uint64_t budget, std::size_t n, Rng& rng) {
  QueryGraph g;
  switch (shape) {
    case Shape::clique: {
      g.vertices = clique_size(budget, n);
      for (Index a = 0; a < g.vertices; ++a)
        for (Index b = a + 1; b < g.vertices; ++b) g.edges.emplace_back(a, b);
      break;
    }
    case Shape::path: {
      const auto e = std::min<std::uint64_t>(budget, n > 0 ? n - 1 : 0);
      g.vertices = e == 0 ? 0 : e + 1;
      for (Index a = 0; a < e; ++a) g.edges.emplace_back(a, a + 1);
      break;
    }
    case Shape::star: {
      const auto e = std::min<std::uint64_t>(budget, n > 0 ? n - 1 : 0);
      g.vertices = e == 0 ? 0 : e + 1;
      for (Index a = 1; a <= e; ++a) g.edges.emplace_back(0, a);
      break;
    }
    case Shape::grid: {
      std::size_t k = 1;
      while ((k + 1) * (k + 1) <= n && 2 * (k + 1) * k <= budget) ++k;
      if (k < 2) break;
      g.vertices = k * k;
      for (Index r = 0; r < k; ++r)
        for (Index c = 0; c < k; ++c) {
          const Index v = Index(r * k + c);
          if (c + 1 < k) g.edges.emplace_back(v, v + 1);
          if (r + 1 < k) g.edges.emplace_back(v, Index(v + k));
        }
      break;
    }
    case Shape::random_gnm: {
      const std::size_t v = std::min(n, 2 * clique_size(budget, n));
      if (v < 2) break;
      g.vertices = v;
      const auto e = std::min<std::uint64_t>(budget, choose2(v));
      std::vector<std::uint64_t> slots(choose2(v));
      for (std::uint64_t i = 0; i < slots.size(); ++i) slots[i] = i;
      for (std::uint64_t t = 0; t < e; ++t) {
        std::swap(slots[t], slots[t + rng.below(slots.size() - t)]);
        std::uint64_t slot = slots[t];
        Index a = 0;
        while (slot >= v - 1 - a) {
          slot -= v - 1 - a;
          ++a;
        }
        g.edges.emplace_back(a, Index(a + 1 + slot));
      }
      break;
    }
  }
  return g;
}

bool graph_detects(const DistanceMatrix& m, const QueryGraph& g, std::span<const Index> order,
                   ViolationKind kind) {
  const std::size_t v = g.vertices;
  if (v < 3 || order.size() < v) return false;
  auto at = [&](Index a, Index b) { return m(order[a], order[b]); };

  if (g.edges.size() == choose2(v)) {
    std::vector<double> w(v * v);
    for (Index a = 0; a < v; ++a)
      for (Index b = 0; b < v; ++b) w[a * v + b] = at(a, b);
    const auto& k = kernels();
    std::array<Index, 3> t;
    std::array<Index, 4> q;
    switch (kind) {
      case ViolationKind::triangle: return k.first_triangle(w.data(), v, 0.0, t);
      case ViolationKind::ultra: return k.first_ultra(w.data(), v, 0.0, t);
      case ViolationKind::tree: return k.first_tree(w.data(), v, 0.0, q);
    }
  }

  std::vector<std::vector<Index>> nbr(v);
  std::vector<char> adj(v * v, 0);
  for (auto [a, b] : g.edges) {
    if (adj[a * v + b]) continue;
    adj[a * v + b] = adj[b * v + a] = 1;
    nbr[std::min(a, b)].push_back(std::max(a, b));
  }
  for (auto& l : nbr) std::sort(l.begin(), l.end());
  for (Index a = 0; a < v; ++a)
    for (std::size_t x = 0; x < nbr[a].size(); ++x)
      for (std::size_t y = x + 1; y < nbr[a].size(); ++y) {
        const Index b = nbr[a][x], c = nbr[a][y];
        if (!adj[b * v + c]) continue;
        if (kind == ViolationKind::triangle &&
            is_violating_triangle(at(a, b), at(a, c), at(b, c), 0.0))
          return true;
        if (kind == ViolationKind::ultra && is_violating_ultra_triple(at(a, b), at(a, c), at(b, c), 0.0))
          return true;
        if (kind == ViolationKind::tree)
          for (std::size_t z = y + 1; z < nbr[a].size(); ++z) {
            const Index d = nbr[a][z];
            if (adj[b * v + d] && adj[c * v + d] &&
                is_violating_tree_quadruple(at(a, b), at(a, c), at(a, d), at(b, c), at(b, d), at(c, d), 0.0))
              return true;
          }
      }
  return false;
}

SweepSpec SweepSpec::from_json(const nlohmann::json& j) {
  SweepSpec s;
  s.instance = j.at("instance");
  if (j.contains("strategies")) {
    s.strategies.clear();
    for (const auto& x : j.at("strategies")) s.strategies.push_back(parse_shape(x.get<std::string>()));
  } else if (j.contains("strategy")) {
    s.strategies = {parse_shape(j.at("strategy").get<std::string>())};
  }
  if (j.contains("detector"))
    s.detector = parse_violation_kind(j.at("detector").get<std::string>());
  s.budgets = j.at("budgets").get<std::vector<std::uint64_t>>();
  s.trials = j.value("trials", s.trials);
  s.seed = j.value("seed", s.seed);
  s.threads = j.value("threads", s.threads);
  s.validate();
  return s;
}

nlohmann::json SweepSpec::to_json() const {
  std::vector<std::string> names;
  for (auto x : strategies) names.emplace_back(mtest::to_string(x));
  return {{"instance", instance}, {"strategies", names},
          {"detector", mtest::to_string(detector)}, {"budgets", budgets},
          {"trials", trials}, {"seed", seed}};
}

void SweepSpec::validate() const {
  if (budgets.empty()) throw InvalidArgument("sweep needs at least one budget");
  if (strategies.empty()) throw InvalidArgument("sweep needs at least one strategy");
  for (std::size_t k = 1; k < budgets.size(); ++k)
    if (budgets[k] <= budgets[k - 1]) throw InvalidArgument("sweep budgets must increase strictly");
  if (trials < 30) throw InvalidArgument("sweep needs at least 30 trials");
}

std::vector<SweepRow> detection_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::size_t ns = spec.strategies.size(), nb = spec.budgets.size();
  // hits[trial][strategy * nb + budget]
  std::vector<std::vector<char>> hits(spec.trials, std::vector<char>(ns * nb, 0));
  std::string instance_name;
  parallel_for(spec.trials, spec.threads, [&](std::size_t t) {
    const std::uint64_t ts = derive_seed(spec.seed, t);
    const auto inst = generate_instance(spec.instance, derive_seed(ts, 0));
    const std::size_t n = inst.matrix.size();
    Rng order_rng(derive_seed(ts, 1));
    const auto order = order_rng.permutation(n);
    for (std::size_t si = 0; si < ns; ++si)
      for (std::size_t bi = 0; bi < nb; ++bi) {
        Rng graph_rng(derive_seed(ts, 2 + si));
        const auto g = make_query_graph(spec.strategies[si], spec.budgets[bi], n, graph_rng);
        hits[t][si * nb + bi] = graph_detects(inst.matrix, g, order, spec.detector);
      }
  });
  instance_name = normalise(spec.instance.at("kind").get<std::string>());

  std::vector<SweepRow> rows;
  for (std::size_t si = 0; si < ns; ++si)
    for (std::size_t bi = 0; bi < nb; ++bi) {
      SweepRow r;
      r.budget = spec.budgets[bi];
      r.trials = spec.trials;
      for (std::size_t t = 0; t < spec.trials; ++t) r.detections += hits[t][si * nb + bi];
      r.rate = double(r.detections) / double(r.trials);
      const auto ci = wilson_interval(r.detections, r.trials);
      r.ci_low = ci.low;
      r.ci_high = ci.high;
      r.seed = spec.seed;
      r.instance = instance_name;
      r.strategy = std::string(to_string(spec.strategies[si]));
      rows.push_back(std::move(r));
    }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "budget,trials,detections,rate,ci_low,ci_high,seed,instance,strategy\n";
  for (const auto& r : rows)
    os << r.budget << ',' << r.trials << ',' << r.detections << ',' << csv_number(r.rate) << ','
       << csv_number(r.ci_low) << ',' << csv_number(r.ci_high) << ',' << r.seed << ','
       << r.instance << ',' << r.strategy << '\n';
  return os.str();
}

nlohmann::json to_json(const RateReport& r) {
  return {{"name", r.name},         {"trials", r.trials},   {"successes", r.successes},
          {"skipped", r.skipped},   {"rate", r.rate},       {"ci_low", r.ci_low},
          {"ci_high", r.ci_high},   {"threshold", r.threshold}, {"pass", r.pass},
          {"max_queries", r.max_queries}};
}

std::string rate_csv(const std::vector<RateReport>& rows) {
  std::ostringstream os;
  os << "name,trials,successes,skipped,rate,ci_low,ci_high,threshold,pass,max_queries\n";
  for (const auto& r : rows)
    os << r.name << ',' << r.trials << ',' << r.successes << ',' << r.skipped << ','
       << csv_number(r.rate) << ',' << csv_number(r.ci_low) << ',' << csv_number(r.ci_high) << ','
       << csv_number(r.threshold) << ',' << (r.pass ? "PASS" : "FAIL") << ',' << r.max_queries
       << '\n';
  return os.str();
}

namespace {

void fill_rate(RateReport& r) {
  r.rate = r.trials ? double(r.successes) / double(r.trials) : 0.0;
  const auto ci = wilson_interval(r.successes, r.trials);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
}

}  // namespace

SoundnessSpec SoundnessSpec::from_json(const nlohmann::json& j) {
  SoundnessSpec s;
  s.tester = parse_tester_kind(j.at("tester").get<std::string>());
  s.instance = j.at("instance");
  s.eps = j.value("eps", s.eps);
  if (j.contains("profile")) s.profile = ConstantsProfile::by_name(j.at("profile").get<std::string>());
  s.trials = j.value("trials", s.trials);
  s.seed = j.value("seed", s.seed);
  s.threads = j.value("threads", s.threads);
  s.max_attempts_per_trial = j.value("max_attempts_per_trial", s.max_attempts_per_trial);
  if (!(s.eps > 0 && s.eps < 1)) throw InvalidArgument("eps must lie in (0, 1)");
  return s;
}

nlohmann::json SoundnessSpec::to_json() const {
  return {{"tester", mtest::to_string(tester)}, {"instance", instance}, {"eps", eps},
          {"profile", profile.name},           {"trials", trials},     {"seed", seed},
          {"max_attempts_per_trial", max_attempts_per_trial}};
}

bool certified_far(const GeneratedInstance& inst, TesterKind tester, double eps) {
  const double n = double(inst.matrix.size());
  switch (inst.provenance) {
    case Provenance::corrupted:
      // Far from metrics implies far from the tree and ultrametric classes.
      return inst.params.contains("certified_lower_entries") &&
             double(inst.params.at("certified_lower_entries").get<std::uint64_t>()) >=
                 eps * n * n;
    case Provenance::sample_lb:
    case Provenance::query_lb:
      return tester != TesterKind::metric && inst.params.at("eps").get<double>() >= eps;
    case Provenance::behrend:
      return inst.matrix.size() <= EnumerateOptions{}.triple_cap &&
             double(farness_lower_bound(inst.matrix).lower_entries) >= eps * n * n;
    default:
      return false;
  }
}

RateReport soundness_campaign(const SoundnessSpec& spec) {
  struct Slot {
    bool certified = false;
    bool rejected = false;
    std::size_t skipped = 0;
    std::uint64_t queries = 0;
  };
  std::vector<Slot> slots(spec.trials);
  TestOptions opt;
  opt.eps = spec.eps;
  opt.profile = spec.profile;
  parallel_for(spec.trials, spec.threads, [&](std::size_t t) {
    const std::uint64_t ts = derive_seed(spec.seed, t);
    for (std::size_t a = 0; a < spec.max_attempts_per_trial; ++a) {
      const auto inst = generate_instance(spec.instance, derive_seed(ts, 2 * a));
      if (!certified_far(inst, spec.tester, spec.eps)) {
        ++slots[t].skipped;
        continue;
      }
      QueryOracle oracle(inst.matrix);
      const auto rep = run_tester(spec.tester, oracle, opt, derive_seed(ts, 2 * a + 1));
      slots[t].certified = true;
      slots[t].rejected = rep.verdict == Verdict::reject;
      slots[t].queries = rep.queries_used;
      return;
    }
  });
  RateReport r;
  r.name = "soundness/" + std::string(to_string(spec.tester)) + "/" + spec.profile.name;
  r.threshold = 2.0 / 3.0 - 0.05;
  for (const auto& s : slots) {
    r.skipped += s.skipped;
    r.max_queries = std::max(r.max_queries, s.queries);
    if (!s.certified) continue;
    ++r.trials;
    r.successes += s.rejected;
  }
  fill_rate(r);
  r.pass = r.trials > 0 && r.ci_low >= r.threshold;
  return r;
}

CompletenessSpec CompletenessSpec::from_json(const nlohmann::json& j) {
  CompletenessSpec s;
  if (j.contains("family")) {
    std::string f = j.at("family").get<std::string>();
    std::replace(f.begin(), f.end(), '-', '_');
    s.family = parse_provenance(f);
  }
  if (j.contains("testers")) {
    s.testers.clear();
    for (const auto& x : j.at("testers")) s.testers.push_back(parse_tester_kind(x.get<std::string>()));
  } else if (j.contains("tester")) {
    s.testers = {parse_tester_kind(j.at("tester").get<std::string>())};
  }
  if (j.contains("profiles")) {
    s.profiles.clear();
    for (const auto& x : j.at("profiles"))
      s.profiles.push_back(ConstantsProfile::by_name(x.get<std::string>()));
  } else if (j.contains("profile")) {
    s.profiles = {ConstantsProfile::by_name(j.at("profile").get<std::string>())};
  }
  s.trials = j.value("trials", s.trials);
  s.n_min = j.value("n_min", s.n_min);
  s.n_max = j.value("n_max", s.n_max);
  s.eps = j.value("eps", s.eps);
  s.seed = j.value("seed", s.seed);
  s.threads = j.value("threads", s.threads);
  if (s.n_min == 0 || s.n_min > s.n_max) throw InvalidArgument("need 0 < n_min <= n_max");
  if (!(s.eps > 0 && s.eps < 1)) throw InvalidArgument("eps must lie in (0, 1)");
  if (s.family != Provenance::random_metric && s.family != Provenance::random_ultra &&
      s.family != Provenance::random_tree)
    throw InvalidArgument("completeness family must be random_metric, random_ultra or random_tree");
  return s;
}

nlohmann::json CompletenessSpec::to_json() const {
  std::vector<std::string> ts, ps;
  for (auto t : testers) ts.emplace_back(mtest::to_string(t));
  for (const auto& p : profiles) ps.push_back(p.name);
  return {{"family", mtest::to_string(family)}, {"testers", ts}, {"profiles", ps},
          {"trials", trials}, {"n_min", n_min}, {"n_max", n_max}, {"eps", eps}, {"seed", seed}};
}

RateReport completeness_campaign(const CompletenessSpec& spec) {
  const std::size_t runs_per_trial = spec.testers.size() * spec.profiles.size();
  std::vector<std::uint64_t> accepted(spec.trials, 0), queries(spec.trials, 0);
  parallel_for(spec.trials, spec.threads, [&](std::size_t t) {
    const std::uint64_t ts = derive_seed(spec.seed, t);
    Rng rng(ts);
    const std::size_t n = spec.n_min + rng.below(spec.n_max - spec.n_min + 1);
    GeneratedInstance inst;
    switch (spec.family) {
      case Provenance::random_ultra: inst = gen_random_ultra(n, rng.next()); break;
      case Provenance::random_tree: inst = gen_random_tree(n, rng.next()); break;
      default: inst = gen_random_metric(n, rng.next()); break;
    }
    QueryOracle base(inst.matrix);
    std::uint64_t k = 0;
    for (auto tester : spec.testers)
      for (const auto& profile : spec.profiles) {
        TestOptions opt;
        opt.eps = spec.eps;
        opt.profile = profile;
        auto oracle = base.fresh();
        const auto rep = run_tester(tester, oracle, opt, derive_seed(ts, ++k));
        accepted[t] += rep.verdict == Verdict::accept;
        queries[t] = std::max(queries[t], rep.queries_used);
      }
  });
  RateReport r;
  r.name = "completeness/" + std::string(to_string(spec.family));
  r.threshold = 1.0;
  r.trials = spec.trials * runs_per_trial;
  for (std::size_t t = 0; t < spec.trials; ++t) {
    r.successes += accepted[t];
    r.max_queries = std::max(r.max_queries, queries[t]);
  }
  fill_rate(r);
  r.pass = r.trials > 0 && r.successes == r.trials;
  return r;
}

GatingReport sample_lb_gating(std::size_t n, double eps, TesterKind tester,
                              std::size_t sample_size, std::size_t trials, std::uint64_t seed) {
  GatingReport g;
  g.trials = trials;
  TestOptions opt;
  opt.eps = eps;
  opt.skip_clean = true;
  opt.force_s = sample_size;
  opt.force_u = sample_size;
  opt.force_pairs = sample_size;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t ts = derive_seed(seed, t);
    const auto inst = gen_sample_lb(n, eps, derive_seed(ts, 0));
    std::vector<char> bad(n, 0);
    for (Index b : sample_lb_bad_indices(inst)) bad[b] = 1;
    QueryOracle oracle(inst.matrix);
    const auto rep = run_tester(tester, oracle, opt, derive_seed(ts, 1));
    bool hit_bad = false;
    for (Index i : oracle.sampled_indices()) hit_bad |= bad[i] != 0;
    const bool detected = rep.verdict == Verdict::reject;
    g.detections += detected;
    if (!hit_bad) {
      ++g.avoided_bad;
      g.detections_without_bad += detected;
    }
  }
  return g;
}

}  // namespace mtest
