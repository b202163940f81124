#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "mtest/experiments.hpp"
#include "oracles.hpp"

using namespace mtest;
using nlohmann::json;

namespace {

// Roots of (phat - p)^2 = z^2 p (1 - p) / n.
std::pair<double, double> wilson_roots(double k, double n, double z) {
  const double phat = k / n, zz = z * z / n;
  const double a = 1 + zz, b = -(2 * phat + zz), c = phat * phat;
  const double disc = std::sqrt(b * b - 4 * a * c);
  return {(-b - disc) / (2 * a), (-b + disc) / (2 * a)};
}

bool brute_graph_detects(const DistanceMatrix& m, const QueryGraph& g,
                         const std::vector<Index>& order, ViolationKind kind) {
  const std::size_t v = g.vertices;
  std::set<std::pair<Index, Index>> e;
  for (auto [a, b] : g.edges) e.emplace(std::min(a, b), std::max(a, b));
  auto has = [&](Index a, Index b) { return e.count({std::min(a, b), std::max(a, b)}) > 0; };
  auto d = [&](Index a, Index b) { return m(order[a], order[b]); };
  for (Index a = 0; a < v; ++a)
    for (Index b = a + 1; b < v; ++b)
      for (Index c = b + 1; c < v; ++c) {
        if (!has(a, b) || !has(a, c) || !has(b, c)) continue;
        if (kind == ViolationKind::triangle && oracle::tri(d(a, b), d(a, c), d(b, c))) return true;
        if (kind == ViolationKind::ultra && oracle::ultra(d(a, b), d(a, c), d(b, c))) return true;
        if (kind != ViolationKind::tree) continue;
        for (Index x = c + 1; x < v; ++x)
          if (has(a, x) && has(b, x) && has(c, x) &&
              oracle::tree(m, order[a], order[b], order[c], order[x]))
            return true;
      }
  return false;
}

long double binom(unsigned n, unsigned k) {
  if (k > n) return 0;
  long double r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

long double bell(unsigned c) {
  std::vector<std::vector<long double>> t(c + 1, std::vector<long double>(c + 1, 0));
  t[0][0] = 1;
  for (unsigned i = 1; i <= c; ++i) {
    t[i][0] = t[i - 1][i - 1];
    for (unsigned j = 1; j <= i; ++j) t[i][j] = t[i][j - 1] + t[i - 1][j - 1];
  }
  return t[c][0];
}

// P(clique of s uniform points misses every ultra violation) on D_q with
// l blocks of size r out of n. A block holding c sampled points is clean
// iff its {1,2} entries form an ultrametric: Bell(c) of 2^C(c,2) patterns.
double dq_clique_detect_probability(unsigned n, unsigned r, unsigned l, unsigned s) {
  std::vector<long double> f(s + 1, 0);
  f[0] = 1;
  for (unsigned b = 0; b < l; ++b) {
    std::vector<long double> g(s + 1, 0);
    for (unsigned k = 0; k <= s; ++k)
      for (unsigned c = 0; c <= r && k + c <= s; ++c) {
        const long double q = bell(c) / std::pow(2.0L, (long double)(c * (c - 1) / 2));
        g[k + c] += f[k] * binom(r, c) * q;
      }
    f = g;
  }
  const unsigned rest = n - l * r;
  long double miss = 0;
  for (unsigned k = 0; k <= s; ++k) miss += f[k] * binom(rest, s - k);
  return double(1 - miss / binom(n, s));
}

SweepSpec small_sweep() {
  SweepSpec s;
  s.instance = {{"kind", "query-lb"}, {"n", 60}, {"eps", 0.1}};
  s.strategies = {Shape::clique, Shape::path, Shape::star, Shape::grid, Shape::random_gnm};
  s.detector = ViolationKind::ultra;
  s.budgets = {10, 40, 120};
  s.trials = 40;
  s.seed = 9;
  return s;
}

}  // namespace

TEST(Wilson, MatchesQuadraticRoots) {
  for (auto [k, n] : std::vector<std::pair<int, int>>{{0, 10}, {3, 10}, {10, 10}, {150, 300}, {1, 1000}}) {
    const auto w = wilson_interval(k, n);
    const auto [lo, hi] = wilson_roots(k, n, 1.96);
    EXPECT_NEAR(w.low, std::max(0.0, lo), 1e-12) << k << "/" << n;
    EXPECT_NEAR(w.high, std::min(1.0, hi), 1e-12) << k << "/" << n;
  }
  const auto w = wilson_interval(7, 20, 2.5);
  EXPECT_NEAR(w.low, wilson_roots(7, 20, 2.5).first, 1e-12);
}

TEST(QueryGraphs, ShapesRespectBudget) {
  Rng rng(1);
  for (std::uint64_t m : {0u, 1u, 3u, 10u, 45u, 100u, 703u}) {
    for (auto shape : {Shape::clique, Shape::path, Shape::star, Shape::grid, Shape::random_gnm}) {
      const auto g = make_query_graph(shape, m, 500, rng);
      EXPECT_LE(g.edges.size(), m) << to_string(shape) << " " << m;
      for (auto [a, b] : g.edges) {
        EXPECT_LT(a, g.vertices);
        EXPECT_LT(b, g.vertices);
        EXPECT_NE(a, b);
      }
    }
  }
  EXPECT_EQ(make_query_graph(Shape::clique, 703, 500, rng).vertices, 38u);
  EXPECT_EQ(make_query_graph(Shape::clique, 702, 500, rng).vertices, 37u);
  EXPECT_EQ(make_query_graph(Shape::clique, 10000, 20, rng).vertices, 20u);
  EXPECT_EQ(make_query_graph(Shape::path, 50, 500, rng).vertices, 51u);
  EXPECT_EQ(make_query_graph(Shape::grid, 24, 500, rng).vertices, 16u);
  EXPECT_EQ(make_query_graph(Shape::random_gnm, 45, 500, rng).vertices, 20u);
  EXPECT_EQ(parse_shape("random_gnm"), Shape::random_gnm);
  EXPECT_THROW(parse_shape("hypercube"), InvalidArgument);
}

TEST(QueryGraphs, DetectionMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    Rng rng(seed);
    const std::size_t n = 6 + rng.below(10);
    const auto m = oracle::random_int_matrix(n, 1, 4, rng);
    const auto order = rng.permutation(n);
    const Shape shape = Shape(seed % 5);
    const auto g = make_query_graph(shape, 1 + rng.below(40), n, rng);
    for (auto kind : {ViolationKind::triangle, ViolationKind::ultra, ViolationKind::tree})
      EXPECT_EQ(graph_detects(m, g, order, kind), brute_graph_detects(m, g, order, kind))
          << "seed " << seed << " " << to_string(shape);
  }
}

TEST(Sweep, ReproducibleAndThreadIndependent) {
  auto spec = small_sweep();
  const auto a = sweep_csv(detection_sweep(spec));
  spec.threads = 4;
  const auto b = sweep_csv(detection_sweep(spec));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), "budget,trials,detections,rate,ci_low,ci_high,seed,instance,strategy");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 5 * 3);
}

TEST(Sweep, NestedShapesAreMonotoneInBudget) {
  auto spec = small_sweep();
  spec.strategies = {Shape::clique, Shape::path, Shape::star};
  spec.budgets = {3, 10, 28, 45, 100, 300};
  const auto rows = detection_sweep(spec);
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].strategy == rows[i - 1].strategy) {
      EXPECT_GE(rows[i].detections, rows[i - 1].detections) << rows[i].strategy << " " << rows[i].budget;
    }
}

TEST(Sweep, CliqueOnQueryLbMatchesAnalyticRate) {
  SweepSpec spec;
  spec.instance = {{"kind", "query-lb"}, {"n", 100}, {"eps", 0.1}};
  spec.strategies = {Shape::clique};
  spec.budgets = {28, 105, 190, 435};  // cliques of 8, 15, 20, 30
  spec.trials = 400;
  spec.seed = 5;
  const auto rows = detection_sweep(spec);
  const unsigned sizes[] = {8, 15, 20, 30};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double want = dq_clique_detect_probability(100, 10, 10, sizes[i]);
    EXPECT_NEAR(rows[i].rate, want, 0.05) << "s=" << sizes[i];
    EXPECT_LE(rows[i].ci_low, rows[i].rate);
    EXPECT_GE(rows[i].ci_high, rows[i].rate);
  }
}

TEST(Sweep, FullBudgetOnBehrendAlwaysDetects) {
  SweepSpec spec;
  spec.instance = {{"kind", "behrend"}, {"n", 200}};
  spec.detector = ViolationKind::triangle;
  spec.budgets = {600 * 600};
  spec.trials = 30;
  const auto rows = detection_sweep(spec);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].rate, 1.0);
  EXPECT_EQ(rows[0].instance, "behrend");
}

TEST(Sweep, SpecValidation) {
  auto spec = small_sweep();
  spec.trials = 10;
  EXPECT_THROW(spec.validate(), InvalidArgument);
  spec = small_sweep();
  spec.budgets = {10, 10};
  EXPECT_THROW(spec.validate(), InvalidArgument);
  spec.budgets = {};
  EXPECT_THROW(spec.validate(), InvalidArgument);

  const auto round = SweepSpec::from_json(small_sweep().to_json());
  EXPECT_EQ(round.budgets, small_sweep().budgets);
  EXPECT_EQ(round.strategies, small_sweep().strategies);
  const auto one = SweepSpec::from_json(json{{"instance", {{"kind", "d_q"}, {"n", 40}}},
                                             {"strategy", "star"},
                                             {"budgets", {5}},
                                             {"trials", 30}});
  EXPECT_EQ(one.strategies, std::vector<Shape>{Shape::star});
}

TEST(Instances, GenerateFromJson) {
  EXPECT_EQ(generate_instance({{"kind", "behrend"}, {"n", 5}, {"X", {1}}}, 1).matrix.size(), 15u);
  EXPECT_EQ(generate_instance({{"kind", "twin_bad"}, {"n", 4}}, 1).provenance, Provenance::twin_bad);
  const auto c = generate_instance(
      {{"kind", "corrupt"}, {"base", {{"kind", "random-metric"}, {"n", 30}}}, {"eps", 0.2}}, 3);
  EXPECT_EQ(c.provenance, Provenance::corrupted);
  EXPECT_EQ(c.matrix.size(), 30u);
  const auto plain = generate_instance({{"kind", "d-s"}, {"n", 10}, {"eps", 0.2}, {"shuffle", false}}, 0);
  EXPECT_EQ(plain.matrix(0, 8), 21.0);
  EXPECT_THROW(generate_instance({{"kind", "mystery"}, {"n", 10}}, 0), InvalidArgument);
}

TEST(Soundness, FarInstancesAndSkips) {
  SoundnessSpec s;
  s.tester = TesterKind::ultra;
  s.instance = {{"kind", "sample-lb"}, {"n", 60}, {"eps", 0.2}};
  s.eps = 0.2;
  s.trials = 60;
  const auto r = soundness_campaign(s);
  EXPECT_EQ(r.trials, 60u);
  EXPECT_EQ(r.skipped, 0u);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.name, "soundness/ultra/desk");

  // The metric tester has no farness certificate for D_s, so everything is skipped.
  s.tester = TesterKind::metric;
  s.trials = 30;
  s.max_attempts_per_trial = 2;
  const auto none = soundness_campaign(s);
  EXPECT_EQ(none.trials, 0u);
  EXPECT_EQ(none.skipped, 60u);
  EXPECT_FALSE(none.pass);
}

TEST(Soundness, CertificationRules) {
  const auto ds = gen_sample_lb(40, 0.2, 1);
  EXPECT_TRUE(certified_far(ds, TesterKind::tree, 0.2));
  EXPECT_FALSE(certified_far(ds, TesterKind::tree, 0.25));
  EXPECT_FALSE(certified_far(ds, TesterKind::metric, 0.1));
  EXPECT_FALSE(certified_far(gen_random_metric(20, 1), TesterKind::metric, 0.01));
  const auto c = corrupt(gen_random_metric(30, 2), 0.4, 1, CorruptMode::uniform_rewrite);
  const double lower = c.params.at("certified_lower_entries").get<double>();
  EXPECT_TRUE(certified_far(c, TesterKind::metric, lower / 900.0));
  EXPECT_FALSE(certified_far(c, TesterKind::metric, (lower + 1) / 900.0));
}

TEST(Completeness, InClassAlwaysAccepts) {
  for (auto fam : {Provenance::random_metric, Provenance::random_ultra, Provenance::random_tree}) {
    CompletenessSpec c;
    c.family = fam;
    // Each family goes through every tester whose class contains it.
    c.testers = {TesterKind::metric, TesterKind::ultra, TesterKind::tree};
    if (fam == Provenance::random_metric) c.testers = {TesterKind::metric};
    if (fam == Provenance::random_tree) c.testers = {TesterKind::metric, TesterKind::tree};
    c.profiles = {ConstantsProfile::desk(), ConstantsProfile::paper()};
    c.trials = 20;
    c.n_max = 40;
    const auto r = completeness_campaign(c);
    EXPECT_TRUE(r.pass) << to_string(fam);
    EXPECT_EQ(r.trials, 20 * c.testers.size() * 2);
    EXPECT_EQ(r.successes, r.trials);
  }
  EXPECT_THROW(CompletenessSpec::from_json({{"family", "behrend"}}), InvalidArgument);
}

TEST(Reports, RateCsvHeader) {
  RateReport r;
  r.name = "x";
  r.trials = 3;
  r.successes = 3;
  r.pass = true;
  const auto csv = rate_csv({r});
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "name,trials,successes,skipped,rate,ci_low,ci_high,threshold,pass,max_queries");
  EXPECT_NE(csv.find(",PASS,"), std::string::npos);
  EXPECT_EQ(to_json(r).at("successes"), 3);
}

TEST(Gating, SampleLbNeedsTheBadGroup) {
  for (auto tester : {TesterKind::ultra, TesterKind::tree}) {
    const auto g = sample_lb_gating(200, 0.1, tester, 12, 300, 4);
    EXPECT_EQ(g.trials, 300u);
    EXPECT_EQ(g.detections_without_bad, 0u);
    // Twelve iid draws all miss a tenth of the points with probability 0.9^12.
    const double p = std::pow(0.9, 12);
    const double sd = std::sqrt(300 * p * (1 - p));
    EXPECT_NEAR(double(g.avoided_bad), 300 * p, 4 * sd);
    EXPECT_GT(g.detections, 0u);
  }
}
