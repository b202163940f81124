#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mtest/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mtest");
  std::ostringstream out, err;
  const int code = mtest::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("mtest_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string at(const std::string& name) const { return (dir / name).string(); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, BehrendRoundTrip) {
  auto g = run({"gen", "--kind", "behrend", "--n", "5", "--seed", "1", "--out", at("b.dmat")});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_TRUE(fs::exists(at("b.dmat.prov.json")));
  const auto prov = json::parse(slurp(at("b.dmat.prov.json")));
  EXPECT_EQ(prov.at("provenance"), "behrend");

  // salem_spencer(5) has two members, and each contributes n triangles.
  const auto o = run({"oracle", "--kind", "triangles", "--input", at("b.dmat")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(lines(o.out), 10u);
  const auto c = run({"oracle", "--kind", "triangles", "--input", at("b.dmat"), "--count-only"});
  EXPECT_EQ(c.out, "10\n");

  const auto r = run({"repair", "--kind", "behrend-direct", "--input", at("b.dmat"), "--out", at("f.dmat")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("violations_after"), 0);
  EXPECT_EQ(run({"oracle", "--kind", "triangles", "--input", at("f.dmat"), "--count-only"}).out, "0\n");
}

TEST_F(Cli, TwinWritesBothFiles) {
  ASSERT_EQ(run({"gen", "--kind", "twin", "--n", "4", "--out", at("t.dmat")}).code, 0);
  EXPECT_TRUE(fs::exists(at("t.good.dmat")));
  EXPECT_TRUE(fs::exists(at("t.bad.dmat")));
  EXPECT_EQ(run({"oracle", "--kind", "triangles", "--input", at("t.good.dmat"), "--count-only"}).out, "0\n");
  EXPECT_EQ(run({"oracle", "--kind", "triangles", "--input", at("t.bad.dmat"), "--count-only"}).out, "16\n");
}

TEST_F(Cli, ExitCodes) {
  ASSERT_EQ(run({"gen", "--kind", "random-ultra", "--n", "60", "--out", at("u.dmat")}).code, 0);
  ASSERT_EQ(run({"gen", "--kind", "sample-lb", "--n", "200", "--eps", "0.1", "--out", at("s.dmat")}).code, 0);
  EXPECT_EQ(run({"test", "--kind", "ultra", "--input", at("u.dmat")}).code, 0);
  const auto rej = run({"test", "--kind", "ultra", "--input", at("s.dmat"), "--profile", "paper"});
  EXPECT_EQ(rej.code, 1);
  EXPECT_EQ(rej.out.rfind("reject", 0), 0u) << rej.out;
  EXPECT_EQ(run({"test", "--kind", "ultra", "--input", at("s.dmat"), "--budget", "3"}).code, 2);
  EXPECT_EQ(run({"test", "--kind", "ultra", "--input", at("missing.dmat")}).code, 2);
  EXPECT_EQ(run({"test", "--kind", "ultra", "--input", at("u.dmat"), "--eps", "1.5"}).code, 2);
  EXPECT_EQ(run({"gen", "--kind", "nonsense", "--n", "5", "--out", at("x.dmat")}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST_F(Cli, HelpListsFlags) {
  const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> cases{
      {{"gen"}, {"--kind", "--n", "--eps", "--out", "--params"}},
      {{"test"}, {"--kind", "--input", "--profile", "--budget", "--skip-clean", "--two-phase", "--tol"}},
      {{"oracle"}, {"--kind", "--input", "--out", "--count-only", "--triple-cap"}},
      {{"repair"}, {"--kind", "--input", "--out", "--provenance", "--max-pairs"}},
      {{"diagnose", "skeleton"}, {"--input", "--samples", "--no-sc"}},
      {{"diagnose", "decay"}, {"--input", "--steps", "--trials", "--csv"}},
      {{"experiment", "sweep"}, {"--spec", "--out"}},
  };
  for (const auto& [cmd, flags] : cases) {
    auto args = cmd;
    args.push_back("--help");
    const auto h = run(args);
    EXPECT_EQ(h.code, 0);
    for (const auto& f : flags) EXPECT_NE(h.out.find(f), std::string::npos) << cmd[0] << " " << f;
  }
  const auto top = run({"--help"});
  for (const char* s : {"gen", "test", "oracle", "repair", "diagnose", "experiment", "--seed", "--isa"})
    EXPECT_NE(top.out.find(s), std::string::npos) << s;
}

TEST_F(Cli, OutputsAreByteIdentical) {
  for (const char* name : {"a.dmat", "b.dmat"})
    ASSERT_EQ(run({"gen", "--kind", "corrupt", "--n", "30", "--eps", "0.2", "--seed", "4", "--out", at(name)}).code, 0);
  EXPECT_EQ(slurp(at("a.dmat")), slurp(at("b.dmat")));
  const auto t1 = run({"test", "--kind", "metric", "--input", at("a.dmat"), "--seed", "3", "--json"});
  const auto t2 = run({"test", "--kind", "metric", "--input", at("a.dmat"), "--seed", "3", "--json"});
  EXPECT_EQ(t1.out, t2.out);
  const auto j = json::parse(t1.out);
  EXPECT_TRUE(j.contains("report"));
  EXPECT_TRUE(j.contains("config"));
  EXPECT_EQ(j.at("report").at("elapsed_ms"), 0);  // zero unless --timing

  ASSERT_EQ(run({"gen", "--kind", "random-metric", "--n", "20", "--out", at("bin.dmatb")}).code, 0);
  EXPECT_EQ(run({"oracle", "--kind", "triangles", "--input", at("bin.dmatb"), "--count-only"}).out, "0\n");
}

TEST_F(Cli, ThreadCountDoesNotChangeResults) {
  ASSERT_EQ(run({"gen", "--kind", "query-lb", "--n", "80", "--out", at("q.dmat")}).code, 0);
  const auto d1 = run({"diagnose", "decay", "--input", at("q.dmat"), "--steps", "6", "--trials", "12", "--threads", "1"});
  const auto d4 = run({"diagnose", "decay", "--input", at("q.dmat"), "--steps", "6", "--trials", "12", "--threads", "4"});
  ASSERT_EQ(d1.code, 0) << d1.err;
  EXPECT_EQ(d1.out, d4.out);
  EXPECT_EQ(lines(d1.out), 8u);

  std::ofstream(at("sweep.json")) << json{{"instance", {{"kind", "query-lb"}, {"n", 60}}},
                                          {"strategies", {"clique", "star"}},
                                          {"budgets", {10, 50}},
                                          {"trials", 30},
                                          {"seed", 2}}
                                         .dump();
  const auto s1 = run({"experiment", "sweep", "--spec", at("sweep.json"), "--threads", "1"});
  const auto s3 = run({"experiment", "sweep", "--spec", at("sweep.json"), "--threads", "3"});
  ASSERT_EQ(s1.code, 0) << s1.err;
  EXPECT_EQ(s1.out, s3.out);
  EXPECT_EQ(lines(s1.out), 5u);

  ASSERT_EQ(run({"experiment", "sweep", "--spec", at("sweep.json"), "--out", at("sweep.csv"), "--quiet"}).code, 0);
  EXPECT_EQ(slurp(at("sweep.csv")), s1.out);
  EXPECT_TRUE(fs::exists(at("sweep.csv.config.json")));
}

TEST_F(Cli, SkeletonAndRepairReports) {
  ASSERT_EQ(run({"gen", "--kind", "sample-lb", "--n", "40", "--eps", "0.2", "--shuffle", "--out", at("s.dmat")}).code,
            2);  // --shuffle is a --params key, not a flag
  ASSERT_EQ(run({"gen", "--kind", "sample-lb", "--n", "40", "--eps", "0.2", "--params", "shuffle=false",
                 "--out", at("s.dmat")}).code, 0);
  const auto sk = run({"diagnose", "skeleton", "--input", at("s.dmat"), "--samples", "5", "--json"});
  ASSERT_EQ(sk.code, 0) << sk.err;
  EXPECT_TRUE(json::parse(sk.out).at("skeleton").contains("parts"));

  const auto b = run({"repair", "--input", at("s.dmat")});
  ASSERT_EQ(b.code, 0) << b.err;
  const auto j = json::parse(b.out);
  EXPECT_LE(j.at("lower_entries").get<long>(), j.at("upper_entries").get<long>());
  const auto st = run({"repair", "--kind", "stab", "--input", at("s.dmat"), "--i", "0", "--j", "0"});
  EXPECT_EQ(st.code, 2);
  EXPECT_NE(st.err.find("error:"), std::string::npos);
}
