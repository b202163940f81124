#include "mtest/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mtest/experiments.hpp"
#include "mtest/kernels.hpp"
#include "mtest/repair.hpp"
#include "mtest/skeleton.hpp"
#include "mtest/testers.hpp"
#include "mtest/violations.hpp"

namespace mtest {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 1;
  bool json_out = false;
  bool quiet = false;
  std::size_t threads = 0;
  bool timing = false;
  std::string isa = "auto";

  json to_json() const {
    return {{"seed", seed}, {"json", json_out}, {"quiet", quiet}, {"threads", threads},
            {"timing", timing}, {"isa", std::string(mtest::to_string(active_isa()))}};
  }
};

// Exit codes.
constexpr int kOk = 0;
constexpr int kReject = 1;
constexpr int kError = 2;

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

json read_json_file(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

fs::path sidecar(const fs::path& p, std::string_view suffix) {
  return fs::path(p.string() + std::string(suffix));
}

/// "a=1,b=x,X=1:3" -> {"a":1,"b":"x","X":[1,3]}
json parse_params(const std::string& s) {
  json out = json::object();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--params entry needs key=value: " + item);
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    if (key == "X") {
      std::vector<std::uint64_t> xs;
      std::stringstream vs(val);
      std::string tok;
      while (std::getline(vs, tok, ':'))
        if (!tok.empty()) xs.push_back(std::stoull(tok));
      out[key] = xs;
      continue;
    }
    if (val == "true" || val == "false") {
      out[key] = val == "true";
      continue;
    }
    try {
      std::size_t used = 0;
      const double d = std::stod(val, &used);
      if (used == val.size()) {
        if (val.find_first_of(".eE") == std::string::npos && d >= 0)
          out[key] = std::stoull(val);
        else
          out[key] = d;
        continue;
      }
    } catch (const std::exception&) {
    }
    out[key] = val;
  }
  return out;
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

// gen ------------------------------------------------------------------------

struct GenArgs {
  std::string kind;
  std::size_t n = 0;
  double eps = 0.1;
  std::string out;
  std::string params;
};

int cmd_gen(const GenArgs& a, const Globals& g, std::ostream& out) {
  json extra = parse_params(a.params);
  json spec{{"kind", a.kind}, {"n", a.n}, {"eps", a.eps}};
  std::string kind = a.kind;
  std::replace(kind.begin(), kind.end(), '_', '-');
  if (kind == "corrupt") {
    json base{{"kind", extra.value("base", std::string("random-metric"))}, {"n", a.n}};
    if (extra.contains("base_eps")) base["eps"] = extra["base_eps"];
    if (extra.contains("X")) base["X"] = extra["X"];
    spec["base"] = base;
    for (const char* k : {"base", "base_eps"}) extra.erase(k);
  }
  for (auto& [k, v] : extra.items()) spec[k] = v;

  std::vector<std::pair<fs::path, GeneratedInstance>> outputs;
  const fs::path path(a.out);
  if (kind == "twin") {
    json good = spec, bad = spec;
    good["kind"] = "twin-good";
    bad["kind"] = "twin-bad";
    const auto stem = path.parent_path() / path.stem();
    const auto ext = path.extension().string();
    outputs.emplace_back(fs::path(stem.string() + ".good" + ext), generate_instance(good, g.seed));
    outputs.emplace_back(fs::path(stem.string() + ".bad" + ext), generate_instance(bad, g.seed));
  } else {
    outputs.emplace_back(path, generate_instance(spec, g.seed));
  }

  const json config{{"command", "gen"}, {"spec", spec}, {"out", a.out}, {"globals", g.to_json()}};
  json summary = json::array();
  for (const auto& [p, inst] : outputs) {
    save_matrix(inst.matrix, p);
    json prov = provenance_json(inst);
    prov["config"] = config;
    write_text(sidecar(p, ".prov.json"), prov.dump(2) + "\n");
    summary.push_back({{"path", p.string()},
                       {"provenance", to_string(inst.provenance)},
                       {"n", inst.matrix.size()}});
  }
  if (g.json_out)
    emit(out, {{"outputs", summary}, {"config", config}});
  else if (!g.quiet)
    for (const auto& s : summary)
      out << "wrote " << s["path"].get<std::string>() << " (" << s["provenance"].get<std::string>()
          << ", n=" << s["n"] << ")\n";
  return kOk;
}

// test -----------------------------------------------------------------------

struct TestArgs {
  std::string kind;
  std::string input;
  double eps = 0.1;
  std::string profile = "desk";
  std::optional<std::uint64_t> budget;
  bool skip_clean = false;
  bool two_phase = false;
  double tol = 0.0;
};

int cmd_test(const TestArgs& a, const Globals& g, std::ostream& out) {
  const auto kind = parse_tester_kind(a.kind);
  const auto m = load_matrix(a.input, LoadMode::raw);
  TestOptions opt;
  opt.eps = a.eps;
  opt.profile = ConstantsProfile::by_name(a.profile);
  opt.skip_clean = a.skip_clean;
  opt.two_phase = a.two_phase;
  opt.tol = a.tol;
  opt.record_time = g.timing;
  if (!(a.eps > 0 && a.eps < 1)) throw InvalidArgument("--eps must lie in (0, 1)");

  QueryOracle oracle(m, a.budget);
  const auto rep = run_tester(kind, oracle, opt, g.seed);
  const json config{{"command", "test"},
                    {"kind", a.kind},
                    {"input", a.input},
                    {"eps", a.eps},
                    {"profile", opt.profile.to_json()},
                    {"budget", a.budget ? json(*a.budget) : json(nullptr)},
                    {"skip_clean", a.skip_clean},
                    {"two_phase", a.two_phase},
                    {"tol", a.tol},
                    {"globals", g.to_json()}};
  if (g.json_out) {
    emit(out, {{"report", to_json(rep)}, {"config", config}});
  } else if (!g.quiet) {
    out << to_string(rep.verdict) << " samples=" << rep.samples_used
        << " queries=" << rep.queries_used << '\n';
    if (rep.certificate) out << to_json(*rep.certificate).dump() << '\n';
  }
  return rep.verdict == Verdict::reject ? kReject : kOk;
}

// oracle ---------------------------------------------------------------------

struct OracleArgs {
  std::string kind;
  std::string input;
  std::string out;
  std::size_t triple_cap = EnumerateOptions{}.triple_cap;
  std::size_t quadruple_cap = EnumerateOptions{}.quadruple_cap;
  double tol = 0.0;
  bool count_only = false;
};

int cmd_oracle(const OracleArgs& a, const Globals& g, std::ostream& out) {
  const auto kind = parse_violation_kind(a.kind);
  const auto m = load_matrix(a.input);
  EnumerateOptions opt;
  opt.triple_cap = a.triple_cap;
  opt.quadruple_cap = a.quadruple_cap;
  opt.tol = a.tol;
  const json config{{"command", "oracle"}, {"kind", to_string(kind)}, {"input", a.input},
                    {"triple_cap", a.triple_cap}, {"quadruple_cap", a.quadruple_cap},
                    {"tol", a.tol}, {"count_only", a.count_only}, {"globals", g.to_json()}};
  if (a.count_only) {
    const auto c = count_violations(m, kind, opt);
    if (g.json_out)
      emit(out, {{"kind", to_string(kind)}, {"count", c}, {"config", config}});
    else
      out << c << '\n';
    return kOk;
  }
  const auto vs = enumerate_violations(m, kind, opt);
  if (!a.out.empty()) {
    write_text(a.out, to_jsonl(vs));
    write_text(sidecar(a.out, ".config.json"), config.dump(2) + "\n");
  }
  if (g.json_out) {
    json arr = json::array();
    for (const auto& v : vs) arr.push_back(to_json(v));
    emit(out, {{"kind", to_string(kind)}, {"count", vs.size()}, {"violations", arr},
               {"config", config}});
  } else if (a.out.empty()) {
    out << to_jsonl(vs);
  } else if (!g.quiet) {
    out << vs.size() << " violations written to " << a.out << '\n';
  }
  return kOk;
}

// repair ---------------------------------------------------------------------

struct RepairArgs {
  std::string kind = "bounds";
  std::string input;
  std::string out;
  std::string provenance;
  std::size_t max_pairs = 21;
  Index i = 0, j = 1;
};

int cmd_repair(const RepairArgs& a, const Globals& g, std::ostream& out) {
  const auto m = load_matrix(a.input);
  json config{{"command", "repair"}, {"kind", a.kind}, {"input", a.input}, {"out", a.out},
              {"globals", g.to_json()}};
  json result;
  std::optional<DistanceMatrix> repaired;
  if (a.kind == "bounds" || a.kind == "upper" || a.kind == "lower") {
    FarnessBounds b = a.kind == "bounds"  ? farness_bounds(m)
                      : a.kind == "upper" ? repair_upper_bound(m)
                                          : farness_lower_bound(m);
    result = to_json(b);
    if (a.kind != "lower") repaired = b.upper_certificate;
  } else if (a.kind == "behrend-direct") {
    const fs::path prov = a.provenance.empty() ? sidecar(a.input, ".prov.json") : fs::path(a.provenance);
    config["provenance"] = prov.string();
    const json pj = read_json_file(prov);
    GeneratedInstance inst;
    inst.matrix = m;
    inst.provenance = parse_provenance(pj.at("provenance").get<std::string>());
    inst.params = pj.value("params", json::object());
    inst.permutation = pj.value("permutation", std::vector<Index>{});
    repaired = behrend_direct_repair(inst);
    result = {{"n", m.size()}, {"changed_entries", repaired->count_differences(m)},
              {"violations_after", count_violations(*repaired, ViolationKind::triangle)}};
  } else if (a.kind == "brute") {
    config["max_pairs"] = a.max_pairs;
    const auto r = brute_force_min_repair(m, a.max_pairs);
    result = {{"n", m.size()}, {"min_entries", r ? json(*r) : json(nullptr)}};
  } else if (a.kind == "stab") {
    config["i"] = a.i;
    config["j"] = a.j;
    if (a.i >= m.size() || a.j >= m.size() || a.i == a.j)
      throw InvalidArgument("--i and --j must be distinct indices below n");
    const auto s = optimal_edge_value(m, a.i, a.j);
    result = {{"i", a.i}, {"j", a.j}, {"value", s.value}, {"hit_count", s.hit_count},
              {"intervals", s.intervals.size()}};
  } else {
    throw InvalidArgument("unknown repair kind: " + a.kind);
  }
  if (!a.out.empty()) {
    if (!repaired) throw InvalidArgument("--out needs a repair kind that produces a matrix");
    save_matrix(*repaired, a.out);
    write_text(sidecar(a.out, ".config.json"), config.dump(2) + "\n");
  }
  if (g.json_out || !g.quiet) {
    json doc = result;
    doc["config"] = config;
    emit(out, doc);
  }
  return kOk;
}

// diagnose -------------------------------------------------------------------

struct SkeletonArgs {
  std::string input;
  std::string kind = "ultra";
  std::size_t samples = 10;
  double eps = 0.1;
  bool no_sc = false;
};

int cmd_skeleton(const SkeletonArgs& a, const Globals& g, std::ostream& out) {
  const auto m = load_matrix(a.input);
  const auto kind = parse_skeleton_kind(a.kind);
  Rng rng(g.seed);
  const auto S = sample_indices(m.size(), a.samples, rng);
  SkeletonOptions opt;
  opt.eps = a.eps;
  opt.count_sc = !a.no_sc;
  const auto st = build_skeleton(m, S, kind, opt);
  const json config{{"command", "diagnose skeleton"}, {"input", a.input}, {"kind", a.kind},
                    {"samples", a.samples}, {"eps", a.eps}, {"count_sc", opt.count_sc},
                    {"globals", g.to_json()}};
  if (g.json_out) {
    emit(out, {{"skeleton", to_json(st)}, {"config", config}});
  } else if (!g.quiet) {
    out << "S=" << st.S.size() << " consistent=" << (st.consistent ? "yes" : "no")
        << " parts=" << st.parts.size() << " ec=" << st.ec_count;
    if (st.sc_counted) out << " sc=" << st.sc_count;
    out << " active=" << st.active_entries << '\n';
  }
  return kOk;
}

struct DecayArgs {
  std::string input;
  std::string kind = "ultra";
  double eps = 0.1;
  std::size_t steps = 40;
  std::size_t trials = 50;
  std::string csv;
};

int cmd_decay(const DecayArgs& a, const Globals& g, std::ostream& out) {
  const auto m = load_matrix(a.input);
  DecayOptions opt;
  opt.eps = a.eps;
  opt.steps = a.steps;
  opt.trials = a.trials;
  opt.seed = g.seed;
  opt.threads = g.threads;
  const auto rows = decay_experiment(m, parse_skeleton_kind(a.kind), opt);
  std::ostringstream csv;
  csv << "step,mean,stderr,half_width\n";
  csv.precision(17);
  for (const auto& r : rows)
    csv << r.step << ',' << r.mean << ',' << r.stderr_ << ',' << r.half_width << '\n';
  const json config{{"command", "diagnose decay"}, {"input", a.input}, {"kind", a.kind},
                    {"eps", a.eps}, {"steps", a.steps}, {"trials", a.trials}, {"csv", a.csv},
                    {"globals", g.to_json()}};
  if (!a.csv.empty()) {
    write_text(a.csv, csv.str());
    write_text(sidecar(a.csv, ".config.json"), config.dump(2) + "\n");
  }
  if (g.json_out) {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"step", r.step}, {"mean", r.mean}, {"stderr", r.stderr_},
                     {"half_width", r.half_width}});
    emit(out, {{"rows", arr}, {"config", config}});
  } else if (a.csv.empty()) {
    out << csv.str();
  } else if (!g.quiet) {
    out << rows.size() << " rows written to " << a.csv << '\n';
  }
  return kOk;
}

// experiment -----------------------------------------------------------------

struct ExperimentArgs {
  std::string spec;
  std::string out;
};

int cmd_experiment(const std::string& which, const ExperimentArgs& a, const Globals& g,
                   std::ostream& out) {
  json spec_json = read_json_file(a.spec);
  if (!spec_json.contains("seed")) spec_json["seed"] = g.seed;
  std::string csv;
  json summary, resolved;
  if (which == "sweep") {
    auto spec = SweepSpec::from_json(spec_json);
    spec.threads = g.threads;
    const auto rows = detection_sweep(spec);
    csv = sweep_csv(rows);
    resolved = spec.to_json();
    summary = json::array();
    for (const auto& r : rows)
      summary.push_back({{"budget", r.budget}, {"strategy", r.strategy}, {"rate", r.rate},
                         {"ci_low", r.ci_low}, {"ci_high", r.ci_high}});
  } else if (which == "soundness") {
    auto spec = SoundnessSpec::from_json(spec_json);
    spec.threads = g.threads;
    const auto r = soundness_campaign(spec);
    csv = rate_csv({r});
    resolved = spec.to_json();
    resolved["profile"] = spec.profile.to_json();
    summary = to_json(r);
  } else {
    auto spec = CompletenessSpec::from_json(spec_json);
    spec.threads = g.threads;
    const auto r = completeness_campaign(spec);
    csv = rate_csv({r});
    resolved = spec.to_json();
    summary = to_json(r);
  }
  const json config{{"command", "experiment " + which}, {"spec_file", a.spec},
                    {"spec", resolved}, {"out", a.out}, {"globals", g.to_json()}};
  if (!a.out.empty()) {
    write_text(a.out, csv);
    write_text(sidecar(a.out, ".config.json"), config.dump(2) + "\n");
  }
  if (g.json_out)
    emit(out, {{"result", summary}, {"config", config}});
  else if (a.out.empty())
    out << csv;
  else if (!g.quiet)
    out << "results written to " << a.out << '\n';
  return kOk;
}

void add_globals(CLI::App& app, Globals& g) {
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_flag("--json", g.json_out, "Emit JSON on stdout");
  app.add_flag("--quiet", g.quiet, "Suppress informational output");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_flag("--timing", g.timing, "Record wall-clock time in reports");
  app.add_option("--isa", g.isa, "Kernel set: auto, scalar or avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
      ->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sublinear testers for metric, ultrametric and tree-metric distance matrices",
               args.empty() ? "mtest" : args[0]};
  app.require_subcommand(1);
  app.get_formatter()->column_width(36);

  Globals g;
  add_globals(app, g);
  // Global flags are also accepted after the subcommand name.
  auto sub = [&](CLI::App& parent, const std::string& name, const std::string& desc) {
    CLI::App* s = parent.add_subcommand(name, desc);
    s->fallthrough();
    return s;
  };

  GenArgs gen;
  auto* gen_cmd = sub(app, "gen", "Generate an instance and its provenance sidecar");
  gen_cmd
      ->add_option("--kind", gen.kind,
                   "behrend|twin|sample-lb|query-lb|random-metric|random-ultra|random-tree|corrupt")
      ->required();
  gen_cmd->add_option("--n", gen.n, "Size parameter")->required();
  gen_cmd->add_option("--eps", gen.eps, "Distance parameter")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output matrix (.dmat or .dmatb)")->required();
  gen_cmd->add_option("--params", gen.params,
                      "Extra k=v pairs: X=a:b:c, shuffle, min_weight, max_weight, base, "
                      "base_eps, mode");

  TestArgs test;
  auto* test_cmd = sub(app, "test", "Run a tester on a matrix");
  test_cmd->add_option("--kind", test.kind, "metric|ultra|tree")->required();
  test_cmd->add_option("--input", test.input, "Matrix file")->required();
  test_cmd->add_option("--eps", test.eps, "Distance parameter")->capture_default_str();
  test_cmd->add_option("--profile", test.profile, "paper|desk")->capture_default_str();
  test_cmd->add_option("--budget", test.budget, "Query budget (distinct pairs)");
  test_cmd->add_flag("--skip-clean", test.skip_clean, "Skip the clean check");
  test_cmd->add_flag("--two-phase", test.two_phase, "Two-phase ultra/tree tester");
  test_cmd->add_option("--tol", test.tol, "Predicate tolerance")->capture_default_str();

  OracleArgs orc;
  auto* oracle_cmd = sub(app, "oracle", "Enumerate violations exhaustively");
  oracle_cmd->add_option("--kind", orc.kind, "triangles|ultra|tree")->required();
  oracle_cmd->add_option("--input", orc.input, "Matrix file")->required();
  oracle_cmd->add_option("--out", orc.out, "Write JSON lines here");
  oracle_cmd->add_option("--triple-cap", orc.triple_cap, "Largest n for triple scans")
      ->capture_default_str();
  oracle_cmd->add_option("--quadruple-cap", orc.quadruple_cap, "Largest n for quadruple scans")
      ->capture_default_str();
  oracle_cmd->add_option("--tol", orc.tol, "Predicate tolerance")->capture_default_str();
  oracle_cmd->add_flag("--count-only", orc.count_only, "Print only the count");

  RepairArgs rep;
  auto* repair_cmd = sub(app, "repair", "Farness bounds and repairs");
  repair_cmd->add_option("--kind", rep.kind, "bounds|upper|lower|behrend-direct|brute|stab")
      ->capture_default_str();
  repair_cmd->add_option("--input", rep.input, "Matrix file")->required();
  repair_cmd->add_option("--out", rep.out, "Write the repaired matrix here");
  repair_cmd->add_option("--provenance", rep.provenance,
                         "Provenance sidecar (default <input>.prov.json)");
  repair_cmd->add_option("--max-pairs", rep.max_pairs, "Brute force subset size limit")
      ->capture_default_str();
  repair_cmd->add_option("--i", rep.i, "Stab: first index")->capture_default_str();
  repair_cmd->add_option("--j", rep.j, "Stab: second index")->capture_default_str();

  auto* diag_cmd = sub(app, "diagnose", "Skeleton diagnostics");
  diag_cmd->require_subcommand(1);
  SkeletonArgs sk;
  auto* sk_cmd = sub(*diag_cmd, "skeleton", "Skeleton of a random sample");
  sk_cmd->add_option("--input", sk.input, "Matrix file")->required();
  sk_cmd->add_option("--kind", sk.kind, "ultra|tree")->capture_default_str();
  sk_cmd->add_option("--samples", sk.samples, "Sample draws")->capture_default_str();
  sk_cmd->add_option("--eps", sk.eps, "Distance parameter")->capture_default_str();
  sk_cmd->add_flag("--no-sc", sk.no_sc, "Skip separator-corruption counting");
  DecayArgs dc;
  auto* dc_cmd = sub(*diag_cmd, "decay", "Active-entry decay as the sample grows");
  dc_cmd->add_option("--input", dc.input, "Matrix file")->required();
  dc_cmd->add_option("--kind", dc.kind, "ultra|tree")->capture_default_str();
  dc_cmd->add_option("--eps", dc.eps, "Distance parameter")->capture_default_str();
  dc_cmd->add_option("--steps", dc.steps, "Sample draws per trial")->capture_default_str();
  dc_cmd->add_option("--trials", dc.trials, "Independent trials")->capture_default_str();
  dc_cmd->add_option("--csv", dc.csv, "Write CSV here");

  auto* exp_cmd = sub(app, "experiment", "Monte-Carlo campaigns");
  exp_cmd->require_subcommand(1);
  ExperimentArgs ex;
  std::string which;
  for (const char* name : {"sweep", "soundness", "completeness"}) {
    auto* c = sub(*exp_cmd, name, std::string("Run a ") + name + " campaign from a JSON spec");
    c->add_option("--spec", ex.spec, "Spec JSON file")->required();
    c->add_option("--out", ex.out, "Write CSV here");
    c->callback([&which, name] { which = name; });
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kError;
  }

  try {
    if (g.isa == "scalar") set_isa(Isa::scalar);
    if (g.isa == "avx2") {
      if (!isa_available(Isa::avx2)) throw InvalidArgument("avx2 kernels are not available");
      set_isa(Isa::avx2);
    }
    if (gen_cmd->parsed()) return cmd_gen(gen, g, out);
    if (test_cmd->parsed()) return cmd_test(test, g, out);
    if (oracle_cmd->parsed()) return cmd_oracle(orc, g, out);
    if (repair_cmd->parsed()) return cmd_repair(rep, g, out);
    if (sk_cmd->parsed()) return cmd_skeleton(sk, g, out);
    if (dc_cmd->parsed()) return cmd_decay(dc, g, out);
    if (exp_cmd->parsed()) return cmd_experiment(which, ex, g, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

}  // namespace mtest
