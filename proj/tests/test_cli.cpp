#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <regex>
#include <sstream>

#include "decaylab/cli.hpp"

using namespace decaylab;
using namespace decaylab::cli;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run call(std::vector<std::string> args) {
  std::ostringstream o, e;
  int c = run(args, o, e);
  return {c, o.str(), e.str()};
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("decay_lab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

json without_time(json j) {
  j.erase("generated_at");
  return j;
}

}  // namespace

TEST_CASE("defaults round trip and the schema is pinned") {
  RunConfig d;
  std::string text = dump_config(d);
  RunConfig back = parse_config(text);
  CHECK(dump_config(back) == text);
  CHECK(config_hash(back) == config_hash(d));
  CHECK(hash_hex(config_hash(d)).size() == 16);

  json j = json::parse(text);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"format_version", "output_dir", "threads", "partition", "witness", "norms",
                                         "time_grid", "quadrature", "bounds", "eigen", "lower_bound", "midband",
                                         "besov", "report"});
  CHECK(j["format_version"] == 1);
  CHECK(j["partition"]["transition_width"] == 0.25);
  CHECK(j["time_grid"]["t_min"] == 100.0);
  CHECK(j["time_grid"]["t_max"] == 10000.0);
  CHECK(j["time_grid"]["points"] == 12);
  CHECK(j["eigen"]["tolerance"] == 1e-9);

  TimeGrid g;
  auto ts = g.times();
  REQUIRE(ts.size() == 12);
  CHECK(ts.front() == 100.0);
  CHECK(ts.back() == 1e4);
  CHECK(ts[6] / ts[5] == doctest::Approx(std::pow(100.0, 1.0 / 11)).epsilon(1e-14));

  RunConfig p = parse_config(R"({"norms": [{"kind": "besov", "p": "inf", "q": 1, "band": "low"}]})");
  CHECK(std::isinf(p.norms[0].p));
  CHECK(parse_config(dump_config(p)).norms[0].p == inf);
}

TEST_CASE("strict config validation") {
  CHECK_THROWS_AS(parse_config(R"({"colour": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"witness": {"kind": "gaussian", "extra": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"threads": "four"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"threads": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"threads": 1.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"witness": {"kind": "nope"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"partition": {"transition_width": 0.6}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"norms": [{"kind": "L3"}]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"norms": [{"kind": "besov", "p": 1.5}]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"time_grid": {"spacing": "list", "values": [3, 2]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"format_version": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"threads\": 1,"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/decay_lab.json"), ConfigError);
  CHECK_NOTHROW(parse_config("{}"));
}

TEST_CASE("bound resolution") {
  BoundSettings b;
  Witness g;
  NormEntry l2;  // L2, low band
  auto r = resolve_bound(l2, g, b);
  REQUIRE(r);
  CHECK(r->kind == BoundKind::UpperPowerLaw);
  CHECK(r->sigma_theory == -0.75);

  Witness psi;
  psi.kind = WitnessKind::Psi;
  NormEntry linf;
  linf.kind = "Linf";
  linf.band = "full";
  r = resolve_bound(linf, psi, b);
  REQUIRE(r);
  CHECK(r->kind == BoundKind::LowerBound);
  CHECK(r->sigma_theory == -2.0);
  CHECK(r->sigma_tol == 0.1);

  Witness heat;
  heat.kind = WitnessKind::Heat;
  CHECK(resolve_bound(linf, heat, b)->sigma_theory == -1.5);

  NormEntry blk;
  blk.kind = "block_l2";
  blk.j = 4;
  CHECK(resolve_bound(blk, g, b)->kind == BoundKind::Exponential);
  blk.j = 1;
  CHECK(resolve_bound(blk, g, b)->kind == BoundKind::MidBand);
  CHECK(resolve_bound(blk, g, b)->r2_min == 0.99);

  NormEntry besov;
  besov.kind = "besov";
  besov.p = 4;
  CHECK(resolve_bound(besov, g, b)->sigma_theory == -11.0 / 8);
  besov.bound = "none";
  CHECK_FALSE(resolve_bound(besov, g, b));
  besov.bound = "upper_power_law";
  besov.sigma_theory = -1.0;
  CHECK(resolve_bound(besov, g, b)->sigma_theory == -1.0);
}

TEST_CASE("print-defaults, usage errors and thread precedence") {
  Run d = call({"print-defaults"});
  CHECK(d.code == 0);
  CHECK(d.out == dump_config(RunConfig{}));

  CHECK(call({}).code == kUsageError);
  CHECK(call({"frobnicate"}).code == kUsageError);
  CHECK(call({"print-defaults", "--threads", "0"}).code == kUsageError);
  CHECK(call({"--help"}).code == 0);

  fs::path dir = scratch("threads");
  std::string cfg = write_file(dir / "c.json", R"({"threads": 2})");
  CHECK(json::parse(call({"print-defaults", "--config", cfg}).out)["threads"] == 2);
  ::setenv("DECAY_LAB_THREADS", "3", 1);
  CHECK(json::parse(call({"print-defaults", "--config", cfg}).out)["threads"] == 3);
  CHECK(json::parse(call({"print-defaults", "--config", cfg, "--threads", "5"}).out)["threads"] == 5);
  ::setenv("DECAY_LAB_THREADS", "many", 1);
  CHECK(call({"print-defaults"}).code == kUsageError);
  ::unsetenv("DECAY_LAB_THREADS");
  fs::remove_all(dir);
}

TEST_CASE("verify-eigen: default passes, impossible tolerance fails by name, bad file is a usage error") {
  fs::path dir = scratch("eigen");
  Run a = call({"verify-eigen", "--output-dir", dir.string()});
  CHECK(a.code == kPass);
  json j = load(dir / "verify_eigen.json");
  CHECK(j["format_version"] == 1);
  CHECK(j["command"] == "verify-eigen");
  CHECK(j["pass"] == true);
  REQUIRE(j["checks"].size() == 5);
  for (const auto& c : j["checks"]) CHECK(c["pass"] == true);
  CHECK(j["checks"][2]["name"] == "oracle");
  CHECK(j["checks"][2]["samples"] == 4000);

  std::string tight = write_file(dir / "tight.json", R"({"eigen": {"tolerance": 1e-30}})");
  Run b = call({"verify-eigen", "--config", tight, "--output-dir", (dir / "tight").string()});
  CHECK(b.code == kVerdictFailure);
  CHECK(b.err.find("oracle") != std::string::npos);
  json k = load(dir / "tight" / "verify_eigen.json");
  CHECK(k["pass"] == false);
  bool named = false;
  for (const auto& c : k["checks"])
    if (c["name"] == "oracle" && c["pass"] == false) named = true;
  CHECK(named);

  std::string bad = write_file(dir / "bad.json", "{\"eigen\": {\"tolerance\": }");
  Run c = call({"verify-eigen", "--config", bad, "--output-dir", (dir / "bad").string()});
  CHECK(c.code == kUsageError);
  CHECK(c.err.find("parse error") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "bad"));
  fs::remove_all(dir);
}

TEST_CASE("decay-sweep: empty grid writes nothing") {
  fs::path dir = scratch("empty");
  std::string cfg = write_file(dir.string() + "_cfg/c.json", R"({"time_grid": {"points": 0}})");
  Run r = call({"decay-sweep", "--config", cfg, "--output-dir", dir.string()});
  CHECK(r.code == kUsageError);
  CHECK_FALSE(fs::exists(dir));
  std::string cfg2 = write_file(dir.string() + "_cfg/d.json", R"({"time_grid": {"spacing": "list", "values": []}})");
  CHECK(call({"decay-sweep", "--config", cfg2, "--output-dir", dir.string()}).code == kUsageError);
  CHECK_FALSE(fs::exists(dir));
  fs::remove_all(dir.string() + "_cfg");
}

TEST_CASE("decay-sweep: CSV format, deterministic JSON, thread independence, report") {
  fs::path dir = scratch("sweep");
  std::string cfg = write_file(dir / "cfg" / "c.json", R"({
    "witness": {"kind": "heat"},
    "norms": [{"kind": "Linf", "band": "full"}, {"kind": "L2", "band": "full"}],
    "time_grid": {"spacing": "log", "t_min": 100, "t_max": 10000, "points": 6}
  })");
  fs::path o1 = dir / "one", o2 = dir / "two";
  Run a = call({"decay-sweep", "--config", cfg, "--output-dir", o1.string()});
  CHECK(a.code == kPass);
  Run b = call({"decay-sweep", "--config", cfg, "--output-dir", o2.string(), "--threads", "2"});
  CHECK(b.code == kPass);

  std::istringstream csv(slurp(o1 / "decay_sweep.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,norm_tag,value,error_estimate,certified");
  std::regex row(R"(^[0-9.e+-]+,(Linf|L2),[0-9.e+-]+,[0-9.e+-]+,(true|false)$)");
  int rows = 0;
  while (std::getline(csv, line)) {
    CHECK(std::regex_match(line, row));
    // at least 15 significant digits survive
    std::string v = line.substr(line.find(',', line.find(',') + 1) + 1);
    v = v.substr(0, v.find(','));
    CHECK(std::stod(v) > 0);
    ++rows;
  }
  CHECK(rows == 12);

  json j1 = load(o1 / "decay_sweep.json"), j2 = load(o2 / "decay_sweep.json");
  CHECK(j1["verdicts"].size() == 2);
  CHECK(j1["verdict_details"][0]["sigma_theory"] == -1.5);
  CHECK(j1["verdict_details"][1]["sigma_theory"] == -0.75);
  for (const auto& v : j1["verdicts"]) CHECK(v["pass"] == true);
  // thread count changes the config hash but not a single value
  CHECK(j1["series"] == j2["series"]);

  Run c = call({"decay-sweep", "--config", cfg, "--output-dir", o1.string()});
  CHECK(c.code == kPass);
  json j3 = load(o1 / "decay_sweep.json");
  CHECK(without_time(j1).dump() == without_time(j3).dump());
  CHECK(slurp(o1 / "decay_sweep.csv") == slurp(o2 / "decay_sweep.csv"));

  // report: missing artifacts listed, exit 2
  Run m = call({"report", "--config", cfg, "--output-dir", o1.string()});
  CHECK(m.code == kUsageError);
  CHECK(m.err.find("verify_eigen.json") != std::string::npos);
  CHECK(m.err.find("lower_bound.json") != std::string::npos);
  CHECK(m.err.find("decay_sweep.json") == std::string::npos);
  CHECK_FALSE(fs::exists(o1 / "report.json"));

  // report over the artifacts that exist
  std::string rcfg = write_file(dir / "cfg" / "r.json", R"({
    "witness": {"kind": "heat"},
    "report": {"inputs": ["verify_eigen.json", "decay_sweep.json"]}
  })");
  REQUIRE(call({"verify-eigen", "--output-dir", o1.string()}).code == kPass);
  Run r1 = call({"report", "--config", rcfg, "--output-dir", o1.string()});
  CHECK(r1.code == kPass);
  json rep = load(o1 / "report.json");
  CHECK(rep["overall"] == "PASS");
  CHECK(rep["rows"].size() == 7);
  CHECK(rep["sources"].size() == 2);
  std::string md = slurp(o1 / "report.md");
  CHECK(md.find("| source | check | expected | measured | result |") != std::string::npos);
  // the hash covers the effective config, overrides included
  RunConfig eff = load_config(rcfg);
  eff.output_dir = o1.string();
  CHECK(md.find(hash_hex(config_hash(eff))) != std::string::npos);
  Run r2 = call({"report", "--config", rcfg, "--output-dir", o1.string()});
  CHECK(without_time(load(o1 / "report.json")).dump() == without_time(rep).dump());

  // a failing input turns the report into a failure
  std::string tight = write_file(dir / "cfg" / "t.json", R"({"eigen": {"tolerance": 1e-30}})");
  CHECK(call({"verify-eigen", "--config", tight, "--output-dir", o1.string()}).code == kVerdictFailure);
  Run r3 = call({"report", "--config", rcfg, "--output-dir", o1.string()});
  CHECK(r3.code == kVerdictFailure);
  CHECK(load(o1 / "report.json")["overall"] == "FAIL");
  fs::remove_all(dir);
}

TEST_CASE("besov-norm needs a besov entry") {
  fs::path dir = scratch("besov");
  Run r = call({"besov-norm", "--output-dir", dir.string()});
  CHECK(r.code == kUsageError);
  CHECK_FALSE(fs::exists(dir));

  std::string cfg = write_file(dir.string() + "_cfg/c.json", R"({
    "witness": {"kind": "heat"},
    "norms": [{"kind": "besov", "band": "full", "p": 2, "q": 2}],
    "time_grid": {"spacing": "log", "t_min": 100, "t_max": 10000, "points": 5}
  })");
  Run b = call({"besov-norm", "--config", cfg, "--output-dir", dir.string()});
  CHECK(b.code == kPass);
  json j = load(dir / "besov_norm.json");
  REQUIRE(j["norms"].size() == 1);
  // the q = 2, s = 0 Besov norm of heat data is comparable to its L^2 norm, t^{-3/4}
  CHECK(j["norms"][0]["power_law_fit"]["exponent"].get<double>() == doctest::Approx(-0.75).epsilon(0.02));
  fs::remove_all(dir);
  fs::remove_all(dir.string() + "_cfg");
}
