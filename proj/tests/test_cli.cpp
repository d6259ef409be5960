#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include "json.hpp"

#include "frobjet/builtins.hpp"
#include "frobjet/modelfile.hpp"
#include "frobjet/pipeline.hpp"

using namespace frobjet;

namespace {

template <class F>
Error::Kind thrown_kind(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind;
  }
  FAIL("expected an engine error");
  return Error::Kind::internal;
}

ModelFile builtin_file(const std::string& id) {
  BuiltinModel bm = builtin(id);
  ModelFile mf;
  mf.spec = std::move(bm.spec);
  mf.params.depths = bm.rec;
  return mf;
}

std::map<std::string, std::string> status_by_stage(const CheckRun& run) {
  std::map<std::string, std::string> out;
  for (const StageResult& s : run.stages) out[s.stage] = s.status;
  return out;
}

struct CliResult {
  int code;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(FROBJET_BIN) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, got);
  int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string fixture(const std::string& name) {
  return std::string(FROBJET_FIXTURES) + "/" + name;
}

/// Filename stem for a built-in id: parens and separators fold to '_',
/// signs to 'p'/'m'.
std::string model_stem(const std::string& id) {
  std::string s;
  for (char c : id) {
    if (c == '(' || c == ',' || c == '/')
      s += '_';
    else if (c == '+')
      s += 'p';
    else if (c == '-')
      s += 'm';
    else if (c != ')')
      s += c;
  }
  return s;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("every built-in round-trips through its exported model file") {
  for (const std::string& id : builtin_ids()) {
    CAPTURE(id);
    BuiltinModel bm = builtin(id);
    std::string text = export_builtin_file(id);
    ModelFile mf = parse_model_file(text, id);
    CHECK(specs_identical(mf.spec, bm.spec));
    CHECK(mf.params.depths.jet_order == bm.rec.jet_order);
    CHECK(mf.params.depths.calib_depth == bm.rec.calib_depth);
    CHECK(mf.params.depths.level_cap == bm.rec.level_cap);
    CHECK(mf.params.depths.deg_cap == bm.rec.deg_cap);
    CHECK(mf.params.depths.m_max == bm.rec.m_max);
    CHECK(mf.params.lambdas.empty());
    CHECK(export_builtin_file(id) == text);
  }
}

TEST_CASE("generic serialization is a fixpoint on exact specs") {
  for (const std::string& id :
       {std::string("point_open"), std::string("p1_open(2,1/2,-)"),
        std::string("p1_canonical(2)")}) {
    CAPTURE(id);
    BuiltinModel bm = builtin(id);
    RunParams pr;
    pr.depths = bm.rec;
    pr.lambdas = {Rat(1, 3), Rat(-2, 5)};
    std::string text = serialize_model_file(bm.spec, pr);
    ModelFile mf = parse_model_file(text, id);
    CHECK(specs_identical(mf.spec, bm.spec));
    CHECK(mf.params.lambdas == pr.lambdas);
    CHECK(serialize_model_file(mf.spec, mf.params) == text);
  }
}

TEST_CASE("jet order overrides re-truncate the exported families") {
  for (const std::string& id :
       {std::string("p1"), std::string("p1_open(1,0,+)"),
        std::string("p1_canonical(1)")}) {
    CAPTURE(id);
    ModelFile mf = parse_model_file(export_builtin_file(id), id, 4);
    CHECK(specs_identical(mf.spec, builtin(id, 4).spec));
  }
  // Exact exponential families also re-expand upward.
  ModelFile hi = parse_model_file(export_builtin_file("p1"), "p1", 9);
  CHECK(specs_identical(hi.spec, builtin("p1", 9).spec));
  ModelFile hic = parse_model_file(export_builtin_file("p1_canonical(1)"),
                                   "p1_canonical(1)", 8);
  CHECK(specs_identical(hic.spec, builtin("p1_canonical(1)", 8).spec));
}

TEST_CASE("exp terms expand against the jet engine") {
  const char* text = R"({
    "dimension": 1,
    "metric": [["1"]],
    "potential": {
      "monomials": [[[3], "1/6"]],
      "exp_terms": [
        {"coeff": "3/2", "var": 0, "scale": "-1/2", "prefactor_monomial": [2]}
      ]
    },
    "truncation": {"jet_order": 6}
  })";
  ModelFile mf = parse_model_file(text, "expcheck");
  Jet x = Jet::coordinate(1, 6, 0);
  Jet expected = x * x * x * Rat(1, 6) +
                 x * x * exp_linear_jet(1, 6, Rat(3, 2), 0, Rat(-1, 2));
  CHECK(mf.spec.potential[0].identical(expected));
}

TEST_CASE("flat vector potentials use the array form") {
  const char* text = R"({
    "dimension": 2,
    "potential": [
      {"monomials": [[[1, 1], "1"]]},
      {"monomials": [[[0, 2], "1/2"], [[2, 0], "3"]]}
    ],
    "truncation": {"jet_order": 5}
  })";
  ModelFile mf = parse_model_file(text, "flat");
  REQUIRE(mf.spec.potential.size() == 2);
  CHECK(!mf.spec.frobenius());
  CHECK(mf.spec.potential[1].coeff({0, 2}) == Rat(1, 2));
  std::string again = serialize_model_file(mf.spec, mf.params);
  ModelFile mf2 = parse_model_file(again, "flat");
  CHECK(specs_identical(mf2.spec, mf.spec));
}

TEST_CASE("serialization writes only certified coefficients") {
  ModelSpec spec = builtin("a2_3spin").spec;
  spec.potential[0].restrict_valid(3);
  std::string text = serialize_model_file(spec, RunParams{});
  ModelFile mf = parse_model_file(text, "a2cut");
  CHECK(mf.spec.trunc == 3);
  CHECK(mf.spec.potential[0].coeff({2, 1}) == Rat(1, 2));
  CHECK(mf.spec.potential[0].valid_order() == 3);
}

TEST_CASE("the parser rejects malformed files") {
  auto parse_kind = [](const std::string& text) {
    return thrown_kind([&] { parse_model_file(text, "bad"); });
  };
  // clang-format off
  const char* cases[] = {
      "not json at all",
      R"({"dimension": 1})",
      R"({"dimension": 1, "potential": {"monomials": []}, "bogus": 1})",
      R"({"dimension": 1, "metric": [[1]], "potential": {"monomials": []}})",
      R"({"dimension": 1, "metric": [["1"]], "potential": {"monomials": [[[1, 2], "1"]]}})",
      R"({"dimension": 1, "metric": [["1"]], "potential": {"monomials": [], "euler": []}})",
      R"({"dimension": 1, "metric": [["1"]], "potential": {"monomials": []}, "euler": {"q": ["0"], "r": ["0"], "delta": "0", "r_extra": "1"}})",
      R"({"dimension": 1, "metric": [["1"]], "potential": {"exp_terms": [{"coeff": "1", "var": 1, "scale": "1"}]}})",
      R"({"dimension": 2, "potential": [{"monomials": []}]})",
      R"({"dimension": 1, "metric": [["1"]], "potential": {"monomials": []}, "truncation": {"jet_order": 0}})",
      R"({"dimension": 8, "potential": {"monomials": []}, "open_potential": {"monomials": []}})",
      R"({"dimension": 1, "potential": {"monomials": [[[3], "1/6"]]}})",
  };
  // clang-format on
  for (const char* c : cases) {
    CAPTURE(c);
    CHECK(parse_kind(c) == Error::Kind::parse);
  }
}

TEST_CASE("file loading resolves ids from basenames") {
  CHECK(thrown_kind([] { load_model_file("/nonexistent/x.json"); }) ==
        Error::Kind::parse);
  std::string path = "/tmp/frobjet_point_roundtrip.json";
  {
    std::ofstream out(path);
    out << export_builtin_file("point");
  }
  ModelFile mf = load_model_file(path);
  CHECK(mf.spec.id == "frobjet_point_roundtrip");
  CHECK(specs_identical(mf.spec, builtin("point").spec));
}

TEST_CASE("the staged pipeline certifies the open point model end to end") {
  ModelFile mf = builtin_file("point_open");
  CheckRun run = run_checks(mf, CheckOptions{});
  REQUIRE(run.stages.size() == stage_names().size());
  for (const StageResult& s : run.stages) {
    CAPTURE(s.stage);
    CHECK(s.status == "pass");
    CHECK(!s.checks.empty());
    for (const ResidualReport& r : s.checks) {
      CAPTURE(r.name);
      CHECK(r.is_zero);
    }
  }
  CHECK(run.ok);
  // the recommended windows survive, already wide enough for m_max 3
  CHECK(run.effective.depths.calib_depth == 10);
  CHECK(run.effective.depths.level_cap == 4);
  CHECK(run.spread == 0);
  CHECK(run.lambdas ==
        std::vector<Rat>{Rat(3, 2), Rat(1, 3), Rat(-2, 5)});
  CHECK(report_text(run).find("result: PASS") != std::string::npos);
}

TEST_CASE("stage selection runs exactly the requested subset") {
  ModelFile mf = builtin_file("a2_3spin");
  CheckOptions opt;
  opt.stages = {"units", "wdvv"};  // any order; the report is canonical
  CheckRun r1 = run_checks(mf, opt);
  REQUIRE(r1.stages.size() == 2);
  CHECK(r1.stages[0].stage == "wdvv");
  CHECK(r1.stages[1].stage == "units");
  CHECK(r1.ok);
  CheckRun r2 = run_checks(mf, opt);
  CHECK(report_json(r1) == report_json(r2));

  CheckOptions bad;
  bad.stages = {"wdvvv"};
  CHECK(thrown_kind([&] { run_checks(mf, bad); }) == Error::Kind::parse);
}

TEST_CASE("a broken potential fails early and downstream stages are skipped") {
  ModelFile mf = builtin_file("a2_3spin");
  mf.spec.potential[0].coeff_ref({2, 2}) += Rat(1, 5);
  CheckRun run = run_checks(mf, CheckOptions{});
  CHECK(!run.ok);
  auto st = status_by_stage(run);
  // the tamper also breaks the unit axiom, so associativity is not vacuous
  CHECK(st["wdvv"] == "fail");
  CHECK(st["units"] == "fail");
  CHECK(st["euler"] == "fail");
  for (const char* s : {"calibrate", "hierarchy", "trr", "virasoro",
                        "open-virasoro", "commutators"}) {
    CAPTURE(s);
    CHECK(st[s] == "skip");
  }
  bool located = false;
  for (const StageResult& s : run.stages)
    for (const ResidualReport& r : s.checks)
      if (!r.is_zero) {
        CHECK(!r.location.empty());
        CHECK(!rat_is_zero(r.value));
        located = true;
      }
  CHECK(located);
  for (const StageResult& s : run.stages)
    if (s.status == "skip")
      CHECK(s.note.find("prerequisite") != std::string::npos);
}

TEST_CASE("a broken open potential is caught by the open stages") {
  ModelFile mf = builtin_file("point_open");
  mf.spec.open_ext->fo.coeff_ref({2, 2}) += Rat(1, 7);
  CheckOptions opt;
  opt.stages = {"wdvv", "units"};
  CheckRun run = run_checks(mf, opt);
  CHECK(!run.ok);
  auto st = status_by_stage(run);
  CHECK(st["units"] == "fail");
  bool located = false;
  for (const StageResult& s : run.stages)
    for (const ResidualReport& r : s.checks)
      if (!r.is_zero && !r.location.empty()) located = true;
  CHECK(located);
}

TEST_CASE("flat vector potentials take the not-applicable branches") {
  ModelFile mf;
  mf.spec = to_flat_f(builtin("a2_3spin").spec);
  mf.params.depths = builtin("a2_3spin").rec;
  CheckRun run = run_checks(mf, CheckOptions{});
  auto st = status_by_stage(run);
  CHECK(st["wdvv"] == "pass");
  CHECK(st["units"] == "pass");
  CHECK(st["euler"] == "pass");
  CHECK(st["calibrate"] == "pass");
  CHECK(st["hierarchy"] == "pass");
  CHECK(st["trr"] == "n/a");
  CHECK(st["virasoro"] == "pass");  // weighted flat family only
  CHECK(st["open-virasoro"] == "n/a");
  CHECK(st["commutators"] == "n/a");
  CHECK(run.ok);  // not-applicable stages never fail a run
  CHECK(run.lambdas[0] == Rat(4, 3));
}

TEST_CASE("dump objects serialize the derived data") {
  ModelFile mf = builtin_file("point_open");
  std::string pot = dump_object(mf, "potential", 0);
  CHECK(pot == serialize_model_file(mf.spec, mf.params));

  nlohmann::json cal = nlohmann::json::parse(dump_object(mf, "calibration", 0));
  CHECK(cal["object"] == "calibration");
  CHECK(cal["depth"] == 10);
  CHECK(cal["upper"].size() == 11);

  nlohmann::json vt = nlohmann::json::parse(dump_object(mf, "vtop", 0));
  CHECK(vt["object"] == "vtop");
  CHECK(vt["P_max"] == 4);

  nlohmann::json op = nlohmann::json::parse(dump_object(mf, "operator", 0));
  CHECK(op["m"] == 0);
  CHECK(op["const"] == "1/16");
  CHECK(op["const_o"] == "3/4");

  CHECK(thrown_kind([&] { dump_object(mf, "spectrum", 0); }) ==
        Error::Kind::parse);
}

TEST_CASE("the driver lists, exports, and checks from the command line") {
  CliResult ls = run_cli("list-builtins");
  CHECK(ls.code == 0);
  std::string joined;
  for (const std::string& id : builtin_ids()) joined += id + "\n";
  CHECK(ls.out == joined);

  CliResult ex = run_cli("export-builtin point /tmp/frobjet_cli_point.json");
  CHECK(ex.code == 0);
  std::ifstream in("/tmp/frobjet_cli_point.json", std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text == export_builtin_file("point"));

  CliResult chk =
      run_cli("check /tmp/frobjet_cli_point.json --stages=wdvv,units,euler");
  CHECK(chk.code == 0);
  CHECK(chk.out.find("result: PASS") != std::string::npos);
}

TEST_CASE("exit codes distinguish failure kinds") {
  CHECK(run_cli("check " + fixture("corrupted.json")).code == 2);
  CHECK(run_cli("check /nonexistent/nowhere.json").code == 2);
  CHECK(run_cli("check point --stages=nonsense").code == 2);
  CHECK(run_cli("dump point --object=spectrum").code == 2);
  CHECK(run_cli("frobnicate").code == 2);

  CliResult bad = run_cli("check " + fixture("unit_broken.json"));
  CHECK(bad.code == 1);
  CHECK(bad.out.find("FAIL") != std::string::npos);
  CHECK(bad.out.find("1/5") != std::string::npos);
}

TEST_CASE("committed model exports match the built-ins byte for byte") {
  for (const std::string& id : builtin_ids()) {
    CAPTURE(id);
    std::string path = std::string(FROBJET_MODELS) + "/" + model_stem(id) + ".json";
    CHECK(slurp(path) == export_builtin_file(id));
  }
}

TEST_CASE("machine reports are byte-identical across runs") {
  std::string args = "check a2_3spin --stages=wdvv,units,euler,calibrate --json -";
  CliResult one = run_cli(args);
  CliResult two = run_cli(args);
  CHECK(one.code == 0);
  CHECK(one.out == two.out);
  nlohmann::json doc = nlohmann::json::parse(one.out);
  CHECK(doc["ok"] == true);
  CHECK(doc["stages"].size() == 4);
  CHECK(doc["effective"]["D"] == 8);
}
