#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "frobjet/builtins.hpp"
#include "frobjet/modelfile.hpp"
#include "frobjet/pipeline.hpp"

using namespace frobjet;

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t c = s.find(',', pos);
    if (c == std::string::npos) {
      out.push_back(s.substr(pos));
      break;
    }
    out.push_back(s.substr(pos, c - pos));
    pos = c + 1;
  }
  return out;
}

/// Built-in ids take precedence unless the target looks like a path.
ModelFile load_target(const std::string& target, int jet_order) {
  bool pathlike = target.find('/') != std::string::npos ||
                  (target.size() > 5 && target.substr(target.size() - 5) == ".json");
  if (!pathlike) {
    try {
      BuiltinModel bm = builtin(target, jet_order);
      ModelFile mf;
      mf.spec = std::move(bm.spec);
      mf.params.depths = bm.rec;
      if (jet_order > 0) mf.params.depths.jet_order = jet_order;
      return mf;
    } catch (const Error& e) {
      if (e.kind != Error::Kind::parse) throw;
    }
  }
  return load_model_file(target, jet_order);
}

void write_or_print(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Error::Kind::parse, "cannot write '" + path + "'");
  out << text;
}

int run(int argc, char** argv) {
  CLI::App app{"exact residual checks for frobenius-type models"};
  app.require_subcommand(1);

  auto* chk = app.add_subcommand("check", "run staged residual checks");
  std::string target, stages_csv, lambdas_csv, json_out;
  int m_max = -1, jet_order = 0, dump_m = 0;
  bool timings = false;
  chk->add_option("model", target, "model file or built-in id")->required();
  chk->add_option("--stages", stages_csv, "comma-separated stage subset");
  chk->add_option("--m-max", m_max, "largest operator index checked");
  chk->add_option("--jet-order", jet_order, "override the potential truncation");
  chk->add_option("--lambdas", lambdas_csv, "comma-separated weight samples");
  chk->add_option("--json", json_out,
                  "write the machine report here ('-': stdout instead of text)");
  chk->add_flag("--timings", timings, "print per-stage wall times to stderr");

  auto* dmp = app.add_subcommand("dump", "serialize a derived object");
  std::string object;
  dmp->add_option("model", target, "model file or built-in id")->required();
  dmp->add_option("--object", object, "potential | calibration | vtop | operator")
      ->required();
  dmp->add_option("--m", dump_m, "operator index (with --object=operator)");
  dmp->add_option("--jet-order", jet_order, "override the potential truncation");

  auto* lst = app.add_subcommand("list-builtins", "print the built-in model ids");

  auto* exp = app.add_subcommand("export-builtin", "write a built-in as a model file");
  std::string out_path;
  exp->add_option("id", target, "built-in id")->required();
  exp->add_option("out", out_path, "output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (lst->parsed()) {
    for (const std::string& id : builtin_ids()) std::cout << id << "\n";
    return 0;
  }

  if (exp->parsed()) {
    write_or_print(export_builtin_file(target), out_path);
    return 0;
  }

  if (dmp->parsed()) {
    ModelFile mf = load_target(target, jet_order);
    std::cout << dump_object(mf, object, dump_m);
    return 0;
  }

  ModelFile mf = load_target(target, jet_order);
  CheckOptions opt;
  if (!stages_csv.empty()) opt.stages = split_csv(stages_csv);
  if (chk->count("--m-max") > 0) opt.m_max = m_max;
  if (!lambdas_csv.empty()) {
    std::vector<Rat> ls;
    for (const std::string& l : split_csv(lambdas_csv)) ls.push_back(rat_parse(l));
    opt.lambdas = std::move(ls);
  }
  CheckRun res = run_checks(mf, opt);
  if (timings) {
    double total = 0;
    for (const StageResult& s : res.stages) {
      std::cerr << "stage " << s.stage << ": " << s.ms << " ms\n";
      total += s.ms;
    }
    std::cerr << "total: " << total << " ms\n";
  }
  if (json_out == "-") {
    std::cout << report_json(res);
  } else {
    std::cout << report_text(res);
    if (!json_out.empty()) write_or_print(report_json(res), json_out);
  }
  return res.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind == Error::Kind::parse ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
