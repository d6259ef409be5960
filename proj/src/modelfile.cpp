#include "frobjet/modelfile.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace frobjet {

namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(Error::Kind::parse, where + ": " + what);
}

void check_keys(const ojson& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& kv : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || kv.key() == k;
    if (!known) bad(where, "unknown key '" + kv.key() + "'");
  }
}

long long get_int(const ojson& j, const std::string& where, long long lo,
                  long long hi) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  long long v = j.get<long long>();
  if (v < lo || v > hi)
    bad(where, "out of range [" + std::to_string(lo) + ", " +
                   std::to_string(hi) + "]");
  return v;
}

Rat get_rat(const ojson& j, const std::string& where) {
  if (!j.is_string()) bad(where, "rationals must be \"p/q\" strings");
  try {
    return rat_parse(j.get<std::string>());
  } catch (const Error& e) {
    bad(where, e.what());
  }
}

std::vector<Rat> get_rat_vec(const ojson& j, size_t len,
                             const std::string& where) {
  if (!j.is_array() || j.size() != len)
    bad(where, "expected an array of " + std::to_string(len) + " rationals");
  std::vector<Rat> out;
  out.reserve(len);
  for (size_t i = 0; i < len; ++i)
    out.push_back(get_rat(j.at(i), where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> get_exps(const ojson& j, int nv, const std::string& where) {
  if (!j.is_array() || (int)j.size() != nv)
    bad(where, "expected " + std::to_string(nv) + " exponents");
  std::vector<int> e(nv);
  for (int v = 0; v < nv; ++v)
    e[v] = (int)get_int(j.at(v), where + "[" + std::to_string(v) + "]", 0, 255);
  return e;
}

int exps_degree(const std::vector<int>& e) {
  int d = 0;
  for (int x : e) d += x;
  return d;
}

Jet parse_potential(const ojson& p, int nv, int t, const std::string& where) {
  if (!p.is_object()) bad(where, "expected an object");
  check_keys(p, where, {"monomials", "exp_terms"});
  Jet f = Jet::zero(nv, t);
  if (p.contains("monomials")) {
    const ojson& ms = p.at("monomials");
    if (!ms.is_array()) bad(where + ".monomials", "expected an array");
    for (size_t i = 0; i < ms.size(); ++i) {
      std::string here = where + ".monomials[" + std::to_string(i) + "]";
      const ojson& entry = ms.at(i);
      if (!entry.is_array() || entry.size() != 2)
        bad(here, "expected [[exponents], \"p/q\"]");
      std::vector<int> e = get_exps(entry.at(0), nv, here);
      Rat c = get_rat(entry.at(1), here);
      if (exps_degree(e) <= t) f.coeff_ref(e) += c;
    }
  }
  if (p.contains("exp_terms")) {
    const ojson& ts = p.at("exp_terms");
    if (!ts.is_array()) bad(where + ".exp_terms", "expected an array");
    for (size_t i = 0; i < ts.size(); ++i) {
      std::string here = where + ".exp_terms[" + std::to_string(i) + "]";
      const ojson& entry = ts.at(i);
      if (!entry.is_object()) bad(here, "expected an object");
      check_keys(entry, here, {"coeff", "var", "scale", "prefactor_monomial"});
      if (!entry.contains("coeff") || !entry.contains("var") ||
          !entry.contains("scale"))
        bad(here, "needs coeff, var and scale");
      Rat c = get_rat(entry.at("coeff"), here + ".coeff");
      int var = (int)get_int(entry.at("var"), here + ".var", 0, nv - 1);
      Rat scale = get_rat(entry.at("scale"), here + ".scale");
      Jet term = exp_linear_jet(nv, t, c, var, scale);
      if (entry.contains("prefactor_monomial")) {
        std::vector<int> e = get_exps(entry.at("prefactor_monomial"), nv,
                                      here + ".prefactor_monomial");
        if (exps_degree(e) > t) continue;
        Jet pre = Jet::zero(nv, t);
        pre.coeff_ref(e) = Rat(1);
        term = pre * term;
      }
      f += term;
    }
  }
  return f;
}

ojson rat_vec_json(const std::vector<Rat>& v) {
  ojson a = ojson::array();
  for (const Rat& r : v) a.push_back(rat_str(r));
  return a;
}

ojson monomial_entry(std::vector<int> e, const std::string& c) {
  return ojson::array({ojson(std::move(e)), ojson(c)});
}

ojson jet_potential_json(const Jet& f, int max_deg) {
  ojson mon = ojson::array();
  const MonoTable& tb = f.table();
  for (size_t i = 0; i < tb.size(); ++i) {
    if (tb.degree(i) > max_deg) continue;
    if (rat_is_zero(f.coeff_idx(i))) continue;
    std::vector<int> e(tb.num_vars());
    for (int v = 0; v < tb.num_vars(); ++v) e[v] = tb.exps(i)[v];
    mon.push_back(monomial_entry(std::move(e), rat_str(f.coeff_idx(i))));
  }
  ojson p = ojson::object();
  p["monomials"] = std::move(mon);
  return p;
}

std::string render(const ModelSpec& m, int jet_order, const RunParams& pr,
                   ojson pot, ojson open_pot) {
  ojson doc = ojson::object();
  doc["dimension"] = m.n;
  if (m.eta) {
    ojson rows = ojson::array();
    for (int i = 0; i < m.n; ++i) {
      ojson row = ojson::array();
      for (int j = 0; j < m.n; ++j) row.push_back(rat_str(m.eta->at(i, j)));
      rows.push_back(std::move(row));
    }
    doc["metric"] = std::move(rows);
  }
  doc["potential"] = std::move(pot);
  if (m.euler) {
    ojson e = ojson::object();
    e["q"] = rat_vec_json(m.euler->q);
    e["r"] = rat_vec_json(m.euler->r);
    e["delta"] = rat_str(m.euler->delta);
    if (m.open_ext) e["r_extra"] = rat_str(m.open_ext->r_extra);
    doc["euler"] = std::move(e);
  }
  if (m.open_ext) doc["open_potential"] = std::move(open_pot);
  doc["base_point"] = rat_vec_json(m.base);
  ojson tr = ojson::object();
  tr["jet_order"] = jet_order;
  tr["D"] = pr.depths.calib_depth;
  tr["P_max"] = pr.depths.level_cap;
  tr["G_max"] = pr.depths.deg_cap;
  tr["m_max"] = pr.depths.m_max;
  if (!pr.lambdas.empty()) tr["lambdas"] = rat_vec_json(pr.lambdas);
  doc["truncation"] = std::move(tr);
  return doc.dump(2) + "\n";
}

}  // namespace

ModelFile parse_model_file(const std::string& text, const std::string& id,
                           int jet_order) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const std::exception& e) {
    fail(Error::Kind::parse, std::string("model file: ") + e.what());
  }
  if (!doc.is_object()) bad("model file", "top level must be an object");
  check_keys(doc, "model file",
             {"dimension", "metric", "potential", "euler", "open_potential",
              "base_point", "truncation"});
  if (!doc.contains("dimension")) bad("model file", "missing 'dimension'");
  int n = (int)get_int(doc.at("dimension"), "dimension", 1, kMaxJetVars);

  ModelFile mf;
  if (doc.contains("truncation")) {
    const ojson& tr = doc.at("truncation");
    if (!tr.is_object()) bad("truncation", "expected an object");
    check_keys(tr, "truncation",
               {"jet_order", "D", "P_max", "G_max", "m_max", "lambdas"});
    RecommendedDepths& d = mf.params.depths;
    if (tr.contains("jet_order"))
      d.jet_order = (int)get_int(tr.at("jet_order"), "truncation.jet_order", 1, 255);
    if (tr.contains("D"))
      d.calib_depth = (int)get_int(tr.at("D"), "truncation.D", 0, 255);
    if (tr.contains("P_max"))
      d.level_cap = (int)get_int(tr.at("P_max"), "truncation.P_max", 0, 255);
    if (tr.contains("G_max"))
      d.deg_cap = (int)get_int(tr.at("G_max"), "truncation.G_max", 0, 255);
    if (tr.contains("m_max"))
      d.m_max = (int)get_int(tr.at("m_max"), "truncation.m_max", -1, 255);
    if (tr.contains("lambdas")) {
      const ojson& ls = tr.at("lambdas");
      if (!ls.is_array()) bad("truncation.lambdas", "expected an array");
      for (size_t i = 0; i < ls.size(); ++i)
        mf.params.lambdas.push_back(
            get_rat(ls.at(i), "truncation.lambdas[" + std::to_string(i) + "]"));
    }
  }
  if (jet_order > 0) mf.params.depths.jet_order = jet_order;
  int t = mf.params.depths.jet_order;

  bool open = doc.contains("open_potential");
  int nv = n + (open ? 1 : 0);
  if (nv > kMaxJetVars)
    bad("dimension", "at most " + std::to_string(kMaxJetVars) +
                         " jet variables (open extension included)");

  ModelSpec& m = mf.spec;
  m.id = id;
  m.n = n;
  m.trunc = t;

  if (doc.contains("metric")) {
    const ojson& rows = doc.at("metric");
    if (!rows.is_array() || (int)rows.size() != n)
      bad("metric", "expected " + std::to_string(n) + " rows");
    QMatrix eta(n, n);
    for (int i = 0; i < n; ++i) {
      std::vector<Rat> row =
          get_rat_vec(rows.at(i), n, "metric[" + std::to_string(i) + "]");
      for (int j = 0; j < n; ++j) eta.at(i, j) = row[j];
    }
    m.eta = eta;
  }

  if (doc.contains("base_point"))
    m.base = get_rat_vec(doc.at("base_point"), nv, "base_point");
  else
    m.base.assign(nv, Rat(0));

  if (!doc.contains("potential")) bad("model file", "missing 'potential'");
  const ojson& pot = doc.at("potential");
  if (pot.is_array()) {
    if ((int)pot.size() != n)
      bad("potential", "a vector potential needs exactly " + std::to_string(n) +
                           " components");
    for (int i = 0; i < n; ++i)
      m.potential.push_back(parse_potential(
          pot.at(i), n, t, "potential[" + std::to_string(i) + "]"));
  } else {
    m.potential = {parse_potential(pot, n, t, "potential")};
  }

  Rat r_extra(0);
  if (doc.contains("euler")) {
    const ojson& e = doc.at("euler");
    if (!e.is_object()) bad("euler", "expected an object");
    check_keys(e, "euler", {"q", "r", "delta", "r_extra"});
    if (!e.contains("q") || !e.contains("r") || !e.contains("delta"))
      bad("euler", "needs q, r and delta");
    EulerData ed;
    ed.q = get_rat_vec(e.at("q"), n, "euler.q");
    ed.r = get_rat_vec(e.at("r"), n, "euler.r");
    ed.delta = get_rat(e.at("delta"), "euler.delta");
    if (e.contains("r_extra")) {
      if (!open) bad("euler.r_extra", "needs an open potential");
      r_extra = get_rat(e.at("r_extra"), "euler.r_extra");
    }
    m.euler = std::move(ed);
  }
  if (open)
    m.open_ext =
        OpenExt{parse_potential(doc.at("open_potential"), nv, t, "open_potential"),
                r_extra};

  try {
    m.validate();
  } catch (const Error& e) {
    fail(Error::Kind::parse, std::string("invalid model: ") + e.what());
  }
  return mf;
}

ModelFile load_model_file(const std::string& path, int jet_order) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Error::Kind::parse, "cannot read model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string id = path;
  size_t slash = id.find_last_of('/');
  if (slash != std::string::npos) id = id.substr(slash + 1);
  if (id.size() > 5 && id.substr(id.size() - 5) == ".json")
    id = id.substr(0, id.size() - 5);
  return parse_model_file(buf.str(), id, jet_order);
}

std::string serialize_model_file(const ModelSpec& spec, const RunParams& params) {
  // Files carry only certified coefficients: the written jet order is the
  // least valid order across the potentials.
  int w = spec.trunc;
  for (const Jet& f : spec.potential) w = std::min(w, f.valid_order());
  if (spec.open_ext) w = std::min(w, spec.open_ext->fo.valid_order());
  ojson pot;
  if (spec.frobenius()) {
    pot = jet_potential_json(spec.potential[0], w);
  } else {
    pot = ojson::array();
    for (const Jet& f : spec.potential) pot.push_back(jet_potential_json(f, w));
  }
  ojson open_pot;
  if (spec.open_ext) open_pot = jet_potential_json(spec.open_ext->fo, w);
  return render(spec, w, params, std::move(pot), std::move(open_pot));
}

std::string export_builtin_file(const std::string& id) {
  BuiltinModel bm = builtin(id);
  const ModelSpec& m = bm.spec;
  const std::string& cid = m.id;
  ojson pot = ojson::object();
  ojson open_pot = ojson::object();
  if (cid == "point" || cid == "point_open") {
    pot["monomials"] = ojson::array({monomial_entry({3}, "1/6")});
    if (cid == "point_open")
      open_pot["monomials"] = ojson::array(
          {monomial_entry({1, 1}, "1"), monomial_entry({0, 3}, "1/6")});
  } else if (cid == "a2_3spin") {
    pot["monomials"] = ojson::array(
        {monomial_entry({2, 1}, "1/2"), monomial_entry({0, 4}, "1/72")});
  } else {
    // The p1 family: closed potential x^2 y / 2 + e^y throughout.
    pot["monomials"] = ojson::array({monomial_entry({2, 1}, "1/2")});
    ojson e = ojson::object();
    e["coeff"] = "1";
    e["var"] = 1;
    e["scale"] = "1";
    pot["exp_terms"] = ojson::array({std::move(e)});
    if (cid.rfind("p1_open(", 0) == 0) {
      std::string body = cid.substr(8, cid.size() - 9);
      size_t c1 = body.find(','), c2 = body.rfind(',');
      Rat a = rat_parse(body.substr(0, c1));
      Rat b = rat_parse(body.substr(c1 + 1, c2 - c1 - 1));
      int sign = body.substr(c2 + 1) == "+" ? 1 : -1;
      ojson mon = ojson::array({monomial_entry({1, 0, 1}, "1")});
      if (!rat_is_zero(b)) mon.push_back(monomial_entry({1, 0, 0}, rat_str(-b)));
      ojson terms = ojson::array();
      Rat w(1), a2 = a * a;
      for (int j = 0; 2 * j + 1 <= m.trunc; ++j) {
        if (j > 0) w *= a2;
        if (rat_is_zero(w)) break;
        ojson et = ojson::object();
        et["coeff"] = rat_str(Rat(2 * sign) * w /
                              rat_factorial(unsigned(2 * j + 1)));
        et["var"] = 1;
        et["scale"] = "1/2";
        et["prefactor_monomial"] = std::vector<int>{0, 0, 2 * j + 1};
        terms.push_back(std::move(et));
      }
      open_pot["monomials"] = std::move(mon);
      open_pot["exp_terms"] = std::move(terms);
    } else if (cid.rfind("p1_canonical(", 0) == 0) {
      int k = cid[13] - '0';
      open_pot["monomials"] = ojson::array({monomial_entry({1, 0, 1}, "1")});
      ojson et = ojson::object();
      et["coeff"] = rat_str(Rat(k == 1 ? 2 : -2));
      et["var"] = 1;
      et["scale"] = "1/2";
      et["prefactor_monomial"] = std::vector<int>{0, 0, 1};
      open_pot["exp_terms"] = ojson::array({std::move(et)});
    }
  }
  RunParams pr;
  pr.depths = bm.rec;
  return render(m, m.trunc, pr, std::move(pot), std::move(open_pot));
}

bool specs_identical(const ModelSpec& a, const ModelSpec& b) {
  if (a.n != b.n || a.trunc != b.trunc) return false;
  if (a.eta.has_value() != b.eta.has_value()) return false;
  if (a.eta && *a.eta != *b.eta) return false;
  if (a.potential.size() != b.potential.size()) return false;
  for (size_t i = 0; i < a.potential.size(); ++i)
    if (!a.potential[i].identical(b.potential[i])) return false;
  if (a.euler.has_value() != b.euler.has_value()) return false;
  if (a.euler && (a.euler->q != b.euler->q || a.euler->r != b.euler->r ||
                  a.euler->delta != b.euler->delta))
    return false;
  if (a.base != b.base) return false;
  if (a.open_ext.has_value() != b.open_ext.has_value()) return false;
  if (a.open_ext && (!a.open_ext->fo.identical(b.open_ext->fo) ||
                     a.open_ext->r_extra != b.open_ext->r_extra))
    return false;
  return true;
}

}  // namespace frobjet
