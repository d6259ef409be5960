#include "frobjet/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include "json.hpp"

#include "frobjet/calibration.hpp"
#include "frobjet/hierarchy.hpp"
#include "frobjet/virasoro.hpp"

namespace frobjet {

namespace {

using ojson = nlohmann::ordered_json;

/// Shared derived objects, built lazily so a stage selection only pays for
/// what it touches.
struct StageInfra {
  const ModelSpec& m;
  RunParams eff;
  int window = 1;
  int spread = 0;
  int p_out = 0;
  std::vector<Rat> lambdas;

  std::optional<Calibration> cc;
  std::optional<OpenCalibration> oc;
  std::optional<TopSolution> top;
  std::vector<std::vector<DescSeries>> fv;
  std::optional<DescSeries> f;
  std::optional<TopSolution> ext_top;
  std::optional<DescSeries> fo;

  explicit StageInfra(const ModelSpec& mm) : m(mm) {}

  bool open() const { return m.open_ext.has_value(); }

  const Calibration& closed_cal() {
    if (!cc)
      cc = build_calibration(open() ? closed_slice(m) : m, eff.depths.calib_depth);
    return *cc;
  }
  const OpenCalibration& open_cal() {
    if (!oc) oc = build_open_calibration(m, eff.depths.calib_depth);
    return *oc;
  }
  const TopSolution& top_solution() {
    if (!top)
      top = topological_solution(closed_cal(), eff.depths.level_cap,
                                 eff.depths.deg_cap);
    return *top;
  }
  const std::vector<std::vector<DescSeries>>& vector_potentials() {
    if (fv.empty())
      fv = descendent_vector_potentials(closed_cal(), top_solution(), p_out);
    return fv;
  }
  const DescSeries& potential() {
    if (!f) f = descendent_potential(closed_cal(), top_solution());
    return *f;
  }
  const TopSolution& ext_solution() {
    if (!ext_top)
      ext_top = topological_solution(open_cal().ext, eff.depths.level_cap,
                                     eff.depths.deg_cap);
    return *ext_top;
  }
  const DescSeries& open_potential() {
    if (!fo) fo = open_descendent_potential(open_cal(), ext_solution());
    return *fo;
  }
};

void append(std::vector<ResidualReport>& into, std::vector<ResidualReport> more) {
  for (ResidualReport& r : more) into.push_back(std::move(r));
}

void tag_lambda(std::vector<ResidualReport>& rs, const Rat& l) {
  for (ResidualReport& r : rs) r.name = "lambda=" + rat_str(l) + " " + r.name;
}

/// Widen the requested depths until every window the stages touch is
/// actually computed, and settle the weight samples.
void settle_effective(StageInfra& ci, const ModelFile& mf, const CheckOptions& opt) {
  ci.eff = mf.params;
  if (opt.m_max) ci.eff.depths.m_max = *opt.m_max;
  if (opt.lambdas)
    ci.lambdas = *opt.lambdas;
  else if (!mf.params.lambdas.empty())
    ci.lambdas = mf.params.lambdas;
  else if (ci.m.euler) {
    std::vector<Rat> cand = {(Rat(3) - ci.m.euler->delta) / 2, Rat(1, 3),
                             Rat(-2, 5)};
    for (const Rat& l : cand)
      if (std::find(ci.lambdas.begin(), ci.lambdas.end(), l) == ci.lambdas.end())
        ci.lambdas.push_back(l);
  }
  ci.eff.lambdas = ci.lambdas;
  ci.window = 1;
  ci.spread = ci.m.integer_q_spread();
  RecommendedDepths& d = ci.eff.depths;
  int mm = d.m_max;
  d.level_cap = std::max({d.level_cap, mm + ci.window, ci.window});
  ci.p_out = std::max(d.level_cap, mm + ci.spread);
  d.calib_depth = std::max({d.calib_depth, d.level_cap + d.deg_cap,
                            ci.p_out + d.level_cap, mm + ci.spread + ci.window,
                            mm + ci.spread + 1});
}

StageResult run_stage(const std::string& name, StageInfra& ci) {
  const ModelSpec& m = ci.m;
  int mm = ci.eff.depths.m_max;
  StageResult res;
  res.stage = name;
  std::vector<ResidualReport>& out = res.checks;
  bool na = false;

  if (name == "wdvv") {
    append(out, wdvv_residual(m));
    if (ci.open()) append(out, open_wdvv_residual(m));
  } else if (name == "units") {
    out.push_back(unit_checks(m));
  } else if (name == "euler") {
    if (!m.euler) {
      na = true;
      res.note = "no euler data";
    } else {
      out.push_back(euler_residual(m));
    }
  } else if (name == "calibrate") {
    const Calibration& c = ci.closed_cal();
    res.note = "depth " + std::to_string(c.depth);
    append(out, calibration_inverse_residuals(c));
    append(out, calibration_pde_residuals(c));
    if (m.euler) append(out, calibration_homogeneity_residuals(c));
    if (m.eta && m.frobenius()) append(out, calibration_symmetry_residuals(c));
    if (ci.open()) append(out, open_calibration_residuals(ci.open_cal()));
    if (m.euler) {
      for (const Rat& l : ci.lambdas) {
        std::vector<ResidualReport> rs = cmn_residuals(c, mm, l);
        tag_lambda(rs, l);
        append(out, std::move(rs));
      }
    }
  } else if (name == "hierarchy") {
    const Calibration& c = ci.closed_cal();
    const TopSolution& top = ci.top_solution();
    res.note = "P " + std::to_string(top.p_max) + ", G " + std::to_string(top.g_max);
    append(out, flow_residuals(c, top));
    out.push_back(string_residual(c, top));
    out.push_back(dilaton_residual(c, top));
    append(out, omega_pq_residuals(c, ci.eff.depths.level_cap, ci.eff.depths.level_cap));
    append(out, vector_potential_residuals(c, top, ci.vector_potentials()));
    append(out, omega_top_symmetry_residuals(c, top, 6, 20260816u));
  } else if (name == "trr") {
    if (!ci.closed_cal().frobenius_symmetric) {
      na = true;
      res.note = "needs a flat metric calibration";
    } else {
      const Calibration& c = ci.closed_cal();
      const DescSeries& f = ci.potential();
      out.push_back(potential_base_residual(c, f));
      out.push_back(potential_string_residual(c, ci.top_solution(), f));
      append(out, trr_residuals(c, f, 2, 1, 1));
      append(out, gradient_consistency_residuals(c, f, ci.vector_potentials()));
      if (ci.open()) {
        append(out, open_trr_residuals(ci.open_cal(), ci.ext_solution(), f,
                                       ci.open_potential()));
        out.push_back(
            open_potential_base_residual(ci.open_cal(), ci.open_potential()));
      }
    }
  } else if (name == "virasoro") {
    if (!m.euler) {
      na = true;
      res.note = "no euler data";
    } else {
      const Calibration& c = ci.closed_cal();
      res.note = "window " + std::to_string(ci.window);
      if (c.frobenius_symmetric)
        append(out, virasoro_residuals(c, ci.potential(), mm, ci.window));
      for (const Rat& l : ci.lambdas) {
        std::vector<ResidualReport> rs = flat_virasoro_residuals(
            c, ci.top_solution(), ci.vector_potentials(), mm, l, ci.window);
        tag_lambda(rs, l);
        append(out, std::move(rs));
      }
    }
  } else if (name == "open-virasoro") {
    if (!ci.open()) {
      na = true;
      res.note = "closed model";
    } else if (!m.euler) {
      na = true;
      res.note = "no euler data";
    } else {
      res.note = "window " + std::to_string(ci.window);
      append(out, open_virasoro_residuals(ci.open_cal(), ci.potential(),
                                          ci.open_potential(), mm, ci.window));
    }
  } else if (name == "commutators") {
    if (!m.euler || !m.eta || !m.frobenius()) {
      na = true;
      res.note = "needs a conformal metric model";
    } else {
      int top_idx = std::max(2 * mm - 1, mm);
      int levels = ci.window + std::max(top_idx, 1) + ci.spread + 2;
      res.note = "i_max " + std::to_string(mm) + ", levels " + std::to_string(levels);
      std::vector<VirasoroOp> ops;
      for (int k = -1; k <= top_idx; ++k)
        ops.push_back(ci.open() ? build_open_virasoro(ci.open_cal(), k, levels)
                                : build_virasoro(ci.closed_cal(), k, levels));
      append(out, commutator_residuals(ops, mm, ci.window));
    }
  } else {
    fail(Error::Kind::internal, "unknown stage '" + name + "'");
  }

  if (na) {
    res.status = "n/a";
  } else {
    res.status = "pass";
    for (const ResidualReport& r : out)
      if (!r.is_zero) res.status = "fail";
  }
  return res;
}

const std::map<std::string, std::vector<std::string>>& stage_deps() {
  static const std::map<std::string, std::vector<std::string>> deps = {
      {"wdvv", {}},
      {"units", {}},
      {"euler", {}},
      {"calibrate", {"wdvv", "units", "euler"}},
      {"hierarchy", {"calibrate"}},
      {"trr", {"hierarchy"}},
      {"virasoro", {"trr"}},
      {"open-virasoro", {"virasoro"}},
      {"commutators", {"calibrate"}},
  };
  return deps;
}

ojson jet_terms_json(const Jet& f) {
  ojson arr = ojson::array();
  const MonoTable& tb = f.table();
  for (size_t i = 0; i < tb.size(); ++i) {
    if (tb.degree(i) > f.valid_order()) continue;
    if (rat_is_zero(f.coeff_idx(i))) continue;
    std::vector<int> e(tb.num_vars());
    for (int v = 0; v < tb.num_vars(); ++v) e[v] = tb.exps(i)[v];
    arr.push_back(ojson::array({ojson(std::move(e)), rat_str(f.coeff_idx(i))}));
  }
  return arr;
}

ojson jet_matrix_json(const JetMatrix& a) {
  ojson rows = ojson::array();
  for (int i = 0; i < a.rows(); ++i) {
    ojson row = ojson::array();
    for (int j = 0; j < a.cols(); ++j) row.push_back(jet_terms_json(a.at(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

ojson qmatrix_json(const QMatrix& a) {
  ojson rows = ojson::array();
  for (int i = 0; i < a.rows(); ++i) {
    ojson row = ojson::array();
    for (int j = 0; j < a.cols(); ++j) row.push_back(rat_str(a.at(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

ojson rat_vec_json(const std::vector<Rat>& v) {
  ojson a = ojson::array();
  for (const Rat& r : v) a.push_back(rat_str(r));
  return a;
}

ojson desc_series_json(const DescSeries& s) {
  ojson arr = ojson::array();
  for (const auto& [mono, jet] : s.terms()) {
    if (dmono_degree(mono) > s.valid_deg()) continue;
    ojson vars = ojson::array();
    for (const auto& [slot, e] : mono)
      vars.push_back(ojson::array(
          {slot % s.num_coords(), slot / s.num_coords() + 1, e}));
    ojson ent = ojson::object();
    ent["vars"] = std::move(vars);
    ent["jet"] = jet_terms_json(jet);
    arr.push_back(std::move(ent));
  }
  return arr;
}

/// Sparse [coord_i, level_i, coord_j, level_j, "p/q"] rows, row-major.
ojson op_matrix_json(const VirasoroOp& op, const QMatrix& a) {
  ojson arr = ojson::array();
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      if (rat_is_zero(a.at(i, j))) continue;
      arr.push_back(ojson::array({op.slot_coord(i), op.slot_level(i),
                                  op.slot_coord(j), op.slot_level(j),
                                  rat_str(a.at(i, j))}));
    }
  return arr;
}

ojson op_vector_json(const VirasoroOp& op, const std::vector<Rat>& v) {
  ojson arr = ojson::array();
  for (int i = 0; i < (int)v.size(); ++i) {
    if (rat_is_zero(v[i])) continue;
    arr.push_back(
        ojson::array({op.slot_coord(i), op.slot_level(i), rat_str(v[i])}));
  }
  return arr;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {
      "wdvv",     "units",    "euler",         "calibrate",  "hierarchy",
      "trr",      "virasoro", "open-virasoro", "commutators"};
  return names;
}

CheckRun run_checks(const ModelFile& mf, const CheckOptions& opt) {
  for (const std::string& s : opt.stages)
    if (std::find(stage_names().begin(), stage_names().end(), s) ==
        stage_names().end())
      fail(Error::Kind::parse, "unknown stage '" + s + "'");
  std::vector<std::string> sel;
  for (const std::string& s : stage_names())
    if (opt.stages.empty() ||
        std::find(opt.stages.begin(), opt.stages.end(), s) != opt.stages.end())
      sel.push_back(s);

  StageInfra ci(mf.spec);
  settle_effective(ci, mf, opt);

  CheckRun run;
  run.model = mf.spec.id;
  run.effective = ci.eff;
  run.window = ci.window;
  run.spread = ci.spread;
  run.lambdas = ci.lambdas;

  std::map<std::string, std::string> status;
  for (const std::string& name : sel) {
    std::string blocker;
    for (const std::string& dep : stage_deps().at(name)) {
      auto it = status.find(dep);
      if (it != status.end() && (it->second == "fail" || it->second == "skip")) {
        blocker = dep;
        break;
      }
    }
    StageResult r;
    auto t0 = std::chrono::steady_clock::now();
    if (!blocker.empty()) {
      r.stage = name;
      r.status = "skip";
      r.note = "prerequisite '" + blocker + "' did not pass";
    } else {
      r = run_stage(name, ci);
    }
    r.ms = std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
               .count();
    status[name] = r.status;
    if (r.status == "fail") run.ok = false;
    run.stages.push_back(std::move(r));
  }
  return run;
}

std::string report_json(const CheckRun& run) {
  ojson doc = ojson::object();
  doc["model"] = run.model;
  ojson eff = ojson::object();
  eff["jet_order"] = run.effective.depths.jet_order;
  eff["D"] = run.effective.depths.calib_depth;
  eff["P_max"] = run.effective.depths.level_cap;
  eff["G_max"] = run.effective.depths.deg_cap;
  eff["m_max"] = run.effective.depths.m_max;
  eff["window"] = run.window;
  eff["spread"] = run.spread;
  eff["lambdas"] = rat_vec_json(run.lambdas);
  doc["effective"] = std::move(eff);
  ojson stages = ojson::array();
  for (const StageResult& s : run.stages) {
    ojson st = ojson::object();
    st["stage"] = s.stage;
    st["status"] = s.status;
    if (!s.note.empty()) st["note"] = s.note;
    ojson checks = ojson::array();
    for (const ResidualReport& r : s.checks) {
      ojson c = ojson::object();
      c["name"] = r.name;
      c["ok"] = r.is_zero;
      c["valid_order"] = r.valid_order;
      c["valid_deg"] = r.valid_deg;
      if (!r.is_zero) {
        c["location"] = r.location;
        c["value"] = rat_str(r.value);
      }
      checks.push_back(std::move(c));
    }
    st["checks"] = std::move(checks);
    stages.push_back(std::move(st));
  }
  doc["stages"] = std::move(stages);
  doc["ok"] = run.ok;
  return doc.dump(2) + "\n";
}

std::string report_text(const CheckRun& run) {
  std::string out = "model " + run.model + "\n";
  for (const StageResult& s : run.stages) {
    int failed = 0;
    for (const ResidualReport& r : s.checks)
      if (!r.is_zero) ++failed;
    std::string status = s.status == "fail" ? "FAIL" : s.status;
    out += "[" + status + "] " + s.stage + " (" +
           std::to_string(s.checks.size()) + " checks";
    if (failed > 0) out += ", " + std::to_string(failed) + " failed";
    out += ")";
    if (!s.note.empty()) out += "  " + s.note;
    out += "\n";
    for (const ResidualReport& r : s.checks)
      if (!r.is_zero)
        out += "       " + r.name + " at " + r.location + " = " +
               rat_str(r.value) + "\n";
  }
  out += run.ok ? "result: PASS\n" : "result: FAIL\n";
  return out;
}

std::string dump_object(const ModelFile& mf, const std::string& object, int m) {
  StageInfra ci(mf.spec);
  settle_effective(ci, mf, CheckOptions{});

  if (object == "potential") return serialize_model_file(mf.spec, mf.params);

  if (object == "calibration") {
    const Calibration& c = ci.closed_cal();
    ojson doc = ojson::object();
    doc["object"] = "calibration";
    doc["model"] = mf.spec.id;
    doc["depth"] = c.depth;
    if (!c.mu.empty()) doc["mu"] = rat_vec_json(c.mu);
    ojson rmats = ojson::array();
    for (const QMatrix& rn : c.r) rmats.push_back(qmatrix_json(rn));
    doc["r"] = std::move(rmats);
    ojson up = ojson::array(), lo = ojson::array();
    for (int d = 0; d <= c.depth; ++d) {
      up.push_back(jet_matrix_json(c.upper_at(d)));
      lo.push_back(jet_matrix_json(c.lower_at(d)));
    }
    doc["upper"] = std::move(up);
    doc["lower"] = std::move(lo);
    return doc.dump(2) + "\n";
  }

  if (object == "vtop") {
    const TopSolution& top = ci.top_solution();
    ojson doc = ojson::object();
    doc["object"] = "vtop";
    doc["model"] = mf.spec.id;
    doc["P_max"] = top.p_max;
    doc["G_max"] = top.g_max;
    ojson v = ojson::array();
    for (const DescSeries& s : top.v) v.push_back(desc_series_json(s));
    doc["v"] = std::move(v);
    return doc.dump(2) + "\n";
  }

  if (object == "operator") {
    int levels = ci.window + std::max(m, 0) + 2;
    VirasoroOp closed = build_virasoro(ci.closed_cal(), m, levels);
    VirasoroOp op = ci.open() ? build_open_virasoro(ci.open_cal(), m, levels)
                              : closed;
    ojson doc = ojson::object();
    doc["object"] = "operator";
    doc["model"] = mf.spec.id;
    doc["m"] = m;
    doc["levels"] = levels;
    doc["tt"] = op_matrix_json(op, op.tt);
    doc["td"] = op_matrix_json(op, op.td);
    doc["dd"] = op_matrix_json(op, op.dd);
    doc["lt"] = op_vector_json(op, op.lt);
    doc["ld"] = op_vector_json(op, op.ld);
    doc["const"] = rat_str(closed.c0);
    if (ci.open()) doc["const_o"] = rat_str(op.c0 - closed.c0);
    return doc.dump(2) + "\n";
  }

  fail(Error::Kind::parse, "unknown dump object '" + object +
                               "' (potential, calibration, vtop, operator)");
}

}  // namespace frobjet
