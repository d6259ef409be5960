#include "frobjet/hierarchy.hpp"

#include <map>
#include <random>

namespace frobjet {

namespace {

std::string mono_str(const std::vector<int>& exps) {
  std::string s;
  for (size_t i = 0; i < exps.size(); ++i) {
    if (!exps[i]) continue;
    if (!s.empty()) s += "*";
    s += "x" + std::to_string(i);
    if (exps[i] > 1) s += "^" + std::to_string(exps[i]);
  }
  return s.empty() ? "1" : s;
}

Jet coordinate_value(const ModelSpec& m, int g) {
  return Jet::coordinate(m.num_vars(), m.trunc, g) + Jet::constant(m.num_vars(), m.trunc, m.base[g]);
}

/// Zero the coefficients of total degree <= max_deg.
Jet drop_low(Jet j, int max_deg) {
  const MonoTable& tab = j.table();
  for (size_t i = 0; i < tab.size() && tab.degree(i) <= max_deg; ++i) j.coeff_idx(i) = Rat(0);
  return j;
}

Rat factorial(int n) {
  Rat f(1);
  for (int i = 2; i <= n; ++i) f *= Rat(i);
  return f;
}

}  // namespace

ResidualReport report_from(const std::string& name, const DescSeries& residual) {
  ResidualReport r;
  r.name = name;
  r.valid_deg = residual.valid_deg();
  r.valid_order = residual.trunc();
  for (const auto& [m, j] : residual.terms()) {
    if (dmono_degree(m) > residual.valid_deg()) continue;
    r.valid_order = std::min(r.valid_order, j.valid_order());
  }
  if (auto t = residual.first_nonzero()) {
    r.is_zero = false;
    r.location = "[" + dmono_str(t->mono, residual.num_coords()) + "] " + mono_str(t->term.exps);
    r.value = t->term.coeff;
  }
  return r;
}

DescSeries tilde_var(int nc, int level_cap, int deg_cap, int trunc, const std::vector<Rat>& base,
                     int coord, int level) {
  if (level == 0)
    return DescSeries::from_jet(
        Jet::coordinate(nc, trunc, coord) + Jet::constant(nc, trunc, base[coord]), level_cap,
        deg_cap);
  DescSeries r = DescSeries::level_var(nc, level_cap, deg_cap, trunc, coord, level);
  if (coord == 0 && level == 1)
    r -= DescSeries::from_jet(Jet::constant(nc, trunc, Rat(1)), level_cap, deg_cap);
  return r;
}

DescSeries tilde_mul(const DescSeries& s, const std::vector<Rat>& base, int coord, int level) {
  if (level == 0)
    return s.jet_mul(Jet::coordinate(s.num_coords(), s.trunc(), coord) +
                     Jet::constant(s.num_coords(), s.trunc(), base[coord]));
  DescSeries r = s.var_mul(coord, level);
  if (coord == 0 && level == 1) r -= s;
  return r;
}

TopSolution topological_solution(const Calibration& cal, int p_max, int g_max) {
  const ModelSpec& m = cal.model;
  if (p_max < 1 || g_max < 0)
    fail(Error::Kind::dimension, "descendent window needs p_max >= 1 and g_max >= 0");
  if (cal.depth < p_max + g_max)
    fail(Error::Kind::depth, "calibration depth " + std::to_string(cal.depth) +
                                 " too small for window p_max + g_max = " +
                                 std::to_string(p_max + g_max));
  int n = m.n;
  std::vector<DescSeries> v;
  for (int a = 0; a < n; ++a) {
    DescSeries s = DescSeries::from_jet(coordinate_value(m, a), p_max, g_max);
    s.restrict_deg(0);
    v.push_back(std::move(s));
  }
  for (int iter = 0; iter < g_max; ++iter) {
    SubstContext ctx(v, m.base);
    std::vector<DescSeries> nv;
    for (int a = 0; a < n; ++a)
      nv.push_back(DescSeries::from_jet(coordinate_value(m, a), p_max, g_max));
    for (int d = 0; d + 1 <= p_max; ++d) {
      DescMat w = ctx.substitute(cal.lower_at(d));
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) nv[a] += w.at(a, b).var_mul(b, d + 1);
    }
    v = std::move(nv);
  }
  SubstContext ctx(v, m.base);
  return TopSolution{std::move(v), p_max, g_max, std::move(ctx)};
}

std::vector<ResidualReport> flow_residuals(const Calibration& cal, const TopSolution& top) {
  const ModelSpec& m = cal.model;
  std::vector<ResidualReport> out;
  for (int d = 0; d <= top.p_max; ++d) {
    DescMat w = top.ctx.substitute(cal.lower_at(d));
    std::vector<ResidualReport> parts;
    for (int a = 0; a < m.n; ++a)
      for (int b = 0; b < m.n; ++b) {
        DescSeries res = top.v[a].diff(b, d) - w.at(a, b).diff(0, 0);
        parts.push_back(report_from("a=" + std::to_string(a) + ",b=" + std::to_string(b), res));
      }
    out.push_back(merge_reports("principal_flow(d=" + std::to_string(d) + ")", parts));
  }
  return out;
}

ResidualReport string_residual(const Calibration& cal, const TopSolution& top) {
  const ModelSpec& m = cal.model;
  std::vector<ResidualReport> parts;
  for (int a = 0; a < m.n; ++a) {
    DescSeries res(m.n, top.p_max, top.g_max, m.trunc);
    for (int d = 0; d + 1 <= top.p_max; ++d)
      for (int g = 0; g < m.n; ++g) res += tilde_mul(top.v[a].diff(g, d), m.base, g, d + 1);
    if (a == 0)
      res += DescSeries::from_jet(Jet::constant(m.n, m.trunc, Rat(1)), top.p_max, top.g_max);
    parts.push_back(report_from("component " + std::to_string(a), res));
  }
  return merge_reports("string_v", parts);
}

ResidualReport dilaton_residual(const Calibration& cal, const TopSolution& top) {
  const ModelSpec& m = cal.model;
  std::vector<ResidualReport> parts;
  for (int a = 0; a < m.n; ++a) {
    DescSeries res(m.n, top.p_max, top.g_max, m.trunc);
    for (int d = 0; d <= top.p_max; ++d)
      for (int g = 0; g < m.n; ++g) res += tilde_mul(top.v[a].diff(g, d), m.base, g, d);
    parts.push_back(report_from("component " + std::to_string(a), res));
  }
  return merge_reports("dilaton_v", parts);
}

JetMatrix omega_pq(const Calibration& cal, int p, int q) {
  if (p < -1 || q < -1) fail(Error::Kind::dimension, "omega_pq indices must be >= -1");
  int n = cal.model.n, nv = cal.model.num_vars(), T = cal.model.trunc;
  if (q == -1) return p == 0 ? JetMatrix::identity(n, nv, T) : JetMatrix(n, n, nv, T);
  if (p == -1) return q == 0 ? JetMatrix::identity(n, nv, T) : JetMatrix(n, n, nv, T);
  JetMatrix s(n, n, nv, T);
  for (int i = 0; i <= q; ++i) {
    JetMatrix term = cal.upper_at(p + q - i) * cal.lower_at(i - 1);
    if ((q - i) % 2)
      s -= term;
    else
      s += term;
  }
  return s;
}

JetMatrix omega_pq_alt(const Calibration& cal, int p, int q) {
  if (p < -1 || q < -1) fail(Error::Kind::dimension, "omega_pq indices must be >= -1");
  int n = cal.model.n, nv = cal.model.num_vars(), T = cal.model.trunc;
  if (q == -1) return p == 0 ? JetMatrix::identity(n, nv, T) : JetMatrix(n, n, nv, T);
  if (p == -1) return q == 0 ? JetMatrix::identity(n, nv, T) : JetMatrix(n, n, nv, T);
  JetMatrix s(n, n, nv, T);
  for (int i = 0; i <= p; ++i) {
    JetMatrix term = cal.upper_at(i - 1) * cal.lower_at(p + q - i);
    if ((p - i) % 2)
      s -= term;
    else
      s += term;
  }
  return s;
}

std::vector<ResidualReport> omega_pq_residuals(const Calibration& cal, int p_max, int q_max) {
  const ModelSpec& m = cal.model;
  if (p_max + q_max > cal.depth)
    fail(Error::Kind::depth, "omega_pq window exceeds calibration depth");
  std::vector<std::vector<JetMatrix>> om(p_max + 1);
  for (int p = 0; p <= p_max; ++p)
    for (int q = 0; q <= q_max; ++q) om[p].push_back(omega_pq(cal, p, q));
  std::vector<ResidualReport> out;
  for (int p = 0; p <= p_max; ++p)
    for (int q = 0; q <= q_max; ++q) {
      out.push_back(
          report_from("omega_forms(p=" + std::to_string(p) + ",q=" + std::to_string(q) + ")",
                      om[p][q] - omega_pq_alt(cal, p, q)));
      std::vector<ResidualReport> rec;
      for (int g = 0; g < m.n; ++g) {
        JetMatrix d = om[p][q].diff(g);
        rec.push_back(report_from("lowered, direction x" + std::to_string(g),
                                  d - cal.upper_at(p - 1) * cal.lower_at(q).diff(g)));
        rec.push_back(report_from("raised, direction x" + std::to_string(g),
                                  d - cal.upper_at(p).diff(g) * cal.lower_at(q - 1)));
      }
      out.push_back(merge_reports(
          "omega_recursion(p=" + std::to_string(p) + ",q=" + std::to_string(q) + ")", rec));
      if (p + q >= 1) {
        JetMatrix unit = om[p][q].diff(0) - omega_pq(cal, p - 1, q) - omega_pq(cal, p, q - 1);
        out.push_back(report_from(
            "omega_unit(p=" + std::to_string(p) + ",q=" + std::to_string(q) + ")", unit));
      }
    }
  return out;
}

DescSeries descendent_potential(const Calibration& cal, const TopSolution& top) {
  const ModelSpec& m = cal.model;
  if (!cal.frobenius_symmetric)
    fail(Error::Kind::gauge,
         "model '" + m.id + "': descendent potential needs a metric-compatible calibration");
  int P = top.p_max, G = top.g_max, n = m.n, T = m.trunc;
  if (cal.depth < 2 * P)
    fail(Error::Kind::depth, "descendent potential with p_max " + std::to_string(P) +
                                 " needs calibration depth >= " + std::to_string(2 * P));
  std::vector<DescMat> w;  // w[k+1] = lower_k substituted at v
  for (int k = -1; k <= 2 * P; ++k) w.push_back(top.ctx.substitute(cal.lower_at(k)));
  // a(k, p)[mu] = sum_b (lower_k)^mu_b|_{t=v} t~^b_p, built on demand
  std::map<std::pair<int, int>, std::vector<DescSeries>> cache;
  auto aseries = [&](int k, int p) -> const std::vector<DescSeries>& {
    auto it = cache.find({k, p});
    if (it != cache.end()) return it->second;
    std::vector<DescSeries> col;
    for (int mu = 0; mu < n; ++mu) {
      DescSeries s(n, P, G, T);
      for (int b = 0; b < n; ++b) s += tilde_mul(w[size_t(k + 1)].at(mu, b), m.base, b, p);
      col.push_back(std::move(s));
    }
    return cache.emplace(std::make_pair(k, p), std::move(col)).first->second;
  };
  DescSeries f(n, P, G, T);
  for (int p = 0; p <= P; ++p)
    for (int q = 0; q <= P; ++q)
      for (int i = 0; i <= q; ++i) {
        Rat sign = ((q - i) % 2) ? Rat(-1, 2) : Rat(1, 2);
        const std::vector<DescSeries>& left = aseries(p + q - i, p);
        const std::vector<DescSeries>& right = aseries(i - 1, q);
        for (int mu = 0; mu < n; ++mu)
          for (int nu = 0; nu < n; ++nu) {
            const Rat& e = m.eta->at(mu, nu);
            if (e == 0) continue;
            DescSeries term = left[mu] * right[nu];
            term *= sign * e;
            f += term;
          }
      }
  return f;
}

ResidualReport potential_string_residual(const Calibration& cal, const TopSolution& top,
                                         const DescSeries& f) {
  const ModelSpec& m = cal.model;
  if (!m.eta) fail(Error::Kind::gauge, "string residual of the scalar potential needs a metric");
  Jet quad = Jet::zero(m.n, m.trunc);
  for (int a = 0; a < m.n; ++a)
    for (int b = 0; b < m.n; ++b) {
      const Rat& e = m.eta->at(a, b);
      if (e == 0) continue;
      quad += coordinate_value(m, a) * coordinate_value(m, b) * (e / 2);
    }
  DescSeries res = DescSeries::from_jet(quad, top.p_max, top.g_max);
  for (int p = 0; p + 1 <= top.p_max; ++p)
    for (int a = 0; a < m.n; ++a) res += tilde_mul(f.diff(a, p), m.base, a, p + 1);
  return report_from("potential_string", res);
}

ResidualReport potential_base_residual(const Calibration& cal, const DescSeries& f) {
  const ModelSpec& m = cal.model;
  if (!m.frobenius())
    fail(Error::Kind::dimension, "base window of the scalar potential needs a scalar model");
  Jet diff = drop_low(f.coeff0() - m.potential[0], 2);
  return report_from("potential_base_window", diff);
}

std::vector<ResidualReport> trr_residuals(const Calibration& cal, const DescSeries& f, int a_max, int b_max, int c_max) {
  const ModelSpec& m = cal.model;
  int n = m.n;
  if (a_max < 1) return {};
  QMatrix einv = m.eta_inv();
  // d2[a][A][mu] = d2F / dt^a_A dt^mu_0
  std::vector<std::vector<std::vector<DescSeries>>> d2(n);
  for (int a = 0; a < n; ++a) {
    d2[a].resize(size_t(a_max));
    for (int A = 0; A < a_max; ++A) {
      DescSeries da = f.diff(a, A);
      for (int mu = 0; mu < n; ++mu) d2[a][A].push_back(da.diff(mu, 0));
    }
  }
  std::vector<ResidualReport> out;
  for (int B = 0; B <= b_max; ++B)
    for (int C = B; C <= c_max; ++C) {
      std::vector<ResidualReport> parts;
      for (int b = 0; b < n; ++b)
        for (int g = 0; g < n; ++g) {
          DescSeries t2 = f.diff(b, B).diff(g, C);
          std::vector<DescSeries> t3;
          for (int nu = 0; nu < n; ++nu) t3.push_back(t2.diff(nu, 0));
          for (int A = 0; A < a_max; ++A)
            for (int a = 0; a < n; ++a) {
              DescSeries res = t2.diff(a, A + 1);
              for (int mu = 0; mu < n; ++mu)
                for (int nu = 0; nu < n; ++nu) {
                  const Rat& e = einv.at(mu, nu);
                  if (e == 0) continue;
                  DescSeries term = d2[a][A][mu] * t3[nu];
                  term *= -e;
                  res += term;
                }
              parts.push_back(report_from("a=" + std::to_string(a) + ",A=" + std::to_string(A) +
                                              ",b=" + std::to_string(b) + ",g=" + std::to_string(g),
                                          res));
            }
        }
      out.push_back(merge_reports("trr(B=" + std::to_string(B) + ",C=" + std::to_string(C) + ")",
                                  parts));
    }
  return out;
}

std::vector<std::vector<DescSeries>> descendent_vector_potentials(const Calibration& cal,
                                                                  const TopSolution& top,
                                                                  int p_out) {
  const ModelSpec& m = cal.model;
  int P = top.p_max, G = top.g_max, n = m.n, T = m.trunc;
  if (p_out < 0) fail(Error::Kind::dimension, "p_out must be >= 0");
  if (cal.depth < p_out + P)
    fail(Error::Kind::depth, "vector potentials with p_out " + std::to_string(p_out) +
                                 " need calibration depth >= " + std::to_string(p_out + P));
  std::vector<std::vector<DescSeries>> fv(size_t(p_out) + 1);
  for (int p = 0; p <= p_out; ++p) {
    for (int a = 0; a < n; ++a) fv[p].push_back(DescSeries(n, P, G, T));
    for (int q = 0; q <= P; ++q) {
      DescMat om = top.ctx.substitute(omega_pq(cal, p, q));
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) fv[p][a] += tilde_mul(om.at(a, b), m.base, b, q);
    }
  }
  return fv;
}

DescSeries vector_potential_negative(const Calibration& cal, const TopSolution& top, int alpha,
                                     int p) {
  const ModelSpec& m = cal.model;
  if (p >= 0) fail(Error::Kind::dimension, "negative-index convention needs p < 0");
  int level = -p - 1;
  if (level > top.p_max) fail(Error::Kind::depth, "conventional row beyond the level window");
  DescSeries r = tilde_var(m.n, top.p_max, top.g_max, m.trunc, m.base, alpha, level);
  if (p % 2 == 0) r = -r;  // sign (-1)^{p+1}
  return r;
}

std::vector<ResidualReport> vector_potential_residuals(
    const Calibration& cal, const TopSolution& top,
    const std::vector<std::vector<DescSeries>>& fv) {
  const ModelSpec& m = cal.model;
  int n = m.n, p_out = int(fv.size()) - 1;
  std::vector<ResidualReport> out;
  for (int p = 0; p <= p_out; ++p) {
    std::vector<ResidualReport> parts;
    for (int q = 0; q <= top.p_max; ++q) {
      DescMat om = top.ctx.substitute(omega_pq(cal, p, q));
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          parts.push_back(report_from("a=" + std::to_string(a) + ",b=" + std::to_string(b) +
                                          ",q=" + std::to_string(q),
                                      fv[p][a].diff(b, q) - om.at(a, b)));
    }
    out.push_back(merge_reports("vector_gradient(p=" + std::to_string(p) + ")", parts));
  }
  for (int p = -1; p <= p_out; ++p) {
    std::vector<ResidualReport> parts;
    for (int a = 0; a < n; ++a) {
      DescSeries fap =
          p >= 0 ? fv[p][a] : vector_potential_negative(cal, top, a, p);
      DescSeries res =
          p >= 1 ? fv[p - 1][a] : vector_potential_negative(cal, top, a, p - 1);
      for (int q = 0; q + 1 <= top.p_max; ++q)
        for (int b = 0; b < n; ++b) res += tilde_mul(fap.diff(b, q), m.base, b, q + 1);
      parts.push_back(report_from("component " + std::to_string(a), res));
    }
    out.push_back(merge_reports("vector_string(p=" + std::to_string(p) + ")", parts));
  }
  {
    ModelSpec flat = m.frobenius() ? to_flat_f(m) : m;
    std::vector<ResidualReport> parts;
    for (int a = 0; a < n; ++a)
      parts.push_back(report_from("component " + std::to_string(a),
                                  drop_low(fv[0][a].coeff0() - flat.potential[a], 1)));
    out.push_back(merge_reports("vector_base_window", parts));
  }
  return out;
}

std::vector<ResidualReport> gradient_consistency_residuals(
    const Calibration& cal, const DescSeries& f,
    const std::vector<std::vector<DescSeries>>& fv) {
  const ModelSpec& m = cal.model;
  QMatrix einv = m.eta_inv();
  std::vector<ResidualReport> out;
  for (int p = 0; p < int(fv.size()); ++p) {
    std::vector<ResidualReport> parts;
    for (int a = 0; a < m.n; ++a) {
      DescSeries res = fv[p][a];
      for (int mu = 0; mu < m.n; ++mu) {
        const Rat& e = einv.at(a, mu);
        if (e == 0) continue;
        DescSeries term = f.diff(mu, p);
        term *= -e;
        res += term;
      }
      parts.push_back(report_from("component " + std::to_string(a), res));
    }
    out.push_back(merge_reports("gradient_consistency(p=" + std::to_string(p) + ")", parts));
  }
  return out;
}

std::vector<ResidualReport> omega_top_symmetry_residuals(const Calibration& cal,
                                                         const TopSolution& top, int samples,
                                                         unsigned seed) {
  const ModelSpec& m = cal.model;
  int n = m.n, P = top.p_max;
  int p_room = cal.depth - P;
  if (p_room < 0) fail(Error::Kind::depth, "symmetry window exceeds calibration depth");
  std::mt19937 gen(seed);
  auto draw = [&](int bound) { return int(gen() % unsigned(bound + 1)); };
  std::vector<ResidualReport> out;
  for (int i = 0; i < samples; ++i) {
    int p = draw(p_room), q = draw(P), r = draw(P), b = draw(n - 1), g = draw(n - 1);
    DescMat om_q = top.ctx.substitute(omega_pq(cal, p, q));
    DescMat om_r = top.ctx.substitute(omega_pq(cal, p, r));
    std::vector<ResidualReport> parts;
    for (int a = 0; a < n; ++a)
      parts.push_back(report_from("a=" + std::to_string(a),
                                  om_q.at(a, b).diff(g, r) - om_r.at(a, g).diff(b, q)));
    out.push_back(merge_reports("omega_symmetry(p=" + std::to_string(p) + ",b=" +
                                    std::to_string(b) + ",q=" + std::to_string(q) + ",g=" +
                                    std::to_string(g) + ",r=" + std::to_string(r) + ")",
                                parts));
  }
  return out;
}

DescSeries open_descendent_potential(const OpenCalibration& oc, const TopSolution& ext_top) {
  const ModelSpec& m = oc.ext.model;
  int nc = m.n, P = ext_top.p_max, G = ext_top.g_max, T = m.trunc;
  if (int(ext_top.v.size()) != nc)
    fail(Error::Kind::dimension, "topological solution does not match the extension model");
  DescSeries f(nc, P, G, T);
  for (int d = 0; d <= P; ++d)
    for (int a = 0; a < nc; ++a)
      f += tilde_mul(ext_top.ctx.substitute(oc.phi(a, d)), m.base, a, d);
  return f;
}

std::vector<ResidualReport> open_trr_residuals(const OpenCalibration& oc,
                                               const TopSolution& ext_top,
                                               const DescSeries& f_closed,
                                               const DescSeries& f_open) {
  const ModelSpec& m = oc.ext.model;
  int N = oc.closed_n, nc = m.n, P = ext_top.p_max, G = ext_top.g_max, T = m.trunc;
  if (f_closed.num_coords() != N || f_open.num_coords() != nc)
    fail(Error::Kind::dimension, "potentials do not match the open calibration shape");
  std::vector<int> idmap(static_cast<size_t>(N));
  for (int i = 0; i < N; ++i) idmap[i] = i;
  DescSeries fcl = f_closed.lift(nc, idmap, P, G, T);
  QMatrix einv = oc.base.model.eta_inv();
  DescSeries w = f_open.diff(nc - 1, 0);
  // derivative tables shared by all components
  std::vector<std::vector<DescSeries>> dw(nc), dy;
  for (int g = 0; g < nc; ++g)
    for (int r = 0; r <= P; ++r) dw[g].push_back(w.diff(g, r));
  dy.resize(size_t(N));
  std::vector<DescSeries> y;
  for (int n = 0; n < N; ++n) {
    y.push_back(f_open.diff(n, 0));
    for (int g = 0; g < nc; ++g)
      for (int r = 0; r <= P; ++r) dy[n].push_back(y[n].diff(g, r));
  }
  auto dyat = [&](int n, int g, int r) -> const DescSeries& { return dy[n][size_t(g) * (P + 1) + r]; };
  std::vector<ResidualReport> out;
  for (int a = 0; a < N; ++a)
    for (int p = 0; p + 1 <= P; ++p) {
      DescSeries fo_ap = f_open.diff(a, p);
      DescSeries x = f_open.diff(a, p + 1);
      DescSeries da = fcl.diff(a, p);
      std::vector<DescSeries> u;  // u[n] = sum_m d2F/dt^a_p dt^m_0 eta^{mn}
      for (int n = 0; n < N; ++n) {
        DescSeries s(nc, P, G, T);
        for (int mm = 0; mm < N; ++mm) {
          const Rat& e = einv.at(mm, n);
          if (e == 0) continue;
          DescSeries term = da.diff(mm, 0);
          term *= e;
          s += term;
        }
        u.push_back(std::move(s));
      }
      std::vector<ResidualReport> parts;
      for (int g = 0; g < nc; ++g)
        for (int r = 0; r <= P; ++r) {
          DescSeries res = x.diff(g, r) - fo_ap * dw[g][r];
          for (int n = 0; n < N; ++n) res -= u[n] * dyat(n, g, r);
          parts.push_back(
              report_from("direction(g=" + std::to_string(g) + ",r=" + std::to_string(r) + ")",
                          res));
        }
      out.push_back(merge_reports(
          "open_trr_t(a=" + std::to_string(a) + ",p=" + std::to_string(p) + ")", parts));
    }
  for (int p = 0; p + 1 <= P; ++p) {
    DescSeries x = f_open.diff(nc - 1, p + 1);
    DescSeries fsp = f_open.diff(nc - 1, p);
    std::vector<ResidualReport> parts;
    for (int g = 0; g < nc; ++g)
      for (int r = 0; r <= P; ++r)
        parts.push_back(
            report_from("direction(g=" + std::to_string(g) + ",r=" + std::to_string(r) + ")",
                        x.diff(g, r) - fsp * dw[g][r]));
    out.push_back(merge_reports("open_trr_s(p=" + std::to_string(p) + ")", parts));
  }
  return out;
}

ResidualReport open_potential_base_residual(const OpenCalibration& oc, const DescSeries& f_open) {
  const ModelSpec& m = oc.ext.model;
  Jet diff = drop_low(f_open.coeff0() - m.potential[m.n - 1], 1);
  return report_from("open_base_window", diff);
}

std::vector<ResidualReport> s_chain_residuals(const DescSeries& f, int s_coord, int n_max) {
  DescSeries w = f.diff(s_coord, 0);
  DescSeries pw = w;
  std::vector<ResidualReport> out;
  for (int n = 1; n <= n_max; ++n) {
    pw = pw * w;  // (dF/ds)^{n+1}
    DescSeries res = f.diff(s_coord, n);
    res *= factorial(n + 1);
    res -= pw;
    out.push_back(report_from("s_chain(n=" + std::to_string(n) + ")", res));
  }
  return out;
}

}  // namespace frobjet
