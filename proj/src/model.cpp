#include "frobjet/model.hpp"

#include <algorithm>
#include <sstream>

namespace frobjet {

namespace {

std::string mono_str(const std::vector<int>& exps) {
  std::ostringstream os;
  bool any = false;
  for (size_t v = 0; v < exps.size(); ++v) {
    if (!exps[v]) continue;
    if (any) os << "*";
    any = true;
    os << "x" << v;
    if (exps[v] > 1) os << "^" << exps[v];
  }
  if (!any) os << "1";
  return os.str();
}

Jet d2(const Jet& f, int a, int b) { return jet_diff(jet_diff(f, a), b); }
Jet d3(const Jet& f, int a, int b, int c) { return jet_diff(d2(f, a, b), c); }

/// Zero out every stored coefficient of total degree < lo.
Jet drop_below(Jet j, int lo) {
  const MonoTable& t = j.table();
  for (size_t i = 0; i < t.size() && t.degree(i) < lo; ++i) j.coeff_idx(i) = Rat(0);
  return j;
}

}  // namespace

QMatrix ModelSpec::eta_inv() const {
  if (!eta) fail(Error::Kind::dimension, "model '" + id + "' has no metric");
  return eta->inverse();
}

std::vector<Rat> ModelSpec::charges() const {
  if (!euler) fail(Error::Kind::dimension, "model '" + id + "' has no euler data");
  std::vector<Rat> q = euler->q;
  if (open_ext) q.push_back((Rat(1) + euler->delta) / 2);
  return q;
}

std::vector<Rat> ModelSpec::translations() const {
  if (!euler) fail(Error::Kind::dimension, "model '" + id + "' has no euler data");
  std::vector<Rat> r = euler->r;
  if (open_ext) r.push_back(open_ext->r_extra);
  return r;
}

Jet ModelSpec::euler_jet(int gamma, int nv) const {
  std::vector<Rat> q = charges(), r = translations();
  Rat lin = Rat(1) - q[gamma];
  Jet e = Jet::coordinate(nv, trunc, gamma) * lin;
  e += Jet::constant(nv, trunc, lin * base[gamma] + r[gamma]);
  return e;
}

int ModelSpec::integer_q_spread() const {
  if (!euler) return 0;
  std::vector<Rat> q = charges();
  long best = 0;
  for (const Rat& qa : q)
    for (const Rat& qb : q) {
      long d;
      if (rat_integer(qa - qb, &d)) best = std::max(best, d);
    }
  return int(best);
}

void ModelSpec::validate() const {
  if (n < 1) fail(Error::Kind::dimension, "model '" + id + "': dimension must be >= 1");
  int nv = num_vars();
  if (nv > kMaxJetVars)
    fail(Error::Kind::dimension, "model '" + id + "': too many coordinates");
  if (potential.size() != 1 && int(potential.size()) != n)
    fail(Error::Kind::dimension,
         "model '" + id + "': potential must be one jet or " + std::to_string(n) + " jets");
  if (frobenius() && !eta)
    fail(Error::Kind::dimension, "model '" + id + "': scalar potential requires a metric");
  if (int(base.size()) != nv)
    fail(Error::Kind::dimension, "model '" + id + "': base point has wrong length");
  for (const Jet& f : potential) {
    if (f.num_vars() != n || f.trunc() != trunc)
      fail(Error::Kind::dimension, "model '" + id + "': potential jet shape mismatch");
  }
  if (eta) {
    if (eta->rows() != n || eta->cols() != n)
      fail(Error::Kind::dimension, "model '" + id + "': metric shape mismatch");
    if (*eta != eta->transpose())
      fail(Error::Kind::gauge, "model '" + id + "': metric is not symmetric");
    eta->inverse();  // throws when singular
  }
  if (euler) {
    if (int(euler->q.size()) != n || int(euler->r.size()) != n)
      fail(Error::Kind::dimension, "model '" + id + "': euler data has wrong length");
    if (!rat_is_zero(euler->q[0]))
      fail(Error::Kind::gauge, "model '" + id + "': unit charge q^1 must vanish");
  }
  if (open_ext) {
    if (!frobenius())
      fail(Error::Kind::dimension, "model '" + id + "': open data requires a scalar potential");
    if (open_ext->fo.num_vars() != n + 1 || open_ext->fo.trunc() != trunc)
      fail(Error::Kind::dimension, "model '" + id + "': open potential jet shape mismatch");
  }
}

ResidualReport report_from(const std::string& name, const Jet& residual) {
  ResidualReport r;
  r.name = name;
  r.valid_order = residual.valid_order();
  if (auto t = residual.first_nonzero()) {
    r.is_zero = false;
    r.location = mono_str(t->exps);
    r.value = t->coeff;
  }
  return r;
}

ResidualReport report_from(const std::string& name, const JetMatrix& residual) {
  ResidualReport r;
  r.name = name;
  r.valid_order = residual.valid_order();
  if (auto t = residual.first_nonzero()) {
    r.is_zero = false;
    r.location = "entry(" + std::to_string(t->row) + "," + std::to_string(t->col) + ") " +
                 mono_str(t->term.exps);
    r.value = t->term.coeff;
  }
  return r;
}

ResidualReport merge_reports(const std::string& name, const std::vector<ResidualReport>& parts) {
  ResidualReport r;
  r.name = name;
  r.valid_order = parts.empty() ? -1 : parts.front().valid_order;
  for (const ResidualReport& p : parts) {
    r.valid_order = std::min(r.valid_order, p.valid_order);
    r.valid_deg = (r.valid_deg < 0) ? p.valid_deg : std::min(r.valid_deg, p.valid_deg);
    if (r.is_zero && !p.is_zero) {
      r.is_zero = false;
      r.location = p.name + ": " + p.location;
      r.value = p.value;
    }
  }
  return r;
}

std::vector<JetMatrix> structure_constants(const ModelSpec& m) {
  std::vector<JetMatrix> c(m.n);
  if (m.frobenius()) {
    const Jet& f = m.potential[0];
    QMatrix einv = m.eta_inv();
    for (int g = 0; g < m.n; ++g) {
      JetMatrix lowered(m.n, m.n, m.n, m.trunc);
      for (int a = 0; a < m.n; ++a)
        for (int b = 0; b < m.n; ++b) lowered.at(a, b) = d3(f, a, g, b);
      c[g] = einv * lowered;
    }
  } else {
    for (int g = 0; g < m.n; ++g) {
      c[g] = JetMatrix(m.n, m.n, m.n, m.trunc);
      for (int a = 0; a < m.n; ++a)
        for (int b = 0; b < m.n; ++b) c[g].at(a, b) = d2(m.potential[a], g, b);
    }
  }
  return c;
}

std::vector<ResidualReport> wdvv_residual(const ModelSpec& m) {
  std::vector<ResidualReport> out;
  auto tag = [](std::initializer_list<int> idx) {
    std::string s = "(";
    bool first = true;
    for (int i : idx) {
      if (!first) s += ",";
      first = false;
      s += std::to_string(i + 1);
    }
    return s + ")";
  };
  if (m.frobenius()) {
    const Jet& f = m.potential[0];
    QMatrix einv = m.eta_inv();
    // Third-derivative matrices H_a with (H_a)_{bc} = F_{abc}, raised once.
    std::vector<JetMatrix> h(m.n), hr(m.n);
    for (int a = 0; a < m.n; ++a) {
      h[a] = JetMatrix(m.n, m.n, m.n, m.trunc);
      for (int b = 0; b < m.n; ++b)
        for (int c = 0; c < m.n; ++c) h[a].at(b, c) = d3(f, a, b, c);
      hr[a] = h[a] * einv;
    }
    for (int a = 0; a < m.n; ++a)
      for (int d = a + 1; d < m.n; ++d)
        for (int b = 0; b < m.n; ++b)
          for (int c = b; c < m.n; ++c) {
            Jet res = Jet::zero(m.n, m.trunc);
            for (int mu = 0; mu < m.n; ++mu)
              res += hr[a].at(b, mu) * h[d].at(mu, c) - hr[d].at(b, mu) * h[a].at(mu, c);
            out.push_back(report_from("wdvv" + tag({a, b, c, d}), res));
          }
  } else {
    std::vector<JetMatrix> c = structure_constants(m);
    for (int a = 0; a < m.n; ++a)
      for (int b = 0; b < m.n; ++b)
        for (int g = b + 1; g < m.n; ++g)
          for (int d = 0; d < m.n; ++d) {
            Jet res = Jet::zero(m.n, m.trunc);
            for (int mu = 0; mu < m.n; ++mu)
              res += c[b].at(a, mu) * c[g].at(mu, d) - c[g].at(a, mu) * c[b].at(mu, d);
            out.push_back(report_from("assoc" + tag({a, b, g, d}), res));
          }
  }
  return out;
}

std::vector<ResidualReport> open_wdvv_residual(const ModelSpec& m) {
  if (!m.open_ext) fail(Error::Kind::dimension, "model '" + m.id + "' has no open potential");
  int nv = m.n + 1, ns = m.n;
  std::vector<int> idmap(m.n);
  for (int i = 0; i < m.n; ++i) idmap[i] = i;
  Jet f = jet_lift(m.potential[0], nv, m.trunc, idmap);
  const Jet& fo = m.open_ext->fo;
  QMatrix einv = m.eta_inv();

  // fo2[a][b] = second derivatives of the open potential, a,b including s.
  std::vector<std::vector<Jet>> fo2(nv, std::vector<Jet>(nv));
  for (int a = 0; a < nv; ++a)
    for (int b = a; b < nv; ++b) fo2[a][b] = fo2[b][a] = d2(fo, a, b);

  // raised[a][b][nu] = F_{ab mu} eta^{mu nu}.
  std::vector<ResidualReport> out;
  auto raised = [&](int a, int b, int nu) {
    Jet r = Jet::zero(nv, m.trunc);
    for (int mu = 0; mu < m.n; ++mu) {
      const Rat& w = einv.at(mu, nu);
      if (rat_is_zero(w)) continue;
      r += d3(f, a, b, mu) * w;
    }
    return r;
  };
  auto lhs_a = [&](int a, int b, int g) {
    Jet r = fo2[a][b] * fo2[ns][g];
    for (int nu = 0; nu < m.n; ++nu) r += raised(a, b, nu) * fo2[nu][g];
    return r;
  };
  for (int a = 0; a < m.n; ++a)
    for (int g = a + 1; g < m.n; ++g)
      for (int b = 0; b < m.n; ++b) {
        Jet res = lhs_a(a, b, g) - lhs_a(g, b, a);
        out.push_back(report_from(
            "open-wdvv(" + std::to_string(a + 1) + "," + std::to_string(b + 1) + "," +
                std::to_string(g + 1) + ")",
            res));
      }
  for (int a = 0; a < m.n; ++a)
    for (int b = a; b < m.n; ++b) {
      Jet res = fo2[a][b] * fo2[ns][ns] - fo2[ns][b] * fo2[ns][a];
      for (int nu = 0; nu < m.n; ++nu) res += raised(a, b, nu) * fo2[nu][ns];
      out.push_back(report_from(
          "open-wdvv-s(" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")", res));
    }
  return out;
}

ResidualReport unit_checks(const ModelSpec& m) {
  std::vector<ResidualReport> parts;
  if (m.frobenius()) {
    const Jet& f = m.potential[0];
    for (int a = 0; a < m.n; ++a)
      for (int b = a; b < m.n; ++b) {
        Jet res = d3(f, 0, a, b) - Jet::constant(m.n, m.trunc, m.eta->at(a, b));
        parts.push_back(report_from(
            "unit(" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")", res));
      }
    if (m.open_ext) {
      const Jet& fo = m.open_ext->fo;
      for (int a = 0; a < m.n; ++a)
        parts.push_back(report_from("open-unit(" + std::to_string(a + 1) + ")",
                                    d2(fo, 0, a)));
      Jet res = d2(fo, 0, m.n) - Jet::constant(m.n + 1, m.trunc, Rat(1));
      parts.push_back(report_from("open-unit(s)", res));
    }
  } else {
    for (int a = 0; a < m.n; ++a)
      for (int b = 0; b < m.n; ++b) {
        Jet res = d2(m.potential[a], 0, b);
        if (a == b) res -= Jet::constant(m.n, m.trunc, Rat(1));
        parts.push_back(report_from(
            "unit(" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")", res));
      }
  }
  return merge_reports("unit", parts);
}

ResidualReport euler_residual(const ModelSpec& m, EulerConstants* out) {
  if (!m.euler) fail(Error::Kind::dimension, "model '" + m.id + "' has no euler data");
  std::vector<ResidualReport> parts;
  if (m.frobenius()) {
    const Jet& f = m.potential[0];
    Jet lef = Jet::zero(m.n, m.trunc);
    for (int g = 0; g < m.n; ++g) lef += m.euler_jet(g, m.n) * jet_diff(f, g);
    lef -= f * (Rat(3) - m.euler->delta);
    if (out) {
      out->a = QMatrix(m.n, m.n);
      out->b.assign(m.n, Rat(0));
      std::vector<int> e(m.n, 0);
      out->c = lef.coeff(e);
      for (int i = 0; i < m.n; ++i) {
        e.assign(m.n, 0);
        e[i] = 1;
        out->b[i] = lef.coeff(e);
        for (int j = i; j < m.n; ++j) {
          e.assign(m.n, 0);
          e[i] += 1;
          e[j] += 1;
          Rat q = lef.coeff(e);
          if (i == j) {
            out->a.at(i, i) = q;
          } else {
            out->a.at(i, j) = q / 2;
            out->a.at(j, i) = q / 2;
          }
          e[i] = 0;
          e[j] = 0;
        }
      }
    }
    parts.push_back(report_from("euler-closed", drop_below(lef, 3)));
    if (m.open_ext) {
      const Jet& fo = m.open_ext->fo;
      int nv = m.n + 1;
      Jet lefo = Jet::zero(nv, m.trunc);
      for (int g = 0; g < nv; ++g) lefo += m.euler_jet(g, nv) * jet_diff(fo, g);
      lefo -= fo * ((Rat(3) - m.euler->delta) / 2);
      if (out) {
        out->open_lin.assign(nv, Rat(0));
        std::vector<int> e(nv, 0);
        out->open_const = lefo.coeff(e);
        for (int i = 0; i < nv; ++i) {
          e.assign(nv, 0);
          e[i] = 1;
          out->open_lin[i] = lefo.coeff(e);
        }
      }
      parts.push_back(report_from("euler-open", drop_below(lefo, 2)));
    }
  } else {
    std::vector<Rat> q = m.charges();
    if (out) {
      out->a = QMatrix(m.n, m.n);
      out->b.assign(m.n, Rat(0));
    }
    for (int a = 0; a < m.n; ++a) {
      Jet lef = Jet::zero(m.n, m.trunc);
      for (int g = 0; g < m.n; ++g) lef += m.euler_jet(g, m.n) * jet_diff(m.potential[a], g);
      lef -= m.potential[a] * (Rat(2) - q[a]);
      if (out) {
        std::vector<int> e(m.n, 0);
        out->b[a] = lef.coeff(e);
        for (int j = 0; j < m.n; ++j) {
          e.assign(m.n, 0);
          e[j] = 1;
          out->a.at(a, j) = lef.coeff(e);
        }
      }
      parts.push_back(report_from("euler(" + std::to_string(a + 1) + ")", drop_below(lef, 2)));
    }
  }
  return merge_reports("euler", parts);
}

ModelSpec to_flat_f(const ModelSpec& m) {
  if (!m.frobenius())
    fail(Error::Kind::dimension, "model '" + m.id + "' is already in vector-potential form");
  ModelSpec r;
  r.id = m.id + "#flat";
  r.n = m.n;
  r.base = m.base;
  r.euler = m.euler;
  r.trunc = m.trunc;
  QMatrix einv = m.eta_inv();
  r.potential.resize(m.n);
  for (int a = 0; a < m.n; ++a) {
    Jet fa = Jet::zero(m.n, m.trunc);
    for (int mu = 0; mu < m.n; ++mu) {
      const Rat& w = einv.at(a, mu);
      if (rat_is_zero(w)) continue;
      fa += jet_diff(m.potential[0], mu) * w;
    }
    r.potential[a] = fa;
  }
  return r;
}

ModelSpec closed_slice(ModelSpec m) {
  if (m.open_ext) {
    m.open_ext.reset();
    m.base.resize(size_t(m.n));
    m.id += "#closed";
  }
  return m;
}

ModelSpec open_to_extension(const ModelSpec& m) {
  if (!m.open_ext) fail(Error::Kind::dimension, "model '" + m.id + "' has no open potential");
  ResidualReport unit = unit_checks(m);
  if (!unit.is_zero)
    fail(Error::Kind::composition,
         "model '" + m.id + "': unit residual nonzero at " + unit.location);
  for (const ResidualReport& r : open_wdvv_residual(m))
    if (!r.is_zero)
      fail(Error::Kind::composition,
           "model '" + m.id + "': " + r.name + " residual nonzero at " + r.location);

  ModelSpec flat = to_flat_f(m);
  ModelSpec r;
  r.id = m.id + "#ext";
  r.n = m.n + 1;
  r.base = m.base;
  r.trunc = m.trunc;
  if (m.euler) {
    EulerData e;
    e.q = m.charges();
    e.r = m.translations();
    e.delta = m.euler->delta;
    r.euler = e;
  }
  std::vector<int> idmap(m.n);
  for (int i = 0; i < m.n; ++i) idmap[i] = i;
  r.potential.resize(r.n);
  for (int a = 0; a < m.n; ++a)
    r.potential[a] = jet_lift(flat.potential[a], r.n, m.trunc, idmap);
  r.potential[m.n] = m.open_ext->fo;
  return r;
}

ModelSpec canonical_open_solution(const ModelSpec& m, const Jet& u) {
  if (!m.frobenius())
    fail(Error::Kind::dimension, "canonical solutions require a scalar potential");
  if (u.num_vars() != m.n || u.trunc() != m.trunc)
    fail(Error::Kind::dimension, "canonical coordinate jet shape mismatch");
  Jet du1 = jet_diff(u, 0) - Jet::constant(m.n, m.trunc, Rat(1));
  if (!du1.is_zero_up_to_valid())
    fail(Error::Kind::composition,
         "canonical coordinate: du/dt^1 - 1 nonzero at " +
             mono_str(du1.first_nonzero()->exps));
  std::vector<JetMatrix> c = structure_constants(m);
  std::vector<Jet> du(m.n);
  for (int a = 0; a < m.n; ++a) du[a] = jet_diff(u, a);
  for (int a = 0; a < m.n; ++a)
    for (int b = a; b < m.n; ++b) {
      Jet res = du[a] * du[b];
      for (int nu = 0; nu < m.n; ++nu) res -= c[b].at(nu, a) * du[nu];
      if (!res.is_zero_up_to_valid())
        fail(Error::Kind::composition,
             "canonical coordinate equation fails at (" + std::to_string(a + 1) + "," +
                 std::to_string(b + 1) + ") " + mono_str(res.first_nonzero()->exps) +
                 " = " + rat_str(res.first_nonzero()->coeff));
    }
  ModelSpec r = m;
  r.id = m.id + "#canonical";
  std::vector<int> idmap(m.n);
  for (int i = 0; i < m.n; ++i) idmap[i] = i;
  Jet ulift = jet_lift(u, m.n + 1, m.trunc, idmap);
  OpenExt oe;
  oe.fo = ulift * Jet::coordinate(m.n + 1, m.trunc, m.n);
  oe.r_extra = Rat(0);
  r.open_ext = oe;
  r.base.push_back(Rat(0));
  return r;
}

}  // namespace frobjet
