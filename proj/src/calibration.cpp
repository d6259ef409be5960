#include "frobjet/calibration.hpp"

#include <string>

namespace frobjet {

namespace {

std::string mono_str(const std::vector<int>& exps) {
  std::string s;
  for (size_t v = 0; v < exps.size(); ++v) {
    if (exps[v] == 0) continue;
    if (!s.empty()) s += "*";
    s += "x" + std::to_string(v);
    if (exps[v] > 1) s += "^" + std::to_string(exps[v]);
  }
  return s.empty() ? "1" : s;
}

// U1 = sum_g E^g(base) C_g(base).
QMatrix u1_matrix(const ModelSpec& m, const std::vector<JetMatrix>& cs) {
  QMatrix u1(m.n, m.n);
  const EulerData& e = *m.euler;
  for (int g = 0; g < m.n; ++g) {
    Rat eg = (Rat(1) - e.q[g]) * m.base[g] + e.r[g];
    if (rat_is_zero(eg)) continue;
    QMatrix cg = cs[g].value_at_base();
    cg *= eg;
    u1 += cg;
  }
  return u1;
}

JetMatrix q_commutator(const JetMatrix& a, const QMatrix& q) { return a * q - q * a; }

}  // namespace

const JetMatrix& Calibration::upper_at(int d) const {
  if (d < -1 || d > depth)
    fail(Error::Kind::depth,
         "calibration depth " + std::to_string(depth) + " exceeded: raised family at d=" + std::to_string(d));
  return upper[size_t(d + 1)];
}

const JetMatrix& Calibration::lower_at(int d) const {
  if (d < -1 || d > depth)
    fail(Error::Kind::depth,
         "calibration depth " + std::to_string(depth) + " exceeded: lowered family at d=" + std::to_string(d));
  return lower[size_t(d + 1)];
}

QMatrix Calibration::r_at(int n) const {
  if (n >= 1 && n <= (int)r.size()) return r[size_t(n - 1)];
  return QMatrix(model.n, model.n);
}

QMatrix Calibration::r_total() const {
  QMatrix t(model.n, model.n);
  for (const QMatrix& rn : r) t += rn;
  return t;
}

std::pair<std::vector<QMatrix>, std::vector<QMatrix>> compute_r_g(const ModelSpec& m, int depth) {
  if (!m.euler) fail(Error::Kind::composition, "model '" + m.id + "': exponent recursion needs Euler data");
  const int n = m.n;
  const std::vector<Rat>& q = m.euler->q;
  QMatrix u1t = u1_matrix(m, structure_constants(m)).transpose();
  const int spread = m.integer_q_spread();

  std::vector<QMatrix> r, g;
  for (int step = 1; step <= depth; ++step) {
    QMatrix s = (step == 1) ? u1t : g[size_t(step - 2)] * u1t;
    for (int k = 1; k < step; ++k) {
      QMatrix t = r[size_t(k - 1)].transpose() * g[size_t(step - k - 1)];
      if (k % 2 == 1)
        s -= t;
      else
        s += t;
    }
    QMatrix rn(n, n), gn(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Rat denom = Rat(step) + q[size_t(a)] - q[size_t(b)];
        if (rat_is_zero(denom))
          rn.at(b, a) = (step % 2 == 1) ? s.at(a, b) : -s.at(a, b);
        else
          gn.at(a, b) = -s.at(a, b) / denom;
      }
    if (step > spread && !rn.is_zero())
      fail(Error::Kind::internal, "exponent matrix beyond the charge spread is nonzero");
    r.push_back(rn);
    g.push_back(gn);
  }
  return {std::move(r), std::move(g)};
}

Calibration integrate_calibration(const ModelSpec& m, const std::vector<QMatrix>& r_in,
                                  const std::vector<QMatrix>& g_in, int depth) {
  const int n = m.n, T = m.trunc;
  if ((int)g_in.size() < depth + 1)
    fail(Error::Kind::dimension, "gauge tail too short: need G_1..G_" + std::to_string(depth + 1));

  Calibration c;
  c.model = m;
  c.depth = depth;
  std::vector<JetMatrix> cs = structure_constants(m);

  // Initial values: the inverse series of Id + sum G_n^T z^n.
  std::vector<QMatrix> gt(size_t(depth + 2), QMatrix(n, n));
  gt[0] = QMatrix::identity(n);
  for (int k = 1; k <= depth + 1; ++k) gt[size_t(k)] = g_in[size_t(k - 1)].transpose();
  std::vector<QMatrix> h = qmatrix_series_inverse(gt);

  // Relabel coordinates so that column 0 of the d=0 matrix is t^a itself.
  for (int a = 0; a < n; ++a) {
    Rat target = h[1].at(a, 0);
    Rat shift = target - c.model.base[size_t(a)];
    if (rat_is_zero(shift)) continue;
    c.model.base[size_t(a)] = target;
    if (c.model.euler) {
      const Rat& qa = c.model.euler->q[size_t(a)];
      c.model.euler->r[size_t(a)] -= (Rat(1) - qa) * shift;
    }
  }

  const MonoTable& tab = MonoTable::get(n, T);
  c.upper.assign(size_t(depth + 2), JetMatrix());
  c.upper[0] = JetMatrix::identity(n, n, T);
  for (int d = 0; d <= depth; ++d) {
    std::vector<JetMatrix> rhs(static_cast<size_t>(n));
    int vmin = T;
    for (int g = 0; g < n; ++g) {
      rhs[size_t(g)] = c.upper[size_t(d)] * cs[size_t(g)];
      vmin = std::min(vmin, rhs[size_t(g)].valid_order());
    }
    JetMatrix om(n, n, n, T);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet& e = om.at(i, j);
        e.coeff_idx(0) = h[size_t(d + 1)].at(i, j);
        for (int k = 1; k <= T; ++k)
          for (size_t idx = tab.deg_begin(k); idx < tab.deg_end(k); ++idx) {
            auto exps = tab.exps(idx);
            int v = 0;
            while (exps[size_t(v)] == 0) ++v;
            exps[size_t(v)] -= 1;
            size_t down = *tab.find(exps);
            e.coeff_idx(idx) = rhs[size_t(v)].at(i, j).coeff_idx(down) / Rat(int(exps[size_t(v)]) + 1);
          }
      }
    om.restrict_valid(std::min(vmin + 1, T));

    for (int g = 0; g < n; ++g) {
      JetMatrix res = om.diff(g) - rhs[size_t(g)];
      if (!res.is_zero_up_to_valid()) {
        auto bad = res.first_nonzero();
        fail(Error::Kind::composition,
             "model '" + m.id + "': flatness equation fails at depth " + std::to_string(d) +
                 ", direction x" + std::to_string(g) + ", entry (" + std::to_string(bad->row) + "," +
                 std::to_string(bad->col) + "), monomial " + mono_str(bad->term.exps) + ": " +
                 rat_str(bad->term.coeff));
      }
    }
    c.upper[size_t(d + 1)] = std::move(om);
  }

  std::vector<JetMatrix> v = matrix_series_inverse(c.upper);
  c.lower.assign(size_t(depth + 2), JetMatrix());
  c.lower[0] = JetMatrix::identity(n, n, T);
  for (int d = 0; d <= depth; ++d) {
    c.lower[size_t(d + 1)] = (d % 2 == 0) ? -v[size_t(d + 1)] : v[size_t(d + 1)];
  }

  c.r = r_in;
  while (!c.r.empty() && c.r.back().is_zero()) c.r.pop_back();
  c.g = g_in;

  if (c.model.euler) {
    c.mu.resize(size_t(n));
    for (int a = 0; a < n; ++a) c.mu[size_t(a)] = c.model.euler->q[size_t(a)] - c.model.euler->delta / 2;
  }

  if (m.frobenius() && m.eta) {
    c.frobenius_symmetric = true;
    for (const ResidualReport& rep : calibration_symmetry_residuals(c))
      if (!rep.is_zero) c.frobenius_symmetric = false;
  }
  return c;
}

Calibration build_calibration(const ModelSpec& m, int depth) {
  auto [r, g] = compute_r_g(m, depth + 1);
  return integrate_calibration(m, r, g, depth);
}

std::vector<ResidualReport> calibration_inverse_residuals(const Calibration& c) {
  const int n = c.model.n, T = c.model.trunc;
  std::vector<ResidualReport> left, right;
  for (int k = 1; k <= c.depth + 1; ++k) {
    JetMatrix lconv(n, n, n, T), rconv(n, n, n, T);
    for (int j = 0; j <= k; ++j) {
      JetMatrix a = (j == 0) ? c.upper[0] : c.lower[size_t(j)];
      if (j % 2 == 1) a = -a;
      lconv += a * c.upper[size_t(k - j)];
      rconv += c.upper[size_t(k - j)] * a;
    }
    left.push_back(report_from("inverse_series_left(k=" + std::to_string(k) + ")", lconv));
    right.push_back(report_from("inverse_series_right(k=" + std::to_string(k) + ")", rconv));
  }
  return {merge_reports("inverse_series_left", left), merge_reports("inverse_series_right", right)};
}

std::vector<ResidualReport> calibration_pde_residuals(const Calibration& c) {
  const int n = c.model.n;
  std::vector<JetMatrix> cs = structure_constants(c.model);
  std::vector<ResidualReport> up, low;
  for (int d = 0; d <= c.depth; ++d)
    for (int g = 0; g < n; ++g) {
      std::string tag = "(d=" + std::to_string(d) + ",x" + std::to_string(g) + ")";
      up.push_back(report_from("flatness_upper" + tag,
                               c.upper_at(d).diff(g) - c.upper_at(d - 1) * cs[size_t(g)]));
      low.push_back(report_from("flatness_lower" + tag,
                                c.lower_at(d).diff(g) - cs[size_t(g)] * c.lower_at(d - 1)));
    }
  return {merge_reports("flatness_upper", up), merge_reports("flatness_lower", low)};
}

std::vector<ResidualReport> calibration_homogeneity_residuals(const Calibration& c) {
  const ModelSpec& m = c.model;
  if (!m.euler) fail(Error::Kind::composition, "homogeneity residuals need Euler data");
  const int n = m.n, T = m.trunc;
  QMatrix qm(n, n);
  for (int a = 0; a < n; ++a) qm.at(a, a) = m.euler->q[size_t(a)];
  std::vector<Jet> ej(static_cast<size_t>(n));
  for (int g = 0; g < n; ++g) ej[size_t(g)] = m.euler_jet(g, n);

  std::vector<ResidualReport> out;
  for (int d = -1; d <= c.depth; ++d) {
    JetMatrix ures(n, n, n, T), lres(n, n, n, T);
    for (int g = 0; g < n; ++g) {
      ures += ej[size_t(g)] * c.upper_at(d).diff(g);
      lres += ej[size_t(g)] * c.lower_at(d).diff(g);
    }
    ures -= Rat(d + 1) * c.upper_at(d);
    ures -= q_commutator(c.upper_at(d), qm);
    lres -= Rat(d + 1) * c.lower_at(d);
    lres -= q_commutator(c.lower_at(d), qm);
    for (int i = 1; i <= d + 1; ++i) {
      QMatrix ri = c.r_at(i);
      if (ri.is_zero()) continue;
      JetMatrix ut = ri * c.upper_at(d - i);
      if (i % 2 == 0) ut = -ut;
      ures -= ut;
      lres -= c.lower_at(d - i) * ri;
    }
    std::string tag = "(d=" + std::to_string(d) + ")";
    out.push_back(report_from("homogeneity_upper" + tag, ures));
    out.push_back(report_from("homogeneity_lower" + tag, lres));
  }
  return out;
}

std::vector<ResidualReport> calibration_symmetry_residuals(const Calibration& c) {
  const ModelSpec& m = c.model;
  if (!m.frobenius() || !m.eta)
    fail(Error::Kind::composition, "metric symmetry residuals need a scalar potential");
  const QMatrix& eta = *m.eta;
  QMatrix einv = m.eta_inv();
  std::vector<ResidualReport> out;
  for (int i = 1; i <= (int)c.r.size(); ++i) {
    QMatrix lhs = eta * c.r_at(i) * einv;
    QMatrix rhs = c.r_at(i).transpose();
    if (i % 2 == 0) rhs = rhs * Rat(-1);
    lhs -= rhs;
    ResidualReport rep;
    rep.name = "exponent_symmetry(n=" + std::to_string(i) + ")";
    rep.valid_order = c.model.trunc;
    rep.is_zero = lhs.is_zero();
    if (!rep.is_zero) {
      for (int a = 0; a < m.n && rep.location.empty(); ++a)
        for (int b = 0; b < m.n; ++b)
          if (!rat_is_zero(lhs.at(a, b))) {
            rep.location = "entry (" + std::to_string(a) + "," + std::to_string(b) + ")";
            rep.value = lhs.at(a, b);
            break;
          }
    }
    out.push_back(rep);
  }
  std::vector<ResidualReport> fam;
  for (int d = -1; d <= c.depth; ++d)
    fam.push_back(report_from("series_symmetry(d=" + std::to_string(d) + ")",
                              eta * c.lower_at(d) * einv - c.upper_at(d).transpose()));
  out.push_back(merge_reports("series_symmetry", fam));
  return out;
}

Calibration extend_calibration(const Calibration& base, const ModelSpec& m_ext) {
  const int N = base.model.n;
  if (m_ext.n != N + 1)
    fail(Error::Kind::dimension, "extension must add exactly one coordinate");
  if (m_ext.trunc != base.model.trunc)
    fail(Error::Kind::dimension, "extension truncation differs from the base calibration");

  Calibration ext = build_calibration(m_ext, base.depth);

  for (int a = 0; a < N; ++a) {
    bool drift = ext.model.base[size_t(a)] != base.model.base[size_t(a)];
    if (ext.model.euler && base.model.euler)
      drift = drift || ext.model.euler->q[size_t(a)] != base.model.euler->q[size_t(a)] ||
              ext.model.euler->r[size_t(a)] != base.model.euler->r[size_t(a)];
    if (drift)
      fail(Error::Kind::gauge, "extension base point or Euler data drifted from the closed sector");
  }

  size_t nr = std::max(ext.r.size(), base.r.size());
  for (int i = 1; i <= (int)nr; ++i) {
    QMatrix rt = ext.r_at(i), rb = base.r_at(i);
    for (int a = 0; a < N + 1; ++a) {
      if (!rat_is_zero(rt.at(a, N)))
        fail(Error::Kind::gauge,
             "boundary column of exponent matrix " + std::to_string(i) + " is nonzero");
      if (a < N)
        for (int b = 0; b < N; ++b)
          if (rt.at(a, b) != rb.at(a, b))
            fail(Error::Kind::gauge,
                 "exponent matrix " + std::to_string(i) + " does not project onto the closed one");
    }
  }

  std::vector<int> idmap(static_cast<size_t>(N));
  for (int i = 0; i < N; ++i) idmap[size_t(i)] = i;
  for (int d = -1; d <= base.depth; ++d) {
    const JetMatrix& up = ext.upper_at(d);
    const JetMatrix& lo = ext.lower_at(d);
    for (int a = 0; a < N; ++a) {
      if (!up.at(a, N).is_zero_up_to_valid())
        fail(Error::Kind::gauge,
             "boundary column of the raised family is nonzero at d=" + std::to_string(d));
      for (int b = 0; b < N; ++b) {
        Jet expect_u = jet_lift(base.upper_at(d).at(a, b), N + 1, m_ext.trunc, idmap);
        Jet expect_l = jet_lift(base.lower_at(d).at(a, b), N + 1, m_ext.trunc, idmap);
        if (up.at(a, b) != expect_u || lo.at(a, b) != expect_l)
          fail(Error::Kind::gauge,
               "extension families do not project onto the closed calibration at d=" + std::to_string(d));
      }
    }
  }
  return ext;
}

OpenCalibration open_calibration(const Calibration& base, const Calibration& ext) {
  OpenCalibration oc;
  oc.base = base;
  oc.ext = ext;
  oc.closed_n = base.model.n;

  const int N = oc.closed_n, T = ext.model.trunc;
  Jet tb = Jet::coordinate(N + 1, T, N) + Jet::constant(N + 1, T, ext.model.base[size_t(N)]);
  if (oc.phi(0, 0) != tb)
    fail(Error::Kind::internal, "boundary row normalization failed: phi(0,0) is not t^{N+1}");

  for (const ResidualReport& rep : open_calibration_residuals(oc))
    if (!rep.is_zero)
      fail(Error::Kind::composition,
           "boundary row axiom '" + rep.name + "' fails at " + rep.location + ": " + rat_str(rep.value));
  return oc;
}

std::vector<ResidualReport> open_calibration_residuals(const OpenCalibration& oc) {
  const ModelSpec& em = oc.ext.model;
  const int N = oc.closed_n, nv = N + 1, T = em.trunc;
  const Jet& fo = em.potential[size_t(N)];

  std::vector<std::vector<Jet>> f2(static_cast<size_t>(nv), std::vector<Jet>(static_cast<size_t>(nv)));
  for (int g = 0; g < nv; ++g) {
    Jet dg = jet_diff(fo, g);
    for (int x = 0; x < nv; ++x) f2[size_t(g)][size_t(x)] = jet_diff(dg, x);
  }

  std::vector<ResidualReport> out;
  {
    JetMatrix start(1, nv, nv, T);
    for (int b = 0; b < nv; ++b) {
      start.at(0, b) = oc.phi(b, -1);
      if (b == N) start.at(0, b) -= Jet::constant(nv, T, Rat(1));
    }
    out.push_back(report_from("boundary_row_start", start));
  }

  std::vector<ResidualReport> pde;
  for (int d = 0; d <= oc.ext.depth; ++d) {
    JetMatrix res(nv, nv, nv, T);
    for (int g = 0; g < nv; ++g)
      for (int b = 0; b < nv; ++b) {
        Jet v = jet_diff(oc.phi(b, d), g);
        for (int mu = 0; mu < N; ++mu) v -= f2[size_t(g)][size_t(mu)] * oc.ext.lower_at(d - 1).at(mu, b);
        v -= f2[size_t(g)][size_t(N)] * oc.phi(b, d - 1);
        res.at(g, b) = std::move(v);
      }
    pde.push_back(report_from("boundary_row_pde(d=" + std::to_string(d) + ")", res));
  }
  out.push_back(merge_reports("boundary_row_pde", pde));

  if (!em.euler || oc.ext.mu.empty())
    fail(Error::Kind::composition, "boundary row homogeneity needs Euler data");
  std::vector<Jet> ej(static_cast<size_t>(nv));
  for (int g = 0; g < nv; ++g) ej[size_t(g)] = em.euler_jet(g, nv);
  std::vector<ResidualReport> hom;
  for (int d = -1; d <= oc.ext.depth; ++d) {
    JetMatrix res(1, nv, nv, T);
    for (int b = 0; b < nv; ++b) {
      Jet v = Jet::zero(nv, T);
      for (int g = 0; g < nv; ++g) v += ej[size_t(g)] * jet_diff(oc.phi(b, d), g);
      v -= (Rat(d) + Rat(1, 2) + oc.ext.mu[size_t(b)]) * oc.phi(b, d);
      for (int i = 1; i <= d + 1; ++i) {
        QMatrix rt = oc.ext.r_at(i);
        for (int mu = 0; mu < nv; ++mu) {
          if (rat_is_zero(rt.at(mu, b))) continue;
          v -= oc.phi(mu, d - i) * rt.at(mu, b);
        }
      }
      res.at(0, b) = std::move(v);
    }
    hom.push_back(report_from("boundary_row_homogeneity(d=" + std::to_string(d) + ")", res));
  }
  out.push_back(merge_reports("boundary_row_homogeneity", hom));
  return out;
}

OpenCalibration build_open_calibration(const ModelSpec& m, int depth) {
  Calibration base = build_calibration(m, depth);
  ModelSpec em = open_to_extension(m);
  Calibration ext = extend_calibration(base, em);
  return open_calibration(base, ext);
}

}  // namespace frobjet
