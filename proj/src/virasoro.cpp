#include "frobjet/virasoro.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <utility>

namespace frobjet {

namespace {

std::string itos(int v) { return std::to_string(v); }

QMatrix sym2(const QMatrix& m) { return m + m.transpose(); }

std::vector<Rat> matvec(const QMatrix& m, const std::vector<Rat>& v) {
  std::vector<Rat> out(size_t(m.rows()), Rat(0));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (!rat_is_zero(m.at(i, j)) && !rat_is_zero(v[size_t(j)])) out[size_t(i)] += m.at(i, j) * v[size_t(j)];
  return out;
}

std::vector<Rat> matvec_t(const QMatrix& m, const std::vector<Rat>& v) {
  std::vector<Rat> out(size_t(m.cols()), Rat(0));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (!rat_is_zero(m.at(i, j)) && !rat_is_zero(v[size_t(i)])) out[size_t(j)] += m.at(i, j) * v[size_t(i)];
  return out;
}

Rat dot(const std::vector<Rat>& a, const std::vector<Rat>& b) {
  Rat r(0);
  for (size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
  return r;
}

Rat trace_prod(const QMatrix& a, const QMatrix& b) {
  Rat r(0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r += a.at(i, j) * b.at(j, i);
  return r;
}

std::vector<Rat> shifted(const std::vector<Rat>& mu, int s) {
  std::vector<Rat> a(mu);
  for (auto& x : a) x += s;
  return a;
}

/// P_m(mu + shift, R) cached by shift.
struct PmCache {
  int m;
  const std::vector<Rat>& mu;
  const QMatrix& r;
  std::map<int, QMatrix> c;
  const QMatrix& at(int shift) {
    auto it = c.find(shift);
    if (it != c.end()) return it->second;
    return c.emplace(shift, pm_matrix(m, shifted(mu, shift), r)).first->second;
  }
};

}  // namespace

QMatrix pm_matrix(int m, const std::vector<Rat>& adiag, const QMatrix& r) {
  if (m < -1) fail(Error::Kind::dimension, "pm_matrix index below -1");
  int n = int(adiag.size());
  if (r.rows() != n || r.cols() != n) fail(Error::Kind::dimension, "pm_matrix shape mismatch");
  QMatrix p = QMatrix::identity(n);
  for (int j = 0; j <= m; ++j) {
    // P_j = R P_{j-1} + P_{j-1} (A + j - 1/2)
    QMatrix next = r * p;
    for (int a = 0; a < n; ++a) {
      Rat w = adiag[size_t(a)] + Rat(2 * j - 1, 2);
      for (int i = 0; i < n; ++i) next.at(i, a) += p.at(i, a) * w;
    }
    p = next;
  }
  return p;
}

QMatrix pm_matrix_ordered(int m, const std::vector<Rat>& adiag, const QMatrix& r) {
  if (m < -1) fail(Error::Kind::dimension, "pm_matrix index below -1");
  int n = int(adiag.size());
  if (r.rows() != n || r.cols() != n) fail(Error::Kind::dimension, "pm_matrix shape mismatch");
  std::vector<QMatrix> rp{QMatrix::identity(n)};
  for (int k = 1; k <= m + 1; ++k) rp.push_back(r * rp.back());
  QMatrix out(n, n);
  for (int b = 0; b < n; ++b) {
    // coefficients of prod_{i=0..m} (x + a_b + i - 1/2), low degree first
    std::vector<Rat> poly{Rat(1)};
    for (int i = 0; i <= m; ++i) {
      Rat c = adiag[size_t(b)] + Rat(2 * i - 1, 2);
      poly.push_back(poly.back());
      for (size_t k = poly.size() - 2; k > 0; --k) poly[k] = poly[k - 1] + c * poly[k];
      poly[0] *= c;
    }
    for (size_t k = 0; k < poly.size(); ++k)
      for (int a = 0; a < n; ++a) out.at(a, b) += poly[k] * rp[k].at(a, b);
  }
  return out;
}

QMatrix graded_part(const QMatrix& mat, const std::vector<Rat>& q, const Rat& p) {
  QMatrix out(mat.rows(), mat.cols());
  for (int i = 0; i < mat.rows(); ++i)
    for (int j = 0; j < mat.cols(); ++j)
      if (q[size_t(i)] - q[size_t(j)] == p) out.at(i, j) = mat.at(i, j);
  return out;
}

VirasoroOp::VirasoroOp(int nv_in, int levels_in)
    : nv(nv_in),
      levels(levels_in),
      tt(nv_in * levels_in, nv_in * levels_in),
      td(nv_in * levels_in, nv_in * levels_in),
      dd(nv_in * levels_in, nv_in * levels_in),
      lt(size_t(nv_in) * levels_in, Rat(0)),
      ld(size_t(nv_in) * levels_in, Rat(0)) {
  if (nv_in < 1 || levels_in < 1) fail(Error::Kind::dimension, "operator table must be nonempty");
}

VirasoroOp& VirasoroOp::operator+=(const VirasoroOp& o) {
  if (nv != o.nv || levels != o.levels) fail(Error::Kind::dimension, "operator tables differ in shape");
  tt += o.tt;
  td += o.td;
  dd += o.dd;
  for (int i = 0; i < size(); ++i) lt[size_t(i)] += o.lt[size_t(i)];
  for (int i = 0; i < size(); ++i) ld[size_t(i)] += o.ld[size_t(i)];
  c0 += o.c0;
  return *this;
}

VirasoroOp& VirasoroOp::operator-=(const VirasoroOp& o) {
  if (nv != o.nv || levels != o.levels) fail(Error::Kind::dimension, "operator tables differ in shape");
  tt -= o.tt;
  td -= o.td;
  dd -= o.dd;
  for (int i = 0; i < size(); ++i) lt[size_t(i)] -= o.lt[size_t(i)];
  for (int i = 0; i < size(); ++i) ld[size_t(i)] -= o.ld[size_t(i)];
  c0 -= o.c0;
  return *this;
}

VirasoroOp& VirasoroOp::operator*=(const Rat& s) {
  tt *= s;
  td *= s;
  dd *= s;
  for (auto& x : lt) x *= s;
  for (auto& x : ld) x *= s;
  c0 *= s;
  return *this;
}

bool VirasoroOp::equal_through(const VirasoroOp& o, int level_window) const {
  if (nv != o.nv || levels != o.levels) return false;
  for (int i = 0; i < size(); ++i) {
    if (slot_level(i) >= level_window) continue;
    if (lt[size_t(i)] != o.lt[size_t(i)] || ld[size_t(i)] != o.ld[size_t(i)]) return false;
    for (int j = 0; j < size(); ++j) {
      if (slot_level(j) >= level_window) continue;
      if (tt.at(i, j) != o.tt.at(i, j) || td.at(i, j) != o.td.at(i, j) || dd.at(i, j) != o.dd.at(i, j))
        return false;
    }
  }
  return c0 == o.c0;
}

ResidualReport op_report(const std::string& name, const VirasoroOp& z, int level_window) {
  ResidualReport rep;
  rep.name = name;
  rep.valid_deg = level_window;
  auto slot_str = [&](int i) {
    return "(" + itos(z.slot_coord(i)) + "," + itos(z.slot_level(i)) + ")";
  };
  auto found = [&](const std::string& loc, const Rat& v) {
    rep.is_zero = false;
    rep.location = loc;
    rep.value = v;
  };
  if (!rat_is_zero(z.c0)) found("c0", z.c0);
  for (int i = 0; rep.is_zero && i < z.size(); ++i) {
    if (z.slot_level(i) >= level_window) continue;
    if (!rat_is_zero(z.lt[size_t(i)])) {
      found("lt" + slot_str(i), z.lt[size_t(i)]);
      break;
    }
    if (!rat_is_zero(z.ld[size_t(i)])) {
      found("ld" + slot_str(i), z.ld[size_t(i)]);
      break;
    }
    for (int j = 0; j < z.size(); ++j) {
      if (z.slot_level(j) >= level_window) continue;
      if (!rat_is_zero(z.tt.at(i, j))) {
        found("tt[" + slot_str(i) + "," + slot_str(j) + "]", z.tt.at(i, j));
        break;
      }
      if (!rat_is_zero(z.td.at(i, j))) {
        found("td[" + slot_str(i) + "," + slot_str(j) + "]", z.td.at(i, j));
        break;
      }
      if (!rat_is_zero(z.dd.at(i, j))) {
        found("dd[" + slot_str(i) + "," + slot_str(j) + "]", z.dd.at(i, j));
        break;
      }
    }
  }
  return rep;
}

VirasoroOp build_virasoro(const Calibration& cal, int m, int levels) {
  const ModelSpec& md = cal.model;
  if (m < -1) fail(Error::Kind::dimension, "operator index below -1");
  if (!md.frobenius() || !md.eta || !md.euler)
    fail(Error::Kind::gauge, "operators need a conformal metric model");
  if (!cal.frobenius_symmetric)
    fail(Error::Kind::gauge, "calibration is not metric-compatible");
  int n = md.n;
  VirasoroOp op(n, levels);
  const std::vector<Rat>& mu = cal.mu;
  std::vector<Rat> q = md.charges();
  QMatrix r = cal.r_total();
  const QMatrix& eta = *md.eta;
  QMatrix eta_inv = md.eta_inv();
  PmCache pm{m, mu, r, {}};

  // quadratic line (coefficient of eps^-2):
  //   1/2 (-1)^{d1} eta_{a.} ([P_m(mu+d2+1, R)]_{m+d1+d2+1})^._b  u_{(a,d1)} u_{(b,d2)}
  QMatrix w(op.size(), op.size());
  for (int d1 = 0; d1 < levels; ++d1)
    for (int d2 = 0; d2 < levels; ++d2) {
      QMatrix g = graded_part(pm.at(d2 + 1), q, Rat(m + d1 + d2 + 1));
      if (g.is_zero()) continue;
      QMatrix eg = eta * g;
      Rat s = (d1 % 2 == 0) ? Rat(1, 2) : Rat(-1, 2);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (!rat_is_zero(eg.at(a, b))) w.at(op.slot(a, d1), op.slot(b, d2)) += s * eg.at(a, b);
    }
  op.tt = sym2(w) * Rat(1, 2);

  // derivative line: u_{(a,d)} ([P_m(mu+d+1, R)]_{m+d-k})^b_a d/dt^b_k
  for (int d = 0; d < levels; ++d)
    for (int k = 0; k <= m + d && k < levels; ++k) {
      QMatrix g = graded_part(pm.at(d + 1), q, Rat(m + d - k));
      if (g.is_zero()) continue;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (!rat_is_zero(g.at(b, a))) op.td.at(op.slot(a, d), op.slot(b, k)) += g.at(b, a);
    }

  // second-derivative line (coefficient of eps^2):
  //   1/2 (-1)^{d2+1} ([P_m(mu-d2, R)]_{m-1-d1-d2})^a_. eta^{.b}  d_{(a,d1)} d_{(b,d2)}
  QMatrix v(op.size(), op.size());
  for (int d1 = 0; d1 <= m - 1 && d1 < levels; ++d1)
    for (int d2 = 0; d1 + d2 <= m - 1 && d2 < levels; ++d2) {
      QMatrix g = graded_part(pm.at(-d2), q, Rat(m - 1 - d1 - d2));
      if (g.is_zero()) continue;
      QMatrix ge = g * eta_inv;
      Rat s = (d2 % 2 == 0) ? Rat(-1, 2) : Rat(1, 2);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (!rat_is_zero(ge.at(a, b))) v.at(op.slot(a, d1), op.slot(b, d2)) += s * ge.at(a, b);
    }
  op.dd = sym2(v) * Rat(1, 2);

  if (m == 0) {
    Rat t(0);
    for (const Rat& u : mu) t += Rat(1, 4) - u * u;
    op.c0 = t * Rat(1, 4);
  }
  return op;
}

VirasoroOp build_open_virasoro(const OpenCalibration& oc, int m, int levels) {
  int n = oc.closed_n;
  int nv = n + 1;
  // closed operator embedded on the wider table
  VirasoroOp cl = build_virasoro(oc.base, m, levels);
  VirasoroOp op(nv, levels);
  for (int i = 0; i < cl.size(); ++i) {
    int ci = op.slot(cl.slot_coord(i), cl.slot_level(i));
    for (int j = 0; j < cl.size(); ++j) {
      int cj = op.slot(cl.slot_coord(j), cl.slot_level(j));
      op.tt.at(ci, cj) = cl.tt.at(i, j);
      op.td.at(ci, cj) = cl.td.at(i, j);
      op.dd.at(ci, cj) = cl.dd.at(i, j);
    }
  }
  op.c0 = cl.c0;

  const std::vector<Rat>& mu_t = oc.mu_tilde();
  std::vector<Rat> q_t = oc.ext.model.charges();
  QMatrix r_t = oc.ext.r_total();
  QMatrix eta_inv = oc.base.model.eta_inv();
  PmCache pm{m, mu_t, r_t, {}};

  // boundary row (coefficient of eps^-1):
  //   ([P_m(mu~+d+1, R~)]_{m+d+1})^s_a u_{(a,d)}
  for (int d = 0; d < levels; ++d) {
    QMatrix g = graded_part(pm.at(d + 1), q_t, Rat(m + d + 1));
    for (int a = 0; a < nv; ++a)
      if (!rat_is_zero(g.at(n, a))) op.lt[size_t(op.slot(a, d))] += g.at(n, a);
  }

  // boundary derivative column, the s-ladder sits on its diagonal:
  //   ([P_m(mu~+d+1, R~)]_{m+d-k})^s_a u_{(a,d)} d/ds_k
  for (int d = 0; d < levels; ++d)
    for (int k = 0; k <= m + d && k < levels; ++k) {
      QMatrix g = graded_part(pm.at(d + 1), q_t, Rat(m + d - k));
      for (int a = 0; a < nv; ++a)
        if (!rat_is_zero(g.at(n, a))) op.td.at(op.slot(a, d), op.slot(n, k)) += g.at(n, a);
    }

  // closed-derivative row (coefficient of eps):
  //   (-1)^{k+1} ([P_m(mu~-k, R~)]_{m-k})^s_a eta^{ab} d/dt^b_k,
  //   plus the boundary tail 3 (m+1)!/4 d/ds_{m-1} for m >= 1
  for (int k = 0; k <= m && k < levels; ++k) {
    QMatrix g = graded_part(pm.at(-k), q_t, Rat(m - k));
    Rat s = (k % 2 == 0) ? Rat(-1) : Rat(1);
    for (int b = 0; b < n; ++b) {
      Rat acc(0);
      for (int a = 0; a < n; ++a) acc += g.at(n, a) * eta_inv.at(a, b);
      op.ld[size_t(op.slot(b, k))] += s * acc;
    }
  }
  if (m >= 1 && m - 1 < levels)
    op.ld[size_t(op.slot(n, m - 1))] += Rat(3) * rat_factorial(unsigned(m + 1)) / 4;

  // mixed second-derivative block (coefficient of eps^2):
  //   (-1)^{d2+1} ([P_m(mu~-d2, R~)]_{m-1-d1-d2})^s_a eta^{ab} d_{(s,d1)} d_{(b,d2)}
  QMatrix v(op.size(), op.size());
  for (int d1 = 0; d1 <= m - 1 && d1 < levels; ++d1)
    for (int d2 = 0; d1 + d2 <= m - 1 && d2 < levels; ++d2) {
      QMatrix g = graded_part(pm.at(-d2), q_t, Rat(m - 1 - d1 - d2));
      Rat s = (d2 % 2 == 0) ? Rat(-1) : Rat(1);
      for (int b = 0; b < n; ++b) {
        Rat acc(0);
        for (int a = 0; a < n; ++a) acc += g.at(n, a) * eta_inv.at(a, b);
        if (!rat_is_zero(acc)) v.at(op.slot(n, d1), op.slot(b, d2)) += s * acc;
      }
    }
  op.dd += sym2(v) * Rat(1, 2);

  if (m == 0) op.c0 += Rat(3, 4);
  return op;
}

VirasoroOp bracket(const VirasoroOp& x, const VirasoroOp& y) {
  if (x.nv != y.nv || x.levels != y.levels)
    fail(Error::Kind::dimension, "operator tables differ in shape");
  VirasoroOp z(x.nv, x.levels);
  z.tt = sym2(x.td * y.tt) - sym2(y.td * x.tt);
  z.td = x.td * y.td - y.td * x.td - (x.tt * y.dd) * Rat(4) + (y.tt * x.dd) * Rat(4);
  z.dd = (x.dd * y.td + y.td.transpose() * x.dd) - (y.dd * x.td + x.td.transpose() * y.dd);
  auto axpy = [](std::vector<Rat>& out, const std::vector<Rat>& v, const Rat& s) {
    for (size_t i = 0; i < out.size(); ++i) out[i] += s * v[i];
  };
  z.lt = matvec(x.td, y.lt);
  axpy(z.lt, matvec(y.td, x.lt), Rat(-1));
  axpy(z.lt, matvec(x.tt, y.ld), Rat(-2));
  axpy(z.lt, matvec(y.tt, x.ld), Rat(2));
  z.ld = matvec_t(x.td, y.ld);
  for (auto& u : z.ld) u = -u;
  axpy(z.ld, matvec_t(y.td, x.ld), Rat(1));
  axpy(z.ld, matvec(x.dd, y.lt), Rat(2));
  axpy(z.ld, matvec(y.dd, x.lt), Rat(-2));
  z.c0 = Rat(-2) * trace_prod(x.tt, y.dd) + Rat(2) * trace_prod(y.tt, x.dd) + dot(x.ld, y.lt) -
         dot(y.ld, x.lt);
  return z;
}

std::vector<ResidualReport> commutator_residuals(const std::vector<VirasoroOp>& ops, int i_max,
                                                 int level_window) {
  int top_idx = std::max(2 * i_max - 1, i_max);
  if (int(ops.size()) < top_idx + 2)
    fail(Error::Kind::depth, "commutator check needs operators up to index " + itos(top_idx));
  std::vector<ResidualReport> out;
  for (int i = 0; i <= i_max; ++i)
    for (int j = -1; j < i; ++j) {
      VirasoroOp z = bracket(ops[size_t(i + 1)], ops[size_t(j + 1)]);
      z -= Rat(i - j) * ops[size_t(i + j + 1)];
      out.push_back(op_report("commutator(i=" + itos(i) + ",j=" + itos(j) + ")", z, level_window));
    }
  return out;
}

EpsPoly eps_mono(int eps_pow, std::vector<int> slots) {
  std::sort(slots.begin(), slots.end());
  return EpsPoly{{{eps_pow, std::move(slots)}, Rat(1)}};
}

namespace {

void eps_add(EpsPoly& out, int eps, std::vector<int> mono, const Rat& v) {
  if (rat_is_zero(v)) return;
  std::sort(mono.begin(), mono.end());
  auto key = EpsMono{eps, std::move(mono)};
  auto it = out.find(key);
  if (it == out.end()) {
    out.emplace(std::move(key), v);
    return;
  }
  it->second += v;
  if (rat_is_zero(it->second)) out.erase(it);
}

struct DerivTerm {
  std::vector<int> rest;
  int slot;
  int mult;
};

/// One derivative of a sorted monomial, one entry per distinct slot.
std::vector<DerivTerm> derivs(const std::vector<int>& mono) {
  std::vector<DerivTerm> out;
  for (size_t i = 0; i < mono.size(); ++i) {
    if (i > 0 && mono[i] == mono[i - 1]) continue;
    int mult = 0;
    for (int s : mono) mult += (s == mono[i]);
    std::vector<int> rest = mono;
    rest.erase(rest.begin() + long(i));
    out.push_back({std::move(rest), mono[i], mult});
  }
  return out;
}

}  // namespace

EpsPoly apply_op(const VirasoroOp& x, const EpsPoly& p) {
  EpsPoly out;
  for (const auto& [key, coef] : p) {
    const auto& [eps, mono] = key;
    if (!rat_is_zero(x.c0)) eps_add(out, eps, mono, coef * x.c0);
    for (int i = 0; i < x.size(); ++i) {
      if (!rat_is_zero(x.lt[size_t(i)])) {
        auto m2 = mono;
        m2.push_back(i);
        eps_add(out, eps - 1, std::move(m2), coef * x.lt[size_t(i)]);
      }
      for (int j = 0; j < x.size(); ++j)
        if (!rat_is_zero(x.tt.at(i, j))) {
          auto m2 = mono;
          m2.push_back(i);
          m2.push_back(j);
          eps_add(out, eps - 2, std::move(m2), coef * x.tt.at(i, j));
        }
    }
    for (const auto& d1 : derivs(mono)) {
      Rat c1 = coef * Rat(d1.mult);
      if (!rat_is_zero(x.ld[size_t(d1.slot)])) eps_add(out, eps + 1, d1.rest, c1 * x.ld[size_t(d1.slot)]);
      for (int i = 0; i < x.size(); ++i)
        if (!rat_is_zero(x.td.at(i, d1.slot))) {
          auto m2 = d1.rest;
          m2.push_back(i);
          eps_add(out, eps, std::move(m2), c1 * x.td.at(i, d1.slot));
        }
      for (const auto& d2 : derivs(d1.rest))
        if (!rat_is_zero(x.dd.at(d2.slot, d1.slot)))
          eps_add(out, eps + 2, d2.rest, c1 * Rat(d2.mult) * x.dd.at(d2.slot, d1.slot));
    }
  }
  return out;
}

EpsPoly bracket_apply(const VirasoroOp& x, const VirasoroOp& y, const EpsPoly& p) {
  EpsPoly out = apply_op(x, apply_op(y, p));
  for (const auto& [key, v] : apply_op(y, apply_op(x, p))) eps_add(out, key.first, key.second, -v);
  return out;
}

namespace {

/// Derivative columns of f by operator slot, built on demand.
struct DiffCache {
  const VirasoroOp& op;
  const DescSeries& f;
  std::map<int, DescSeries> c;
  const DescSeries& at(int i) {
    auto it = c.find(i);
    if (it != c.end()) return it->second;
    int lev = op.slot_level(i);
    if (lev > f.level_cap())
      fail(Error::Kind::depth, "potential carries levels up to " + itos(f.level_cap()) +
                                   ", operator touches level " + itos(lev));
    return c.emplace(i, f.diff(op.slot_coord(i), lev)).first->second;
  }
};

}  // namespace

DescSeries genus0_residual(const VirasoroOp& op, const std::vector<Rat>& base, const DescSeries& f,
                           int level_window) {
  if (op.nv != f.num_coords())
    fail(Error::Kind::dimension, "operator and potential coordinate counts differ");
  if (level_window < 1 || level_window > f.level_cap())
    fail(Error::Kind::depth, "level window outside the potential range");
  int nc = op.nv, lc = f.level_cap(), dc = f.deg_cap(), tr = f.trunc();
  DiffCache df{op, f, {}};
  DescSeries res(nc, lc, dc, tr);
  for (int i = 0; i < op.size(); ++i) {
    if (op.slot_level(i) > level_window) continue;
    DescSeries row(nc, lc, dc, tr);
    bool any = false;
    for (int j = 0; j < op.size(); ++j) {
      if (!rat_is_zero(op.tt.at(i, j)) && op.slot_level(j) <= level_window) {
        row += op.tt.at(i, j) * tilde_var(nc, lc, dc, tr, base, op.slot_coord(j), op.slot_level(j));
        any = true;
      }
      if (!rat_is_zero(op.td.at(i, j))) {
        row += op.td.at(i, j) * df.at(j);
        any = true;
      }
    }
    if (any) res += tilde_mul(row, base, op.slot_coord(i), op.slot_level(i));
  }
  for (int i = 0; i < op.size(); ++i)
    for (int j = 0; j < op.size(); ++j)
      if (!rat_is_zero(op.dd.at(i, j))) res += op.dd.at(i, j) * (df.at(i) * df.at(j));
  res.restrict_levels(level_window);
  return res;
}

DescSeries open_genus0_residual(const VirasoroOp& op, const std::vector<Rat>& base,
                                const DescSeries& f_closed, const DescSeries& f_open,
                                int level_window) {
  if (op.nv != f_open.num_coords() || op.nv != f_closed.num_coords() + 1)
    fail(Error::Kind::dimension, "operator and potential coordinate counts differ");
  if (level_window < 1 || level_window > f_open.level_cap())
    fail(Error::Kind::depth, "level window outside the potential range");
  int nc = op.nv, lc = f_open.level_cap(), dc = f_open.deg_cap(), tr = f_open.trunc();
  std::vector<int> idmap(size_t(nc - 1));
  for (int i = 0; i < nc - 1; ++i) idmap[size_t(i)] = i;
  DescSeries fc = f_closed.lift(nc, idmap, lc, dc, tr);
  DiffCache dfo{op, f_open, {}};
  DiffCache dfc{op, fc, {}};
  DescSeries res(nc, lc, dc, tr);
  for (int i = 0; i < op.size(); ++i) {
    if (op.slot_level(i) > level_window) continue;
    DescSeries row(nc, lc, dc, tr);
    bool any = false;
    if (!rat_is_zero(op.lt[size_t(i)])) {
      row += DescSeries::from_jet(Jet::constant(nc, tr, op.lt[size_t(i)]), lc, dc);
      any = true;
    }
    for (int j = 0; j < op.size(); ++j)
      if (!rat_is_zero(op.td.at(i, j))) {
        row += op.td.at(i, j) * dfo.at(j);
        any = true;
      }
    if (any) res += tilde_mul(row, base, op.slot_coord(i), op.slot_level(i));
  }
  for (int i = 0; i < op.size(); ++i)
    if (!rat_is_zero(op.ld[size_t(i)])) res += op.ld[size_t(i)] * dfc.at(i);
  for (int i = 0; i < op.size(); ++i)
    for (int j = 0; j < op.size(); ++j)
      if (!rat_is_zero(op.dd.at(i, j))) res += (Rat(2) * op.dd.at(i, j)) * (dfc.at(i) * dfo.at(j));
  res.restrict_levels(level_window);
  return res;
}

std::vector<ResidualReport> virasoro_residuals(const Calibration& cal, const DescSeries& f,
                                               int m_max, int level_window) {
  std::vector<ResidualReport> out;
  for (int m = -1; m <= m_max; ++m) {
    int levels = level_window + std::max(m, 0) + 2;
    VirasoroOp op = build_virasoro(cal, m, levels);
    out.push_back(report_from("virasoro(m=" + itos(m) + ")",
                              genus0_residual(op, cal.model.base, f, level_window)));
  }
  return out;
}

std::vector<ResidualReport> open_virasoro_residuals(const OpenCalibration& oc,
                                                    const DescSeries& f_closed,
                                                    const DescSeries& f_open, int m_max,
                                                    int level_window) {
  std::vector<ResidualReport> out;
  int nv = oc.closed_n + 1;
  std::vector<int> idmap(size_t(oc.closed_n));
  for (int i = 0; i < oc.closed_n; ++i) idmap[size_t(i)] = i;
  for (int m = -1; m <= m_max; ++m) {
    int levels = level_window + std::max(m, 0) + 2;
    VirasoroOp op = build_open_virasoro(oc, m, levels);
    out.push_back(report_from(
        "open_virasoro(m=" + itos(m) + ")",
        open_genus0_residual(op, oc.ext.model.base, f_closed, f_open, level_window)));
    // the eps^-2 coefficient must reduce to the embedded closed residual
    DescSeries fc = f_closed.lift(nv, idmap, f_open.level_cap(), f_open.deg_cap(), f_open.trunc());
    DescSeries emb = genus0_residual(op, oc.ext.model.base, fc, level_window);
    VirasoroOp clo = build_virasoro(oc.base, m, levels);
    DescSeries cl = genus0_residual(clo, oc.base.model.base, f_closed, level_window)
                        .lift(nv, idmap, f_open.level_cap(), f_open.deg_cap(), f_open.trunc());
    out.push_back(report_from("closed_embedding(m=" + itos(m) + ")", emb - cl));
  }
  return out;
}

std::vector<ResidualReport> flat_virasoro_residuals(const Calibration& cal, const TopSolution& top,
                                                    const std::vector<std::vector<DescSeries>>& fv,
                                                    int m_max, const Rat& lambda, int level_window) {
  const ModelSpec& md = cal.model;
  if (!md.euler) fail(Error::Kind::gauge, "vector constraints need Euler data");
  int n = md.num_vars();
  std::vector<Rat> q = md.charges();
  int spread = md.integer_q_spread();
  if (int(fv.size()) <= m_max + spread)
    fail(Error::Kind::depth, "vector potentials stored to row " + itos(int(fv.size()) - 1) +
                                 ", need row " + itos(m_max + spread));
  if (top.p_max < level_window)
    fail(Error::Kind::depth, "solution window is narrower than the requested check");
  std::vector<Rat> mu_l(q);
  for (auto& x : mu_l) x += lambda - Rat(3, 2);
  QMatrix r = cal.r_total();

  std::map<int, DescMat> omt;  // d1 -> Omega^0_{d1} at t = v
  auto omega_at = [&](int d1) -> const DescMat& {
    auto it = omt.find(d1);
    if (it != omt.end()) return it->second;
    return omt.emplace(d1, top.ctx.substitute(omega_pq(cal, 0, d1))).first->second;
  };
  std::map<std::pair<int, int>, DescSeries> neg;  // (a, d2 < 0) -> signed shifted variable
  auto row_at = [&](int a, int d2) -> const DescSeries& {
    if (d2 >= 0) return fv[size_t(d2)][size_t(a)];
    auto key = std::make_pair(a, d2);
    auto it = neg.find(key);
    if (it != neg.end()) return it->second;
    return neg.emplace(key, vector_potential_negative(cal, top, a, d2)).first->second;
  };

  std::vector<ResidualReport> out;
  for (int m = -1; m <= m_max; ++m) {
    std::vector<DescSeries> acc(size_t(n), DescSeries(n, top.p_max, top.g_max, md.trunc));
    for (int d1 = -1; d1 <= m + spread + level_window; ++d1)
      for (int d2 = -(level_window + 1); d2 <= m + spread; ++d2) {
        int p = m - 1 - d1 - d2;
        if (p < -spread || p > spread) continue;
        QMatrix g = graded_part(pm_matrix(m, shifted(mu_l, -d2), r), q, Rat(p));
        if (g.is_zero()) continue;
        Rat s = (d2 % 2 != 0) ? Rat(1) : Rat(-1);
        const DescMat& om = omega_at(d1);
        std::vector<DescSeries> vec(size_t(n), DescSeries(n, top.p_max, top.g_max, md.trunc));
        std::vector<bool> used(size_t(n), false);
        for (int gg = 0; gg < n; ++gg)
          for (int nu = 0; nu < n; ++nu)
            if (!rat_is_zero(g.at(gg, nu))) {
              vec[size_t(gg)] += g.at(gg, nu) * row_at(nu, d2);
              used[size_t(gg)] = true;
            }
        for (int a = 0; a < n; ++a)
          for (int gg = 0; gg < n; ++gg)
            if (used[size_t(gg)]) acc[size_t(a)] += s * (om.at(a, gg) * vec[size_t(gg)]);
      }
    for (int a = 0; a < n; ++a) {
      acc[size_t(a)].restrict_levels(level_window);
      out.push_back(
          report_from("flat_virasoro(m=" + itos(m) + ",a=" + itos(a) + ")", acc[size_t(a)]));
    }
  }
  return out;
}

JetMatrix cmn_matrix(const Calibration& cal, int m, int n_idx, const Rat& lambda) {
  const ModelSpec& md = cal.model;
  if (!md.euler) fail(Error::Kind::gauge, "the two-index contraction needs Euler data");
  if (m < n_idx || n_idx < -1) fail(Error::Kind::dimension, "indices must satisfy m >= n >= -1");
  int n = md.num_vars();
  std::vector<Rat> q = md.charges();
  int spread = md.integer_q_spread();
  std::vector<Rat> mu_l(q);
  for (auto& x : mu_l) x += lambda - Rat(3, 2);
  QMatrix r = cal.r_total();
  JetMatrix acc(n, n, n, md.trunc);
  for (int d1 = -1; d1 <= m + spread + 1; ++d1)
    for (int d2 = -1; d2 <= m + spread + 1; ++d2) {
      int p = m - d1 - d2;
      if (p < -spread || p > spread) continue;
      QMatrix g = graded_part(pm_matrix(n_idx, shifted(mu_l, -d2), r), q, Rat(p));
      if (g.is_zero()) continue;
      Rat s = (d2 % 2 != 0) ? Rat(1) : Rat(-1);
      acc += s * (omega_pq(cal, 0, d1) * g * omega_pq(cal, d2, 0));
    }
  return acc;
}

std::vector<ResidualReport> cmn_residuals(const Calibration& cal, int m_max, const Rat& lambda) {
  std::vector<ResidualReport> out;
  for (int m = -1; m <= m_max; ++m)
    for (int n_idx = -1; n_idx <= m; ++n_idx)
      out.push_back(report_from("cmn(m=" + itos(m) + ",n=" + itos(n_idx) + ")",
                                cmn_matrix(cal, m, n_idx, lambda)));
  return out;
}

}  // namespace frobjet
