#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "frobjet/builtins.hpp"
#include "frobjet/hierarchy.hpp"
#include "frobjet/virasoro.hpp"

using namespace frobjet;

namespace {

bool all_zero(const std::vector<ResidualReport>& rs) {
  for (const auto& r : rs)
    if (!r.is_zero) return false;
  return true;
}

Rat rising(const Rat& x, int k) {
  Rat p(1);
  for (int i = 0; i < k; ++i) p *= x + i;
  return p;
}

Rat random_rat(std::mt19937& gen, int span, int den) {
  Rat r(int(gen() % unsigned(2 * span + 1)) - span, int(gen() % unsigned(den)) + 1);
  r.canonicalize();
  return r;
}

QMatrix random_q(std::mt19937& gen, int n) {
  QMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.at(i, j) = random_rat(gen, 3, 3);
  return m;
}

}  // namespace

TEST_CASE("product recursion agrees with the normal-ordered expansion") {
  std::mt19937 gen(20260816);
  for (int trial = 0; trial < 4; ++trial) {
    int n = 2 + int(gen() % 3);
    QMatrix r = random_q(gen, n);
    std::vector<Rat> a;
    for (int i = 0; i < n; ++i) a.push_back(random_rat(gen, 4, 4));
    for (int m = -1; m <= 6; ++m) CHECK(pm_matrix(m, a, r) == pm_matrix_ordered(m, a, r));
  }
  // closed forms at the bottom of the ladder
  QMatrix r = random_q(gen, 3);
  std::vector<Rat> a = {Rat(1, 2), Rat(-1, 3), Rat(2)};
  CHECK(pm_matrix(-1, a, r) == QMatrix::identity(3));
  QMatrix p0 = r;
  for (int i = 0; i < 3; ++i) p0.at(i, i) += a[size_t(i)] - Rat(1, 2);
  CHECK(pm_matrix(0, a, r) == p0);
}

TEST_CASE("graded mask keeps exact charge differences only") {
  QMatrix m(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.at(i, j) = Rat(1 + i + 3 * j);
  std::vector<Rat> q = {Rat(0), Rat(1, 3), Rat(1)};
  QMatrix d0 = graded_part(m, q, Rat(0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(d0.at(i, j) == (i == j ? m.at(i, j) : Rat(0)));
  QMatrix d1 = graded_part(m, q, Rat(1));
  CHECK(d1.at(2, 0) == m.at(2, 0));
  CHECK(d1.at(0, 2) == Rat(0));
  CHECK(graded_part(m, q, Rat(1, 3)).at(1, 0) == m.at(1, 0));
  CHECK(graded_part(m, q, Rat(2)).is_zero());
}

TEST_CASE("point closed operators match the double-factorial table") {
  BuiltinModel b = builtin("point");
  Calibration cal = build_calibration(b.spec, 8);
  int L = 6;
  for (int m = -1; m <= 3; ++m) {
    VirasoroOp exp(1, L);
    for (int d = 0; d < L; ++d)
      if (m + d >= 0 && m + d < L) exp.td.at(exp.slot(0, d), exp.slot(0, m + d)) = rising(Rat(2 * d + 1, 2), m + 1);
    if (m == -1) exp.tt.at(0, 0) = Rat(1, 2);
    for (int d1 = 0; d1 <= m - 1; ++d1) {
      int d2 = m - 1 - d1;
      exp.dd.at(exp.slot(0, d1), exp.slot(0, d2)) =
          Rat(1, 2) * rising(Rat(1, 2), d1 + 1) * rising(Rat(1, 2), d2 + 1);
    }
    if (m == 0) exp.c0 = Rat(1, 16);
    CHECK(build_virasoro(cal, m, L).equal_through(exp, L));
  }
}

TEST_CASE("three-spin closed operators match the rising-factorial table") {
  BuiltinModel b = builtin("a2_3spin");
  Calibration cal = build_calibration(b.spec, 8);
  REQUIRE(cal.r_total().is_zero());
  int L = 6;
  for (int m = -1; m <= 3; ++m) {
    VirasoroOp exp(2, L);
    for (int c = 0; c < 2; ++c)
      for (int d = 0; d < L; ++d)
        if (m + d >= 0 && m + d < L)
          exp.td.at(exp.slot(c, d), exp.slot(c, m + d)) = rising(Rat(c + 1, 3) + d, m + 1);
    if (m == -1) {
      exp.tt.at(exp.slot(0, 0), exp.slot(1, 0)) = Rat(1, 2);
      exp.tt.at(exp.slot(1, 0), exp.slot(0, 0)) = Rat(1, 2);
    }
    for (int d1 = 0; d1 <= m - 1; ++d1) {
      int d2 = m - 1 - d1;
      // metric pairs coordinates of complementary charge
      exp.dd.at(exp.slot(0, d1), exp.slot(1, d2)) =
          Rat(1, 2) * rising(Rat(1, 3), d1 + 1) * rising(Rat(2, 3), d2 + 1);
      exp.dd.at(exp.slot(1, d1), exp.slot(0, d2)) =
          Rat(1, 2) * rising(Rat(2, 3), d1 + 1) * rising(Rat(1, 3), d2 + 1);
    }
    if (m == 0) exp.c0 = Rat(1, 9);
    CHECK(build_virasoro(cal, m, L).equal_through(exp, L));
  }
}

TEST_CASE("point open operators reduce to the boundary-ladder table") {
  BuiltinModel b = builtin("point_open");
  OpenCalibration oc = build_open_calibration(b.spec, 8);
  int L = 6;
  for (int m = -1; m <= 3; ++m) {
    VirasoroOp exp(2, L);
    for (int d = 0; d < L; ++d)
      if (m + d >= 0 && m + d < L) {
        exp.td.at(exp.slot(0, d), exp.slot(0, m + d)) = rising(Rat(2 * d + 1, 2), m + 1);
        exp.td.at(exp.slot(1, d), exp.slot(1, m + d)) =
            rat_factorial(unsigned(d + m + 1)) / rat_factorial(unsigned(d));
      }
    if (m == -1) {
      exp.tt.at(exp.slot(0, 0), exp.slot(0, 0)) = Rat(1, 2);
      exp.lt[size_t(exp.slot(1, 0))] = Rat(1);
    }
    for (int d1 = 0; d1 <= m - 1; ++d1) {
      int d2 = m - 1 - d1;
      exp.dd.at(exp.slot(0, d1), exp.slot(0, d2)) =
          Rat(1, 2) * rising(Rat(1, 2), d1 + 1) * rising(Rat(1, 2), d2 + 1);
    }
    if (m >= 1) exp.ld[size_t(exp.slot(1, m - 1))] = Rat(3) * rat_factorial(unsigned(m + 1)) / 4;
    if (m == 0) exp.c0 = Rat(1, 16) + Rat(3, 4);
    CHECK(build_open_virasoro(oc, m, L).equal_through(exp, L));
  }
}

TEST_CASE("operator brackets close the algebra on both closed models") {
  for (const char* id : {"point", "a2_3spin"}) {
    Calibration cal = build_calibration(builtin(id).spec, 8);
    int i_max = 3, w = 3;
    int L = w + 2 * i_max - 1 + 2;
    std::vector<VirasoroOp> ops;
    for (int k = -1; k <= 2 * i_max - 1; ++k) ops.push_back(build_virasoro(cal, k, L));
    CHECK(all_zero(commutator_residuals(ops, i_max, w)));
    // widening the tables must not change the windowed verdict
    std::vector<VirasoroOp> wide;
    for (int k = -1; k <= 2 * i_max - 1; ++k) wide.push_back(build_virasoro(cal, k, L + 2));
    CHECK(all_zero(commutator_residuals(wide, i_max, w)));
  }
}

TEST_CASE("open operator brackets close the algebra") {
  OpenCalibration oc = build_open_calibration(builtin("point_open").spec, 8);
  int i_max = 3, w = 3;
  int L = w + 2 * i_max - 1 + 2;
  std::vector<VirasoroOp> ops;
  for (int k = -1; k <= 2 * i_max - 1; ++k) ops.push_back(build_open_virasoro(oc, k, L));
  CHECK(all_zero(commutator_residuals(ops, i_max, w)));
  // a tampered table entry must surface with a located coefficient
  ops[2].td.at(0, 0) += Rat(1);
  auto bad = commutator_residuals(ops, i_max, w);
  bool hit = false;
  for (const auto& r : bad) hit = hit || (!r.is_zero && !r.location.empty());
  CHECK(hit);
}

TEST_CASE("closed-form bracket equals operator composition on monomials") {
  std::mt19937 gen(777);
  int nv = 2, levels = 2, sz = nv * levels;
  auto random_op = [&]() {
    VirasoroOp x(nv, levels);
    QMatrix a = random_q(gen, sz), c = random_q(gen, sz);
    x.tt = a + a.transpose();
    x.dd = c + c.transpose();
    x.td = random_q(gen, sz);
    for (int i = 0; i < sz; ++i) x.lt[size_t(i)] = Rat(int(gen() % 5) - 2);
    for (int i = 0; i < sz; ++i) x.ld[size_t(i)] = Rat(int(gen() % 5) - 2);
    x.c0 = Rat(int(gen() % 5) - 2);
    return x;
  };
  for (int trial = 0; trial < 3; ++trial) {
    VirasoroOp x = random_op(), y = random_op();
    VirasoroOp z = bracket(x, y);
    CHECK(op_report("self", bracket(x, x), levels).is_zero);
    for (const EpsPoly& p :
         {eps_mono(0, {}), eps_mono(0, {1}), eps_mono(-2, {0, 1, 1}), eps_mono(1, {2, 3, 3})}) {
      EpsPoly lhs = bracket_apply(x, y, p);
      EpsPoly rhs = apply_op(z, p);
      for (const auto& [k, v] : rhs) {
        auto it = lhs.find(k);
        REQUIRE(it != lhs.end());
        CHECK(it->second == v);
      }
      CHECK(lhs.size() == rhs.size());
    }
  }
}

TEST_CASE("brute-force and closed-form paths agree on real operators") {
  OpenCalibration oc = build_open_calibration(builtin("point_open").spec, 8);
  int L = 4;
  VirasoroOp x = build_open_virasoro(oc, 1, L);
  VirasoroOp y = build_open_virasoro(oc, -1, L);
  VirasoroOp z = bracket(x, y);
  for (const EpsPoly& p : {eps_mono(0, {}), eps_mono(0, {0, 1}), eps_mono(-1, {2, 2})}) {
    EpsPoly lhs = bracket_apply(x, y, p);
    EpsPoly rhs = apply_op(z, p);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("closed genus-zero residuals vanish for the built-ins") {
  for (const char* id : {"point", "a2_3spin", "p1"}) {
    Calibration cal = build_calibration(builtin(id).spec, 8);
    TopSolution top = topological_solution(cal, 3, 3);
    DescSeries f = descendent_potential(cal, top);
    CHECK(all_zero(virasoro_residuals(cal, f, 2, 1)));
  }
}

TEST_CASE("closed residual detects a tampered potential") {
  Calibration cal = build_calibration(builtin("point").spec, 8);
  TopSolution top = topological_solution(cal, 3, 3);
  DescSeries f = descendent_potential(cal, top);
  Jet x = Jet::coordinate(1, cal.model.trunc, 0);
  DescSeries f2 = f + DescSeries::from_jet(x * x * x, top.p_max, top.g_max);
  auto rs = virasoro_residuals(cal, f2, 2, 1);
  bool hit = false;
  for (const auto& r : rs) hit = hit || (!r.is_zero && !r.location.empty());
  CHECK(hit);
}

TEST_CASE("open genus-zero residuals vanish at the point") {
  ModelSpec m = builtin("point_open").spec;
  OpenCalibration oc = build_open_calibration(m, 8);
  Calibration cc = build_calibration(closed_slice(m), 8);
  TopSolution top_c = topological_solution(cc, 3, 3);
  DescSeries f_closed = descendent_potential(cc, top_c);
  TopSolution top_e = topological_solution(oc.ext, 3, 3);
  DescSeries f_open = open_descendent_potential(oc, top_e);
  auto rs = open_virasoro_residuals(oc, f_closed, f_open, 2, 1);
  CHECK(all_zero(rs));
  // boundary tamper trips the eps^-1 residual but not the embedded closed one
  Jet s = Jet::coordinate(2, oc.base.model.trunc, 1);
  DescSeries f2 = f_open + DescSeries::from_jet(s * s, f_open.level_cap(), f_open.deg_cap());
  auto bad = open_virasoro_residuals(oc, f_closed, f2, 2, 1);
  bool open_hit = false;
  for (const auto& r : bad) {
    if (r.name.rfind("open_virasoro", 0) == 0) open_hit = open_hit || !r.is_zero;
    if (r.name.rfind("closed_embedding", 0) == 0) CHECK(r.is_zero);
  }
  CHECK(open_hit);
}

TEST_CASE("vector constraints vanish at sampled weights") {
  std::vector<Rat> extra = {Rat(1, 3), Rat(-2, 5), Rat(5, 7), Rat(-3, 2)};
  for (const char* id : {"a2_3spin", "p1"}) {
    ModelSpec md = builtin(id).spec;
    Calibration cal = build_calibration(md, 8);
    TopSolution top = topological_solution(cal, 2, 3);
    int spread = md.integer_q_spread();
    auto fv = descendent_vector_potentials(cal, top, 2 + spread);
    std::vector<Rat> lambdas = extra;
    lambdas.push_back((Rat(3) - md.euler->delta) / 2);  // conformal point
    for (const Rat& lam : lambdas) CHECK(all_zero(flat_virasoro_residuals(cal, top, fv, 2, lam, 1)));
    // tampered vector potential must surface
    fv[0][0] += DescSeries::from_jet(Jet::coordinate(md.n, md.trunc, 0), top.p_max, top.g_max);
    CHECK_FALSE(all_zero(flat_virasoro_residuals(cal, top, fv, 2, extra[0], 1)));
  }
}

TEST_CASE("two-index contractions vanish identically in the weight") {
  std::vector<Rat> lambdas = {Rat(1, 3), Rat(-2, 5), Rat(5, 7), Rat(-3, 2), Rat(9, 4)};
  for (const char* id : {"a2_3spin", "p1"}) {
    ModelSpec md = builtin(id).spec;
    Calibration cal = build_calibration(md, 8);
    for (const Rat& lam : lambdas) CHECK(all_zero(cmn_residuals(cal, 3, lam)));
  }
}

TEST_CASE("residual reports carry the window and a location on failure") {
  VirasoroOp z(1, 3);
  CHECK(op_report("zero", z, 2).is_zero);
  z.td.at(z.slot(0, 1), z.slot(0, 0)) = Rat(5, 3);
  ResidualReport rep = op_report("probe", z, 2);
  CHECK_FALSE(rep.is_zero);
  CHECK(rep.location == "td[(0,1),(0,0)]");
  CHECK(rep.value == Rat(5, 3));
  CHECK(rep.valid_deg == 2);
  // defects above the window are out of scope by design
  VirasoroOp h(1, 3);
  h.td.at(h.slot(0, 2), h.slot(0, 2)) = Rat(1);
  CHECK(op_report("high", h, 2).is_zero);
}
