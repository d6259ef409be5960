#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frobjet/builtins.hpp"
#include "frobjet/calibration.hpp"

using namespace frobjet;

namespace {

bool all_zero(const std::vector<ResidualReport>& rs) {
  for (const auto& r : rs)
    if (!r.is_zero) return false;
  return true;
}

void check_standard_residuals(const Calibration& c) {
  CHECK(all_zero(calibration_inverse_residuals(c)));
  CHECK(all_zero(calibration_pde_residuals(c)));
  CHECK(all_zero(calibration_homogeneity_residuals(c)));
}

Rat fact(int n) { return rat_factorial(unsigned(n)); }

}  // namespace

TEST_CASE("exponent recursion: point and a2 have no monodromy data") {
  for (const char* id : {"point", "a2_3spin"}) {
    ModelSpec m = builtin(id).spec;
    auto [r, g] = compute_r_g(m, 5);
    for (const QMatrix& x : r) CHECK(x.is_zero());
    for (const QMatrix& x : g) CHECK(x.is_zero());
  }
}

TEST_CASE("exponent recursion: p1 oracle values") {
  ModelSpec m = builtin("p1").spec;
  auto [r, g] = compute_r_g(m, 4);
  REQUIRE(r.size() == 4);
  // R_1 has the single charge-compatible slot.
  CHECK(r[0].at(1, 0) == Rat(2));
  CHECK(r[0].at(0, 0) == Rat(0));
  CHECK(r[0].at(0, 1) == Rat(0));
  CHECK(r[0].at(1, 1) == Rat(0));
  CHECK(r[1].is_zero());
  CHECK(r[2].is_zero());
  // Gauge tail, solved by hand from the ladder.
  CHECK(g[0].at(0, 0) == Rat(0));
  CHECK(g[0].at(0, 1) == Rat(0));
  CHECK(g[0].at(1, 0) == Rat(-1));
  CHECK(g[0].at(1, 1) == Rat(0));
  CHECK(g[1].at(0, 0) == Rat(-1));
  CHECK(g[1].at(1, 1) == Rat(1));
  CHECK(g[1].at(0, 1) == Rat(0));
  CHECK(g[1].at(1, 0) == Rat(0));
  CHECK(g[2].at(0, 1) == Rat(2));
  CHECK(g[2].at(1, 0) == Rat(-1, 2));
  CHECK(g[2].at(0, 0) == Rat(0));
  CHECK(g[2].at(1, 1) == Rat(0));
}

TEST_CASE("point calibration: both families are t^{d+1}/(d+1)!") {
  ModelSpec m = builtin("point").spec;
  Calibration c = build_calibration(m, 5);
  CHECK(c.r.empty());
  CHECK(c.frobenius_symmetric);
  Jet x = Jet::coordinate(1, m.trunc, 0);
  for (int d = -1; d <= 5; ++d) CHECK(c.upper_at(d) == c.lower_at(d));
  for (int d = 0; d <= 5; ++d) {
    Jet expect = Jet::constant(1, m.trunc, Rat(1) / fact(d + 1));
    for (int k = 0; k < d + 1; ++k) expect = expect * x;
    CHECK(c.upper_at(d).at(0, 0) == expect);
  }
  check_standard_residuals(c);
}

TEST_CASE("first lowered matrix integrates the structure constants") {
  ModelSpec m = builtin("p1").spec;
  Calibration c = build_calibration(m, 2);
  auto cs = structure_constants(c.model);
  for (int g = 0; g < m.n; ++g) CHECK(c.lower_at(0).diff(g) == cs[size_t(g)]);
  // Column 0 of the d=0 matrix is the coordinates themselves.
  for (int a = 0; a < m.n; ++a)
    CHECK(c.lower_at(0).at(a, 0) == Jet::coordinate(m.n, m.trunc, a));
}

TEST_CASE("p1 calibration: residuals, symmetry, initial values") {
  ModelSpec m = builtin("p1", 8).spec;
  Calibration c = build_calibration(m, 6);
  REQUIRE(c.r.size() == 1);
  CHECK(c.r[0].at(1, 0) == Rat(2));
  CHECK(c.frobenius_symmetric);
  CHECK(all_zero(calibration_symmetry_residuals(c)));
  check_standard_residuals(c);
  // Base-point value of the raised d=0 matrix is -G_1^T.
  CHECK(c.upper_at(0).at(0, 1).constant_term() == Rat(1));
  CHECK(c.upper_at(0).at(0, 0).constant_term() == Rat(0));
  CHECK(c.upper_at(0).at(1, 0).constant_term() == Rat(0));
  CHECK(c.upper_at(0).at(1, 1).constant_term() == Rat(0));
  // mu = q - delta/2.
  CHECK(c.mu[0] == Rat(-1, 2));
  CHECK(c.mu[1] == Rat(1, 2));
}

TEST_CASE("a2 calibration: no exponents, all residuals vanish") {
  ModelSpec m = builtin("a2_3spin").spec;
  Calibration c = build_calibration(m, 6);
  CHECK(c.r.empty());
  CHECK(c.frobenius_symmetric);
  check_standard_residuals(c);
  CHECK(all_zero(calibration_symmetry_residuals(c)));
}

TEST_CASE("depth guard throws a structured error") {
  Calibration c = build_calibration(builtin("point").spec, 2);
  CHECK_THROWS_AS((void)c.upper_at(3), Error);
  CHECK_THROWS_AS((void)c.lower_at(-2), Error);
  try {
    (void)c.upper_at(3);
  } catch (const Error& e) {
    CHECK(e.kind == Error::Kind::depth);
  }
}

TEST_CASE("non-integrable vector potential is rejected with a location") {
  // n = 3, unit direction fine, but the two nontrivial multiplication
  // matrices do not commute, so the degree-2 flatness equation must fail.
  ModelSpec m;
  m.id = "bad_assoc";
  m.n = 3;
  m.trunc = 5;
  m.base = {Rat(0), Rat(0), Rat(0)};
  int T = m.trunc;
  Jet t1 = Jet::coordinate(3, T, 0), t2 = Jet::coordinate(3, T, 1), t3 = Jet::coordinate(3, T, 2);
  m.potential = {t1 * t1 * Rat(1, 2) + t2 * t3, t1 * t2, t1 * t3};
  std::vector<QMatrix> r, g(8, QMatrix(3, 3));
  try {
    integrate_calibration(m, r, g, 2);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind == Error::Kind::composition);
    CHECK(std::string(e.what()).find("flatness") != std::string::npos);
    CHECK(std::string(e.what()).find("x") != std::string::npos);
  }
}

TEST_CASE("wrong gauge tail shows up in the homogeneity residual") {
  ModelSpec m = builtin("p1").spec;
  auto [r, g] = compute_r_g(m, 4);
  g[0].at(0, 0) += Rat(1);
  Calibration c = integrate_calibration(m, r, g, 3);
  CHECK(all_zero(calibration_pde_residuals(c)));  // still a valid solution family
  CHECK(!all_zero(calibration_homogeneity_residuals(c)));
}

TEST_CASE("point_open: extension and boundary row") {
  ModelSpec m = builtin("point_open").spec;
  OpenCalibration oc = build_open_calibration(m, 5);
  CHECK(oc.ext.r.empty());
  for (const QMatrix& x : oc.ext.g) CHECK(x.is_zero());
  int T = m.trunc;
  Jet t = Jet::coordinate(2, T, 0), s = Jet::coordinate(2, T, 1);
  CHECK(oc.phi(0, -1) == Jet::zero(2, T));
  CHECK(oc.phi(1, -1) == Jet::constant(2, T, Rat(1)));
  CHECK(oc.phi(0, 0) == s);
  CHECK(oc.phi(1, 0) == t + s * s * Rat(1, 2));
  CHECK(all_zero(open_calibration_residuals(oc)));
  CHECK(oc.mu_tilde()[0] == Rat(0));
  CHECK(oc.mu_tilde()[1] == Rat(1, 2));
}

TEST_CASE("p1 open samples: boundary row axioms hold") {
  for (const char* id : {"p1_open(1,0,+)", "p1_open(2,1/2,-)", "p1_canonical(1)"}) {
    ModelSpec m = builtin(id).spec;
    OpenCalibration oc = build_open_calibration(m, 4);
    CHECK(all_zero(open_calibration_residuals(oc)));
    // Exponent blocks: closed part survives, boundary column vanishes.
    QMatrix rt = oc.r_tilde_at(1);
    CHECK(rt.at(1, 0) == Rat(2));
    CHECK(rt.at(0, 2) == Rat(0));
    CHECK(rt.at(1, 2) == Rat(0));
    CHECK(rt.at(2, 2) == Rat(0));
    CHECK(oc.mu_tilde()[2] == Rat(1, 2));
  }
}

TEST_CASE("boundary relabeling: nonzero base offset in the s-direction") {
  ModelSpec m = builtin("p1_open(0,3,+)").spec;
  CHECK(m.base[2] == Rat(-3));
  OpenCalibration oc = build_open_calibration(m, 4);
  // The boundary coordinate is renamed so its base value becomes 0.
  CHECK(oc.ext.model.base[2] == Rat(0));
  int T = m.trunc;
  CHECK(oc.phi(0, 0) == Jet::coordinate(3, T, 2));
  CHECK(all_zero(open_calibration_residuals(oc)));
}

TEST_CASE("tampered base calibration fails the extension block checks") {
  ModelSpec m = builtin("point_open").spec;
  Calibration base = build_calibration(m, 4);
  base.upper[2].at(0, 0) += Jet::constant(1, m.trunc, Rat(1));
  ModelSpec em = open_to_extension(m);
  CHECK_THROWS_AS((void)extend_calibration(base, em), Error);
  try {
    (void)extend_calibration(base, em);
  } catch (const Error& e) {
    CHECK(e.kind == Error::Kind::gauge);
  }
}
