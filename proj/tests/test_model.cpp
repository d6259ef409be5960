#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frobjet/builtins.hpp"
#include "frobjet/model.hpp"

using namespace frobjet;

namespace {

bool all_zero(const std::vector<ResidualReport>& rs) {
  for (const auto& r : rs)
    if (!r.is_zero) return false;
  return true;
}

}  // namespace

TEST_CASE("point model satisfies everything exactly") {
  ModelSpec m = builtin("point").spec;
  CHECK(all_zero(wdvv_residual(m)));
  CHECK(unit_checks(m).is_zero);
  EulerConstants ec;
  ResidualReport er = euler_residual(m, &ec);
  CHECK(er.is_zero);
  CHECK(ec.a.is_zero());
  CHECK(rat_is_zero(ec.c));
}

TEST_CASE("structure constants of the point are 1") {
  ModelSpec m = builtin("point").spec;
  auto c = structure_constants(m);
  REQUIRE(c.size() == 1);
  CHECK(c[0].at(0, 0).constant_term() == Rat(1));
  CHECK(c[0].at(0, 0) == Jet::constant(1, m.trunc, Rat(1)));
}

TEST_CASE("a2 model is associative and homogeneous") {
  // builtin() already verifies this at load time; double-check here.
  ModelSpec m = builtin("a2_3spin").spec;
  CHECK(all_zero(wdvv_residual(m)));
  CHECK(unit_checks(m).is_zero);
  CHECK(euler_residual(m).is_zero);
}

TEST_CASE("p1 model: wdvv, unit, and quadratic euler remainder") {
  ModelSpec m = builtin("p1", 8).spec;
  CHECK(all_zero(wdvv_residual(m)));
  CHECK(unit_checks(m).is_zero);
  EulerConstants ec;
  ResidualReport er = euler_residual(m, &ec);
  CHECK(er.is_zero);
  // E(F) - 2F = t1^2 for this model.
  CHECK(ec.a.at(0, 0) == Rat(1));
  CHECK(ec.a.at(0, 1) == Rat(0));
  CHECK(ec.a.at(1, 1) == Rat(0));
  CHECK(ec.b[0] == Rat(0));
  CHECK(ec.b[1] == Rat(0));
}

TEST_CASE("corrupted point potential is detected with a located coefficient") {
  ModelSpec m = builtin("point").spec;
  Jet x = Jet::coordinate(1, m.trunc, 0);
  m.potential[0] += x * x * x * x * Rat(1, 24);
  ResidualReport r = unit_checks(m);
  CHECK(!r.is_zero);
  CHECK(r.location.find("x0") != std::string::npos);
  CHECK(r.value == Rat(1));
}

TEST_CASE("point_open satisfies open wdvv and exact homogeneity") {
  ModelSpec m = builtin("point_open").spec;
  CHECK(all_zero(open_wdvv_residual(m)));
  CHECK(unit_checks(m).is_zero);
  EulerConstants ec;
  CHECK(euler_residual(m, &ec).is_zero);
  CHECK(rat_is_zero(ec.open_const));
  for (const Rat& v : ec.open_lin) CHECK(rat_is_zero(v));
}

TEST_CASE("every p1_open sample passes open wdvv") {
  for (const char* id : {"p1_open(1,0,+)", "p1_open(1,0,-)", "p1_open(2,1/2,+)",
                         "p1_open(0,0,+)", "p1_open(0,3,-)"}) {
    ModelSpec m = builtin(id).spec;
    CAPTURE(id);
    CHECK(all_zero(open_wdvv_residual(m)));
    CHECK(unit_checks(m).is_zero);
    CHECK(euler_residual(m).is_zero);
  }
}

TEST_CASE("canonical solutions coincide with the degenerate family members") {
  ModelSpec c1 = builtin("p1_canonical(1)").spec;
  ModelSpec f1 = builtin("p1_open(0,0,+)").spec;
  CHECK(c1.open_ext->fo == f1.open_ext->fo);
  ModelSpec c2 = builtin("p1_canonical(2)").spec;
  ModelSpec f2 = builtin("p1_open(0,0,-)").spec;
  CHECK(c2.open_ext->fo == f2.open_ext->fo);
}

TEST_CASE("canonical construction rejects a non-canonical coordinate") {
  ModelSpec p1 = builtin("p1").spec;
  Jet u = Jet::coordinate(2, p1.trunc, 0) + Jet::coordinate(2, p1.trunc, 1);
  CHECK_THROWS_AS(canonical_open_solution(p1, u), Error);
}

TEST_CASE("open unit violation is rejected") {
  ModelSpec m = builtin("point_open").spec;
  Jet t = Jet::coordinate(2, m.trunc, 0), s = Jet::coordinate(2, m.trunc, 1);
  m.open_ext->fo += t * t * s;
  ResidualReport r = unit_checks(m);
  CHECK(!r.is_zero);
  CHECK_THROWS_AS(open_to_extension(m), Error);
}

TEST_CASE("extension of point_open is a flat F-manifold") {
  ModelSpec ext = open_to_extension(builtin("point_open").spec);
  CHECK(ext.n == 2);
  CHECK(!ext.frobenius());
  CHECK(all_zero(wdvv_residual(ext)));
  CHECK(unit_checks(ext).is_zero);
  CHECK(euler_residual(ext).is_zero);
  // Charges extend by (1+delta)/2.
  CHECK(ext.euler->q[1] == Rat(1, 2));
}

TEST_CASE("extension of a p1_open sample is a flat F-manifold") {
  ModelSpec ext = open_to_extension(builtin("p1_open(2,1/2,-)").spec);
  CHECK(ext.n == 3);
  CHECK(all_zero(wdvv_residual(ext)));
  CHECK(unit_checks(ext).is_zero);
  CHECK(euler_residual(ext).is_zero);
  CHECK(ext.euler->q[2] == Rat(1));
}

TEST_CASE("unknown builtin id fails with a parse error") {
  CHECK_THROWS_AS(builtin("p2"), Error);
  CHECK_THROWS_AS(builtin("p1_open(1,0,?)"), Error);
}
