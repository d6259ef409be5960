#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "frobjet/builtins.hpp"
#include "frobjet/hierarchy.hpp"

using namespace frobjet;

namespace {

bool all_zero(const std::vector<ResidualReport>& rs) {
  for (const auto& r : rs)
    if (!r.is_zero) return false;
  return true;
}

}  // namespace

TEST_CASE("tilde variables carry the unit-direction shift") {
  std::vector<Rat> base = {Rat(2)};
  DescSeries tv = tilde_var(1, 2, 2, 4, base, 0, 1);
  CHECK(tv.coeff0() == Jet::constant(1, 4, Rat(-1)));
  CHECK(tv.coeff(DMono{{0, 1}}) == Jet::constant(1, 4, Rat(1)));
  DescSeries t0 = tilde_var(1, 2, 2, 4, base, 0, 0);
  CHECK(t0.coeff0() == Jet::coordinate(1, 4, 0) + Jet::constant(1, 4, Rat(2)));
  DescSeries t2 = tilde_var(1, 2, 2, 4, base, 0, 2);
  CHECK(t2.coeff0() == Jet::zero(1, 4));
  CHECK(t2.coeff(DMono{{1, 1}}) == Jet::constant(1, 4, Rat(1)));
}

TEST_CASE("point topological solution matches the classical fixed point") {
  ModelSpec m = builtin("point").spec;
  Calibration c = build_calibration(m, 6);
  TopSolution top = topological_solution(c, 3, 3);
  const DescSeries& v = top.v[0];
  Jet x = Jet::coordinate(1, m.trunc, 0);
  CHECK(v.valid_deg() == 3);
  CHECK(v.coeff0() == x);
  // v = sum_k t_k v^k / k! termwise: the t_1 chain is geometric in x.
  CHECK(v.coeff(DMono{{0, 1}}) == x);
  CHECK(v.coeff(DMono{{0, 2}}) == x);
  CHECK(v.coeff(DMono{{0, 3}}) == x);
  CHECK(v.coeff(DMono{{1, 1}}) == x * x * Rat(1, 2));
  CHECK(v.coeff(DMono{{1, 2}}) == x * x * x * Rat(1, 2));
  CHECK(v.coeff(DMono{{0, 1}, {1, 1}}) == x * x * Rat(3, 2));
  CHECK(v.coeff(DMono{{2, 1}}) == x * x * x * Rat(1, 6));
  CHECK(all_zero(flow_residuals(c, top)));
  CHECK(string_residual(c, top).is_zero);
  CHECK(dilaton_residual(c, top).is_zero);
}

TEST_CASE("point omega family: closed forms, recursions, unit direction") {
  ModelSpec m = builtin("point").spec;
  Calibration c = build_calibration(m, 6);
  Jet x = Jet::coordinate(1, m.trunc, 0);
  CHECK(omega_pq(c, 0, 0).at(0, 0) == x);
  CHECK(omega_pq(c, 1, 0).at(0, 0) == x * x * Rat(1, 2));
  CHECK(omega_pq(c, 1, 1).at(0, 0) == x * x * x * Rat(1, 3));
  CHECK(all_zero(omega_pq_residuals(c, 3, 3)));
}

TEST_CASE("point descendent potential reproduces the classical coefficients") {
  ModelSpec m = builtin("point").spec;
  Calibration c = build_calibration(m, 6);
  TopSolution top = topological_solution(c, 3, 3);
  DescSeries f = descendent_potential(c, top);
  // Quartic and lower data of the full genus zero series on the point.
  CHECK(f.coeff0().coeff({3}) == Rat(1, 6));
  CHECK(f.coeff(DMono{{0, 1}}).coeff({3}) == Rat(1, 6));
  CHECK(f.coeff(DMono{{1, 1}}).coeff({4}) == Rat(1, 24));
  CHECK(f.coeff(DMono{{0, 2}}).coeff({3}) == Rat(1, 6));
  CHECK(potential_string_residual(c, top, f).is_zero);
  CHECK(potential_base_residual(c, f).is_zero);
  CHECK(all_zero(trr_residuals(c, f, 2, 1, 1)));
}

TEST_CASE("point vector potentials agree with the metric gradient") {
  ModelSpec m = builtin("point").spec;
  Calibration c = build_calibration(m, 6);
  TopSolution top = topological_solution(c, 3, 3);
  auto fv = descendent_vector_potentials(c, top, 2);
  CHECK(all_zero(vector_potential_residuals(c, top, fv)));
  DescSeries f = descendent_potential(c, top);
  CHECK(all_zero(gradient_consistency_residuals(c, f, fv)));
  CHECK(all_zero(omega_top_symmetry_residuals(c, top, 6, 7)));
}

TEST_CASE("negative vector potential rows alternate in sign") {
  ModelSpec m = builtin("point").spec;
  Calibration c = build_calibration(m, 6);
  TopSolution top = topological_solution(c, 3, 2);
  Jet x = Jet::coordinate(1, m.trunc, 0);
  DescSeries r1 = vector_potential_negative(c, top, 0, -1);
  CHECK(r1.coeff0() == x);
  DescSeries r2 = vector_potential_negative(c, top, 0, -2);
  CHECK(r2.coeff0() == Jet::constant(1, m.trunc, Rat(1)));
  CHECK(r2.coeff(DMono{{0, 1}}) == Jet::constant(1, m.trunc, Rat(-1)));
  DescSeries r3 = vector_potential_negative(c, top, 0, -3);
  CHECK(r3.coeff(DMono{{1, 1}}) == Jet::constant(1, m.trunc, Rat(1)));
}

TEST_CASE("a2 hierarchy battery") {
  ModelSpec m = builtin("a2_3spin").spec;
  Calibration c = build_calibration(m, 6);
  TopSolution top = topological_solution(c, 2, 2);
  CHECK(all_zero(flow_residuals(c, top)));
  CHECK(string_residual(c, top).is_zero);
  CHECK(dilaton_residual(c, top).is_zero);
  CHECK(all_zero(omega_pq_residuals(c, 2, 2)));
  DescSeries f = descendent_potential(c, top);
  CHECK(potential_string_residual(c, top, f).is_zero);
  CHECK(potential_base_residual(c, f).is_zero);
  CHECK(all_zero(trr_residuals(c, f, 2, 1, 1)));
  auto fv = descendent_vector_potentials(c, top, 2);
  CHECK(all_zero(vector_potential_residuals(c, top, fv)));
  CHECK(all_zero(gradient_consistency_residuals(c, f, fv)));
  CHECK(all_zero(omega_top_symmetry_residuals(c, top, 4, 11)));
}

TEST_CASE("p1 hierarchy battery") {
  ModelSpec m = builtin("p1").spec;
  Calibration c = build_calibration(m, 4);
  TopSolution top = topological_solution(c, 2, 2);
  CHECK(all_zero(flow_residuals(c, top)));
  CHECK(string_residual(c, top).is_zero);
  CHECK(dilaton_residual(c, top).is_zero);
  DescSeries f = descendent_potential(c, top);
  CHECK(potential_string_residual(c, top, f).is_zero);
  CHECK(potential_base_residual(c, f).is_zero);
  CHECK(all_zero(trr_residuals(c, f, 1, 1, 1)));
  auto fv = descendent_vector_potentials(c, top, 2);
  CHECK(all_zero(vector_potential_residuals(c, top, fv)));
  CHECK(all_zero(gradient_consistency_residuals(c, f, fv)));
  CHECK(all_zero(omega_top_symmetry_residuals(c, top, 3, 5)));
}

TEST_CASE("flat vector calibration refuses the scalar potential") {
  ModelSpec m = to_flat_f(builtin("a2_3spin").spec);
  Calibration c = build_calibration(m, 5);
  CHECK(!c.frobenius_symmetric);
  TopSolution top = topological_solution(c, 2, 2);
  CHECK(all_zero(flow_residuals(c, top)));
  CHECK(string_residual(c, top).is_zero);
  CHECK_THROWS_AS((void)descendent_potential(c, top), Error);
  try {
    (void)descendent_potential(c, top);
  } catch (const Error& e) {
    CHECK(e.kind == Error::Kind::gauge);
  }
  auto fv = descendent_vector_potentials(c, top, 2);
  CHECK(all_zero(vector_potential_residuals(c, top, fv)));
  CHECK(all_zero(omega_top_symmetry_residuals(c, top, 4, 3)));
}

TEST_CASE("point open potential: recursion, base window, boundary chain") {
  ModelSpec m = builtin("point_open").spec;
  OpenCalibration oc = build_open_calibration(m, 6);
  TopSolution ext_top = topological_solution(oc.ext, 3, 3);
  ModelSpec mc = closed_slice(m);
  Calibration cc = build_calibration(mc, 6);
  TopSolution ct = topological_solution(cc, 3, 3);
  // The closed components of the extended solution are the closed solution.
  CHECK(ct.v[0].lift(2, {0}, 3, 3, m.trunc) == ext_top.v[0]);
  DescSeries fo = open_descendent_potential(oc, ext_top);
  DescSeries fc = descendent_potential(cc, ct);
  CHECK(all_zero(open_trr_residuals(oc, ext_top, fc, fo)));
  CHECK(open_potential_base_residual(oc, fo).is_zero);
  CHECK(all_zero(s_chain_residuals(fo, 1, 3)));
}

TEST_CASE("p1 open sample: boundary recursion holds") {
  ModelSpec m = builtin("p1_open(1,0,+)").spec;
  OpenCalibration oc = build_open_calibration(m, 4);
  TopSolution ext_top = topological_solution(oc.ext, 2, 2);
  ModelSpec mc = closed_slice(m);
  Calibration cc = build_calibration(mc, 4);
  TopSolution ct = topological_solution(cc, 2, 2);
  DescSeries fo = open_descendent_potential(oc, ext_top);
  DescSeries fc = descendent_potential(cc, ct);
  CHECK(all_zero(open_trr_residuals(oc, ext_top, fc, fo)));
  CHECK(open_potential_base_residual(oc, fo).is_zero);
}

TEST_CASE("tampered potential is caught with a located coefficient") {
  ModelSpec m = builtin("point").spec;
  Calibration c = build_calibration(m, 6);
  TopSolution top = topological_solution(c, 3, 3);
  DescSeries f = descendent_potential(c, top);
  Jet x = Jet::coordinate(1, m.trunc, 0);
  DescSeries bad = f + DescSeries::from_jet(x * x * x * x, 3, 3);
  ResidualReport s = potential_string_residual(c, top, bad);
  CHECK(!s.is_zero);
  CHECK(!s.location.empty());
  CHECK(!rat_is_zero(s.value));
  CHECK(!potential_base_residual(c, bad).is_zero);
  CHECK(!all_zero(trr_residuals(c, bad, 1, 0, 0)));
  DescSeries bad2 = f + DescSeries::level_var(1, 3, 3, m.trunc, 0, 2);
  CHECK(!potential_string_residual(c, top, bad2).is_zero);
}

TEST_CASE("tampered open potential is caught") {
  ModelSpec m = builtin("point_open").spec;
  OpenCalibration oc = build_open_calibration(m, 4);
  TopSolution ext_top = topological_solution(oc.ext, 2, 2);
  ModelSpec mc = closed_slice(m);
  Calibration cc = build_calibration(mc, 4);
  TopSolution ct = topological_solution(cc, 2, 2);
  DescSeries fo = open_descendent_potential(oc, ext_top);
  DescSeries fc = descendent_potential(cc, ct);
  DescSeries s1 = DescSeries::level_var(2, 2, 2, m.trunc, 1, 1);
  DescSeries bad = fo + s1 * s1;
  CHECK(!all_zero(open_trr_residuals(oc, ext_top, fc, bad)));
  CHECK(!all_zero(s_chain_residuals(bad, 1, 1)));
}

TEST_CASE("window guards throw structured errors") {
  ModelSpec m = builtin("point").spec;
  Calibration c = build_calibration(m, 4);
  CHECK_THROWS_AS((void)topological_solution(c, 3, 3), Error);
  CHECK_THROWS_AS((void)topological_solution(c, 0, 2), Error);
  TopSolution top = topological_solution(c, 3, 1);
  CHECK_THROWS_AS((void)descendent_potential(c, top), Error);
  CHECK_THROWS_AS((void)descendent_vector_potentials(c, top, 3), Error);
  try {
    (void)topological_solution(c, 3, 3);
  } catch (const Error& e) {
    CHECK(e.kind == Error::Kind::depth);
  }
}

TEST_CASE("sampled symmetry checks are deterministic in the seed") {
  ModelSpec m = builtin("point").spec;
  Calibration c = build_calibration(m, 6);
  TopSolution top = topological_solution(c, 3, 2);
  auto r1 = omega_top_symmetry_residuals(c, top, 5, 42);
  auto r2 = omega_top_symmetry_residuals(c, top, 5, 42);
  REQUIRE(r1.size() == r2.size());
  for (size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].name == r2[i].name);
}
