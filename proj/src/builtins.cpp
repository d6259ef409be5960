#include "frobjet/builtins.hpp"

#include <algorithm>

namespace frobjet {

namespace {

QMatrix offdiag_metric(int n) {
  QMatrix eta(n, n);
  for (int i = 0; i < n; ++i) eta.at(i, n - 1 - i) = Rat(1);
  return eta;
}

ModelSpec point_spec(int t) {
  ModelSpec m;
  m.id = "point";
  m.n = 1;
  m.trunc = t;
  QMatrix eta(1, 1);
  eta.at(0, 0) = Rat(1);
  m.eta = eta;
  Jet x = Jet::coordinate(1, t, 0);
  m.potential = {x * x * x * Rat(1, 6)};
  m.euler = EulerData{{Rat(0)}, {Rat(0)}, Rat(0)};
  m.base = {Rat(0)};
  return m;
}

ModelSpec point_open_spec(int t) {
  ModelSpec m = point_spec(t);
  m.id = "point_open";
  Jet x = Jet::coordinate(2, t, 0), s = Jet::coordinate(2, t, 1);
  m.open_ext = OpenExt{x * s + s * s * s * Rat(1, 6), Rat(0)};
  m.base = {Rat(0), Rat(0)};
  return m;
}

ModelSpec a2_spec(int t) {
  ModelSpec m;
  m.id = "a2_3spin";
  m.n = 2;
  m.trunc = t;
  m.eta = offdiag_metric(2);
  Jet x = Jet::coordinate(2, t, 0), y = Jet::coordinate(2, t, 1);
  m.potential = {x * x * y * Rat(1, 2) + y * y * y * y * Rat(1, 72)};
  m.euler = EulerData{{Rat(0), Rat(1, 3)}, {Rat(0), Rat(0)}, Rat(1, 3)};
  m.base = {Rat(0), Rat(0)};
  return m;
}

ModelSpec p1_spec(int t) {
  ModelSpec m;
  m.id = "p1";
  m.n = 2;
  m.trunc = t;
  m.eta = offdiag_metric(2);
  Jet x = Jet::coordinate(2, t, 0);
  m.potential = {x * x * Rat(1, 2) * Jet::coordinate(2, t, 1) +
                 exp_linear_jet(2, t, Rat(1), 1, Rat(1))};
  m.euler = EulerData{{Rat(0), Rat(1)}, {Rat(0), Rat(2)}, Rat(1)};
  m.base = {Rat(0), Rat(0)};
  return m;
}

ModelSpec p1_open_spec(int t, const Rat& a, const Rat& b, int sign) {
  ModelSpec m = p1_spec(t);
  m.id = "p1_open(" + rat_str(a) + "," + rat_str(b) + "," + (sign > 0 ? "+" : "-") + ")";
  // Base point shifted to s = -b so the boundary series has rational
  // coefficients; x2 is then the offset s + b.
  Jet x0 = Jet::coordinate(3, t, 0), x2 = Jet::coordinate(3, t, 2);
  Jet odd = Jet::zero(3, t);
  Rat a2 = a * a;
  Rat w(1);
  for (int j = 0; 2 * j + 1 <= t; ++j) {
    if (j > 0) w *= a2;
    Jet pw = x2;
    for (int i = 0; i < 2 * j; ++i) pw = pw * x2;
    odd += pw * (w / rat_factorial(unsigned(2 * j + 1)));
  }
  Jet fo = x0 * x2 - x0 * b +
           odd * exp_linear_jet(3, t, Rat(2 * sign), 1, Rat(1, 2));
  m.open_ext = OpenExt{fo, Rat(0)};
  m.base = {Rat(0), Rat(0), -b};
  return m;
}

ModelSpec p1_canonical_spec(int t, int k) {
  ModelSpec p1 = p1_spec(t);
  Jet u = Jet::coordinate(2, t, 0) +
          exp_linear_jet(2, t, Rat(k == 1 ? 2 : -2), 1, Rat(1, 2));
  ModelSpec m = canonical_open_solution(p1, u);
  m.id = "p1_canonical(" + std::to_string(k) + ")";
  return m;
}

void verify_derived_potential(const ModelSpec& m) {
  for (const ResidualReport& r : wdvv_residual(m))
    if (!r.is_zero)
      fail(Error::Kind::internal, m.id + ": shipped potential fails " + r.name);
  ResidualReport e = euler_residual(m);
  if (!e.is_zero)
    fail(Error::Kind::internal, m.id + ": shipped potential fails homogeneity");
}

}  // namespace

BuiltinModel builtin(const std::string& id, int jet_order) {
  BuiltinModel bm;
  auto t = [&](int rec) { return jet_order > 0 ? jet_order : rec; };
  if (id == "point") {
    bm.rec = {8, 10, 4, 4, 3};
    bm.spec = point_spec(t(bm.rec.jet_order));
  } else if (id == "point_open") {
    bm.rec = {8, 10, 4, 4, 3};
    bm.spec = point_open_spec(t(bm.rec.jet_order));
  } else if (id == "a2_3spin") {
    bm.rec = {8, 8, 3, 3, 3};
    bm.spec = a2_spec(t(bm.rec.jet_order));
    verify_derived_potential(bm.spec);
  } else if (id == "p1") {
    bm.rec = {6, 8, 3, 3, 2};
    bm.spec = p1_spec(t(bm.rec.jet_order));
  } else if (id.rfind("p1_open(", 0) == 0 && id.back() == ')') {
    std::string body = id.substr(8, id.size() - 9);
    std::vector<std::string> parts;
    size_t pos = 0;
    while (true) {
      size_t c = body.find(',', pos);
      parts.push_back(body.substr(pos, c == std::string::npos ? c : c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    if (parts.size() != 2 && parts.size() != 3)
      fail(Error::Kind::parse, "p1_open takes (a,b) or (a,b,sign): " + id);
    int sign = 1;
    if (parts.size() == 3) {
      if (parts[2] == "+")
        sign = 1;
      else if (parts[2] == "-")
        sign = -1;
      else
        fail(Error::Kind::parse, "p1_open sign must be + or -: " + id);
    }
    bm.rec = {6, 8, 3, 3, 2};
    bm.spec = p1_open_spec(t(bm.rec.jet_order), rat_parse(parts[0]), rat_parse(parts[1]), sign);
  } else if (id == "p1_canonical(1)" || id == "p1_canonical(2)") {
    bm.rec = {6, 8, 3, 3, 2};
    bm.spec = p1_canonical_spec(t(bm.rec.jet_order), id[13] - '0');
  } else {
    fail(Error::Kind::parse, "unknown built-in model '" + id + "'");
  }
  bm.spec.validate();
  return bm;
}

std::vector<std::string> builtin_ids() {
  return {
      "point",
      "point_open",
      "a2_3spin",
      "p1",
      "p1_open(1,0,+)",
      "p1_open(1,0,-)",
      "p1_open(2,1/2,+)",
      "p1_open(2,1/2,-)",
      "p1_open(0,0,+)",
      "p1_open(0,0,-)",
      "p1_open(0,3,+)",
      "p1_open(0,3,-)",
      "p1_canonical(1)",
      "p1_canonical(2)",
  };
}

}  // namespace frobjet
