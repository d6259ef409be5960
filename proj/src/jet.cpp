#include "frobjet/jet.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

namespace frobjet {

namespace {

uint64_t pack(const std::array<uint8_t, kMaxJetVars>& e) {
  uint64_t k = 0;
  for (int i = 0; i < kMaxJetVars; ++i) k |= uint64_t(e[i]) << (8 * i);
  return k;
}

void gen_degree(int nv, int var, int left, std::array<uint8_t, kMaxJetVars>& cur,
                std::vector<std::array<uint8_t, kMaxJetVars>>& out) {
  if (var == nv - 1) {
    cur[var] = uint8_t(left);
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int e = left; e >= 0; --e) {  // lex order: leading exponent descending
    cur[var] = uint8_t(e);
    gen_degree(nv, var + 1, left - e, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

MonoTable::MonoTable(int nv, int trunc) : nv_(nv), trunc_(trunc) {
  deg_begin_.push_back(0);
  std::array<uint8_t, kMaxJetVars> cur{};
  for (int d = 0; d <= trunc; ++d) {
    gen_degree(nv, 0, d, cur, exps_);
    deg_begin_.push_back(exps_.size());
  }
  deg_.resize(exps_.size());
  index_.reserve(exps_.size());
  for (size_t i = 0; i < exps_.size(); ++i) {
    int d = 0;
    for (int v = 0; v < nv; ++v) d += exps_[i][v];
    deg_[i] = d;
    index_.emplace_back(pack(exps_[i]), uint32_t(i));
  }
  std::sort(index_.begin(), index_.end());
}

std::optional<size_t> MonoTable::find(const std::array<uint8_t, kMaxJetVars>& e) const {
  uint64_t k = pack(e);
  auto it = std::lower_bound(index_.begin(), index_.end(), std::make_pair(k, uint32_t(0)));
  if (it == index_.end() || it->first != k) return std::nullopt;
  return size_t(it->second);
}

const MonoTable& MonoTable::get(int num_vars, int trunc) {
  if (num_vars < 1 || num_vars > kMaxJetVars)
    fail(Error::Kind::dimension,
         "jet engine supports 1.." + std::to_string(kMaxJetVars) + " variables, got " +
             std::to_string(num_vars));
  if (trunc < 0 || trunc > 200) fail(Error::Kind::dimension, "unreasonable jet truncation order");
  static std::map<std::pair<int, int>, MonoTable> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lk(mu);
  auto key = std::make_pair(num_vars, trunc);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, MonoTable(num_vars, trunc)).first;
  return it->second;
}

Jet::Jet(const MonoTable& t, int valid) : tab_(&t), valid_(valid), c_(t.size(), Rat(0)) {}

Jet Jet::zero(int num_vars, int trunc) { return Jet(MonoTable::get(num_vars, trunc), trunc); }

Jet Jet::constant(int num_vars, int trunc, const Rat& c) {
  Jet j = zero(num_vars, trunc);
  j.c_[0] = c;
  return j;
}

Jet Jet::coordinate(int num_vars, int trunc, int var) {
  Jet j = zero(num_vars, trunc);
  std::vector<int> e(num_vars, 0);
  e[var] = 1;
  j.coeff_ref(e) = 1;
  return j;
}

static std::array<uint8_t, kMaxJetVars> to_arr(const std::vector<int>& exps, int nv) {
  if (int(exps.size()) != nv) fail(Error::Kind::dimension, "exponent vector length mismatch");
  std::array<uint8_t, kMaxJetVars> a{};
  for (int i = 0; i < nv; ++i) {
    if (exps[i] < 0 || exps[i] > 255) fail(Error::Kind::dimension, "exponent out of range");
    a[i] = uint8_t(exps[i]);
  }
  return a;
}

const Rat& Jet::coeff(const std::vector<int>& exps) const {
  static const Rat zero_(0);
  auto idx = tab_->find(to_arr(exps, tab_->num_vars()));
  if (!idx) return zero_;
  return c_[*idx];
}

Rat& Jet::coeff_ref(const std::vector<int>& exps) {
  auto idx = tab_->find(to_arr(exps, tab_->num_vars()));
  if (!idx) fail(Error::Kind::depth, "monomial beyond jet truncation");
  return c_[*idx];
}

Jet& Jet::restrict_valid(int v) {
  valid_ = std::min(valid_, v);
  return *this;
}

bool Jet::is_zero_up_to_valid() const {
  if (valid_ < 0) return true;
  size_t end = tab_->deg_end(valid_);
  for (size_t i = 0; i < end; ++i)
    if (!rat_is_zero(c_[i])) return false;
  return true;
}

std::optional<JetTerm> Jet::first_nonzero() const {
  if (valid_ < 0) return std::nullopt;
  size_t end = tab_->deg_end(valid_);
  for (size_t i = 0; i < end; ++i)
    if (!rat_is_zero(c_[i])) {
      JetTerm t;
      t.exps.assign(tab_->exps(i).begin(), tab_->exps(i).begin() + tab_->num_vars());
      t.coeff = c_[i];
      return t;
    }
  return std::nullopt;
}

bool Jet::operator==(const Jet& o) const {
  if (!tab_ || !o.tab_) return tab_ == o.tab_;
  if (tab_->num_vars() != o.tab_->num_vars()) return false;
  int v = std::min(valid_, o.valid_);
  if (v < 0) return true;
  size_t end = std::min(tab_->deg_end(std::min(v, tab_->trunc())),
                        o.tab_->deg_end(std::min(v, o.tab_->trunc())));
  // Same num_vars and graded-lex enumeration: indices agree on the shared range.
  for (size_t i = 0; i < end; ++i)
    if (c_[i] != o.c_[i]) return false;
  return true;
}

bool Jet::identical(const Jet& o) const {
  return tab_ == o.tab_ && valid_ == o.valid_ && c_ == o.c_;
}

Jet& Jet::operator+=(const Jet& o) {
  if (tab_ != o.tab_) fail(Error::Kind::dimension, "jet table mismatch in +");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  valid_ = std::min(valid_, o.valid_);
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (tab_ != o.tab_) fail(Error::Kind::dimension, "jet table mismatch in -");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  valid_ = std::min(valid_, o.valid_);
  return *this;
}

Jet& Jet::operator*=(const Rat& s) {
  for (auto& x : c_) x *= s;
  return *this;
}

Jet Jet::operator-() const {
  Jet r(*this);
  for (auto& x : r.c_) x = -x;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (a.table().num_vars() != b.table().num_vars() || a.table().trunc() != b.table().trunc())
    fail(Error::Kind::dimension, "jet table mismatch in *");
  const MonoTable& t = a.table();
  Jet r = Jet::zero(t.num_vars(), t.trunc());
  r.restrict_valid(std::min(a.valid_order(), b.valid_order()));
  int trunc = t.trunc();
  for (size_t ia = 0; ia < t.size(); ++ia) {
    const Rat& ca = a.coeff_idx(ia);
    if (rat_is_zero(ca)) continue;
    int da = t.degree(ia);
    size_t bend = t.deg_end(trunc - da);
    for (size_t ib = 0; ib < bend; ++ib) {
      const Rat& cb = b.coeff_idx(ib);
      if (rat_is_zero(cb)) continue;
      std::array<uint8_t, kMaxJetVars> e{};
      for (int v = 0; v < kMaxJetVars; ++v) e[v] = uint8_t(t.exps(ia)[v] + t.exps(ib)[v]);
      auto idx = t.find(e);
      r.coeff_idx(*idx) += ca * cb;
    }
  }
  return r;
}

Jet jet_diff(const Jet& a, int var) {
  const MonoTable& t = a.table();
  Jet r(t, std::max(a.valid_order() - 1, -1));
  for (size_t i = 0; i < t.size(); ++i) {
    if (rat_is_zero(a.c_[i])) continue;
    int e = t.exps(i)[var];
    if (e == 0) continue;
    auto ex = t.exps(i);
    ex[var] = uint8_t(e - 1);
    r.c_[*t.find(ex)] = a.c_[i] * e;
  }
  return r;
}

Jet jet_antideriv(const Jet& a, int var) {
  const MonoTable& t = a.table();
  Jet r(t, std::min(a.valid_order() + 1, t.trunc()));
  for (size_t i = 0; i < t.size(); ++i) {
    if (rat_is_zero(a.c_[i])) continue;
    auto ex = t.exps(i);
    if (t.degree(i) + 1 > t.trunc()) continue;
    ex[var] = uint8_t(ex[var] + 1);
    r.c_[*t.find(ex)] = a.c_[i] / int(ex[var]);
  }
  return r;
}

Jet exp_linear_jet(int num_vars, int trunc, const Rat& c, int var, const Rat& scale) {
  Jet j = Jet::zero(num_vars, trunc);
  std::vector<int> e(num_vars, 0);
  Rat term = c;
  for (int k = 0; k <= trunc; ++k) {
    e[var] = k;
    j.coeff_ref(e) = term;
    term *= scale;
    term /= (k + 1);
  }
  return j;
}

Jet jet_compose(const Jet& a, const std::vector<Jet>& args) {
  int nv = a.table().num_vars();
  if (int(args.size()) != nv) fail(Error::Kind::composition, "wrong number of substitution arguments");
  const MonoTable& rt = args[0].table();
  for (const auto& g : args)
    if (&g.table() != &rt) fail(Error::Kind::composition, "substitution arguments on mixed tables");

  bool centered = true;
  int v = a.valid_order();
  for (const auto& g : args) {
    if (!rat_is_zero(g.constant_term())) centered = false;
    v = std::min(v, g.valid_order());
  }

  const MonoTable& at = a.table();
  int top = 0;
  for (size_t i = 0; i < at.size(); ++i)
    if (!rat_is_zero(a.coeff_idx(i))) top = std::max(top, at.degree(i));
  // prod[i] = product of args^exps(i), built by peeling one variable off a parent.
  std::vector<Jet> prod(at.deg_end(top));
  prod[0] = Jet::constant(rt.num_vars(), rt.trunc(), Rat(1));
  Jet r = Jet::zero(rt.num_vars(), rt.trunc());
  for (size_t i = 0; i < at.deg_end(top); ++i) {
    if (i > 0) {
      int pv = 0;
      while (at.exps(i)[pv] == 0) ++pv;
      auto pe = at.exps(i);
      pe[pv] = uint8_t(pe[pv] - 1);
      prod[i] = prod[*at.find(pe)] * args[pv];
    }
    if (!rat_is_zero(a.coeff_idx(i))) r += a.coeff_idx(i) * prod[i];
  }
  r.restrict_valid(centered ? v : -1);
  return r;
}

Jet jet_lift(const Jet& a, int new_nv, int new_trunc, const std::vector<int>& var_map) {
  const MonoTable& src = a.table();
  if (int(var_map.size()) != src.num_vars())
    fail(Error::Kind::dimension, "var_map length mismatch in jet_lift");
  const MonoTable& dst = MonoTable::get(new_nv, new_trunc);
  Jet r(dst, std::min({a.valid_order(), new_trunc}));
  for (size_t i = 0; i < src.size(); ++i) {
    if (rat_is_zero(a.c_[i])) continue;
    if (src.degree(i) > new_trunc) continue;
    std::array<uint8_t, kMaxJetVars> e{};
    for (int vsrc = 0; vsrc < src.num_vars(); ++vsrc) {
      int vd = var_map[vsrc];
      if (vd < 0 || vd >= new_nv) fail(Error::Kind::dimension, "var_map target out of range");
      e[vd] = uint8_t(e[vd] + src.exps(i)[vsrc]);
    }
    r.c_[*dst.find(e)] = a.c_[i];
  }
  return r;
}

std::string Jet::str(size_t max_terms) const {
  std::ostringstream os;
  size_t shown = 0;
  for (size_t i = 0; i < tab_->size() && shown < max_terms; ++i) {
    if (rat_is_zero(c_[i])) continue;
    if (shown) os << " + ";
    os << rat_str(c_[i]);
    for (int v = 0; v < tab_->num_vars(); ++v) {
      int e = tab_->exps(i)[v];
      if (!e) continue;
      os << "*x" << v;
      if (e > 1) os << "^" << e;
    }
    ++shown;
  }
  if (!shown) os << "0";
  os << " [valid " << valid_ << "/" << tab_->trunc() << "]";
  return os.str();
}

}  // namespace frobjet
