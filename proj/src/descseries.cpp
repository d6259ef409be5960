#include "frobjet/descseries.hpp"

#include <algorithm>
#include <sstream>

namespace frobjet {

int dmono_degree(const DMono& m) {
  int d = 0;
  for (auto& [slot, e] : m) d += e;
  return d;
}

bool DMonoLess::operator()(const DMono& a, const DMono& b) const {
  int da = dmono_degree(a), db = dmono_degree(b);
  if (da != db) return da < db;
  return a < b;
}

std::string dmono_str(const DMono& m, int nc) {
  if (m.empty()) return "1";
  std::ostringstream os;
  bool first = true;
  for (auto& [slot, e] : m) {
    if (!first) os << "*";
    first = false;
    os << "t(" << slot % nc << "," << slot / nc + 1 << ")";
    if (e > 1) os << "^" << e;
  }
  return os.str();
}

DescSeries::DescSeries(int nc, int level_cap, int deg_cap, int trunc)
    : nc_(nc), level_cap_(level_cap), deg_cap_(deg_cap), trunc_(trunc), valid_deg_(deg_cap) {}

DescSeries DescSeries::from_jet(const Jet& j, int level_cap, int deg_cap) {
  DescSeries s(j.num_vars(), level_cap, deg_cap, j.trunc());
  s.set({}, j);
  return s;
}

DescSeries DescSeries::level_var(int nc, int level_cap, int deg_cap, int trunc, int coord,
                                 int level) {
  if (level < 1 || level > level_cap || coord < 0 || coord >= nc)
    fail(Error::Kind::dimension, "desc variable out of range");
  DescSeries s(nc, level_cap, deg_cap, trunc);
  if (deg_cap >= 1)
    s.set({{(level - 1) * nc + coord, 1}}, Jet::constant(nc, trunc, Rat(1)));
  return s;
}

void DescSeries::set(const DMono& m, Jet j) {
  if (j.is_zero_up_to_valid() && j.valid_order() == j.trunc()) {
    c_.erase(m);
    return;
  }
  c_.insert_or_assign(m, std::move(j));
}

Jet DescSeries::coeff(const DMono& m) const {
  auto it = c_.find(m);
  if (it != c_.end()) return it->second;
  Jet z = Jet::zero(nc_, trunc_);
  if (dmono_degree(m) > valid_deg_) z.restrict_valid(-1);
  return z;
}

DescSeries& DescSeries::restrict_deg(int g) {
  valid_deg_ = std::min(valid_deg_, g);
  return *this;
}

DescSeries& DescSeries::restrict_jet_valid(int v) {
  for (auto& [m, j] : c_) j.restrict_valid(v);
  return *this;
}

DescSeries& DescSeries::restrict_levels(int max_level) {
  for (auto it = c_.begin(); it != c_.end();) {
    bool high = false;
    for (const auto& [slot, e] : it->first)
      if (slot / nc_ + 1 > max_level) high = true;
    it = high ? c_.erase(it) : std::next(it);
  }
  return *this;
}

bool DescSeries::is_zero_up_to_valid() const {
  for (const auto& [m, j] : c_) {
    if (dmono_degree(m) > valid_deg_) continue;
    if (!j.is_zero_up_to_valid()) return false;
  }
  return true;
}

std::optional<DescSeries::Loc> DescSeries::first_nonzero() const {
  for (const auto& [m, j] : c_) {
    if (dmono_degree(m) > valid_deg_) break;  // graded order: nothing smaller follows
    if (auto t = j.first_nonzero()) return Loc{m, *t};
  }
  return std::nullopt;
}

bool DescSeries::operator==(const DescSeries& o) const {
  if (nc_ != o.nc_) return false;
  int g = std::min(valid_deg_, o.valid_deg_);
  auto covered = [&](const DescSeries& src, const DescSeries& other) {
    for (const auto& [m, j] : src.c_) {
      if (dmono_degree(m) > g) continue;
      if (j != other.coeff(m)) return false;
    }
    return true;
  };
  return covered(*this, o) && covered(o, *this);
}

DescSeries& DescSeries::operator+=(const DescSeries& o) {
  if (nc_ != o.nc_ || level_cap_ != o.level_cap_ || deg_cap_ != o.deg_cap_ || trunc_ != o.trunc_)
    fail(Error::Kind::dimension, "desc series shape mismatch in +");
  for (const auto& [m, j] : o.c_) {
    auto it = c_.find(m);
    if (it == c_.end())
      c_.emplace(m, j);
    else {
      it->second += j;
      if (it->second.is_zero_up_to_valid() && it->second.valid_order() == trunc_) c_.erase(it);
    }
  }
  valid_deg_ = std::min(valid_deg_, o.valid_deg_);
  return *this;
}

DescSeries& DescSeries::operator-=(const DescSeries& o) {
  DescSeries n = -o;
  return *this += n;
}

DescSeries& DescSeries::operator*=(const Rat& s) {
  for (auto& [m, j] : c_) j *= s;
  return *this;
}

DescSeries DescSeries::operator-() const {
  DescSeries r(*this);
  for (auto& [m, j] : r.c_) j = -j;
  return r;
}

static DMono dmono_mul(const DMono& a, const DMono& b) {
  DMono r;
  r.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      r.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i, ++j;
    } else if (a[i].first < b[j].first)
      r.push_back(a[i++]);
    else
      r.push_back(b[j++]);
  }
  while (i < a.size()) r.push_back(a[i++]);
  while (j < b.size()) r.push_back(b[j++]);
  return r;
}

DescSeries operator*(const DescSeries& a, const DescSeries& b) {
  if (a.num_coords() != b.num_coords() || a.level_cap() != b.level_cap() ||
      a.deg_cap() != b.deg_cap() || a.trunc() != b.trunc())
    fail(Error::Kind::dimension, "desc series shape mismatch in *");
  DescSeries r(a.num_coords(), a.level_cap(), a.deg_cap(), a.trunc());
  r.restrict_deg(std::min(a.valid_deg(), b.valid_deg()));
  for (const auto& [ma, ja] : a.terms()) {
    int da = dmono_degree(ma);
    if (da > a.deg_cap()) continue;
    for (const auto& [mb, jb] : b.terms()) {
      if (da + dmono_degree(mb) > a.deg_cap()) break;  // graded order
      DMono m = dmono_mul(ma, mb);
      Jet prod = ja * jb;
      auto it = r.c_.find(m);
      if (it == r.c_.end())
        r.c_.emplace(std::move(m), std::move(prod));
      else
        it->second += prod;
    }
  }
  // drop exact zeros produced by cancellation
  for (auto it = r.c_.begin(); it != r.c_.end();) {
    if (it->second.is_zero_up_to_valid() && it->second.valid_order() == r.trunc_)
      it = r.c_.erase(it);
    else
      ++it;
  }
  return r;
}

DescSeries DescSeries::jet_mul(const Jet& j) const {
  DescSeries r(nc_, level_cap_, deg_cap_, trunc_);
  r.valid_deg_ = valid_deg_;
  for (const auto& [m, jm] : c_) r.set(m, jm * j);
  return r;
}

DescSeries DescSeries::var_mul(int coord, int level) const {
  if (level < 1 || level > level_cap_) fail(Error::Kind::dimension, "var_mul level out of range");
  DMono v{{(level - 1) * nc_ + coord, 1}};
  DescSeries r(nc_, level_cap_, deg_cap_, trunc_);
  for (const auto& [m, jm] : c_) {
    if (dmono_degree(m) + 1 > deg_cap_) continue;
    r.set(dmono_mul(m, v), jm);
  }
  r.valid_deg_ = std::min(valid_deg_ + 1, deg_cap_);
  return r;
}

DescSeries DescSeries::diff(int coord, int level) const {
  DescSeries r(nc_, level_cap_, deg_cap_, trunc_);
  if (level == 0) {
    for (const auto& [m, jm] : c_) r.set(m, jet_diff(jm, coord));
    r.valid_deg_ = valid_deg_;
    return r;
  }
  int slot = (level - 1) * nc_ + coord;
  for (const auto& [m, jm] : c_) {
    auto it = std::find_if(m.begin(), m.end(), [&](auto& p) { return p.first == slot; });
    if (it == m.end()) continue;
    DMono d = m;
    int e = it->second;
    auto dit = d.begin() + (it - m.begin());
    if (e == 1)
      d.erase(dit);
    else
      dit->second = e - 1;
    Jet scaled = jm;
    scaled *= Rat(e);
    auto rit = r.c_.find(d);
    if (rit == r.c_.end())
      r.c_.emplace(std::move(d), std::move(scaled));
    else
      rit->second += scaled;
  }
  r.valid_deg_ = std::max(valid_deg_ - 1, -1);
  return r;
}

DescSeries DescSeries::lift(int new_nc, const std::vector<int>& coord_map, int new_level_cap,
                            int new_deg_cap, int new_trunc) const {
  if (int(coord_map.size()) != nc_) fail(Error::Kind::dimension, "coord_map length mismatch");
  DescSeries r(new_nc, new_level_cap, new_deg_cap, new_trunc);
  r.valid_deg_ = std::min(valid_deg_, new_deg_cap);
  for (const auto& [m, jm] : c_) {
    if (dmono_degree(m) > new_deg_cap) continue;
    DMono nm;
    for (auto& [slot, e] : m) {
      int level = slot / nc_ + 1, coord = slot % nc_;
      if (level > new_level_cap) fail(Error::Kind::dimension, "lift level cap too small");
      nm.emplace_back((level - 1) * new_nc + coord_map[coord], e);
    }
    std::sort(nm.begin(), nm.end());
    r.set(nm, jet_lift(jm, new_nc, new_trunc, coord_map));
  }
  return r;
}

std::string DescSeries::str(size_t max_terms) const {
  std::ostringstream os;
  size_t shown = 0;
  for (const auto& [m, j] : c_) {
    if (shown >= max_terms) {
      os << " + ...";
      break;
    }
    if (shown) os << " + ";
    os << "[" << dmono_str(m, nc_) << "] (" << j.str(4) << ")";
    ++shown;
  }
  if (!shown) os << "0";
  os << " {valid_deg " << valid_deg_ << "/" << deg_cap_ << "}";
  return os.str();
}

SubstContext::SubstContext(const std::vector<DescSeries>& args, const std::vector<Rat>& base) {
  if (args.empty() || args.size() != base.size())
    fail(Error::Kind::composition, "substitution needs one argument per coordinate");
  nc_ = args[0].num_coords();
  level_cap_ = args[0].level_cap();
  deg_cap_ = args[0].deg_cap();
  trunc_ = args[0].trunc();
  if (int(args.size()) != nc_)
    fail(Error::Kind::composition, "argument count differs from coordinate count");
  valid_deg_ = deg_cap_;
  std::vector<DescSeries> w;
  for (int g = 0; g < nc_; ++g) {
    const DescSeries& a = args[g];
    if (a.num_coords() != nc_ || a.level_cap() != level_cap_ || a.deg_cap() != deg_cap_ ||
        a.trunc() != trunc_)
      fail(Error::Kind::composition, "substitution arguments on mixed shapes");
    Jet expect = Jet::coordinate(nc_, trunc_, g) + Jet::constant(nc_, trunc_, base[g]);
    Jet got = a.coeff0();
    Jet d = got - expect;
    d.restrict_valid(trunc_);  // structural check on stored coefficients
    if (!d.is_zero_up_to_valid())
      fail(Error::Kind::composition,
           "substitution argument " + std::to_string(g) + " is not centered on its coordinate");
    DescSeries cw = a;
    cw.c_.erase(DMono{});
    w.push_back(std::move(cw));
    valid_deg_ = std::min(valid_deg_, a.valid_deg());
  }
  ktab_ = &MonoTable::get(nc_, deg_cap_);
  pw_.resize(ktab_->size());
  pw_[0] = DescSeries::from_jet(Jet::constant(nc_, trunc_, Rat(1)), level_cap_, deg_cap_);
  for (size_t i = 1; i < ktab_->size(); ++i) {
    int pv = 0;
    while (ktab_->exps(i)[pv] == 0) ++pv;
    auto pe = ktab_->exps(i);
    pe[pv] = uint8_t(pe[pv] - 1);
    pw_[i] = pw_[*ktab_->find(pe)] * w[pv];
  }
}

DescSeries SubstContext::substitute(const Jet& a) const {
  if (a.num_vars() != nc_ || a.trunc() != trunc_)
    fail(Error::Kind::composition, "jet shape mismatch in substitution");
  DescSeries r(nc_, level_cap_, deg_cap_, trunc_);
  std::vector<Jet> dk(ktab_->size());
  dk[0] = a;
  for (size_t i = 0; i < ktab_->size(); ++i) {
    if (i > 0) {
      int pv = 0;
      while (ktab_->exps(i)[pv] == 0) ++pv;
      auto pe = ktab_->exps(i);
      pe[pv] = uint8_t(pe[pv] - 1);
      dk[i] = jet_diff(dk[*ktab_->find(pe)], pv);
      dk[i] *= Rat(1, int(ktab_->exps(i)[pv]));
    }
    if (dk[i].is_zero_up_to_valid() && dk[i].valid_order() == trunc_) continue;
    r += pw_[i].jet_mul(dk[i]);
  }
  r.restrict_deg(valid_deg_);
  return r;
}

DescMat SubstContext::substitute(const JetMatrix& m) const {
  DescMat r(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r.at(i, j) = substitute(m.at(i, j));
  return r;
}

}  // namespace frobjet
