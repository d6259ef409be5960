/**
 * @file jet.hpp
 * @brief Truncated multivariate power series ("jets") over exact rationals.
 *
 * A Jet stores every coefficient of a power series in offset variables
 * x_0..x_{nv-1} up to total degree `trunc`, together with a validity order:
 * coefficients of total degree <= valid_order are guaranteed correct,
 * higher stored degrees are best-effort garbage that downstream operations
 * must not trust. Validity propagation:
 *
 *   add/sub:      min(va, vb)
 *   mul:          min(va, vb)
 *   d/dx:         v - 1
 *   antiderivative: min(v + 1, trunc)
 *
 * "Exact" means valid_order == trunc. Monomials are enumerated in graded
 * lexicographic order; equality compares coefficients up to the smaller
 * validity order only.
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frobjet/rational.hpp"

namespace frobjet {

/// Max jet variables (monomial keys are packed one byte per variable).
inline constexpr int kMaxJetVars = 8;

/// Shared monomial enumeration for a fixed (num_vars, trunc) pair.
class MonoTable {
 public:
  /// Cached lookup; tables live for the process lifetime.
  static const MonoTable& get(int num_vars, int trunc);

  int num_vars() const { return nv_; }
  int trunc() const { return trunc_; }
  size_t size() const { return exps_.size(); }

  const std::array<uint8_t, kMaxJetVars>& exps(size_t idx) const { return exps_[idx]; }
  int degree(size_t idx) const { return deg_[idx]; }

  /// Monomial index range [begin, end) of total degree d.
  size_t deg_begin(int d) const { return deg_begin_[d]; }
  size_t deg_end(int d) const { return deg_begin_[d + 1]; }

  /// Index of a monomial given exponents; nullopt when degree > trunc.
  std::optional<size_t> find(const std::array<uint8_t, kMaxJetVars>& e) const;

 private:
  MonoTable(int nv, int trunc);
  int nv_, trunc_;
  std::vector<std::array<uint8_t, kMaxJetVars>> exps_;
  std::vector<int> deg_;
  std::vector<size_t> deg_begin_;
  std::vector<std::pair<uint64_t, uint32_t>> index_;  // sorted packed-key -> idx
};

struct JetTerm {
  std::vector<int> exps;
  Rat coeff;
};

class Jet {
 public:
  Jet() = default;

  /// Zero jet, exact (valid = trunc).
  static Jet zero(int num_vars, int trunc);
  static Jet constant(int num_vars, int trunc, const Rat& c);
  /// The offset coordinate x_var.
  static Jet coordinate(int num_vars, int trunc, int var);

  bool empty() const { return tab_ == nullptr; }
  int num_vars() const { return tab_->num_vars(); }
  int trunc() const { return tab_->trunc(); }
  int valid_order() const { return valid_; }
  const MonoTable& table() const { return *tab_; }

  /// Coefficient by monomial exponents (read: zero when absent).
  const Rat& coeff(const std::vector<int>& exps) const;
  Rat& coeff_ref(const std::vector<int>& exps);
  const Rat& coeff_idx(size_t i) const { return c_[i]; }
  Rat& coeff_idx(size_t i) { return c_[i]; }

  /// Lower the validity claim (never raises it).
  Jet& restrict_valid(int v);

  bool is_zero_up_to_valid() const;
  /// First stored nonzero coefficient of degree <= valid, graded-lex order.
  std::optional<JetTerm> first_nonzero() const;
  const Rat& constant_term() const { return c_[0]; }

  /// Equality = coefficient agreement up to min(valid_order) truncation.
  bool operator==(const Jet& o) const;
  bool operator!=(const Jet& o) const { return !(*this == o); }
  /// Bitwise-stored comparison including validity (determinism tests).
  bool identical(const Jet& o) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Rat& s);
  Jet operator-() const;

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const Rat& s) { return a *= s; }
  friend Jet operator*(const Rat& s, Jet a) { return a *= s; }
  friend Jet operator*(const Jet& a, const Jet& b);

  std::string str(size_t max_terms = 12) const;

 private:
  explicit Jet(const MonoTable& t, int valid);
  const MonoTable* tab_ = nullptr;
  int valid_ = -1;
  std::vector<Rat> c_;
  friend Jet jet_diff(const Jet&, int);
  friend Jet jet_antideriv(const Jet&, int);
  friend Jet jet_compose(const Jet&, const std::vector<Jet>&);
  friend Jet jet_lift(const Jet&, int, int, const std::vector<int>&);
};

/// d/dx_var.
Jet jet_diff(const Jet& a, int var);

/// Antiderivative in x_var with zero integration constant.
Jet jet_antideriv(const Jet& a, int var);

/// c * exp(scale * x_var), exact to trunc.
Jet exp_linear_jet(int num_vars, int trunc, const Rat& c, int var, const Rat& scale);

/**
 * Substitute args[i] for x_i in a. Exact on stored coefficients.
 * Validity: min(valid of a and all args) when every arg has zero constant
 * term; -1 otherwise (a constant shift invalidates truncation-order claims).
 */
Jet jet_compose(const Jet& a, const std::vector<Jet>& args);

/**
 * Reinterpret a jet in a larger variable set: variable i of a becomes
 * variable var_map[i] of the (new_nv, new_trunc >= trunc? same trunc) table.
 * Exact; validity preserved (new variables never appear).
 */
Jet jet_lift(const Jet& a, int new_nv, int new_trunc, const std::vector<int>& var_map);

}  // namespace frobjet
