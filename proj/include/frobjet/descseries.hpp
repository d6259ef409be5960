/**
 * @file descseries.hpp
 * @brief Formal series in descendent variables with jet coefficients.
 *
 * A DescSeries models a function of t^alpha_p (coords alpha < nc, levels
 * 0 <= p <= level_cap). Level 0 lives inside the jet coefficients (offsets
 * x_alpha from the model base point); levels p >= 1 are formal polynomial
 * variables, truncated at total desc-degree `deg_cap`.
 *
 * Validity: each coefficient jet carries its own valid_order; the series
 * carries valid_deg for desc-degree (a monomial absent from the map is
 * exactly zero; computed zero jets with partial validity are kept).
 * Propagation mirrors the jet rules: add/mul -> min, multiply by a level
 * variable -> +1 capped, d/dt^alpha_p (p>=1) -> -1.
 */
#pragma once

#include <map>
#include <vector>

#include "frobjet/jet_matrix.hpp"

namespace frobjet {

/// Sparse desc monomial: sorted (slot, exponent) pairs, slot = (level-1)*nc + coord.
using DMono = std::vector<std::pair<int, int>>;

int dmono_degree(const DMono& m);
/// Graded, then slot-lex order; total and deterministic.
struct DMonoLess {
  bool operator()(const DMono& a, const DMono& b) const;
};

std::string dmono_str(const DMono& m, int nc);

class DescSeries {
 public:
  DescSeries() = default;
  DescSeries(int nc, int level_cap, int deg_cap, int trunc);

  static DescSeries from_jet(const Jet& j, int level_cap, int deg_cap);
  /// The variable t^coord_level (level >= 1) as a series.
  static DescSeries level_var(int nc, int level_cap, int deg_cap, int trunc, int coord, int level);

  int num_coords() const { return nc_; }
  int level_cap() const { return level_cap_; }
  int deg_cap() const { return deg_cap_; }
  int trunc() const { return trunc_; }
  int valid_deg() const { return valid_deg_; }
  bool empty() const { return nc_ == 0; }

  const std::map<DMono, Jet, DMonoLess>& terms() const { return c_; }

  /// Coefficient jet of a desc monomial; exact zero when absent in range,
  /// zero with valid -1 when the monomial lies beyond valid_deg.
  Jet coeff(const DMono& m) const;
  /// Coefficient of the empty desc monomial.
  Jet coeff0() const { return coeff(DMono{}); }

  DescSeries& restrict_deg(int g);
  DescSeries& restrict_jet_valid(int v);
  /// Drop every monomial touching a level above max_level.
  DescSeries& restrict_levels(int max_level);

  bool is_zero_up_to_valid() const;
  struct Loc {
    DMono mono;
    JetTerm term;
  };
  std::optional<Loc> first_nonzero() const;

  /// Agreement up to shared valid_deg and per-jet validity.
  bool operator==(const DescSeries& o) const;
  bool operator!=(const DescSeries& o) const { return !(*this == o); }

  DescSeries& operator+=(const DescSeries& o);
  DescSeries& operator-=(const DescSeries& o);
  DescSeries& operator*=(const Rat& s);
  DescSeries operator-() const;
  friend DescSeries operator+(DescSeries a, const DescSeries& b) { return a += b; }
  friend DescSeries operator-(DescSeries a, const DescSeries& b) { return a -= b; }
  friend DescSeries operator*(DescSeries a, const Rat& s) { return a *= s; }
  friend DescSeries operator*(const Rat& s, DescSeries a) { return a *= s; }
  friend DescSeries operator*(const DescSeries& a, const DescSeries& b);

  /// Multiply by the coefficient jet j (desc-degree 0).
  DescSeries jet_mul(const Jet& j) const;
  /// Multiply by t^coord_level, level >= 1.
  DescSeries var_mul(int coord, int level) const;

  /// d/dt^coord_level; level 0 differentiates the coefficient jets.
  DescSeries diff(int coord, int level) const;

  /// Reinterpret over new_nc coords (coord i -> coord_map[i]); jets lifted too.
  DescSeries lift(int new_nc, const std::vector<int>& coord_map, int new_level_cap,
                  int new_deg_cap, int new_trunc) const;

  std::string str(size_t max_terms = 8) const;

 private:
  int nc_ = 0, level_cap_ = 0, deg_cap_ = 0, trunc_ = 0;
  int valid_deg_ = -1;
  std::map<DMono, Jet, DMonoLess> c_;
  void set(const DMono& m, Jet j);
  friend class SubstContext;
};

/// Small dense matrix of DescSeries.
struct DescMat {
  int rows = 0, cols = 0;
  std::vector<DescSeries> a;
  DescMat() = default;
  DescMat(int r, int c) : rows(r), cols(c), a(size_t(r) * c) {}
  DescSeries& at(int i, int j) { return a[size_t(i) * cols + j]; }
  const DescSeries& at(int i, int j) const { return a[size_t(i) * cols + j]; }
};

/**
 * Substitution of desc series into jets: args[gamma] must have desc-degree-0
 * part exactly x_gamma + base[gamma]. Precomputes the centered powers once;
 * substitute() is then a linear pass per jet. Throws Error::composition when
 * the precondition fails.
 */
class SubstContext {
 public:
  SubstContext(const std::vector<DescSeries>& args, const std::vector<Rat>& base);
  DescSeries substitute(const Jet& a) const;
  DescMat substitute(const JetMatrix& m) const;
  int arg_valid_deg() const { return valid_deg_; }

 private:
  int nc_, level_cap_, deg_cap_, trunc_;
  int valid_deg_;
  const MonoTable* ktab_;
  std::vector<DescSeries> pw_;
};

}  // namespace frobjet
