/**
 * @file jet_matrix.hpp
 * @brief Matrices with jet entries, plus formal z-power-series of them.
 */
#pragma once

#include <optional>
#include <vector>

#include "frobjet/jet.hpp"
#include "frobjet/qmatrix.hpp"

namespace frobjet {

struct MatTerm {
  int row = 0, col = 0;
  JetTerm term;
};

class JetMatrix {
 public:
  JetMatrix() = default;
  /// Zero matrix of exact zero jets.
  JetMatrix(int rows, int cols, int num_vars, int trunc);
  /// Constant-jet lift of a rational matrix.
  static JetMatrix from_q(const QMatrix& m, int num_vars, int trunc);
  static JetMatrix identity(int n, int num_vars, int trunc);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  Jet& at(int i, int j) { return a_[size_t(i) * cols_ + j]; }
  const Jet& at(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

  /// Constant terms as a rational matrix.
  QMatrix value_at_base() const;

  JetMatrix transpose() const;
  JetMatrix diff(int var) const;
  JetMatrix antideriv(int var) const;
  JetMatrix& restrict_valid(int v);
  int valid_order() const;  // min over entries

  bool is_zero_up_to_valid() const;
  /// First nonzero entry/monomial in row-major then graded-lex order.
  std::optional<MatTerm> first_nonzero() const;

  bool operator==(const JetMatrix& o) const;
  bool operator!=(const JetMatrix& o) const { return !(*this == o); }

  JetMatrix& operator+=(const JetMatrix& o);
  JetMatrix& operator-=(const JetMatrix& o);
  JetMatrix& operator*=(const Rat& s);
  JetMatrix operator-() const;

  friend JetMatrix operator+(JetMatrix a, const JetMatrix& b) { return a += b; }
  friend JetMatrix operator-(JetMatrix a, const JetMatrix& b) { return a -= b; }
  friend JetMatrix operator*(JetMatrix a, const Rat& s) { return a *= s; }
  friend JetMatrix operator*(const Rat& s, JetMatrix a) { return a *= s; }
  friend JetMatrix operator*(const JetMatrix& a, const JetMatrix& b);
  friend JetMatrix operator*(const QMatrix& a, const JetMatrix& b);
  friend JetMatrix operator*(const JetMatrix& a, const QMatrix& b);
  friend JetMatrix operator*(const Jet& s, JetMatrix a);

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Jet> a_;
};

JetMatrix commutator(const JetMatrix& a, const JetMatrix& b);

/**
 * Inverse of U(z) = U[0] + U[1] z + ... + U[D] z^D with U[0] = Id, to the
 * same depth: V[0] = Id, V[n] = -sum_{k=1..n} U[k] V[n-k].
 */
std::vector<JetMatrix> matrix_series_inverse(const std::vector<JetMatrix>& u);

/// Same recursion for plain rational series with R[0] = Id.
std::vector<QMatrix> qmatrix_series_inverse(const std::vector<QMatrix>& u);

}  // namespace frobjet
