/**
 * @file qmatrix.hpp
 * @brief Dense matrices over the exact rationals.
 *
 * Small (N x N for manifold dimension N) and unclever on purpose: exact
 * Gauss-Jordan for the inverse, no pivot heuristics beyond nonzero scan.
 */
#pragma once

#include <vector>

#include "frobjet/rational.hpp"

namespace frobjet {

class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols, Rat(0)) {}

  static QMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Rat& at(int i, int j) { return a_[size_t(i) * cols_ + j]; }
  const Rat& at(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

  bool is_zero() const;
  bool operator==(const QMatrix& o) const;
  bool operator!=(const QMatrix& o) const { return !(*this == o); }

  QMatrix transpose() const;
  /// Exact inverse; throws Error::gauge when singular.
  QMatrix inverse() const;

  QMatrix& operator+=(const QMatrix& o);
  QMatrix& operator-=(const QMatrix& o);
  QMatrix& operator*=(const Rat& s);

  friend QMatrix operator+(QMatrix a, const QMatrix& b) { return a += b; }
  friend QMatrix operator-(QMatrix a, const QMatrix& b) { return a -= b; }
  friend QMatrix operator*(QMatrix a, const Rat& s) { return a *= s; }
  friend QMatrix operator*(const Rat& s, QMatrix a) { return a *= s; }
  friend QMatrix operator*(const QMatrix& a, const QMatrix& b);

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Rat> a_;
};

/// a*b - b*a for square matrices.
QMatrix commutator(const QMatrix& a, const QMatrix& b);

}  // namespace frobjet
