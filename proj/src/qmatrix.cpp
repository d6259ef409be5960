#include "frobjet/qmatrix.hpp"

namespace frobjet {

QMatrix QMatrix::identity(int n) {
  QMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

bool QMatrix::is_zero() const {
  for (const auto& x : a_)
    if (!rat_is_zero(x)) return false;
  return true;
}

bool QMatrix::operator==(const QMatrix& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
}

QMatrix QMatrix::transpose() const {
  QMatrix m(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m.at(j, i) = at(i, j);
  return m;
}

QMatrix& QMatrix::operator+=(const QMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    fail(Error::Kind::dimension, "matrix shape mismatch in +");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

QMatrix& QMatrix::operator-=(const QMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    fail(Error::Kind::dimension, "matrix shape mismatch in -");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

QMatrix& QMatrix::operator*=(const Rat& s) {
  for (auto& x : a_) x *= s;
  return *this;
}

QMatrix operator*(const QMatrix& a, const QMatrix& b) {
  if (a.cols_ != b.rows_) fail(Error::Kind::dimension, "matrix shape mismatch in *");
  QMatrix m(a.rows_, b.cols_);
  for (int i = 0; i < a.rows_; ++i)
    for (int k = 0; k < a.cols_; ++k) {
      const Rat& aik = a.at(i, k);
      if (rat_is_zero(aik)) continue;
      for (int j = 0; j < b.cols_; ++j) m.at(i, j) += aik * b.at(k, j);
    }
  return m;
}

QMatrix QMatrix::inverse() const {
  if (rows_ != cols_) fail(Error::Kind::dimension, "inverse of non-square matrix");
  int n = rows_;
  QMatrix a(*this), inv = identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int r = col; r < n; ++r)
      if (!rat_is_zero(a.at(r, col))) {
        piv = r;
        break;
      }
    if (piv < 0) fail(Error::Kind::gauge, "singular matrix has no inverse");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        swap(a.at(piv, j), a.at(col, j));
        swap(inv.at(piv, j), inv.at(col, j));
      }
    Rat d = a.at(col, col);
    for (int j = 0; j < n; ++j) {
      a.at(col, j) /= d;
      inv.at(col, j) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      Rat f = a.at(r, col);
      if (rat_is_zero(f)) continue;
      for (int j = 0; j < n; ++j) {
        a.at(r, j) -= f * a.at(col, j);
        inv.at(r, j) -= f * inv.at(col, j);
      }
    }
  }
  return inv;
}

QMatrix commutator(const QMatrix& a, const QMatrix& b) { return a * b - b * a; }

}  // namespace frobjet
