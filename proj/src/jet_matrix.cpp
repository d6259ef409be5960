#include "frobjet/jet_matrix.hpp"

#include <algorithm>

namespace frobjet {

JetMatrix::JetMatrix(int rows, int cols, int num_vars, int trunc)
    : rows_(rows), cols_(cols), a_(size_t(rows) * cols, Jet::zero(num_vars, trunc)) {}

JetMatrix JetMatrix::from_q(const QMatrix& m, int num_vars, int trunc) {
  JetMatrix r(m.rows(), m.cols(), num_vars, trunc);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r.at(i, j) = Jet::constant(num_vars, trunc, m.at(i, j));
  return r;
}

JetMatrix JetMatrix::identity(int n, int num_vars, int trunc) {
  return from_q(QMatrix::identity(n), num_vars, trunc);
}

QMatrix JetMatrix::value_at_base() const {
  QMatrix m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m.at(i, j) = at(i, j).constant_term();
  return m;
}

JetMatrix JetMatrix::transpose() const {
  JetMatrix r;
  r.rows_ = cols_;
  r.cols_ = rows_;
  r.a_.resize(a_.size());
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
  return r;
}

JetMatrix JetMatrix::diff(int var) const {
  JetMatrix r(*this);
  for (auto& j : r.a_) j = jet_diff(j, var);
  return r;
}

JetMatrix JetMatrix::antideriv(int var) const {
  JetMatrix r(*this);
  for (auto& j : r.a_) j = jet_antideriv(j, var);
  return r;
}

JetMatrix& JetMatrix::restrict_valid(int v) {
  for (auto& j : a_) j.restrict_valid(v);
  return *this;
}

int JetMatrix::valid_order() const {
  int v = a_.empty() ? -1 : a_[0].valid_order();
  for (const auto& j : a_) v = std::min(v, j.valid_order());
  return v;
}

bool JetMatrix::is_zero_up_to_valid() const {
  for (const auto& j : a_)
    if (!j.is_zero_up_to_valid()) return false;
  return true;
}

std::optional<MatTerm> JetMatrix::first_nonzero() const {
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j)
      if (auto t = at(i, j).first_nonzero()) return MatTerm{i, j, *t};
  return std::nullopt;
}

bool JetMatrix::operator==(const JetMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) return false;
  for (size_t k = 0; k < a_.size(); ++k)
    if (a_[k] != o.a_[k]) return false;
  return true;
}

JetMatrix& JetMatrix::operator+=(const JetMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    fail(Error::Kind::dimension, "jet matrix shape mismatch in +");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

JetMatrix& JetMatrix::operator-=(const JetMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    fail(Error::Kind::dimension, "jet matrix shape mismatch in -");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

JetMatrix& JetMatrix::operator*=(const Rat& s) {
  for (auto& j : a_) j *= s;
  return *this;
}

JetMatrix JetMatrix::operator-() const {
  JetMatrix r(*this);
  for (auto& j : r.a_) j = -j;
  return r;
}

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
  if (a.cols_ != b.rows_) fail(Error::Kind::dimension, "jet matrix shape mismatch in *");
  const Jet& probe = a.a_[0];
  JetMatrix r(a.rows_, b.cols_, probe.num_vars(), probe.trunc());
  for (int i = 0; i < a.rows_; ++i)
    for (int k = 0; k < a.cols_; ++k) {
      const Jet& aik = a.at(i, k);
      for (int j = 0; j < b.cols_; ++j) r.at(i, j) += aik * b.at(k, j);
    }
  return r;
}

JetMatrix operator*(const QMatrix& a, const JetMatrix& b) {
  if (a.cols() != b.rows()) fail(Error::Kind::dimension, "shape mismatch in q*jet");
  const Jet& probe = b.a_[0];
  JetMatrix r(a.rows(), b.cols(), probe.num_vars(), probe.trunc());
  r.restrict_valid(b.valid_order());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const Rat& s = a.at(i, k);
      if (rat_is_zero(s)) continue;
      for (int j = 0; j < b.cols(); ++j) {
        Jet t = b.at(k, j);
        t *= s;
        r.at(i, j) += t;
      }
    }
  return r;
}

JetMatrix operator*(const JetMatrix& a, const QMatrix& b) {
  if (a.cols() != b.rows()) fail(Error::Kind::dimension, "shape mismatch in jet*q");
  const Jet& probe = a.a_[0];
  JetMatrix r(a.rows(), b.cols(), probe.num_vars(), probe.trunc());
  r.restrict_valid(a.valid_order());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const Jet& aik = a.at(i, k);
      for (int j = 0; j < b.cols(); ++j) {
        if (rat_is_zero(b.at(k, j))) continue;
        Jet t = aik;
        t *= b.at(k, j);
        r.at(i, j) += t;
      }
    }
  return r;
}

JetMatrix operator*(const Jet& s, JetMatrix a) {
  for (auto& j : a.a_) j = s * j;
  return a;
}

JetMatrix commutator(const JetMatrix& a, const JetMatrix& b) { return a * b - b * a; }

std::vector<JetMatrix> matrix_series_inverse(const std::vector<JetMatrix>& u) {
  if (u.empty()) fail(Error::Kind::dimension, "empty matrix series");
  int n = u[0].rows();
  const Jet& probe = u[0].at(0, 0);
  JetMatrix id = JetMatrix::identity(n, probe.num_vars(), probe.trunc());
  if (u[0] != id) fail(Error::Kind::gauge, "matrix series must start at the identity");
  std::vector<JetMatrix> v(u.size());
  v[0] = id;
  for (size_t m = 1; m < u.size(); ++m) {
    JetMatrix acc(n, n, probe.num_vars(), probe.trunc());
    for (size_t k = 1; k <= m; ++k) acc += u[k] * v[m - k];
    v[m] = -acc;
  }
  return v;
}

std::vector<QMatrix> qmatrix_series_inverse(const std::vector<QMatrix>& u) {
  if (u.empty()) fail(Error::Kind::dimension, "empty matrix series");
  int n = u[0].rows();
  if (u[0] != QMatrix::identity(n)) fail(Error::Kind::gauge, "matrix series must start at the identity");
  std::vector<QMatrix> v(u.size());
  v[0] = QMatrix::identity(n);
  for (size_t m = 1; m < u.size(); ++m) {
    QMatrix acc(n, n);
    for (size_t k = 1; k <= m; ++k) acc += u[k] * v[m - k];
    v[m] = QMatrix(n, n) - acc;
  }
  return v;
}

}  // namespace frobjet
