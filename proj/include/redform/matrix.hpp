#ifndef REDFORM_MATRIX_HPP
#define REDFORM_MATRIX_HPP

#include <cassert>
#include <stdexcept>
#include <vector>

#include "redform/ratfunc.hpp"

namespace redform {

/// Dense matrix over an exact field (Rational, RatFunc, or affine values).
template <typename T>
class Matrix {
public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols) {}
  Matrix(int rows, int cols, const T& fill)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  T& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }
  friend bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

  Matrix operator-() const {
    Matrix r(rows_, cols_);
    for (size_t i = 0; i < data_.size(); ++i) r.data_[i] = -data_[i];
    return r;
  }
  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    assert(a.rows_ == b.rows_ && a.cols_ == b.cols_);
    Matrix r(a.rows_, a.cols_);
    for (size_t i = 0; i < a.data_.size(); ++i) r.data_[i] = a.data_[i] + b.data_[i];
    return r;
  }
  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    assert(a.rows_ == b.rows_ && a.cols_ == b.cols_);
    Matrix r(a.rows_, a.cols_);
    for (size_t i = 0; i < a.data_.size(); ++i) r.data_[i] = a.data_[i] - b.data_[i];
    return r;
  }
  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    assert(a.cols_ == b.rows_);
    Matrix r(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (aik == T(0)) continue;
        for (int j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }
  Matrix operator*(const T& c) const {
    Matrix r(rows_, cols_);
    for (size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] * c;
    return r;
  }
  Matrix& operator+=(const Matrix& o) { *this = *this + o; return *this; }
  Matrix& operator-=(const Matrix& o) { *this = *this - o; return *this; }

  bool is_zero() const {
    for (const auto& v : data_)
      if (!(v == T(0))) return false;
    return true;
  }

  Matrix transpose() const {
    Matrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  Matrix submatrix(int r0, int c0, int nr, int nc) const {
    Matrix r(nr, nc);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nc; ++j) r(i, j) = (*this)(r0 + i, c0 + j);
    return r;
  }
  void paste(int r0, int c0, const Matrix& m) {
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) (*this)(r0 + i, c0 + j) = m(i, j);
  }

  T trace() const {
    T acc(0);
    for (int i = 0; i < rows_ && i < cols_; ++i) acc += (*this)(i, i);
    return acc;
  }

private:
  int rows_, cols_;
  std::vector<T> data_;
};

using QMat = Matrix<Rational>;
using RMat = Matrix<RatFunc>;

/// Kronecker product.
template <typename T>
Matrix<T> kron(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> r(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      if (a(i, j) == T(0)) continue;
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          r(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    }
  return r;
}

/// Row-stacking vec: (i, j) entry of an r x c matrix maps to index i*c + j.
template <typename T>
std::vector<T> vec_rows(const Matrix<T>& m) {
  std::vector<T> v;
  v.reserve(static_cast<size_t>(m.rows()) * m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
  return v;
}

template <typename T>
Matrix<T> unvec_rows(const std::vector<T>& v, int rows, int cols) {
  assert(static_cast<int>(v.size()) == rows * cols);
  Matrix<T> m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = v[static_cast<size_t>(i) * cols + j];
  return m;
}

/// In-place reduced row echelon form with first-nonzero pivoting; returns the
/// pivot column of each pivot row.
template <typename T>
std::vector<int> rref(Matrix<T>& m) {
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < m.cols() && row < m.rows(); ++col) {
    int pr = -1;
    for (int i = row; i < m.rows(); ++i)
      if (!(m(i, col) == T(0))) { pr = i; break; }
    if (pr < 0) continue;
    if (pr != row)
      for (int j = 0; j < m.cols(); ++j) std::swap(m(pr, j), m(row, j));
    const T inv = T(1) / m(row, col);
    for (int j = col; j < m.cols(); ++j) m(row, j) = m(row, j) * inv;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == row || m(i, col) == T(0)) continue;
      const T f = m(i, col);
      for (int j = col; j < m.cols(); ++j) m(i, j) = m(i, j) - f * m(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

/// Exact inverse by Gauss-Jordan elimination; throws if singular.
template <typename T>
Matrix<T> inverse(const Matrix<T>& a) {
  if (a.rows() != a.cols()) throw std::domain_error("inverse: non-square matrix");
  const int n = a.rows();
  Matrix<T> aug(n, 2 * n);
  aug.paste(0, 0, a);
  aug.paste(0, n, Matrix<T>::identity(n));
  const auto pivots = rref(aug);
  if (static_cast<int>(pivots.size()) != n || pivots.back() != n - 1)
    throw std::domain_error("inverse: singular matrix");
  return aug.submatrix(0, n, n, n);
}

template <typename T>
bool is_invertible(const Matrix<T>& a) {
  if (a.rows() != a.cols()) return false;
  Matrix<T> c = a;
  const auto pivots = rref(c);
  return static_cast<int>(pivots.size()) == a.rows();
}

/// Basis of the right kernel of a (rows are basis vectors of length cols).
template <typename T>
std::vector<std::vector<T>> kernel_basis(Matrix<T> a) {
  const int n = a.cols();
  const auto pivots = rref(a);
  std::vector<bool> is_pivot(n, false);
  for (int c : pivots) is_pivot[c] = true;
  std::vector<std::vector<T>> out;
  for (int fc = 0; fc < n; ++fc) {
    if (is_pivot[fc]) continue;
    std::vector<T> v(n, T(0));
    v[fc] = T(1);
    for (size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a(static_cast<int>(r), fc);
    out.push_back(std::move(v));
  }
  return out;
}

/// Rank of the row span.
template <typename T>
int rank(Matrix<T> a) {
  return static_cast<int>(rref(a).size());
}

}  // namespace redform

#endif
