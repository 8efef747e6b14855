#include "redform/series.hpp"

#include <stdexcept>
#include <string>

namespace redform {

QSeries taylor(const RatFunc& f, const Rational& x0, int order) {
  if (!f.defined_at(x0)) throw std::domain_error("taylor: expansion at a pole");
  // Shift to t = x - x0 and divide the power series.
  const auto shifted = [&](const Poly& p) {
    // p(x0 + t) coefficients in t via Horner over Poly in t.
    Poly acc;
    const Poly t_plus = Poly::x() + Poly(x0);
    for (int i = p.degree(); i >= 0; --i) acc = acc * t_plus + Poly(p.coeff(i));
    return acc;
  };
  const Poly n = shifted(f.num()), d = shifted(f.den());
  QSeries out;
  out.x0 = x0;
  out.c.assign(static_cast<size_t>(order), Rational(0));
  const Rational d0inv = d.coeff(0).inverse();
  for (int k = 0; k < order; ++k) {
    Rational acc = n.coeff(k);
    for (int j = 1; j <= k; ++j) acc -= d.coeff(j) * out.c[static_cast<size_t>(k - j)];
    out.c[static_cast<size_t>(k)] = acc * d0inv;
  }
  return out;
}

QSeries series_mul(const QSeries& a, const QSeries& b) {
  QSeries out;
  out.x0 = a.x0;
  const int n = std::min(a.order(), b.order());
  out.c.assign(static_cast<size_t>(n), Rational(0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; i + j < n && j < b.order(); ++j)
      out.c[static_cast<size_t>(i + j)] += a.c[static_cast<size_t>(i)] * b.c[static_cast<size_t>(j)];
  return out;
}

SeriesMatrix::SeriesMatrix(Rational x0, std::vector<QMat> coeffs)
    : x0_(std::move(x0)), coeffs_(std::move(coeffs)) {}

QSeries SeriesMatrix::entry(int i, int j) const {
  QSeries s;
  s.x0 = x0_;
  s.c.reserve(coeffs_.size());
  for (const auto& m : coeffs_) s.c.push_back(m(i, j));
  return s;
}

SeriesMatrix SeriesMatrix::derivative() const {
  std::vector<QMat> d;
  for (size_t k = 1; k < coeffs_.size(); ++k)
    d.push_back(coeffs_[k] * Rational(static_cast<long>(k)));
  return SeriesMatrix(x0_, std::move(d));
}

SeriesMatrix SeriesMatrix::truncate(int order) const {
  std::vector<QMat> c(coeffs_.begin(),
                      coeffs_.begin() + std::min<size_t>(coeffs_.size(), static_cast<size_t>(order)));
  return SeriesMatrix(x0_, std::move(c));
}

SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b) {
  const int n = std::min(a.order(), b.order());
  std::vector<QMat> c(static_cast<size_t>(n), QMat(a.dim_rows(), b.dim_cols()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; i + j < n && j < b.order(); ++j) c[static_cast<size_t>(i + j)] += a.coeff(i) * b.coeff(j);
  return SeriesMatrix(a.expansion_point(), std::move(c));
}

SeriesMatrix operator-(const SeriesMatrix& a, const SeriesMatrix& b) {
  const int n = std::min(a.order(), b.order());
  std::vector<QMat> c;
  c.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) c.push_back(a.coeff(i) - b.coeff(i));
  return SeriesMatrix(a.expansion_point(), std::move(c));
}

SeriesMatrix SeriesMatrix::inverse_series() const {
  const int n = order();
  if (n == 0) return *this;
  const QMat inv0 = inverse(coeffs_[0]);
  std::vector<QMat> q(static_cast<size_t>(n), QMat(dim_rows(), dim_cols()));
  q[0] = inv0;
  for (int k = 1; k < n; ++k) {
    QMat acc(dim_rows(), dim_cols());
    for (int j = 1; j <= k; ++j) acc += coeffs_[static_cast<size_t>(j)] * q[static_cast<size_t>(k - j)];
    q[static_cast<size_t>(k)] = -(inv0 * acc);
  }
  return SeriesMatrix(x0_, std::move(q));
}

bool SeriesMatrix::is_zero() const {
  for (const auto& m : coeffs_)
    if (!m.is_zero()) return false;
  return true;
}

SeriesMatrix taylor_matrix(const RMat& A, const Rational& x0, int order) {
  std::vector<QMat> c(static_cast<size_t>(order), QMat(A.rows(), A.cols()));
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) {
      const QSeries s = taylor(A(i, j), x0, order);
      for (int k = 0; k < order; ++k) c[static_cast<size_t>(k)](i, j) = s.c[static_cast<size_t>(k)];
    }
  return SeriesMatrix(x0, std::move(c));
}

SeriesMatrix series_fundamental(const DiffSystem& sys, const Rational& x0, int N) {
  const RMat& A = sys.A();
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      if (!A(i, j).defined_at(x0))
        throw std::domain_error("series_fundamental: x0 = " + x0.str() +
                                " is a pole of entry (" + std::to_string(i + 1) + "," +
                                std::to_string(j + 1) + ")");
  const int n = sys.dim();
  const SeriesMatrix As = taylor_matrix(A, x0, N);
  std::vector<QMat> U(static_cast<size_t>(N), QMat(n, n));
  U[0] = QMat::identity(n);
  for (int k = 1; k < N; ++k) {
    QMat acc(n, n);
    for (int j = 0; j < k; ++j) acc += As.coeff(j) * U[static_cast<size_t>(k - 1 - j)];
    U[static_cast<size_t>(k)] = acc * Rational(1, k);
  }
  return SeriesMatrix(x0, std::move(U));
}

Rational pick_ordinary_point(const std::vector<const RMat*>& mats) {
  for (long k = 0;; ++k) {
    const Rational x0(k);
    bool ok = true;
    for (const RMat* m : mats) {
      for (int i = 0; i < m->rows() && ok; ++i)
        for (int j = 0; j < m->cols() && ok; ++j)
          if (!(*m)(i, j).defined_at(x0)) ok = false;
      if (!ok) break;
    }
    if (ok) return x0;
  }
}

Rational pick_ordinary_point(const RMat& A) { return pick_ordinary_point({&A}); }

bool satisfies_system(const SeriesMatrix& Z, const RMat& A) {
  const SeriesMatrix As = taylor_matrix(A, Z.expansion_point(), Z.order());
  const SeriesMatrix lhs = Z.derivative();
  const SeriesMatrix rhs = (As * Z).truncate(lhs.order());
  return (lhs - rhs).is_zero();
}

}  // namespace redform
