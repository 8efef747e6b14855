#ifndef REDFORM_SERIES_HPP
#define REDFORM_SERIES_HPP

#include <vector>

#include "redform/diffsys.hpp"

namespace redform {

/// Truncated power series over Q: sum c_k (x - x0)^k for k < order.
struct QSeries {
  Rational x0;
  std::vector<Rational> c;  // size = order

  int order() const { return static_cast<int>(c.size()); }
};

/// Taylor expansion of f at x0 (x0 must not be a pole) to the given order.
QSeries taylor(const RatFunc& f, const Rational& x0, int order);

QSeries series_mul(const QSeries& a, const QSeries& b);

/// Truncated matrix power series (constant coefficient matrices).
class SeriesMatrix {
public:
  SeriesMatrix() = default;
  SeriesMatrix(Rational x0, std::vector<QMat> coeffs);

  const Rational& expansion_point() const { return x0_; }
  int order() const { return static_cast<int>(coeffs_.size()); }
  int dim_rows() const { return coeffs_.empty() ? 0 : coeffs_[0].rows(); }
  int dim_cols() const { return coeffs_.empty() ? 0 : coeffs_[0].cols(); }
  const QMat& coeff(int k) const { return coeffs_[static_cast<size_t>(k)]; }
  const std::vector<QMat>& coeffs() const { return coeffs_; }

  /// Entry (i, j) as a scalar series.
  QSeries entry(int i, int j) const;

  SeriesMatrix derivative() const;                      // order drops by one
  SeriesMatrix truncate(int order) const;
  friend SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b);
  friend SeriesMatrix operator-(const SeriesMatrix& a, const SeriesMatrix& b);
  /// Inverse (constant term must be invertible).
  SeriesMatrix inverse_series() const;

  bool is_zero() const;

private:
  Rational x0_;
  std::vector<QMat> coeffs_;
};

/// Taylor expansion of a rational matrix; every entry must be finite at x0.
SeriesMatrix taylor_matrix(const RMat& A, const Rational& x0, int order);

/// Truncated fundamental solution U with U(x0) = Id and U' = A U modulo
/// (x - x0)^N, by the coefficient recurrence. x0 must be an ordinary point;
/// otherwise throws std::domain_error naming the offending entry.
SeriesMatrix series_fundamental(const DiffSystem& sys, const Rational& x0, int N);

/// Smallest nonnegative integer that is an ordinary point of every entry.
Rational pick_ordinary_point(const RMat& A);
Rational pick_ordinary_point(const std::vector<const RMat*>& mats);

/// True iff columns of Z satisfy Z' = A Z modulo (x - x0)^(order-1).
bool satisfies_system(const SeriesMatrix& Z, const RMat& A);

}  // namespace redform

#endif
