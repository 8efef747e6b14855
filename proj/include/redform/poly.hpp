#ifndef REDFORM_POLY_HPP
#define REDFORM_POLY_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "redform/rational.hpp"

namespace redform {

/// Dense univariate polynomial over Q. The zero polynomial has an empty
/// coefficient vector and degree() == -1; otherwise the leading coefficient
/// is nonzero.
class Poly {
public:
  Poly() = default;
  Poly(const Rational& c) { if (!c.is_zero()) coeffs_.push_back(c); }
  Poly(long c) : Poly(Rational(c)) {}
  explicit Poly(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  static Poly x() { return monomial(1, Rational(1)); }
  static Poly monomial(int deg, const Rational& c);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  bool is_constant() const { return coeffs_.size() <= 1; }
  bool is_one() const { return coeffs_.size() == 1 && coeffs_[0].is_one(); }

  /// Coefficient of x^i (zero beyond the degree).
  Rational coeff(int i) const;
  const std::vector<Rational>& coeffs() const { return coeffs_; }
  Rational leading() const { return is_zero() ? Rational(0) : coeffs_.back(); }

  Poly operator-() const;
  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly& operator*=(const Poly& o) { *this = *this * o; return *this; }
  Poly operator*(const Rational& c) const;

  friend bool operator==(const Poly& a, const Poly& b) { return a.coeffs_ == b.coeffs_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  /// Euclidean division: *this = q*d + r with deg r < deg d. Throws on d == 0.
  std::pair<Poly, Poly> divrem(const Poly& d) const;
  Poly div_exact(const Poly& d) const;

  Poly derivative() const;
  Rational eval(const Rational& x) const;
  Poly pow(int n) const;
  Poly monic() const;
  Poly shift_up(int k) const;  // multiply by x^k

  std::string str(const std::string& var = "x") const;

private:
  void trim();
  std::vector<Rational> coeffs_;
};

/// Monic gcd; gcd(0,0) = 0.
Poly poly_gcd(Poly a, Poly b);

/// Extended gcd: returns (g, s, t) with s*a + t*b = g, g monic (or zero).
struct PolyXgcd {
  Poly g, s, t;
};
PolyXgcd poly_xgcd(const Poly& a, const Poly& b);

/// Inverse of a modulo m (gcd(a, m) = 1 required).
Poly poly_invmod(const Poly& a, const Poly& m);

std::ostream& operator<<(std::ostream& os, const Poly& p);

}  // namespace redform

#endif
