#ifndef REDFORM_RATFUNC_HPP
#define REDFORM_RATFUNC_HPP

#include <iosfwd>
#include <string>

#include "redform/poly.hpp"

namespace redform {

/// Rational function over Q in canonical form: gcd(num, den) = 1 and den
/// monic, so structural equality decides mathematical equality.
class RatFunc {
public:
  RatFunc() : num_(), den_(Rational(1)) {}
  RatFunc(const Rational& c) : num_(c), den_(Rational(1)) {}
  RatFunc(long c) : num_(Rational(c)), den_(Rational(1)) {}
  RatFunc(const Poly& p) : num_(p), den_(Rational(1)) {}
  RatFunc(Poly num, Poly den);

  static RatFunc x() { return RatFunc(Poly::x()); }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }

  bool is_zero() const { return num_.is_zero(); }
  bool is_one() const { return num_.is_one() && den_.is_one(); }
  bool is_constant() const { return num_.is_constant() && den_.is_one(); }
  bool is_polynomial() const { return den_.is_one(); }
  /// Constant value; requires is_constant().
  Rational constant_value() const;

  RatFunc operator-() const;
  friend RatFunc operator+(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b);
  RatFunc& operator+=(const RatFunc& o) { *this = *this + o; return *this; }
  RatFunc& operator-=(const RatFunc& o) { *this = *this - o; return *this; }
  RatFunc& operator*=(const RatFunc& o) { *this = *this * o; return *this; }
  RatFunc& operator/=(const RatFunc& o) { *this = *this / o; return *this; }

  friend bool operator==(const RatFunc& a, const RatFunc& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const RatFunc& a, const RatFunc& b) { return !(a == b); }

  RatFunc inverse() const;
  /// Derivative by the quotient rule, canonical form.
  RatFunc derivative() const;
  RatFunc pow(int n) const;

  /// Evaluation at a point where the denominator does not vanish.
  Rational eval(const Rational& x) const;
  bool defined_at(const Rational& x) const { return !den_.eval(x).is_zero(); }

  /// Canonical printed form "num/den" (fully expanded, monic den).
  std::string str(const std::string& var = "x") const;

private:
  void normalize();
  Poly num_, den_;
};

std::ostream& operator<<(std::ostream& os, const RatFunc& f);

}  // namespace redform

#endif
