#include "redform/ratfunc.hpp"

#include <ostream>
#include <sstream>
#include <stdexcept>

namespace redform {

RatFunc::RatFunc(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw std::domain_error("RatFunc: zero denominator");
  normalize();
}

void RatFunc::normalize() {
  if (num_.is_zero()) {
    den_ = Poly(Rational(1));
    return;
  }
  const Poly g = poly_gcd(num_, den_);
  if (!g.is_one()) {
    num_ = num_.div_exact(g);
    den_ = den_.div_exact(g);
  }
  const Rational lead = den_.leading();
  if (!lead.is_one()) {
    const Rational inv = lead.inverse();
    num_ = num_ * inv;
    den_ = den_ * inv;
  }
}

Rational RatFunc::constant_value() const {
  if (!is_constant()) throw std::domain_error("RatFunc: not a constant");
  return num_.coeff(0);
}

RatFunc RatFunc::operator-() const {
  RatFunc r(*this);
  r.num_ = -r.num_;
  return r;
}

RatFunc operator+(const RatFunc& a, const RatFunc& b) {
  return RatFunc(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RatFunc operator-(const RatFunc& a, const RatFunc& b) {
  return RatFunc(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

RatFunc operator*(const RatFunc& a, const RatFunc& b) {
  return RatFunc(a.num_ * b.num_, a.den_ * b.den_);
}

RatFunc operator/(const RatFunc& a, const RatFunc& b) {
  if (b.is_zero()) throw std::domain_error("RatFunc: division by zero");
  return RatFunc(a.num_ * b.den_, a.den_ * b.num_);
}

RatFunc RatFunc::inverse() const {
  if (is_zero()) throw std::domain_error("RatFunc: inverse of zero");
  return RatFunc(den_, num_);
}

RatFunc RatFunc::derivative() const {
  return RatFunc(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
}

RatFunc RatFunc::pow(int n) const {
  if (n < 0) return inverse().pow(-n);
  RatFunc r(Rational(1)), b(*this);
  while (n > 0) {
    if (n & 1) r *= b;
    b *= b;
    n >>= 1;
  }
  return r;
}

Rational RatFunc::eval(const Rational& x) const {
  const Rational d = den_.eval(x);
  if (d.is_zero()) throw std::domain_error("RatFunc: evaluation at a pole");
  return num_.eval(x) / d;
}

namespace {
int nonzero_terms(const Poly& p) {
  int nz = 0;
  for (int i = 0; i <= p.degree(); ++i)
    if (!p.coeff(i).is_zero()) ++nz;
  return nz;
}
}  // namespace

std::string RatFunc::str(const std::string& var) const {
  if (den_.is_one()) return num_.str(var);
  std::ostringstream os;
  const bool num_constant_fraction = num_.is_constant() && !num_.coeff(0).is_integer();
  if (nonzero_terms(num_) > 1 || num_constant_fraction)
    os << "(" << num_.str(var) << ")";
  else
    os << num_.str(var);
  os << "/";
  // den is monic, so a single-term den is a pure power of the variable.
  if (nonzero_terms(den_) > 1)
    os << "(" << den_.str(var) << ")";
  else
    os << den_.str(var);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const RatFunc& f) { return os << f.str(); }

}  // namespace redform
