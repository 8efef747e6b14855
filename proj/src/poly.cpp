#include "redform/poly.hpp"

#include <ostream>
#include <sstream>
#include <stdexcept>

namespace redform {

void Poly::trim() {
  while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
}

Poly Poly::monomial(int deg, const Rational& c) {
  Poly p;
  if (c.is_zero()) return p;
  p.coeffs_.assign(static_cast<size_t>(deg) + 1, Rational(0));
  p.coeffs_.back() = c;
  return p;
}

Rational Poly::coeff(int i) const {
  if (i < 0 || i >= static_cast<int>(coeffs_.size())) return Rational(0);
  return coeffs_[static_cast<size_t>(i)];
}

Poly Poly::operator-() const {
  Poly r(*this);
  for (auto& c : r.coeffs_) c = -c;
  return r;
}

Poly& Poly::operator+=(const Poly& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
  for (size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  trim();
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
  for (size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  trim();
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly();
  std::vector<Rational> c(a.coeffs_.size() + b.coeffs_.size() - 1, Rational(0));
  for (size_t i = 0; i < a.coeffs_.size(); ++i) {
    if (a.coeffs_[i].is_zero()) continue;
    for (size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  }
  return Poly(std::move(c));
}

Poly Poly::operator*(const Rational& c) const {
  if (c.is_zero()) return Poly();
  Poly r(*this);
  for (auto& k : r.coeffs_) k *= c;
  return r;
}

std::pair<Poly, Poly> Poly::divrem(const Poly& d) const {
  if (d.is_zero()) throw std::domain_error("Poly: division by zero polynomial");
  Poly q, r(*this);
  const int dd = d.degree();
  const Rational lead_inv = d.leading().inverse();
  while (!r.is_zero() && r.degree() >= dd) {
    const int k = r.degree() - dd;
    const Rational c = r.leading() * lead_inv;
    q += Poly::monomial(k, c);
    r -= d * Poly::monomial(k, c);
  }
  return {q, r};
}

Poly Poly::div_exact(const Poly& d) const {
  auto [q, r] = divrem(d);
  if (!r.is_zero()) throw std::domain_error("Poly: non-exact division");
  return q;
}

Poly Poly::derivative() const {
  if (coeffs_.size() <= 1) return Poly();
  std::vector<Rational> c(coeffs_.size() - 1);
  for (size_t i = 1; i < coeffs_.size(); ++i) c[i - 1] = coeffs_[i] * Rational(static_cast<long>(i));
  return Poly(std::move(c));
}

Rational Poly::eval(const Rational& x) const {
  Rational acc(0);
  for (size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + coeffs_[i];
  return acc;
}

Poly Poly::pow(int n) const {
  if (n < 0) throw std::domain_error("Poly: negative power");
  Poly r(Rational(1)), b(*this);
  while (n > 0) {
    if (n & 1) r *= b;
    b *= b;
    n >>= 1;
  }
  return r;
}

Poly Poly::monic() const {
  if (is_zero()) return *this;
  return *this * leading().inverse();
}

Poly Poly::shift_up(int k) const {
  if (is_zero() || k == 0) return *this;
  std::vector<Rational> c(coeffs_.size() + static_cast<size_t>(k), Rational(0));
  for (size_t i = 0; i < coeffs_.size(); ++i) c[i + static_cast<size_t>(k)] = coeffs_[i];
  return Poly(std::move(c));
}

Poly poly_gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = a.divrem(b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

PolyXgcd poly_xgcd(const Poly& a, const Poly& b) {
  Poly r0 = a, r1 = b;
  Poly s0(Rational(1)), s1, t0, t1(Rational(1));
  while (!r1.is_zero()) {
    auto [q, r] = r0.divrem(r1);
    Poly s2 = s0 - q * s1;
    Poly t2 = t0 - q * t1;
    r0 = std::move(r1); r1 = std::move(r);
    s0 = std::move(s1); s1 = std::move(s2);
    t0 = std::move(t1); t1 = std::move(t2);
  }
  if (!r0.is_zero()) {
    const Rational inv = r0.leading().inverse();
    r0 = r0 * inv;
    s0 = s0 * inv;
    t0 = t0 * inv;
  }
  return {r0, s0, t0};
}

Poly poly_invmod(const Poly& a, const Poly& m) {
  auto x = poly_xgcd(a, m);
  if (!x.g.is_one()) throw std::domain_error("Poly: not invertible modulo m");
  return x.s.divrem(m).second;
}

std::string Poly::str(const std::string& var) const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int i = degree(); i >= 0; --i) {
    const Rational c = coeff(i);
    if (c.is_zero()) continue;
    Rational a = c;
    if (first) {
      if (a.sign() < 0) { os << "-"; a = -a; }
    } else {
      os << (a.sign() < 0 ? " - " : " + ");
      if (a.sign() < 0) a = -a;
    }
    first = false;
    const bool unit = a.is_one();
    if (i == 0) {
      os << a.str();
    } else {
      if (!unit) os << a.str() << "*";
      os << var;
      if (i > 1) os << "^" << i;
    }
  }
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Poly& p) { return os << p.str(); }

}  // namespace redform
