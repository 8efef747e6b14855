#include "redform/rational.hpp"

#include <ostream>
#include <stdexcept>

namespace redform {

Rational::Rational(long n, long d) {
  if (d == 0) throw std::domain_error("Rational: zero denominator");
  v_ = mpq_class(n, d);
  v_.canonicalize();
}

Rational::Rational(const mpz_class& n, const mpz_class& d) {
  if (d == 0) throw std::domain_error("Rational: zero denominator");
  v_ = mpq_class(n);
  v_ /= mpq_class(d);
  v_.canonicalize();
}

Rational Rational::from_string(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("Rational: empty string");
  try {
    mpq_class q(s, 10);
    q.canonicalize();
    if (q.get_den() == 0) throw std::invalid_argument("Rational: zero denominator");
    return Rational(q);
  } catch (const std::invalid_argument&) {
    throw;
  } catch (...) {
    throw std::invalid_argument("Rational: cannot parse '" + s + "'");
  }
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw std::domain_error("Rational: division by zero");
  v_ /= o.v_;
  return *this;
}

Rational Rational::inverse() const {
  if (is_zero()) throw std::domain_error("Rational: inverse of zero");
  return Rational(mpq_class(1) / v_);
}

bool Rational::fits_long(long& out) const {
  if (!is_integer()) return false;
  if (!v_.get_num().fits_slong_p()) return false;
  out = v_.get_num().get_si();
  return true;
}

std::string Rational::str() const { return v_.get_str(); }

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

}  // namespace redform
