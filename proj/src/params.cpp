#include "redform/params.hpp"

#include <sstream>
#include <stdexcept>

namespace redform {

ParamId ParamStore::fresh(const std::string& label) {
  labels_.push_back(label);
  return static_cast<ParamId>(labels_.size()) - 1;
}

LinExpr LinExpr::operator-() const {
  LinExpr r;
  r.constant = -constant;
  for (const auto& [p, c] : coeffs) r.coeffs[p] = -c;
  return r;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  constant += o.constant;
  for (const auto& [p, c] : o.coeffs) {
    auto it = coeffs.find(p);
    if (it == coeffs.end()) {
      coeffs[p] = c;
    } else {
      it->second += c;
      if (it->second.is_zero()) coeffs.erase(it);
    }
  }
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) { return *this += -o; }

LinExpr LinExpr::operator*(const Rational& c) const {
  LinExpr r;
  if (c.is_zero()) return r;
  r.constant = constant * c;
  for (const auto& [p, k] : coeffs) r.coeffs[p] = k * c;
  return r;
}

std::string LinExpr::str(const ParamStore& store) const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [p, c] : coeffs) {
    if (first) {
      if (c == Rational(1)) os << store.label(p);
      else if (c == Rational(-1)) os << "-" << store.label(p);
      else os << c << "*" << store.label(p);
      first = false;
    } else {
      os << (c.sign() < 0 ? " - " : " + ");
      const Rational a = c.abs();
      if (a.is_one()) os << store.label(p);
      else os << a << "*" << store.label(p);
    }
  }
  if (first) return constant.str();
  if (!constant.is_zero()) os << (constant.sign() < 0 ? " - " : " + ") << constant.abs();
  return os.str();
}

ParamAffine ParamAffine::param(ParamId p, const RatFunc& coeff) {
  ParamAffine a;
  if (!coeff.is_zero()) a.terms_[p] = coeff;
  return a;
}

ParamAffine ParamAffine::from_linexpr(const LinExpr& e) {
  ParamAffine a;
  a.const_ = RatFunc(e.constant);
  for (const auto& [p, c] : e.coeffs) a.terms_[p] = RatFunc(c);
  return a;
}

void ParamAffine::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (it->second.is_zero()) it = terms_.erase(it);
    else ++it;
  }
}

ParamAffine ParamAffine::operator-() const {
  ParamAffine r;
  r.const_ = -const_;
  for (const auto& [p, f] : terms_) r.terms_[p] = -f;
  return r;
}

ParamAffine& ParamAffine::operator+=(const ParamAffine& o) {
  const_ += o.const_;
  for (const auto& [p, f] : o.terms_) {
    auto it = terms_.find(p);
    if (it == terms_.end()) terms_[p] = f;
    else it->second += f;
  }
  prune();
  return *this;
}

ParamAffine& ParamAffine::operator-=(const ParamAffine& o) { return *this += -o; }

ParamAffine ParamAffine::operator*(const RatFunc& f) const {
  ParamAffine r;
  if (f.is_zero()) return r;
  r.const_ = const_ * f;
  for (const auto& [p, g] : terms_) r.terms_[p] = g * f;
  return r;
}

ParamAffine ParamAffine::derivative() const {
  ParamAffine r;
  r.const_ = const_.derivative();
  for (const auto& [p, f] : terms_) {
    RatFunc d = f.derivative();
    if (!d.is_zero()) r.terms_[p] = d;
  }
  return r;
}

ParamAffine ParamAffine::substitute(const std::map<ParamId, LinExpr>& assign) const {
  ParamAffine r(const_);
  for (const auto& [p, f] : terms_) {
    auto it = assign.find(p);
    if (it == assign.end()) {
      r += ParamAffine::param(p, f);
    } else {
      r += ParamAffine(f * RatFunc(it->second.constant));
      for (const auto& [q, c] : it->second.coeffs) r += ParamAffine::param(q, f * RatFunc(c));
    }
  }
  return r;
}

RatFunc ParamAffine::eval(const std::map<ParamId, Rational>& values) const {
  RatFunc r = const_;
  for (const auto& [p, f] : terms_) {
    auto it = values.find(p);
    if (it == values.end()) throw std::domain_error("ParamAffine: unassigned parameter in eval");
    r += f * RatFunc(it->second);
  }
  return r;
}

std::string ParamAffine::str(const ParamStore& store) const {
  std::ostringstream os;
  bool first = true;
  if (!const_.is_zero() || terms_.empty()) {
    os << const_;
    first = false;
  }
  for (const auto& [p, f] : terms_) {
    if (!first) os << " + ";
    os << "(" << f << ")*" << store.label(p);
    first = false;
  }
  return os.str();
}

LinExpr ConstraintSet::reduce(LinExpr e) const {
  for (const auto& row : rows_) {
    const ParamId pivot = row.coeffs.begin()->first;
    auto it = e.coeffs.find(pivot);
    if (it == e.coeffs.end()) continue;
    e -= row * it->second;  // row pivot coefficient is 1
  }
  return e;
}

ConstraintSet::AddResult ConstraintSet::classify(const LinExpr& e) const {
  const LinExpr r = reduce(e);
  if (r.is_zero()) return AddResult::Redundant;
  if (r.is_constant()) return AddResult::Inconsistent;
  return AddResult::Added;
}

ConstraintSet::AddResult ConstraintSet::add(const LinExpr& e) {
  LinExpr r = reduce(e);
  if (r.is_zero()) return AddResult::Redundant;
  if (r.is_constant()) {
    consistent_ = false;
    return AddResult::Inconsistent;
  }
  r = r * r.coeffs.begin()->second.inverse();
  const ParamId pivot = r.coeffs.begin()->first;
  for (auto& row : rows_) {
    auto it = row.coeffs.find(pivot);
    if (it != row.coeffs.end()) row -= r * it->second;
  }
  rows_.push_back(r);
  return AddResult::Added;
}

void ConstraintSet::merge(const ConstraintSet& other) {
  if (!other.consistent_) consistent_ = false;
  for (const auto& row : other.rows_) add(row);
}

ConstraintSet::Solution ConstraintSet::solve() const {
  Solution s;
  s.consistent = consistent_;
  if (!consistent_) return s;
  std::map<ParamId, bool> seen;
  for (const auto& row : rows_)
    for (const auto& [p, c] : row.coeffs) seen.emplace(p, false);
  for (const auto& row : rows_) seen[row.coeffs.begin()->first] = true;
  for (const auto& row : rows_) {
    const ParamId pivot = row.coeffs.begin()->first;
    // pivot = -constant - sum_{q != pivot} c_q q
    LinExpr rhs;
    rhs.constant = -row.constant;
    for (auto it = std::next(row.coeffs.begin()); it != row.coeffs.end(); ++it)
      rhs.coeffs[it->first] = -it->second;
    s.assignments[pivot] = rhs;
  }
  for (const auto& [p, pivot] : seen) {
    s.all_params.push_back(p);
    if (!pivot) s.free_params.push_back(p);
  }
  return s;
}

std::map<ParamId, Rational> ConstraintSet::zero_default_assignment(int param_count) const {
  std::map<ParamId, Rational> values;
  for (ParamId p = 0; p < param_count; ++p) values[p] = Rational(0);
  const Solution s = solve();
  if (!s.consistent) throw std::domain_error("ConstraintSet: inconsistent");
  for (const auto& [p, expr] : s.assignments) {
    Rational v = expr.constant;  // free parameters are zero
    values[p] = v;
  }
  return values;
}

}  // namespace redform
