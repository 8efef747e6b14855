#ifndef REDFORM_PARAMS_HPP
#define REDFORM_PARAMS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "redform/ratfunc.hpp"

namespace redform {

using ParamId = int;

/// Per-run registry of unknown rational constants. The only stateful piece of
/// the solver; one instance per reduction run.
class ParamStore {
public:
  ParamId fresh(const std::string& label);
  const std::string& label(ParamId id) const { return labels_.at(static_cast<size_t>(id)); }
  int count() const { return static_cast<int>(labels_.size()); }

private:
  std::vector<std::string> labels_;
};

/// Q-affine expression in parameters: constant + sum coeff_p * p.
struct LinExpr {
  Rational constant;
  std::map<ParamId, Rational> coeffs;  // no zero coefficients stored

  LinExpr() = default;
  LinExpr(const Rational& c) : constant(c) {}
  static LinExpr param(ParamId p) {
    LinExpr e;
    e.coeffs[p] = Rational(1);
    return e;
  }

  bool is_constant() const { return coeffs.empty(); }
  bool is_zero() const { return coeffs.empty() && constant.is_zero(); }

  LinExpr operator-() const;
  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  LinExpr operator*(const Rational& c) const;
  bool operator==(const LinExpr& o) const { return constant == o.constant && coeffs == o.coeffs; }

  std::string str(const ParamStore& store) const;
};

/// Value affine in the unknown constants, with rational-function coefficients.
class ParamAffine {
public:
  ParamAffine() = default;
  ParamAffine(const RatFunc& c) : const_(c) {}
  ParamAffine(const Rational& c) : const_(RatFunc(c)) {}
  static ParamAffine param(ParamId p, const RatFunc& coeff = RatFunc(1));
  static ParamAffine from_linexpr(const LinExpr& e);

  const RatFunc& constant_term() const { return const_; }
  const std::map<ParamId, RatFunc>& linear_terms() const { return terms_; }

  bool is_zero() const { return const_.is_zero() && terms_.empty(); }
  bool is_param_free() const { return terms_.empty(); }

  ParamAffine operator-() const;
  ParamAffine& operator+=(const ParamAffine& o);
  ParamAffine& operator-=(const ParamAffine& o);
  friend ParamAffine operator+(ParamAffine a, const ParamAffine& b) { return a += b; }
  friend ParamAffine operator-(ParamAffine a, const ParamAffine& b) { return a -= b; }
  ParamAffine operator*(const RatFunc& f) const;  // scalar multiple
  bool operator==(const ParamAffine& o) const { return const_ == o.const_ && terms_ == o.terms_; }
  bool operator!=(const ParamAffine& o) const { return !(*this == o); }

  ParamAffine derivative() const;

  /// Substitutes params by Q-affine expressions (missing ids unchanged).
  ParamAffine substitute(const std::map<ParamId, LinExpr>& assign) const;
  /// Full evaluation: every appearing param must be assigned.
  RatFunc eval(const std::map<ParamId, Rational>& values) const;
  /// The expression with every parameter set to zero.
  RatFunc at_zero() const { return const_; }

  std::string str(const ParamStore& store) const;

private:
  RatFunc const_;
  std::map<ParamId, RatFunc> terms_;
  void prune();
};

/// Linear constraints over Q on the parameters, kept in reduced row echelon
/// form. Inconsistency is detected on insertion.
class ConstraintSet {
public:
  enum class AddResult { Redundant, Added, Inconsistent };

  /// Tests what adding `e == 0` would do, without mutating.
  AddResult classify(const LinExpr& e) const;
  /// Adds `e == 0`; on inconsistency the set is left unchanged and
  /// Inconsistent is returned.
  AddResult add(const LinExpr& e);
  void merge(const ConstraintSet& other);

  bool consistent() const { return consistent_; }
  int rank() const { return static_cast<int>(rows_.size()); }
  const std::vector<LinExpr>& rows() const { return rows_; }

  /// Reduces an expression modulo the constraints.
  LinExpr reduce(LinExpr e) const;

  struct Solution {
    bool consistent = true;
    std::map<ParamId, LinExpr> assignments;  // pivot param -> expr in free params
    std::vector<ParamId> free_params;
    std::vector<ParamId> all_params;
  };
  Solution solve() const;

  /// Assignment with all free parameters set to zero.
  std::map<ParamId, Rational> zero_default_assignment(int param_count) const;

private:
  std::vector<LinExpr> rows_;  // each row: expr == 0, pivot-normalized
  bool consistent_ = true;
};

}  // namespace redform

#endif
