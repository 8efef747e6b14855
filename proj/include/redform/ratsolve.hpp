#ifndef REDFORM_RATSOLVE_HPP
#define REDFORM_RATSOLVE_HPP

#include "redform/matrix.hpp"
#include "redform/params.hpp"
#include "redform/partfrac.hpp"

namespace redform {

/// Solution set of a parametrized linear problem: a particular solution
/// affine in parameters (old ones plus the fresh new_params), valid exactly
/// for parameter values satisfying `constraints`. `empty` means no solution
/// for any parameter values.
struct ParamSolutionSpace {
  std::vector<ParamAffine> particular;
  std::vector<ParamId> new_params;
  ConstraintSet constraints;
  bool empty = false;
};

/// All rational f with f' = rhs: Hermite-reduce; the remainder must vanish,
/// its atom coefficients (affine in parameters) become constraints. The
/// particular solution carries one fresh integration constant.
ParamSolutionSpace param_antiderivative(const ParamAffine& rhs, ParamStore& store,
                                        const std::string& const_label = "c");

/// Rational solutions of y^(n) + c_{n-1} y^(n-1) + ... + c_0 y = rhs with a
/// parametrized right-hand side. All finite poles must be Q-rational
/// (otherwise UnsupportedInput). Fresh parameters are the numerator-ansatz
/// coefficients; free ones span the homogeneous solutions.
ParamSolutionSpace scalar_rational_solutions(const std::vector<RatFunc>& op_coeffs,
                                             const ParamAffine& rhs, ParamStore& store);

/// Rational solutions of F' = M F + rhs solved by back-substitution in the
/// given component order. M must be triangular with respect to that order
/// (each equation may involve only already-solved components); diagonal
/// entries are allowed and handled through first-order scalar solves.
ParamSolutionSpace triangular_system_rational_solutions(const RMat& M,
                                                        const std::vector<ParamAffine>& rhs,
                                                        const std::vector<int>& order,
                                                        ParamStore& store);

/// Rational solutions of F' = M F + rhs for a full (small) system, via a
/// cyclic covector reducing to one scalar equation. Complete: empty means no
/// rational solution for any admissible parameters.
ParamSolutionSpace system_rational_solutions_cyclic(const RMat& M,
                                                    const std::vector<ParamAffine>& rhs,
                                                    ParamStore& store);

/// Order of vanishing of f at alpha (negative at a pole); INT_MAX for f = 0.
int order_at(const RatFunc& f, const Rational& alpha);
/// Leading local coefficient: (f * (x-alpha)^(-order))(alpha).
Rational leading_coeff_at(const RatFunc& f, const Rational& alpha);

/// Integer roots of a polynomial.
std::vector<long> integer_roots(const Poly& p);

/// The Q-rational poles of f; throws UnsupportedInput if the denominator has
/// a non-linear irreducible factor.
std::vector<Rational> rational_poles(const RatFunc& f);

}  // namespace redform

#endif
