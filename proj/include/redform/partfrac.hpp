#ifndef REDFORM_PARTFRAC_HPP
#define REDFORM_PARTFRAC_HPP

#include <utility>
#include <vector>

#include "redform/ratfunc.hpp"

namespace redform {

/// Thrown when an input leaves the supported desk-scale domain (coefficients
/// too hard to factor, search caps exceeded, non-rational singularities where
/// rational ones are required).
struct UnsupportedInput : std::runtime_error {
  explicit UnsupportedInput(const std::string& what) : std::runtime_error(what) {}
};

/// Squarefree decomposition (Yun): p = lead * prod f_i^i with the f_i monic,
/// squarefree and pairwise coprime. Factors with exponent i are returned as
/// (f_i, i); trivial factors (f_i = 1) are omitted.
std::vector<std::pair<Poly, int>> squarefree_decomposition(const Poly& p);

/// Full factorization over Q into monic irreducible factors with
/// multiplicities (rational roots, then degree <= 3 certification, then
/// Kronecker interpolation search at desk scale).
std::vector<std::pair<Poly, int>> factorize(const Poly& p);

bool is_squarefree(const Poly& p);

struct PartialFractionTerm {
  Poly factor;      // monic irreducible over Q
  int multiplicity; // >= 1; the term is numerator / factor^multiplicity
  Poly numerator;   // deg < deg(factor), nonzero
};

struct PartialFraction {
  Poly polynomial_part;
  std::vector<PartialFractionTerm> terms;
  RatFunc recombine() const;
};

/// Complete partial-fraction decomposition over Q with irreducible factors.
PartialFraction squarefree_partfrac(const RatFunc& a);

/// Hermite reduction: a = g' + r with r proper and squarefree-denominated.
/// a has a rational antiderivative iff r = 0.
std::pair<RatFunc, RatFunc> hermite_reduce(const RatFunc& a);

/// A partial-fraction atom: either the monomial x^numer_degree
/// (multiplicity == 0) or x^numer_degree / factor^multiplicity.
struct Atom {
  Poly factor;
  int multiplicity = 0;
  int numer_degree = 0;
  bool is_monomial() const { return multiplicity == 0; }
  RatFunc value() const;
  bool operator==(const Atom& o) const {
    return factor == o.factor && multiplicity == o.multiplicity && numer_degree == o.numer_degree;
  }
};

/// Deterministic atom order: monomials by degree, then pole atoms by
/// (factor degree, root / coefficients, multiplicity, numerator degree).
bool atom_less(const Atom& a, const Atom& b);

struct AtomDecomp {
  std::vector<Atom> atoms;                      // sorted, deterministic
  std::vector<std::vector<Rational>> coords;    // one row per input, over atoms
};

/// Joint exact decomposition of several rational functions over a common
/// atom list (only atoms that actually appear).
AtomDecomp atom_decompose(const std::vector<RatFunc>& fs);

struct CoeffBasis {
  std::vector<RatFunc> basis;                   // independent atoms spanning all inputs
  std::vector<std::vector<Rational>> coords;    // inputs expressed in the basis
  std::vector<Atom> atoms;                      // the atoms behind basis entries
};

/// Basis of partial-fraction atoms spanning the given functions, with exact
/// coordinates of every input.
CoeffBasis coeff_basis(const std::vector<RatFunc>& fs);

}  // namespace redform

#endif
