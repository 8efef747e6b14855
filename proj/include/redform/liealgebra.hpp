#ifndef REDFORM_LIEALGEBRA_HPP
#define REDFORM_LIEALGEBRA_HPP

#include <vector>

#include "redform/diffsys.hpp"
#include "redform/partfrac.hpp"

namespace redform {

/// A = sum funcs[i] * mats[i] with funcs a Q-independent family of
/// partial-fraction atoms and mats exact constant matrices.
struct WeiNormanDecomp {
  std::vector<RatFunc> funcs;
  std::vector<QMat> mats;
  std::vector<Atom> atoms;

  RMat reconstruct() const;
};

WeiNormanDecomp wei_norman(const DiffSystem& sys);
WeiNormanDecomp wei_norman(const RMat& A);

/// [M, N] = MN - NM.
QMat bracket(const QMat& M, const QMat& N);

/// Basis of the smallest bracket-closed subspace containing the generators.
struct LieBasis {
  std::vector<QMat> basis;
  bool closed = false;
  /// True when the closure is certified to equal the algebraic envelope
  /// (sufficient condition: closure = Q*Id (+) strictly triangularizable
  /// nilpotents). Otherwise the dimension is only a lower bound on the
  /// envelope's.
  bool envelope_certified = false;
};

LieBasis lie_closure(const std::vector<QMat>& gens);

/// Span of pairwise brackets of the given basis (one derived step).
std::vector<QMat> derived_subalgebra(const std::vector<QMat>& basis);

/// Dimensions of the derived series D0 = closure, D1 = [D0, D0], ... down to 0.
std::vector<int> derived_series_dims(const LieBasis& b);

struct LieDimResult {
  int dim = 0;
  LieBasis basis;
  WeiNormanDecomp decomp;
};

LieDimResult lie_dim(const DiffSystem& sys);

/// True iff every element of the span is nilpotent (common-kernel flag test).
bool all_nilpotent(const std::vector<QMat>& span_basis);

}  // namespace redform

#endif
