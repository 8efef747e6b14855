#ifndef REDFORM_REDUCER_HPP
#define REDFORM_REDUCER_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "redform/diffsys.hpp"
#include "redform/liealgebra.hpp"
#include "redform/params.hpp"
#include "redform/ratsolve.hpp"

namespace redform {

/// Raised when a reduction is requested without the diagonal-reduced
/// assertion (CLI exit code 4).
struct AssumptionError : std::runtime_error {
  explicit AssumptionError(const std::string& w) : std::runtime_error(w) {}
};

/// Adjoint action of the block diagonal on the off-diagonal space, as the
/// N x N matrix (N = n1*n2) acting on row-stacked vec of the coupling block.
struct AdjointAction {
  RMat psi;
  int n1 = 0, n2 = 0;
};

/// Psi = A2 (x) Id_{n1} - Id_{n2} (x) A1^T. The defining identity
/// vec(A2 b - b A1) = Psi vec(b) is verified on random constant b.
AdjointAction adjoint_action(const RMat& A1, const RMat& A2);
/// Two-block lower-triangular system.
AdjointAction adjoint_action(const DiffSystem& sys);

/// Image of a constant off-diagonal matrix under the adjoint action, as a
/// rational-function matrix: A2 b - b A1.
RMat psi_image(const AdjointAction& psi, const RMat& A1, const RMat& A2, const QMat& b);

/// Matrix of Psi restricted to the span of the given constant matrices
/// (entry (m,k) = coefficient of basis[m] in Psi(basis[k])). Throws if the
/// span is not a Psi-space.
RMat restrict_psi(const AdjointAction& psi, const std::vector<QMat>& basis);

/// Adapted flag of the off-diagonal space: levels ordered top (solved first)
/// to bottom (the joint kernel); Psi maps each level into later levels.
struct Flag {
  std::vector<std::vector<QMat>> levels;
  std::vector<QMat> basis;   // concatenation of levels, top first
  RMat adapted_psi;          // (m,k): coefficient of basis[m] in Psi(basis[k])
  RatFunc lambda;            // scalar diagonal part of the action
  int n1 = 0, n2 = 0;

  std::vector<int> level_sizes() const;
  int level_of(int k) const;
  int offset_of_level(int t) const;
};

/// Kernel-chain flag for the whole off-diagonal space. Requires the shifted
/// constant parts of Psi to act jointly nilpotently (UnsupportedInput
/// otherwise, naming the obstruction).
Flag flag_filtration(const AdjointAction& psi, const WeiNormanDecomp& diag_decomp);
/// Same, restricted to a given Psi-subspace.
Flag flag_filtration(const AdjointAction& psi, const WeiNormanDecomp& diag_decomp,
                     const std::vector<QMat>& subspace);
/// Builds a Flag from externally supplied levels (top first); validates the
/// strict triangularity of the adapted action.
Flag flag_from_levels(const AdjointAction& psi, const WeiNormanDecomp& diag_decomp,
                      std::vector<std::vector<QMat>> levels);

struct ConstraintLogEntry {
  int level_tag = 0;       // paper-style numbering: top level = number of levels
  std::string row;         // the committed relation, e.g. "c3,1 - 1"
  std::string pretty;      // resolved display, e.g. "c3,1 = 1"
};

struct BranchEvent {
  int level_tag = 0;
  int direction = 0;       // adapted-basis index (within the stage)
  std::string atom;
  std::string detail;      // what was kept as residual / the alternative
};

struct IntegralVerdict {
  int row = 0;                     // 0-based row index in the full system
  bool dependent = false;
  std::vector<RatFunc> relation;   // y_row = sum relation[j] * y_j + const
};

struct ReductionReport {
  DiffSystem original;
  DiffSystem reduced;
  GaugeMatrix gauge;
  int lie_dim_before = 0;
  int lie_dim_after = 0;
  bool envelope_certified_before = false;
  bool envelope_certified_after = false;
  std::vector<ConstraintLogEntry> constraints_log;
  std::vector<int> removed;      // adapted-basis ids with coupling removed
  std::vector<int> obstructed;   // ids with a surviving residual
  std::vector<BranchEvent> branch_choices;
  bool diag_reduced_assumed = false;
  std::string verdict;           // "reduced" or "already reduced"
  bool residual_in_span = true;  // residual inside diag Wei-Norman span
  std::vector<std::string> free_params;  // surviving free constants (labels)

  std::optional<int> asserted_diag_galois_dim;
  std::optional<int> galois_dim;
  int residual_orbit_dim = 0;    // dim of smallest Psi-space containing residual
  std::vector<IntegralVerdict> integrals;
};

struct ReduceOptions {
  std::optional<int> asserted_diag_galois_dim;
  /// Values for surviving free constants (by label); default zero.
  std::map<std::string, Rational> free_assignments;
};

/// Level-by-level reduction of a two-block system. The diagonal-reduced
/// assumption must be asserted. Falls back to a cyclic-vector whole-space
/// solve when the flag's nilpotency precondition fails and N <= 8.
ReductionReport reduce_two_block(const DiffSystem& sys, const ReduceOptions& opts = {});

/// Iterated reduction for any number of blocks (innermost trailing corner
/// first for lower orientation).
ReductionReport reduce_multi_block(const DiffSystem& sys, const ReduceOptions& opts = {});

/// Human-readable independence/transcendence summary.
std::string independence_report(const ReductionReport& rep,
                                const std::map<std::string, std::string>& labels = {});

/// Dimension of the smallest Psi-space containing the given coupling block.
int psi_orbit_dim(const RMat& A1, const RMat& A2, const RMat& coupling);

/// Rejects matrices whose denominators have non-Q-rational roots.
void require_rational_poles(const RMat& A);

/// The level-by-level engine, exposed so single levels can be driven against
/// an externally supplied flag.
class ReductionEngine {
public:
  ReductionEngine(const RMat& A1, const RMat& A2, const RMat& S, const WeiNormanDecomp& diag,
                  Flag flag);

  int level_count() const { return static_cast<int>(flag_.levels.size()); }
  /// Processes one level (0 = top). Returns the gauge terms introduced:
  /// pairs (adapted index, coefficient function, symbolic in parameters).
  std::vector<std::pair<int, ParamAffine>> reduce_level(int t);
  void run_all();

  /// Resolves constraints, defaults free parameters (overridable by label),
  /// and returns the concrete coupling-block gauge B with P = Id + B.
  RMat resolve_gauge(const std::map<std::string, Rational>& free_assignments = {}) const;
  /// The resolved residual coupling block.
  RMat resolve_residual(const std::map<std::string, Rational>& free_assignments = {}) const;

  const ConstraintSet& constraints() const { return constraints_; }
  ParamStore& store() { return store_; }
  const Flag& flag() const { return flag_; }
  const std::vector<ParamAffine>& coupling_coords() const { return s_; }
  const std::vector<ParamAffine>& gauge_coeffs() const { return f_; }
  const std::vector<ConstraintLogEntry>& log() const { return log_; }
  const std::vector<BranchEvent>& branch_events() const { return branches_; }
  bool residual_in_span() const { return residual_in_span_; }
  std::vector<std::string> free_param_labels() const;

private:
  std::map<ParamId, Rational> assignment(
      const std::map<std::string, Rational>& free_assignments) const;

  RMat A1_, A2_;
  WeiNormanDecomp diag_;
  Flag flag_;
  ParamStore store_;
  ConstraintSet constraints_;
  std::vector<ParamAffine> s_;  // coupling coordinates in the adapted basis
  std::vector<ParamAffine> f_;  // gauge coefficient per direction
  std::vector<bool> touched_;
  std::vector<ConstraintLogEntry> log_;
  std::vector<BranchEvent> branches_;
  std::vector<Atom> span_atoms_;  // diag Wei-Norman atoms (allowance span)
  bool residual_in_span_ = true;
  int processed_levels_ = 0;
};

}  // namespace redform

#endif
