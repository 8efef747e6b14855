#ifndef REDFORM_DIFFSYS_HPP
#define REDFORM_DIFFSYS_HPP

#include <vector>

#include "redform/matrix.hpp"

namespace redform {

enum class Orientation { Lower, Upper };

/// Linear differential system dY/dx = A Y with a declared block-triangular
/// structure along the diagonal.
class DiffSystem {
public:
  DiffSystem() = default;
  /// Validates the triangular pattern against blocks/orientation.
  DiffSystem(RMat A, std::vector<int> blocks, Orientation orientation,
             bool diag_reduced_assumed = false);

  const RMat& A() const { return A_; }
  int dim() const { return A_.rows(); }
  const std::vector<int>& blocks() const { return blocks_; }
  Orientation orientation() const { return orientation_; }
  bool diag_reduced_assumed() const { return diag_reduced_; }
  void set_diag_reduced_assumed(bool v) { diag_reduced_ = v; }

  /// Offsets of each diagonal block (prefix sums; size blocks()+1).
  std::vector<int> block_offsets() const;
  /// The block-diagonal part (same block metadata).
  RMat diag_part() const;
  /// The strictly off-diagonal (coupling) part.
  RMat coupling_part() const;

  /// Conjugation by the index-reversal permutation; flips orientation and
  /// reverses the block list. An involution.
  DiffSystem reversed() const;

  bool operator==(const DiffSystem& o) const {
    return A_ == o.A_ && blocks_ == o.blocks_ && orientation_ == o.orientation_;
  }

private:
  RMat A_;
  std::vector<int> blocks_;
  Orientation orientation_ = Orientation::Lower;
  bool diag_reduced_ = false;
};

/// Invertible rational gauge matrix; invertibility is checked exactly.
class GaugeMatrix {
public:
  GaugeMatrix() = default;
  explicit GaugeMatrix(RMat P);
  static GaugeMatrix identity(int n) { return GaugeMatrix(RMat::identity(n)); }

  const RMat& P() const { return P_; }
  int dim() const { return P_.rows(); }
  RMat inverse_matrix() const { return inverse(P_); }

  /// Composition: (a * b) acts as Y = a.P * b.P * Z.
  friend GaugeMatrix operator*(const GaugeMatrix& a, const GaugeMatrix& b) {
    return GaugeMatrix(a.P_ * b.P_);
  }

private:
  RMat P_;
};

/// P[A] = P^{-1} A P - P^{-1} P'. Block structure of the result is recomputed
/// from the entries (finest splitting compatible with the input blocks).
DiffSystem gauge_transform(const GaugeMatrix& P, const DiffSystem& sys);

/// Raw gauge action on a bare matrix.
RMat gauge_transform(const RMat& P, const RMat& A);

/// Entry-wise derivative.
RMat matrix_derivative(const RMat& A);

/// Appends m rows picking the selected components (0-based indices), as new
/// trailing 1x1 blocks; new columns are zero.
DiffSystem augment_with_integrals(const DiffSystem& sys, const std::vector<int>& select);

/// Companion system of y^(n) + c_{n-1} y^(n-1) + ... + c_0 y = 0
/// (coeffs = {c_0, ..., c_{n-1}}), acting on (y, y', ..., y^(n-1)).
DiffSystem companion_of_operator(const std::vector<RatFunc>& coeffs);

/// Exact check dst.A == P[src.A].
bool check_gauge_identity(const GaugeMatrix& P, const DiffSystem& src, const DiffSystem& dst);

}  // namespace redform

#endif
