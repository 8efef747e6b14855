#include "redform/diffsys.hpp"

#include <numeric>
#include <stdexcept>

namespace redform {

namespace {

// Block index of a row/column position given offsets.
int block_of(const std::vector<int>& offsets, int i) {
  for (size_t b = 0; b + 1 < offsets.size(); ++b)
    if (i < offsets[b + 1]) return static_cast<int>(b);
  return -1;
}

}  // namespace

DiffSystem::DiffSystem(RMat A, std::vector<int> blocks, Orientation orientation,
                       bool diag_reduced_assumed)
    : A_(std::move(A)), blocks_(std::move(blocks)), orientation_(orientation),
      diag_reduced_(diag_reduced_assumed) {
  if (A_.rows() != A_.cols()) throw std::invalid_argument("DiffSystem: matrix not square");
  const int n = A_.rows();
  int sum = 0;
  for (int b : blocks_) {
    if (b <= 0) throw std::invalid_argument("DiffSystem: nonpositive block size");
    sum += b;
  }
  if (sum != n) throw std::invalid_argument("DiffSystem: blocks do not sum to dimension");
  const auto off = block_offsets();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int bi = block_of(off, i), bj = block_of(off, j);
      const bool forbidden = orientation_ == Orientation::Lower ? bj > bi : bj < bi;
      if (forbidden && !A_(i, j).is_zero())
        throw std::invalid_argument("DiffSystem: entry (" + std::to_string(i + 1) + "," +
                                    std::to_string(j + 1) + ") violates block triangularity");
    }
}

std::vector<int> DiffSystem::block_offsets() const {
  std::vector<int> off(blocks_.size() + 1, 0);
  std::partial_sum(blocks_.begin(), blocks_.end(), off.begin() + 1);
  return off;
}

RMat DiffSystem::diag_part() const {
  RMat d(dim(), dim());
  const auto off = block_offsets();
  for (size_t b = 0; b + 1 < off.size(); ++b)
    for (int i = off[b]; i < off[b + 1]; ++i)
      for (int j = off[b]; j < off[b + 1]; ++j) d(i, j) = A_(i, j);
  return d;
}

RMat DiffSystem::coupling_part() const { return A_ - diag_part(); }

DiffSystem DiffSystem::reversed() const {
  const int n = dim();
  RMat B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = A_(n - 1 - i, n - 1 - j);
  std::vector<int> rb(blocks_.rbegin(), blocks_.rend());
  const Orientation o = orientation_ == Orientation::Lower ? Orientation::Upper : Orientation::Lower;
  return DiffSystem(std::move(B), std::move(rb), o, diag_reduced_);
}

GaugeMatrix::GaugeMatrix(RMat P) : P_(std::move(P)) {
  if (P_.rows() != P_.cols()) throw std::invalid_argument("GaugeMatrix: not square");
  if (!is_invertible(P_)) throw std::invalid_argument("GaugeMatrix: singular matrix");
}

RMat matrix_derivative(const RMat& A) {
  RMat d(A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) d(i, j) = A(i, j).derivative();
  return d;
}

RMat gauge_transform(const RMat& P, const RMat& A) {
  const RMat Pinv = inverse(P);
  return Pinv * A * P - Pinv * matrix_derivative(P);
}

namespace {

// Finest block splitting keeping B triangular for the given orientation.
std::vector<int> recompute_blocks(const RMat& B, Orientation o) {
  const int n = B.rows();
  std::vector<int> blocks;
  int prev = 0;
  for (int k = 1; k < n; ++k) {
    bool ok = true;
    for (int i = 0; i < k && ok; ++i)
      for (int j = k; j < n && ok; ++j) {
        const RatFunc& v = o == Orientation::Lower ? B(i, j) : B(j, i);
        if (!v.is_zero()) ok = false;
      }
    if (ok) {
      blocks.push_back(k - prev);
      prev = k;
    }
  }
  blocks.push_back(n - prev);
  return blocks;
}

}  // namespace

DiffSystem gauge_transform(const GaugeMatrix& P, const DiffSystem& sys) {
  if (P.dim() != sys.dim()) throw std::invalid_argument("gauge_transform: dimension mismatch");
  const RMat B = gauge_transform(P.P(), sys.A());
  return DiffSystem(B, recompute_blocks(B, sys.orientation()), sys.orientation(),
                    sys.diag_reduced_assumed());
}

DiffSystem augment_with_integrals(const DiffSystem& sys, const std::vector<int>& select) {
  const int n = sys.dim();
  const int m = static_cast<int>(select.size());
  if (m == 0) return sys;
  for (int s : select)
    if (s < 0 || s >= n) throw std::invalid_argument("augment_with_integrals: bad row selection");
  if (sys.orientation() != Orientation::Lower)
    return augment_with_integrals(sys.reversed(), select).reversed();
  RMat B(n + m, n + m);
  B.paste(0, 0, sys.A());
  for (int k = 0; k < m; ++k) B(n + k, select[static_cast<size_t>(k)]) = RatFunc(1);
  std::vector<int> blocks = sys.blocks();
  for (int k = 0; k < m; ++k) blocks.push_back(1);
  return DiffSystem(std::move(B), std::move(blocks), Orientation::Lower,
                    sys.diag_reduced_assumed());
}

DiffSystem companion_of_operator(const std::vector<RatFunc>& coeffs) {
  const int n = static_cast<int>(coeffs.size());
  if (n == 0) throw std::invalid_argument("companion_of_operator: empty operator");
  RMat A(n, n);
  for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = RatFunc(1);
  for (int j = 0; j < n; ++j) A(n - 1, j) = -coeffs[static_cast<size_t>(j)];
  return DiffSystem(std::move(A), {n}, Orientation::Lower);
}

bool check_gauge_identity(const GaugeMatrix& P, const DiffSystem& src, const DiffSystem& dst) {
  if (P.dim() != src.dim() || src.dim() != dst.dim()) return false;
  return gauge_transform(P.P(), src.A()) == dst.A();
}

}  // namespace redform
