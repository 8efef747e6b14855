#include "redform/liealgebra.hpp"

#include <algorithm>

namespace redform {

RMat WeiNormanDecomp::reconstruct() const {
  if (mats.empty()) return RMat();
  RMat acc(mats[0].rows(), mats[0].cols());
  for (size_t i = 0; i < mats.size(); ++i)
    for (int r = 0; r < acc.rows(); ++r)
      for (int c = 0; c < acc.cols(); ++c)
        acc(r, c) += funcs[i] * RatFunc(mats[i](r, c));
  return acc;
}

WeiNormanDecomp wei_norman(const RMat& A) {
  std::vector<RatFunc> entries;
  entries.reserve(static_cast<size_t>(A.rows()) * A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) entries.push_back(A(i, j));
  const AtomDecomp d = atom_decompose(entries);
  WeiNormanDecomp out;
  out.atoms = d.atoms;
  out.funcs.reserve(d.atoms.size());
  for (const auto& a : d.atoms) out.funcs.push_back(a.value());
  out.mats.assign(d.atoms.size(), QMat(A.rows(), A.cols()));
  size_t e = 0;
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j, ++e)
      for (size_t k = 0; k < d.atoms.size(); ++k) out.mats[k](i, j) = d.coords[e][k];
  return out;
}

WeiNormanDecomp wei_norman(const DiffSystem& sys) { return wei_norman(sys.A()); }

QMat bracket(const QMat& M, const QMat& N) { return M * N - N * M; }

namespace {

// Echelonized span of n x n matrices as vectors of length n^2 (row-stacked).
class MatSpan {
public:
  explicit MatSpan(int n) : n_(n) {}

  // Returns true if m was outside the span (and adds it).
  bool add(const QMat& m) {
    std::vector<Rational> v = vec_rows(m);
    reduce(v);
    int lead = -1;
    for (size_t i = 0; i < v.size(); ++i)
      if (!v[i].is_zero()) { lead = static_cast<int>(i); break; }
    if (lead < 0) return false;
    const Rational inv = v[static_cast<size_t>(lead)].inverse();
    for (auto& c : v) c *= inv;
    // Back-substitute into existing rows.
    for (auto& [l, row] : rows_) {
      const Rational f = row[static_cast<size_t>(lead)];
      if (f.is_zero()) continue;
      for (size_t i = 0; i < row.size(); ++i) row[i] -= f * v[i];
    }
    rows_.emplace_back(lead, std::move(v));
    std::sort(rows_.begin(), rows_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return true;
  }

  bool contains(const QMat& m) const {
    std::vector<Rational> v = vec_rows(m);
    reduce(v);
    for (const auto& c : v)
      if (!c.is_zero()) return false;
    return true;
  }

  int dim() const { return static_cast<int>(rows_.size()); }

  std::vector<QMat> basis_matrices() const {
    std::vector<QMat> out;
    out.reserve(rows_.size());
    for (const auto& [l, row] : rows_) out.push_back(unvec_rows(row, n_, n_));
    return out;
  }

private:
  void reduce(std::vector<Rational>& v) const {
    for (const auto& [lead, row] : rows_) {
      const Rational f = v[static_cast<size_t>(lead)];
      if (f.is_zero()) continue;
      for (size_t i = 0; i < v.size(); ++i) v[i] -= f * row[i];
    }
  }

  int n_;
  std::vector<std::pair<int, std::vector<Rational>>> rows_;  // (lead, unit row)
};

}  // namespace

LieBasis lie_closure(const std::vector<QMat>& gens) {
  LieBasis out;
  if (gens.empty()) {
    out.closed = true;
    out.envelope_certified = true;
    return out;
  }
  const int n = gens[0].rows();
  MatSpan span(n);
  for (const auto& g : gens) span.add(g);
  // Breadth-first bracket sweeps with re-echelonization until stable.
  bool grew = true;
  while (grew) {
    grew = false;
    const auto basis = span.basis_matrices();
    for (size_t i = 0; i < basis.size(); ++i)
      for (size_t j = i + 1; j < basis.size(); ++j)
        if (span.add(bracket(basis[i], basis[j]))) grew = true;
  }
  out.basis = span.basis_matrices();
  out.closed = true;

  // Envelope certification: closure must be Q*Id (+) a space of nilpotents.
  const QMat id = QMat::identity(n);
  bool has_trace = false;
  std::vector<QMat> traceless;
  for (const auto& b : out.basis) {
    const Rational t = b.trace();
    if (!t.is_zero()) has_trace = true;
    traceless.push_back(b - id * (t / Rational(n)));
  }
  bool ok = true;
  if (has_trace) {
    // The scalar direction must itself lie in the closure.
    MatSpan s(n);
    for (const auto& b : out.basis) s.add(b);
    if (!s.contains(id)) ok = false;
  }
  if (ok) ok = all_nilpotent(traceless);
  out.envelope_certified = ok;
  return out;
}

bool all_nilpotent(const std::vector<QMat>& span_basis) {
  std::vector<const QMat*> nontrivial;
  for (const auto& b : span_basis)
    if (!b.is_zero()) nontrivial.push_back(&b);
  if (nontrivial.empty()) return true;
  const int n = nontrivial[0]->rows();
  // Joint kernel chain V_{k+1} = {v : B v in V_k for all B}; every element of
  // the span is nilpotent iff the chain reaches the whole space (Engel).
  std::vector<std::vector<Rational>> Vk;
  while (static_cast<int>(Vk.size()) < n) {
    // Rows of Ann span the annihilator of span(Vk): Ann * w = 0 iff w in V_k.
    QMat M(static_cast<int>(Vk.size()), n);
    for (size_t r = 0; r < Vk.size(); ++r)
      for (int c = 0; c < n; ++c) M(static_cast<int>(r), c) = Vk[r][static_cast<size_t>(c)];
    const auto ann = kernel_basis(M);
    QMat Ann(static_cast<int>(ann.size()), n);
    for (size_t r = 0; r < ann.size(); ++r)
      for (int c = 0; c < n; ++c) Ann(static_cast<int>(r), c) = ann[r][static_cast<size_t>(c)];
    QMat cond(static_cast<int>(ann.size() * nontrivial.size()), n);
    int row = 0;
    for (const QMat* B : nontrivial) {
      cond.paste(row, 0, Ann * (*B));
      row += Ann.rows();
    }
    auto ker = kernel_basis(cond);
    if (ker.size() <= Vk.size()) return false;  // chain stalled before exhausting
    Vk = std::move(ker);
  }
  return true;
}

std::vector<QMat> derived_subalgebra(const std::vector<QMat>& basis) {
  if (basis.empty()) return {};
  MatSpan span(basis[0].rows());
  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = i + 1; j < basis.size(); ++j) span.add(bracket(basis[i], basis[j]));
  return span.basis_matrices();
}

std::vector<int> derived_series_dims(const LieBasis& b) {
  std::vector<int> dims;
  std::vector<QMat> cur = b.basis;
  dims.push_back(static_cast<int>(cur.size()));
  while (!cur.empty()) {
    cur = derived_subalgebra(cur);
    dims.push_back(static_cast<int>(cur.size()));
  }
  return dims;
}

LieDimResult lie_dim(const DiffSystem& sys) {
  LieDimResult r;
  r.decomp = wei_norman(sys);
  r.basis = lie_closure(r.decomp.mats);
  r.dim = static_cast<int>(r.basis.basis.size());
  return r;
}

}  // namespace redform
