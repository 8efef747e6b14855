#include "redform/reducer.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace redform {

namespace {

// Deterministic pseudo-random rationals for construction-time identity checks.
struct XorShift {
  uint64_t s;
  explicit XorShift(uint64_t seed) : s(seed) {}
  uint64_t next() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  }
  Rational rational() {
    const long num = static_cast<long>(next() % 19) - 9;
    const long den = 1 + static_cast<long>(next() % 4);
    return Rational(num, den);
  }
};

// Echelonized span of Q-vectors.
class VecSpan {
public:
  bool add(std::vector<Rational> v) { return add_reduced(std::move(v)).has_value(); }

  // Inserts v; returns the normalized representative reduced against the
  // previous span, or nullopt if v was already inside.
  std::optional<std::vector<Rational>> add_reduced(std::vector<Rational> v) {
    reduce(v);
    int lead = -1;
    for (size_t i = 0; i < v.size(); ++i)
      if (!v[i].is_zero()) { lead = static_cast<int>(i); break; }
    if (lead < 0) return std::nullopt;
    const Rational inv = v[static_cast<size_t>(lead)].inverse();
    for (auto& c : v) c *= inv;
    for (auto& [l, row] : rows_) {
      const Rational f = row[static_cast<size_t>(lead)];
      if (f.is_zero()) continue;
      for (size_t i = 0; i < row.size(); ++i) row[i] -= f * v[i];
    }
    rows_.emplace_back(lead, v);
    std::sort(rows_.begin(), rows_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return v;
  }
  bool contains(std::vector<Rational> v) const {
    reduce(v);
    for (const auto& c : v)
      if (!c.is_zero()) return false;
    return true;
  }
  int dim() const { return static_cast<int>(rows_.size()); }
  std::vector<std::vector<Rational>> basis() const {
    std::vector<std::vector<Rational>> out;
    for (const auto& [l, r] : rows_) out.push_back(r);
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
  std::vector<std::pair<int, std::vector<Rational>>> rows_;
};

// Particular solution of T y = rhs over Q; nullopt if inconsistent.
std::optional<std::vector<Rational>> qsolve(const QMat& T, const std::vector<Rational>& rhs) {
  const int rows = T.rows(), cols = T.cols();
  QMat aug(rows, cols + 1);
  aug.paste(0, 0, T);
  for (int i = 0; i < rows; ++i) aug(i, cols) = rhs[static_cast<size_t>(i)];
  const auto pivots = rref(aug);
  std::vector<Rational> y(static_cast<size_t>(cols), Rational(0));
  for (size_t r = 0; r < pivots.size(); ++r) {
    if (pivots[r] == cols) return std::nullopt;  // pivot in the rhs column
    y[static_cast<size_t>(pivots[r])] = aug(static_cast<int>(r), cols);
  }
  return y;
}

std::vector<Rational> vec_of(const QMat& m) { return vec_rows(m); }

// Coordinates of a rational-function vector over a constant basis (columns of
// T); every atom component must lie in the column span.
std::vector<RatFunc> coords_in_constant_span(const QMat& T, const std::vector<RatFunc>& value,
                                             const std::string& what) {
  std::vector<RatFunc> fs(value.begin(), value.end());
  const AtomDecomp d = atom_decompose(fs);
  std::vector<RatFunc> out(static_cast<size_t>(T.cols()));
  for (size_t a = 0; a < d.atoms.size(); ++a) {
    std::vector<Rational> rhs(static_cast<size_t>(T.rows()));
    for (int i = 0; i < T.rows(); ++i) rhs[static_cast<size_t>(i)] = d.coords[static_cast<size_t>(i)][a];
    const auto y = qsolve(T, rhs);
    if (!y) throw std::invalid_argument(what + ": value lies outside the span");
    const RatFunc av = d.atoms[a].value();
    for (int k = 0; k < T.cols(); ++k)
      if (!(*y)[static_cast<size_t>(k)].is_zero()) out[static_cast<size_t>(k)] += av * RatFunc((*y)[static_cast<size_t>(k)]);
  }
  return out;
}

QMat basis_matrix(const std::vector<QMat>& basis) {
  if (basis.empty()) return QMat(0, 0);
  const int N = basis[0].rows() * basis[0].cols();
  QMat T(N, static_cast<int>(basis.size()));
  for (size_t k = 0; k < basis.size(); ++k) {
    const auto v = vec_of(basis[k]);
    for (int i = 0; i < N; ++i) T(i, static_cast<int>(k)) = v[static_cast<size_t>(i)];
  }
  return T;
}

}  // namespace

AdjointAction adjoint_action(const RMat& A1, const RMat& A2) {
  AdjointAction out;
  out.n1 = A1.rows();
  out.n2 = A2.rows();
  RMat id1 = RMat::identity(out.n1), id2 = RMat::identity(out.n2);
  out.psi = kron(A2, id1) - kron(id2, A1.transpose());
  // Defining identity on random constant couplings.
  XorShift rng(0x5eed5eedull);
  for (int t = 0; t < 5; ++t) {
    QMat b(out.n2, out.n1);
    for (int i = 0; i < out.n2; ++i)
      for (int j = 0; j < out.n1; ++j) b(i, j) = rng.rational();
    RMat brf(out.n2, out.n1);
    for (int i = 0; i < out.n2; ++i)
      for (int j = 0; j < out.n1; ++j) brf(i, j) = RatFunc(b(i, j));
    const RMat lhs = A2 * brf - brf * A1;
    const auto lv = vec_rows(lhs);
    const auto bv = vec_rows(brf);
    for (int i = 0; i < out.psi.rows(); ++i) {
      RatFunc acc;
      for (int j = 0; j < out.psi.cols(); ++j) acc += out.psi(i, j) * bv[static_cast<size_t>(j)];
      if (acc != lv[static_cast<size_t>(i)])
        throw std::logic_error("adjoint_action: defining identity failed");
    }
  }
  return out;
}

AdjointAction adjoint_action(const DiffSystem& sys) {
  const DiffSystem work = sys.orientation() == Orientation::Lower ? sys : sys.reversed();
  if (work.blocks().size() != 2)
    throw std::invalid_argument("adjoint_action: expected a two-block system");
  const auto off = work.block_offsets();
  const int n1 = work.blocks()[0], n2 = work.blocks()[1];
  const RMat A1 = work.A().submatrix(0, 0, n1, n1);
  const RMat A2 = work.A().submatrix(off[1], off[1], n2, n2);
  return adjoint_action(A1, A2);
}

RMat psi_image(const AdjointAction& psi, const RMat& A1, const RMat& A2, const QMat& b) {
  RMat brf(psi.n2, psi.n1);
  for (int i = 0; i < psi.n2; ++i)
    for (int j = 0; j < psi.n1; ++j) brf(i, j) = RatFunc(b(i, j));
  return A2 * brf - brf * A1;
}

RMat restrict_psi(const AdjointAction& psi, const std::vector<QMat>& basis) {
  const QMat T = basis_matrix(basis);
  const int d = static_cast<int>(basis.size());
  RMat out(d, d);
  for (int k = 0; k < d; ++k) {
    std::vector<RatFunc> img(static_cast<size_t>(psi.psi.rows()));
    const auto bk = vec_of(basis[static_cast<size_t>(k)]);
    for (int i = 0; i < psi.psi.rows(); ++i) {
      RatFunc acc;
      for (int j = 0; j < psi.psi.cols(); ++j)
        if (!bk[static_cast<size_t>(j)].is_zero()) acc += psi.psi(i, j) * RatFunc(bk[static_cast<size_t>(j)]);
      img[static_cast<size_t>(i)] = acc;
    }
    const auto col = coords_in_constant_span(T, img, "restrict_psi");
    for (int m = 0; m < d; ++m) out(m, k) = col[static_cast<size_t>(m)];
  }
  return out;
}

std::vector<int> Flag::level_sizes() const {
  std::vector<int> out;
  for (const auto& l : levels) out.push_back(static_cast<int>(l.size()));
  return out;
}

int Flag::level_of(int k) const {
  int acc = 0;
  for (size_t t = 0; t < levels.size(); ++t) {
    acc += static_cast<int>(levels[t].size());
    if (k < acc) return static_cast<int>(t);
  }
  return -1;
}

int Flag::offset_of_level(int t) const {
  int acc = 0;
  for (int i = 0; i < t; ++i) acc += static_cast<int>(levels[static_cast<size_t>(i)].size());
  return acc;
}

namespace {

// Decomposition Psi = sum funcs[i] Psi_i restricted to the column span of W
// (W's columns are vec'd basis matrices). Returns the restricted constant
// matrices R_i with Psi_i W = W R_i.
struct PsiParts {
  std::vector<RatFunc> funcs;
  std::vector<QMat> parts;       // full-space constant matrices Psi_i
  std::vector<QMat> restricted;  // d x d restrictions R_i
};

PsiParts decompose_psi(const AdjointAction& psi, const QMat& W) {
  PsiParts out;
  WeiNormanDecomp wd = wei_norman(psi.psi);
  out.funcs = wd.funcs;
  out.parts = wd.mats;
  const int d = W.cols();
  for (const auto& Pi : out.parts) {
    const QMat img = Pi * W;
    QMat R(d, d);
    for (int k = 0; k < d; ++k) {
      std::vector<Rational> rhs(static_cast<size_t>(W.rows()));
      for (int i = 0; i < W.rows(); ++i) rhs[static_cast<size_t>(i)] = img(i, k);
      const auto y = qsolve(W, rhs);
      if (!y)
        throw std::invalid_argument("flag_filtration: the given subspace is not a Psi-space");
      for (int m = 0; m < d; ++m) R(m, k) = (*y)[static_cast<size_t>(m)];
    }
    out.restricted.push_back(std::move(R));
  }
  return out;
}

// Matrix-vector product in Q^d.
std::vector<Rational> apply(const QMat& B, const std::vector<Rational>& v) {
  std::vector<Rational> out(static_cast<size_t>(B.rows()), Rational(0));
  for (int i = 0; i < B.rows(); ++i) {
    Rational acc(0);
    for (int j = 0; j < B.cols(); ++j) acc += B(i, j) * v[static_cast<size_t>(j)];
    out[static_cast<size_t>(i)] = acc;
  }
  return out;
}

// Restriction of each action to the span of the given coordinate basis
// (rows of `basis`, vectors of length d). Throws if not invariant.
std::vector<QMat> restrict_actions(const std::vector<QMat>& acts,
                                   const std::vector<std::vector<Rational>>& basis, int d) {
  const int cdim = static_cast<int>(basis.size());
  QMat CB(d, cdim);
  for (int k = 0; k < cdim; ++k)
    for (int i = 0; i < d; ++i) CB(i, k) = basis[static_cast<size_t>(k)][static_cast<size_t>(i)];
  std::vector<QMat> out;
  for (const auto& B : acts) {
    const QMat img = B * CB;
    QMat R(cdim, cdim);
    for (int k = 0; k < cdim; ++k) {
      std::vector<Rational> rhs(static_cast<size_t>(d));
      for (int i = 0; i < d; ++i) rhs[static_cast<size_t>(i)] = img(i, k);
      const auto y = qsolve(CB, rhs);
      if (!y) throw std::logic_error("restrict_actions: subspace not invariant");
      for (int m = 0; m < cdim; ++m) R(m, k) = (*y)[static_cast<size_t>(m)];
    }
    out.push_back(std::move(R));
  }
  return out;
}

// Isotypical splitting of Q^d under the given commuting family, via spectral
// projectors of generic commutant elements, refined recursively. Returns one
// coordinate basis per component (the whole space when no split exists
// over Q).
std::vector<std::vector<std::vector<Rational>>> isotypical_components(
    const std::vector<QMat>& acts, int d) {
  // Commutant: T with T A = A T for every action A.
  std::vector<const QMat*> nz;
  for (const auto& a : acts)
    if (!a.is_zero()) nz.push_back(&a);
  const auto whole = [&] {
    std::vector<std::vector<std::vector<Rational>>> one;
    std::vector<std::vector<Rational>> full;
    for (int i = 0; i < d; ++i) {
      std::vector<Rational> e(static_cast<size_t>(d), Rational(0));
      e[static_cast<size_t>(i)] = Rational(1);
      full.push_back(std::move(e));
    }
    one.push_back(std::move(full));
    return one;
  };
  if (nz.empty()) return whole();
  QMat cond(static_cast<int>(nz.size()) * d * d, d * d);
  int row = 0;
  for (const QMat* A : nz) {
    // (T A - A T)(i,j) = sum_k T(i,k) A(k,j) - A(i,k) T(k,j).
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
          cond(row, i * d + k) += (*A)(k, j);
          cond(row, k * d + j) -= (*A)(i, k);
        }
        ++row;
      }
  }
  const auto comm = kernel_basis(cond);
  if (comm.size() <= 1) return whole();
  std::vector<QMat> C;
  for (const auto& v : comm) C.push_back(unvec_rows(v, d, d));

  // Spectral projectors of a generic commutant element are polynomials in it,
  // so they commute with the actions and split the space invariantly.
  // Distinct generalized eigenvalues separate the isotypical components.
  for (long attempt = 1; attempt <= 4; ++attempt) {
    QMat z(d, d);
    long w = 1;
    for (const auto& cm : C) {
      z += cm * Rational(w % 101);
      w = w * (attempt + 2) + 1;
    }
    // Minimal polynomial by linear dependence of powers.
    std::vector<QMat> powers{QMat::identity(d)};
    VecSpan pspan;
    pspan.add(vec_rows(powers[0]));
    Poly minpoly;
    while (true) {
      QMat nxt = powers.back() * z;
      if (!pspan.add(vec_rows(nxt))) {
        QMat T(d * d, static_cast<int>(powers.size()));
        for (size_t k = 0; k < powers.size(); ++k) {
          const auto v = vec_rows(powers[k]);
          for (int e = 0; e < d * d; ++e) T(e, static_cast<int>(k)) = v[static_cast<size_t>(e)];
        }
        const auto y = qsolve(T, vec_rows(nxt));
        std::vector<Rational> mc;
        for (const auto& c : *y) mc.push_back(-c);
        mc.push_back(Rational(1));
        minpoly = Poly(std::move(mc));
        break;
      }
      powers.push_back(std::move(nxt));
    }
    std::vector<std::pair<Rational, int>> eigen;  // (lambda, multiplicity)
    bool split = true;
    try {
      for (const auto& [f, m] : factorize(minpoly)) {
        if (f.degree() != 1) {
          split = false;
          break;
        }
        eigen.push_back({-f.coeff(0), m});
      }
    } catch (const UnsupportedInput&) {
      split = false;
    }
    if (!split || eigen.size() < 2) continue;
    // CRT projectors: q_i = 1 mod (x-l_i)^{m_i}, 0 mod the rest; P_i = q_i(z).
    std::vector<std::vector<std::vector<Rational>>> comps;
    int total = 0;
    for (const auto& [lam, m] : eigen) {
      Poly fac = (Poly::x() - Poly(lam)).pow(m);
      Poly cof = minpoly.div_exact(fac);
      Poly u = poly_invmod(cof.divrem(fac).second, fac);
      Poly qi = (u * cof).divrem(minpoly).second;
      // Evaluate qi at z.
      QMat proj(d, d);
      QMat power = QMat::identity(d);
      for (int k = 0; k <= qi.degree(); ++k) {
        if (!qi.coeff(k).is_zero()) proj += power * qi.coeff(k);
        power = power * z;
      }
      VecSpan img;
      std::vector<std::vector<Rational>> basis;
      for (int c = 0; c < d; ++c) {
        std::vector<Rational> col(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) col[static_cast<size_t>(i)] = proj(i, c);
        if (auto rep = img.add_reduced(col)) basis.push_back(*rep);
      }
      total += static_cast<int>(basis.size());
      if (!basis.empty()) comps.push_back(std::move(basis));
    }
    if (total != d || comps.size() < 2) continue;
    {
      fprintf(stderr, "[dbg] split d=%d attempt=%ld sizes:", d, attempt);
      for (const auto& c : comps) fprintf(stderr, " %zu", c.size());
      fprintf(stderr, "\n");
    }
    // Refine each piece recursively and express it back in d-coordinates.
    std::vector<std::vector<std::vector<Rational>>> refined;
    for (const auto& comp : comps) {
      const auto racts = restrict_actions(acts, comp, d);
      const auto sub = isotypical_components(racts, static_cast<int>(comp.size()));
      for (const auto& piece : sub) {
        std::vector<std::vector<Rational>> back;
        for (const auto& v : piece) {
          std::vector<Rational> full(static_cast<size_t>(d), Rational(0));
          for (size_t k = 0; k < comp.size(); ++k)
            if (!v[k].is_zero())
              for (int i = 0; i < d; ++i) full[static_cast<size_t>(i)] += comp[k][static_cast<size_t>(i)] * v[k];
          back.push_back(std::move(full));
        }
        // Canonical echelon basis of the piece.
        VecSpan span;
        std::vector<std::vector<Rational>> canon;
        for (auto& v : back)
          if (auto rep = span.add_reduced(v)) canon.push_back(*rep);
        refined.push_back(std::move(canon));
      }
    }
    std::sort(refined.begin(), refined.end(), [](const auto& a, const auto& b) {
      if (a.size() != b.size()) return a.size() < b.size();
      for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) {
          if (a[i][j] != b[i][j]) return a[i][j] < b[i][j];
        }
      return false;
    });
    return refined;
  }
  return whole();
}

// Kernel chain and image-first representatives of one component, expressed in
// the component's own coordinates. Levels returned bottom-up (kernel first).
std::vector<std::vector<std::vector<Rational>>> component_levels(
    const std::vector<QMat>& acts, int dim, const std::string& diagnostic) {
  std::vector<std::vector<std::vector<Rational>>> chain;
  std::vector<std::vector<Rational>> Vk;
  while (static_cast<int>(Vk.size()) < dim) {
    QMat M(static_cast<int>(Vk.size()), dim);
    for (size_t r = 0; r < Vk.size(); ++r)
      for (int c = 0; c < dim; ++c) M(static_cast<int>(r), c) = Vk[r][static_cast<size_t>(c)];
    const auto ann = kernel_basis(M);
    QMat Ann(static_cast<int>(ann.size()), dim);
    for (size_t r = 0; r < ann.size(); ++r)
      for (int c = 0; c < dim; ++c) Ann(static_cast<int>(r), c) = ann[r][static_cast<size_t>(c)];
    QMat cond(static_cast<int>(ann.size() * acts.size()), dim);
    int row = 0;
    for (const auto& B : acts) {
      cond.paste(row, 0, Ann * B);
      row += Ann.rows();
    }
    auto ker = kernel_basis(cond);
    if (ker.size() <= Vk.size()) throw UnsupportedInput(diagnostic);
    Vk = std::move(ker);
    chain.push_back(Vk);
  }
  const size_t mu = chain.size();
  std::vector<std::vector<std::vector<Rational>>> top_down(mu);
  for (size_t q = 0; q < mu; ++q) {
    const size_t ci = mu - q - 1;
    VecSpan accumulated;
    if (ci >= 1)
      for (const auto& v : chain[ci - 1]) accumulated.add(v);
    if (q > 0)
      for (const auto& rep : top_down[q - 1])
        for (const auto& B : acts)
          if (auto nr = accumulated.add_reduced(apply(B, rep))) top_down[q].push_back(*nr);
    for (const auto& v : chain[ci])
      if (auto nr = accumulated.add_reduced(v)) top_down[q].push_back(*nr);
  }
  std::vector<std::vector<std::vector<Rational>>> bottom_up(mu);
  for (size_t q = 0; q < mu; ++q) bottom_up[mu - q - 1] = top_down[q];
  return bottom_up;
}

Flag build_flag(const AdjointAction& psi, const WeiNormanDecomp& diag_decomp,
                const std::vector<QMat>& subspace) {
  const QMat W = basis_matrix(subspace);
  const int d = static_cast<int>(subspace.size());
  PsiParts parts = decompose_psi(psi, W);

  // Shift each restricted part by its scalar; the shifted family must be
  // jointly nilpotent for the kernel chain to exhaust the space.
  RatFunc lambda;
  std::vector<QMat> shifted;
  for (size_t i = 0; i < parts.restricted.size(); ++i) {
    const Rational l = parts.restricted[i].trace() / Rational(d);
    lambda += parts.funcs[i] * RatFunc(l);
    shifted.push_back(parts.restricted[i] - QMat::identity(d) * l);
  }
  std::string diagnostic = "non-nilpotent adjoint action: the joint action is not nilpotent on "
                           "the off-diagonal space";
  for (size_t i = 0; i < shifted.size(); ++i)
    if (!all_nilpotent({shifted[i]})) {
      diagnostic = "non-nilpotent adjoint action: the component of the adjoint action at " +
                   parts.funcs[i].str() + " is not nilpotent on the off-diagonal space";
      break;
    }

  // Isotypical components keep obstructed directions pure, so residuals land
  // on the same representatives the adapted bases use.
  const auto comps = isotypical_components(shifted, d);
  struct CompData {
    std::vector<std::vector<Rational>> basis;                    // in d-coords
    std::vector<std::vector<std::vector<Rational>>> bottom_up;   // in comp coords
  };
  std::vector<CompData> cdata;
  size_t mu = 0;
  for (const auto& comp : comps) {
    CompData cd;
    cd.basis = comp;
    const int cdim = static_cast<int>(comp.size());
    QMat CB(d, cdim);
    for (int k = 0; k < cdim; ++k)
      for (int i = 0; i < d; ++i) CB(i, k) = comp[static_cast<size_t>(k)][static_cast<size_t>(i)];
    // Restrict each shifted action to the component.
    std::vector<QMat> racts;
    for (const auto& B : shifted) {
      const QMat img = B * CB;
      QMat R(cdim, cdim);
      for (int k = 0; k < cdim; ++k) {
        std::vector<Rational> rhs(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) rhs[static_cast<size_t>(i)] = img(i, k);
        const auto y = qsolve(CB, rhs);
        if (!y) throw std::logic_error("flag_filtration: component not invariant");
        for (int m = 0; m < cdim; ++m) R(m, k) = (*y)[static_cast<size_t>(m)];
      }
      racts.push_back(std::move(R));
    }
    cd.bottom_up = component_levels(racts, cdim, diagnostic);
    mu = std::max(mu, cd.bottom_up.size());
    cdata.push_back(std::move(cd));
  }

  Flag flag;
  flag.n1 = psi.n1;
  flag.n2 = psi.n2;
  flag.lambda = lambda;
  // Global levels aligned by chain index from the bottom; top level first.
  for (size_t j = mu; j-- > 0;) {
    std::vector<QMat> lvl;
    for (const auto& cd : cdata) {
      if (j >= cd.bottom_up.size()) continue;
      for (const auto& v : cd.bottom_up[j]) {
        // Component coords -> d-coords -> full off-diagonal space.
        std::vector<Rational> dvec(static_cast<size_t>(d), Rational(0));
        for (size_t k = 0; k < cd.basis.size(); ++k)
          if (!v[k].is_zero())
            for (int i = 0; i < d; ++i) dvec[static_cast<size_t>(i)] += cd.basis[k][static_cast<size_t>(i)] * v[k];
        std::vector<Rational> full(static_cast<size_t>(W.rows()), Rational(0));
        for (int i = 0; i < W.rows(); ++i) {
          Rational acc(0);
          for (int k = 0; k < d; ++k) acc += W(i, k) * dvec[static_cast<size_t>(k)];
          full[static_cast<size_t>(i)] = acc;
        }
        lvl.push_back(unvec_rows(full, psi.n2, psi.n1));
      }
    }
    if (!lvl.empty()) flag.levels.push_back(std::move(lvl));
  }
  for (const auto& l : flag.levels)
    for (const auto& m : l) flag.basis.push_back(m);
  flag.adapted_psi = restrict_psi(psi, flag.basis);

  // Strict triangularity (scalar diagonal aside).
  const int D = static_cast<int>(flag.basis.size());
  for (int k = 0; k < D; ++k)
    for (int m = 0; m < D; ++m) {
      if (m == k) continue;
      if (flag.level_of(m) <= flag.level_of(k) && !flag.adapted_psi(m, k).is_zero())
        throw std::logic_error("flag_filtration: adapted action not strictly triangular");
    }
  return flag;
}

}  // namespace

Flag flag_filtration(const AdjointAction& psi, const WeiNormanDecomp& diag_decomp) {
  std::vector<QMat> full;
  for (int i = 0; i < psi.n2; ++i)
    for (int j = 0; j < psi.n1; ++j) {
      QMat e(psi.n2, psi.n1);
      e(i, j) = Rational(1);
      full.push_back(std::move(e));
    }
  return build_flag(psi, diag_decomp, full);
}

Flag flag_filtration(const AdjointAction& psi, const WeiNormanDecomp& diag_decomp,
                     const std::vector<QMat>& subspace) {
  return build_flag(psi, diag_decomp, subspace);
}

Flag flag_from_levels(const AdjointAction& psi, const WeiNormanDecomp& diag_decomp,
                      std::vector<std::vector<QMat>> levels) {
  Flag flag;
  flag.n1 = psi.n1;
  flag.n2 = psi.n2;
  flag.levels = std::move(levels);
  for (const auto& l : flag.levels)
    for (const auto& m : l) flag.basis.push_back(m);
  flag.adapted_psi = restrict_psi(psi, flag.basis);
  const int D = static_cast<int>(flag.basis.size());
  RatFunc lambda;
  bool have_lambda = false;
  for (int k = 0; k < D; ++k) {
    if (!have_lambda) {
      lambda = flag.adapted_psi(k, k);
      have_lambda = true;
    } else if (flag.adapted_psi(k, k) != lambda) {
      throw std::invalid_argument("flag_from_levels: non-uniform diagonal action");
    }
    for (int m = 0; m < D; ++m) {
      if (m == k) continue;
      if (flag.level_of(m) <= flag.level_of(k) && !flag.adapted_psi(m, k).is_zero())
        throw std::invalid_argument("flag_from_levels: levels are not an adapted flag");
    }
  }
  flag.lambda = lambda;
  return flag;
}

ReductionEngine::ReductionEngine(const RMat& A1, const RMat& A2, const RMat& S,
                                 const WeiNormanDecomp& diag, Flag flag)
    : A1_(A1), A2_(A2), diag_(diag), flag_(std::move(flag)) {
  span_atoms_ = diag_.atoms;
  const QMat T = basis_matrix(flag_.basis);
  const auto sv = vec_rows(S);
  const auto coords = coords_in_constant_span(T, sv, "ReductionEngine: coupling");
  s_.reserve(coords.size());
  for (const auto& c : coords) s_.push_back(ParamAffine(c));
  f_.assign(s_.size(), ParamAffine());
  touched_.assign(s_.size(), false);
}

namespace {

struct PendingRow {
  Atom atom;
  int direction;   // adapted index
  LinExpr row;
};

bool atom_in(const Atom& a, const std::vector<Atom>& set) {
  for (const auto& b : set)
    if (a == b) return true;
  return false;
}

// Atom-wise vanishing rows of a ParamAffine, with atom association.
std::vector<std::pair<Atom, LinExpr>> atom_rows(const ParamAffine& a) {
  std::vector<RatFunc> fs{a.constant_term()};
  std::vector<ParamId> ids;
  for (const auto& [p, f] : a.linear_terms()) {
    fs.push_back(f);
    ids.push_back(p);
  }
  const AtomDecomp d = atom_decompose(fs);
  std::vector<std::pair<Atom, LinExpr>> rows;
  for (size_t k = 0; k < d.atoms.size(); ++k) {
    LinExpr e;
    e.constant = d.coords[0][k];
    for (size_t i = 0; i < ids.size(); ++i) {
      const Rational c = d.coords[i + 1][k];
      if (!c.is_zero()) e.coeffs[ids[i]] = c;
    }
    if (!e.is_zero()) rows.push_back({d.atoms[k], std::move(e)});
  }
  return rows;
}

std::pair<ParamAffine, ParamAffine> hermite_affine_pa(const ParamAffine& rhs) {
  auto [gc, rc] = hermite_reduce(rhs.constant_term());
  ParamAffine G(gc), R(rc);
  for (const auto& [p, f] : rhs.linear_terms()) {
    auto [gp, rp] = hermite_reduce(f);
    G += ParamAffine::param(p, gp);
    R += ParamAffine::param(p, rp);
  }
  return {G, R};
}

std::string pretty_constraint(const LinExpr& row, const ParamStore& store) {
  if (row.coeffs.size() == 1) {
    const auto& [p, c] = *row.coeffs.begin();
    const Rational v = -row.constant / c;
    return store.label(p) + " = " + v.str();
  }
  return row.str(store) + " = 0";
}

}  // namespace

std::vector<std::pair<int, ParamAffine>> ReductionEngine::reduce_level(int t) {
  const int tag = level_count() - t;  // top level carries the largest tag
  const int off = flag_.offset_of_level(t);
  const int size = static_cast<int>(flag_.levels[static_cast<size_t>(t)].size());
  std::vector<std::pair<int, ParamAffine>> gauge_terms;

  if (flag_.lambda.is_zero()) {
    // Hermite cascade: every equation is f_k' = s_k.
    struct DirData {
      ParamAffine G;
      std::vector<std::pair<Atom, LinExpr>> rows;
    };
    std::vector<DirData> dir(static_cast<size_t>(size));
    for (int i = 0; i < size; ++i) {
      const int k = off + i;
      auto [G, R] = hermite_affine_pa(s_[static_cast<size_t>(k)]);
      dir[static_cast<size_t>(i)].G = G;
      dir[static_cast<size_t>(i)].rows = atom_rows(R);
    }
    // Commit rows grouped by atom (poles ascending), then by direction.
    std::vector<PendingRow> pending;
    for (int i = 0; i < size; ++i)
      for (auto& [atom, row] : dir[static_cast<size_t>(i)].rows)
        pending.push_back({atom, off + i, row});
    std::stable_sort(pending.begin(), pending.end(),
                     [](const PendingRow& a, const PendingRow& b) { return atom_less(a.atom, b.atom); });
    std::vector<ParamAffine> residual(static_cast<size_t>(size));
    for (const auto& pr : pending) {
      const auto res = constraints_.classify(pr.row);
      if (res == ConstraintSet::AddResult::Added) {
        constraints_.add(pr.row);
        log_.push_back({tag, pr.row.str(store_), pretty_constraint(constraints_.rows().back(), store_)});
      } else if (res == ConstraintSet::AddResult::Inconsistent) {
        residual[static_cast<size_t>(pr.direction - off)] +=
            ParamAffine::from_linexpr(constraints_.reduce(pr.row)) * pr.atom.value();
        const bool in_span = atom_in(pr.atom, span_atoms_);
        if (!in_span) residual_in_span_ = false;
        branches_.push_back({tag, pr.direction, pr.atom.value().str(),
                             in_span ? "kept as residual inside the diagonal span"
                                     : "kept as residual OUTSIDE the diagonal span"});
      }
    }
    for (int i = 0; i < size; ++i) {
      const int k = off + i;
      const ParamId c = store_.fresh("c" + std::to_string(tag) + "," + std::to_string(i + 1));
      ParamAffine fk = dir[static_cast<size_t>(i)].G + ParamAffine::param(c, RatFunc(1));
      f_[static_cast<size_t>(k)] = fk;
      touched_[static_cast<size_t>(k)] = true;
      s_[static_cast<size_t>(k)] = residual[static_cast<size_t>(i)];
      gauge_terms.push_back({k, fk});
    }
  } else {
    // First-order scalar path: f_k' = lambda f_k + s_k.
    for (int i = 0; i < size; ++i) {
      const int k = off + i;
      const ParamAffine rhs = s_[static_cast<size_t>(k)];
      const std::vector<RatFunc> op{-flag_.lambda};
      // Target residual 0 first.
      ParamStore probe_store = store_;
      ParamSolutionSpace sc = scalar_rational_solutions(op, rhs, probe_store);
      bool compatible = !sc.empty;
      if (compatible)
        for (const auto& row : sc.constraints.rows())
          if (constraints_.classify(row) == ConstraintSet::AddResult::Inconsistent) compatible = false;
      if (compatible) {
        store_ = probe_store;
        for (const auto& row : sc.constraints.rows())
          if (constraints_.add(row) == ConstraintSet::AddResult::Added)
            log_.push_back({tag, row.str(store_), pretty_constraint(constraints_.rows().back(), store_)});
        f_[static_cast<size_t>(k)] = sc.particular[0];
        touched_[static_cast<size_t>(k)] = true;
        s_[static_cast<size_t>(k)] = ParamAffine();
        gauge_terms.push_back({k, sc.particular[0]});
      } else {
        // Allow a residual in the diagonal function span.
        ParamStore probe2 = store_;
        ParamAffine rhs2 = rhs;
        std::vector<std::pair<ParamId, RatFunc>> gammas;
        for (const auto& atom : span_atoms_) {
          const ParamId g = probe2.fresh("g" + std::to_string(tag) + "," + std::to_string(i + 1) +
                                         "," + std::to_string(gammas.size() + 1));
          gammas.push_back({g, atom.value()});
          rhs2 -= ParamAffine::param(g, atom.value());
        }
        ParamSolutionSpace sc2 = scalar_rational_solutions(op, rhs2, probe2);
        bool ok = !sc2.empty;
        if (ok)
          for (const auto& row : sc2.constraints.rows())
            if (constraints_.classify(row) == ConstraintSet::AddResult::Inconsistent) ok = false;
        if (ok) {
          store_ = probe2;
          for (const auto& row : sc2.constraints.rows())
            if (constraints_.add(row) == ConstraintSet::AddResult::Added)
              log_.push_back({tag, row.str(store_), pretty_constraint(constraints_.rows().back(), store_)});
          f_[static_cast<size_t>(k)] = sc2.particular[0];
          touched_[static_cast<size_t>(k)] = true;
          ParamAffine res;
          for (const auto& [g, av] : gammas) res += ParamAffine::param(g, av);
          s_[static_cast<size_t>(k)] = res;
          gauge_terms.push_back({k, sc2.particular[0]});
          branches_.push_back({tag, k, "span", "removed up to a residual in the diagonal span"});
        } else {
          branches_.push_back({tag, k, "all", "no rational removal; direction left untouched"});
        }
      }
    }
  }

  // Feedback of this level's gauge terms into later levels.
  for (const auto& [k, fk] : gauge_terms) {
    for (int m = 0; m < static_cast<int>(flag_.basis.size()); ++m) {
      if (flag_.level_of(m) <= t || m == k) continue;
      const RatFunc& psi_mk = flag_.adapted_psi(m, k);
      if (psi_mk.is_zero()) continue;
      s_[static_cast<size_t>(m)] += fk * psi_mk;
    }
  }
  ++processed_levels_;
  return gauge_terms;
}

void ReductionEngine::run_all() {
  for (int t = processed_levels_; t < level_count(); ++t) reduce_level(t);
}

std::map<ParamId, Rational> ReductionEngine::assignment(
    const std::map<std::string, Rational>& free_assignments) const {
  const auto sol = constraints_.solve();
  if (!sol.consistent) throw std::logic_error("ReductionEngine: inconsistent constraints");
  std::map<ParamId, Rational> values;
  for (ParamId p = 0; p < store_.count(); ++p) {
    if (sol.assignments.count(p)) continue;
    auto it = free_assignments.find(store_.label(p));
    values[p] = it == free_assignments.end() ? Rational(0) : it->second;
  }
  for (const auto& [p, expr] : sol.assignments) {
    Rational v = expr.constant;
    for (const auto& [q, c] : expr.coeffs) v += c * values.at(q);
    values[p] = v;
  }
  return values;
}

RMat ReductionEngine::resolve_gauge(const std::map<std::string, Rational>& frees) const {
  const auto values = assignment(frees);
  RMat B(flag_.n2, flag_.n1);
  for (size_t k = 0; k < f_.size(); ++k) {
    const RatFunc c = f_[k].eval(values);
    if (c.is_zero()) continue;
    const QMat& N = flag_.basis[k];
    for (int i = 0; i < flag_.n2; ++i)
      for (int j = 0; j < flag_.n1; ++j)
        if (!N(i, j).is_zero()) B(i, j) += c * RatFunc(N(i, j));
  }
  return B;
}

RMat ReductionEngine::resolve_residual(const std::map<std::string, Rational>& frees) const {
  const auto values = assignment(frees);
  RMat S(flag_.n2, flag_.n1);
  for (size_t k = 0; k < s_.size(); ++k) {
    const RatFunc c = s_[k].eval(values);
    if (c.is_zero()) continue;
    const QMat& N = flag_.basis[k];
    for (int i = 0; i < flag_.n2; ++i)
      for (int j = 0; j < flag_.n1; ++j)
        if (!N(i, j).is_zero()) S(i, j) += c * RatFunc(N(i, j));
  }
  return S;
}

std::vector<std::string> ReductionEngine::free_param_labels() const {
  const auto sol = constraints_.solve();
  std::vector<std::string> out;
  for (ParamId p = 0; p < store_.count(); ++p)
    if (!sol.assignments.count(p)) out.push_back(store_.label(p));
  return out;
}

void require_rational_poles(const RMat& A) {
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) rational_poles(A(i, j));
}

int psi_orbit_dim(const RMat& A1, const RMat& A2, const RMat& coupling) {
  if (coupling.is_zero()) return 0;
  VecSpan span;
  std::vector<QMat> queue;
  for (const auto& m : wei_norman(coupling).mats)
    if (span.add(vec_of(m))) queue.push_back(m);
  while (!queue.empty()) {
    std::vector<QMat> next;
    for (const auto& w : queue) {
      RMat wr(w.rows(), w.cols());
      for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j) wr(i, j) = RatFunc(w(i, j));
      const RMat img = A2 * wr - wr * A1;
      for (const auto& m : wei_norman(img).mats)
        if (span.add(vec_of(m))) next.push_back(m);
    }
    queue = std::move(next);
  }
  return span.dim();
}

namespace {

RMat embed_coupling(const RMat& B, int n, int row0, int col0) {
  RMat full(n, n);
  full.paste(row0, col0, B);
  return full;
}

// Whole-space removal through the cyclic-vector solver, used when the flag's
// nilpotency precondition fails. Returns (gauge block, residual block).
std::pair<RMat, RMat> fallback_remove(const RMat& A1, const RMat& A2, const RMat& S,
                                      const WeiNormanDecomp& diag, const AdjointAction& psi,
                                      const ReduceOptions& opts,
                                      std::vector<ConstraintLogEntry>& log,
                                      std::vector<std::string>& frees_out) {
  const int N = psi.psi.rows();
  std::vector<ParamAffine> rhs;
  for (const auto& v : vec_rows(S)) rhs.push_back(ParamAffine(v));

  {
    ParamStore store;
    ParamSolutionSpace sol = system_rational_solutions_cyclic(psi.psi, rhs, store);
    if (!sol.empty) {
      const auto solved = sol.constraints.solve();
      std::map<ParamId, Rational> values;
      for (ParamId p = 0; p < store.count(); ++p) {
        if (solved.assignments.count(p)) continue;
        auto it = opts.free_assignments.find(store.label(p));
        values[p] = it == opts.free_assignments.end() ? Rational(0) : it->second;
      }
      for (const auto& [p, e] : solved.assignments) {
        Rational v = e.constant;
        for (const auto& [q, c] : e.coeffs) v += c * values.at(q);
        values[p] = v;
      }
      std::vector<RatFunc> bvec;
      for (const auto& c : sol.particular) bvec.push_back(c.eval(values));
      for (ParamId p = 0; p < store.count(); ++p)
        if (!solved.assignments.count(p)) frees_out.push_back(store.label(p));
      return {unvec_rows(bvec, psi.n2, psi.n1), RMat(psi.n2, psi.n1)};
    }
  }

  // Residual allowed in the diagonal function span.
  ParamStore store;
  std::vector<std::vector<ParamId>> gamma(static_cast<size_t>(N));
  std::vector<ParamAffine> rhs2 = rhs;
  for (int pos = 0; pos < N; ++pos)
    for (size_t m = 0; m < diag.atoms.size(); ++m) {
      const ParamId g = store.fresh("g" + std::to_string(pos) + "," + std::to_string(m));
      gamma[static_cast<size_t>(pos)].push_back(g);
      rhs2[static_cast<size_t>(pos)] -= ParamAffine::param(g, diag.atoms[m].value());
    }
  ParamSolutionSpace sol = system_rational_solutions_cyclic(psi.psi, rhs2, store);
  if (sol.empty) return {RMat(psi.n2, psi.n1), S};

  const auto solved = sol.constraints.solve();
  std::map<ParamId, Rational> values;
  for (ParamId p = 0; p < store.count(); ++p) {
    if (solved.assignments.count(p)) continue;
    auto it = opts.free_assignments.find(store.label(p));
    values[p] = it == opts.free_assignments.end() ? Rational(0) : it->second;
  }
  for (const auto& [p, e] : solved.assignments) {
    Rational v = e.constant;
    for (const auto& [q, c] : e.coeffs) v += c * values.at(q);
    values[p] = v;
  }
  std::vector<RatFunc> bvec, resvec;
  for (const auto& c : sol.particular) bvec.push_back(c.eval(values));
  for (int pos = 0; pos < N; ++pos) {
    RatFunc r;
    for (size_t m = 0; m < diag.atoms.size(); ++m)
      r += diag.atoms[m].value() * RatFunc(values.at(gamma[static_cast<size_t>(pos)][m]));
    resvec.push_back(r);
  }
  for (ParamId p = 0; p < store.count(); ++p)
    if (!solved.assignments.count(p)) frees_out.push_back(store.label(p));
  for (const auto& row : sol.constraints.rows())
    log.push_back({0, row.str(store), pretty_constraint(row, store)});
  return {unvec_rows(bvec, psi.n2, psi.n1), unvec_rows(resvec, psi.n2, psi.n1)};
}

void fill_independence(ReductionReport& rep) {
  // Integral rows: trailing size-1 blocks whose diagonal entry is zero.
  const auto& sys = rep.original;
  if (sys.orientation() != Orientation::Lower) return;
  const auto off = sys.block_offsets();
  const auto& blocks = sys.blocks();
  const int n = sys.dim();
  std::vector<int> integral_rows;
  for (size_t b = blocks.size(); b-- > 0;) {
    const int o = off[b];
    if (blocks[b] == 1 && sys.A()(o, o).is_zero()) {
      bool trailing_zero_col = true;
      for (int i = 0; i < n; ++i)
        if (!sys.A()(i, o).is_zero()) trailing_zero_col = false;
      if (trailing_zero_col) {
        integral_rows.push_back(o);
        continue;
      }
    }
    break;
  }
  std::sort(integral_rows.begin(), integral_rows.end());
  if (integral_rows.empty()) return;
  const RMat Pinv = rep.gauge.inverse_matrix();
  for (int r : integral_rows) {
    IntegralVerdict v;
    v.row = r;
    bool zero_row = true;
    for (int j = 0; j < n; ++j)
      if (j != r && !rep.reduced.A()(r, j).is_zero()) zero_row = false;
    v.dependent = zero_row && rep.reduced.A()(r, r).is_zero();
    if (v.dependent) {
      v.relation.assign(static_cast<size_t>(n), RatFunc());
      for (int j = 0; j < n; ++j) {
        if (j == r) continue;
        v.relation[static_cast<size_t>(j)] = -Pinv(r, j);
      }
    }
    rep.integrals.push_back(std::move(v));
  }
}

ReductionReport finish_report(ReductionReport rep, const ReduceOptions& opts) {
  const LieDimResult before = lie_dim(rep.original);
  const LieDimResult after = lie_dim(rep.reduced);
  rep.lie_dim_before = before.dim;
  rep.lie_dim_after = after.dim;
  rep.envelope_certified_before = before.basis.envelope_certified;
  rep.envelope_certified_after = after.basis.envelope_certified;
  rep.asserted_diag_galois_dim = opts.asserted_diag_galois_dim;

  // Residual orbit dimension for the two-block case.
  if (rep.reduced.blocks().size() == 2 && rep.reduced.orientation() == Orientation::Lower) {
    const auto off = rep.reduced.block_offsets();
    const int n1 = rep.reduced.blocks()[0], n2 = rep.reduced.blocks()[1];
    const RMat A1 = rep.reduced.A().submatrix(0, 0, n1, n1);
    const RMat A2 = rep.reduced.A().submatrix(off[1], off[1], n2, n2);
    const RMat res = rep.reduced.A().submatrix(off[1], 0, n2, n1);
    rep.residual_orbit_dim = psi_orbit_dim(A1, A2, res);
  }
  if (opts.asserted_diag_galois_dim) {
    rep.galois_dim = *opts.asserted_diag_galois_dim + rep.residual_orbit_dim;
  } else if (rep.envelope_certified_after && rep.diag_reduced_assumed) {
    rep.galois_dim = rep.lie_dim_after;
  }
  fill_independence(rep);
  return rep;
}

ReductionReport reverse_report(ReductionReport rep, const DiffSystem& original_upper) {
  const int n = original_upper.dim();
  const auto rev = [n](const RMat& M) {
    RMat out(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = M(n - 1 - i, n - 1 - j);
    return out;
  };
  ReductionReport out = rep;
  out.original = original_upper;
  out.reduced = rep.reduced.reversed();
  out.gauge = GaugeMatrix(rev(rep.gauge.P()));
  for (auto& iv : out.integrals) {
    iv.row = n - 1 - iv.row;
    std::reverse(iv.relation.begin(), iv.relation.end());
  }
  return out;
}

}  // namespace

ReductionReport reduce_two_block(const DiffSystem& sys, const ReduceOptions& opts) {
  if (!sys.diag_reduced_assumed())
    throw AssumptionError("reduce: the block diagonal must be asserted to be in reduced form");
  if (sys.blocks().size() != 2)
    throw std::invalid_argument("reduce_two_block: expected exactly two blocks");
  if (sys.orientation() == Orientation::Upper)
    return reverse_report(reduce_two_block(sys.reversed(), opts), sys);

  require_rational_poles(sys.A());

  const auto off = sys.block_offsets();
  const int n = sys.dim(), n1 = sys.blocks()[0], n2 = sys.blocks()[1];
  const RMat A1 = sys.A().submatrix(0, 0, n1, n1);
  const RMat A2 = sys.A().submatrix(off[1], off[1], n2, n2);
  const RMat S = sys.A().submatrix(off[1], 0, n2, n1);
  const WeiNormanDecomp diag = wei_norman(sys.diag_part());
  const AdjointAction psi = adjoint_action(A1, A2);

  ReductionReport rep;
  rep.original = sys;
  rep.diag_reduced_assumed = true;

  RMat Bblock(n2, n1), residual(n2, n1);
  bool used_flag = false;
  Flag flag;
  try {
    flag = flag_filtration(psi, diag);
    used_flag = true;
  } catch (const UnsupportedInput&) {
    if (psi.psi.rows() > 8) throw;
  }

  std::vector<RatFunc> s_initial;
  if (used_flag) {
    ReductionEngine eng(A1, A2, S, diag, flag);
    for (const auto& c : eng.coupling_coords()) s_initial.push_back(c.constant_term());
    eng.run_all();
    Bblock = eng.resolve_gauge(opts.free_assignments);
    residual = eng.resolve_residual(opts.free_assignments);
    rep.constraints_log = eng.log();
    rep.branch_choices = eng.branch_events();
    rep.residual_in_span = eng.residual_in_span();
    rep.free_params = eng.free_param_labels();
    // Removed / obstructed per adapted direction.
    const QMat T = basis_matrix(flag.basis);
    const auto res_coords = coords_in_constant_span(T, vec_rows(residual), "residual");
    for (size_t k = 0; k < flag.basis.size(); ++k) {
      const bool init_nz = !s_initial[k].is_zero();
      const bool fin_nz = !res_coords[k].is_zero();
      if (fin_nz)
        rep.obstructed.push_back(static_cast<int>(k));
      else if (init_nz)
        rep.removed.push_back(static_cast<int>(k));
    }
  } else {
    std::vector<std::string> frees;
    auto [B, R] = fallback_remove(A1, A2, S, diag, psi, opts, rep.constraints_log, frees);
    Bblock = B;
    residual = R;
    rep.free_params = frees;
    for (int i = 0; i < n2; ++i)
      for (int j = 0; j < n1; ++j) {
        const int k = i * n1 + j;
        if (!residual(i, j).is_zero())
          rep.obstructed.push_back(k);
        else if (!S(i, j).is_zero())
          rep.removed.push_back(k);
      }
    // Span check for the fallback residual.
    if (!residual.is_zero()) {
      std::vector<RatFunc> fs;
      for (const auto& a : diag.atoms) fs.push_back(a.value());
      const size_t span_atoms = atom_decompose(fs).atoms.size();
      std::vector<RatFunc> all = fs;
      for (int i = 0; i < n2; ++i)
        for (int j = 0; j < n1; ++j)
          if (!residual(i, j).is_zero()) all.push_back(residual(i, j));
      rep.residual_in_span = atom_decompose(all).atoms.size() == span_atoms;
    }
  }

  const RMat Bfull = embed_coupling(Bblock, n, off[1], 0);
  rep.gauge = GaugeMatrix(RMat::identity(n) + Bfull);
  const RMat reduced_mat = gauge_transform(rep.gauge.P(), sys.A());
  rep.reduced = DiffSystem(reduced_mat, sys.blocks(), Orientation::Lower, true);

  // The engine's predicted residual must agree with the exact gauge action.
  if (rep.reduced.A().submatrix(off[1], 0, n2, n1) != residual)
    throw std::logic_error("reduce_two_block: residual prediction mismatch");

  rep.verdict = (rep.removed.empty() && Bfull.is_zero()) ? "already reduced" : "reduced";
  return finish_report(std::move(rep), opts);
}

ReductionReport reduce_multi_block(const DiffSystem& sys, const ReduceOptions& opts) {
  if (!sys.diag_reduced_assumed())
    throw AssumptionError("reduce: the block diagonal must be asserted to be in reduced form");
  if (sys.orientation() == Orientation::Upper)
    return reverse_report(reduce_multi_block(sys.reversed(), opts), sys);
  require_rational_poles(sys.A());

  const int n = sys.dim();
  if (sys.blocks().size() <= 1) {
    ReductionReport rep;
    rep.original = sys;
    rep.reduced = sys;
    rep.gauge = GaugeMatrix::identity(n);
    rep.diag_reduced_assumed = true;
    rep.verdict = "already reduced";
    return finish_report(std::move(rep), opts);
  }
  if (sys.blocks().size() == 2) return reduce_two_block(sys, opts);

  DiffSystem current = sys;
  RMat Ptotal = RMat::identity(n);
  ReductionReport rep;
  rep.original = sys;
  rep.diag_reduced_assumed = true;
  int stage = 0;
  bool any_removed = false;

  while (current.blocks().size() >= 2) {
    const auto blocks = current.blocks();
    const size_t kappa = blocks.size();
    const auto off = current.block_offsets();
    const int o = off[kappa - 2];
    const int m = blocks[kappa - 2] + blocks[kappa - 1];
    const bool final_stage = kappa == 2;
    const int sub_off = final_stage ? 0 : o;
    const int sub_dim = final_stage ? n : m;
    std::vector<int> sub_blocks;
    if (final_stage) {
      sub_blocks = blocks;
    } else {
      sub_blocks = {blocks[kappa - 2], blocks[kappa - 1]};
    }
    DiffSystem sub(current.A().submatrix(sub_off, sub_off, sub_dim, sub_dim),
                   final_stage ? blocks : sub_blocks, Orientation::Lower, true);
    ReduceOptions sub_opts;
    sub_opts.free_assignments = opts.free_assignments;
    ReductionReport sr = reduce_two_block(sub, sub_opts);
    any_removed = any_removed || !sr.removed.empty();
    for (auto e : sr.constraints_log) {
      e.level_tag += 100 * stage;
      rep.constraints_log.push_back(e);
    }
    for (auto b : sr.branch_choices) {
      b.level_tag += 100 * stage;
      rep.branch_choices.push_back(b);
    }
    for (const auto& f : sr.free_params) rep.free_params.push_back(f);
    rep.residual_in_span = rep.residual_in_span && sr.residual_in_span;

    RMat lift = RMat::identity(n);
    lift.paste(sub_off, sub_off, sr.gauge.P());
    Ptotal = Ptotal * lift;
    RMat newA = gauge_transform(lift, current.A());
    if (final_stage) {
      current = DiffSystem(newA, blocks, Orientation::Lower, true);
      break;
    }
    std::vector<int> merged(blocks.begin(), blocks.end() - 2);
    merged.push_back(m);
    current = DiffSystem(newA, merged, Orientation::Lower, true);
    ++stage;
  }

  rep.gauge = GaugeMatrix(Ptotal);
  rep.reduced = DiffSystem(gauge_transform(Ptotal, sys.A()), sys.blocks(), Orientation::Lower, true);
  rep.verdict = (!any_removed && (Ptotal == RMat::identity(n))) ? "already reduced" : "reduced";
  return finish_report(std::move(rep), opts);
}

std::string independence_report(const ReductionReport& rep,
                                const std::map<std::string, std::string>& labels) {
  std::ostringstream os;
  os << "reduction verdict: " << rep.verdict << "\n";
  os << "Lie algebra dimension (bracket closure): " << rep.lie_dim_before << " -> "
     << rep.lie_dim_after << "\n";
  os << "envelope certified: " << (rep.envelope_certified_after ? "yes" : "no") << "\n";
  if (!rep.diag_reduced_assumed)
    os << "note: diagonal reduced-form assumption NOT asserted; dimensions are upper bounds only\n";
  if (rep.asserted_diag_galois_dim) {
    os << "asserted diagonal Galois dimension: " << *rep.asserted_diag_galois_dim << "\n";
    os << "unremovable coupling directions (smallest enclosing adjoint-invariant space): "
       << rep.residual_orbit_dim << "\n";
  }
  if (rep.galois_dim) {
    os << "Galois-Lie algebra dimension: " << *rep.galois_dim << "\n";
    os << "transcendence degree of the solution field: " << *rep.galois_dim << "\n";
  } else {
    os << "Galois-Lie algebra dimension: between the true value and " << rep.lie_dim_after
       << " (upper bound; envelope not certified)\n";
  }
  for (const auto& iv : rep.integrals) {
    if (iv.dependent) {
      os << "integral component y" << (iv.row + 1) << ": DEPENDENT; y" << (iv.row + 1) << " = ";
      bool first = true;
      for (size_t j = 0; j < iv.relation.size(); ++j) {
        if (iv.relation[j].is_zero()) continue;
        if (!first) os << " + ";
        os << "(" << iv.relation[j] << ")*y" << (j + 1);
        first = false;
      }
      os << " + const\n";
    } else {
      os << "integral component y" << (iv.row + 1)
         << ": INDEPENDENT (no rational dependence on the diagonal solutions)\n";
    }
  }
  if (!rep.integrals.empty()) {
    bool all_indep = true;
    for (const auto& iv : rep.integrals)
      if (iv.dependent) all_indep = false;
    if (all_indep && rep.residual_orbit_dim > 0) {
      os << "each unremovable integral direction is algebraically independent of the diagonal "
            "solutions";
      if (rep.residual_orbit_dim >= 2)
        os << "; the " << rep.residual_orbit_dim
           << " integral directions are algebraically independent of each other";
      os << "\n";
    }
  }
  auto it = labels.find("functions");
  if (it != labels.end() && rep.galois_dim) {
    os << "the functions " << it->second << " are algebraically independent (transcendence degree "
       << *rep.galois_dim << ")\n";
    auto hl = labels.find("highlight");
    if (hl != labels.end()) {
      std::string others;
      std::istringstream ss(it->second);
      std::string tok;
      bool first = true;
      while (std::getline(ss, tok, ',')) {
        const auto l = tok.find_first_not_of(' ');
        const auto r = tok.find_last_not_of(' ');
        tok = tok.substr(l, r - l + 1);
        if (tok == hl->second) continue;
        if (!first) others += ", ";
        others += tok;
        first = false;
      }
      os << hl->second << " is algebraically independent of " << others << "\n";
    }
  }
  return os.str();
}

}  // namespace redform
