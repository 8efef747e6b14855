#include "redform/ratsolve.hpp"

#include <algorithm>
#include <climits>
#include <set>

namespace redform {

namespace {

// All distinct (constant, parameter-coefficient) rational functions of a
// ParamAffine, constant part first.
std::vector<RatFunc> parts_of(const ParamAffine& a) {
  std::vector<RatFunc> out{a.constant_term()};
  for (const auto& [p, f] : a.linear_terms()) out.push_back(f);
  return out;
}

// Constraint rows expressing that a ParamAffine rational function is
// identically zero: one row per partial-fraction atom.
std::vector<LinExpr> vanishing_rows(const ParamAffine& a) {
  std::vector<RatFunc> fs{a.constant_term()};
  std::vector<ParamId> ids;
  for (const auto& [p, f] : a.linear_terms()) {
    fs.push_back(f);
    ids.push_back(p);
  }
  const AtomDecomp d = atom_decompose(fs);
  std::vector<LinExpr> rows;
  for (size_t k = 0; k < d.atoms.size(); ++k) {
    LinExpr e;
    e.constant = d.coords[0][k];
    for (size_t i = 0; i < ids.size(); ++i) {
      const Rational c = d.coords[i + 1][k];
      if (!c.is_zero()) e.coeffs[ids[i]] = c;
    }
    if (!e.is_zero()) rows.push_back(std::move(e));
  }
  return rows;
}

// Hermite reduction applied across a ParamAffine: rhs = G' + R.
std::pair<ParamAffine, ParamAffine> hermite_affine(const ParamAffine& rhs) {
  auto [gc, rc] = hermite_reduce(rhs.constant_term());
  ParamAffine G(gc), R(rc);
  for (const auto& [p, f] : rhs.linear_terms()) {
    auto [gp, rp] = hermite_reduce(f);
    G += ParamAffine::param(p, gp);
    R += ParamAffine::param(p, rp);
  }
  return {G, R};
}

}  // namespace

ParamSolutionSpace param_antiderivative(const ParamAffine& rhs, ParamStore& store,
                                        const std::string& const_label) {
  ParamSolutionSpace out;
  auto [G, R] = hermite_affine(rhs);
  for (const auto& row : vanishing_rows(R)) out.constraints.add(row);
  const ParamId c = store.fresh(const_label);
  out.new_params.push_back(c);
  out.particular.push_back(G + ParamAffine::param(c, RatFunc(1)));
  out.empty = !out.constraints.consistent();
  return out;
}

int order_at(const RatFunc& f, const Rational& alpha) {
  if (f.is_zero()) return INT_MAX;
  const Poly lin = Poly::x() - Poly(alpha);
  int ord = 0;
  Poly n = f.num();
  while (n.eval(alpha).is_zero()) {
    n = n.div_exact(lin);
    ++ord;
  }
  Poly d = f.den();
  while (d.eval(alpha).is_zero()) {
    d = d.div_exact(lin);
    --ord;
  }
  return ord;
}

Rational leading_coeff_at(const RatFunc& f, const Rational& alpha) {
  if (f.is_zero()) return Rational(0);
  const Poly lin = Poly::x() - Poly(alpha);
  Poly n = f.num(), d = f.den();
  while (n.eval(alpha).is_zero()) n = n.div_exact(lin);
  while (d.eval(alpha).is_zero()) d = d.div_exact(lin);
  return n.eval(alpha) / d.eval(alpha);
}

std::vector<long> integer_roots(const Poly& p) {
  std::vector<long> out;
  if (p.degree() < 1) return out;
  Poly q = p;
  // Rational-root extraction keeps only integer ones.
  const auto rf = factorize(p);
  for (const auto& [f, m] : rf) {
    if (f.degree() != 1) continue;
    const Rational root = -f.coeff(0);  // monic x - root
    long r;
    if (root.fits_long(r)) out.push_back(r);
    else if (root.is_integer()) throw UnsupportedInput("integer root exceeds machine range");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Rational> rational_poles(const RatFunc& f) {
  std::vector<Rational> out;
  for (const auto& [q, m] : factorize(f.den())) {
    if (q.degree() != 1)
      throw UnsupportedInput("denominator factor " + q.str() +
                             " has no rational root; poles must be Q-rational");
    out.push_back(-q.coeff(0));
  }
  return out;
}

ParamSolutionSpace scalar_rational_solutions(const std::vector<RatFunc>& op_coeffs,
                                             const ParamAffine& rhs, ParamStore& store) {
  const int n = static_cast<int>(op_coeffs.size());
  if (n == 0) throw std::invalid_argument("scalar_rational_solutions: empty operator");

  // Full coefficient list including the monic leading term.
  std::vector<RatFunc> cs = op_coeffs;
  cs.push_back(RatFunc(1));

  // Collect candidate poles from the operator and the right-hand side.
  std::set<Rational> pole_set;
  for (const auto& c : cs)
    for (const auto& a : rational_poles(c)) pole_set.insert(a);
  for (const auto& part : parts_of(rhs))
    for (const auto& a : rational_poles(part)) pole_set.insert(a);

  // Local denominator bound at each pole.
  Poly denom(Rational(1));
  for (const auto& alpha : pole_set) {
    int nu = INT_MAX;
    for (int i = 0; i <= n; ++i) {
      if (cs[static_cast<size_t>(i)].is_zero()) continue;
      nu = std::min(nu, order_at(cs[static_cast<size_t>(i)], alpha) - i);
    }
    Poly indicial;
    for (int i = 0; i <= n; ++i) {
      if (cs[static_cast<size_t>(i)].is_zero()) continue;
      if (order_at(cs[static_cast<size_t>(i)], alpha) - i != nu) continue;
      // lambda (lambda-1) ... (lambda-i+1)
      Poly ff(Rational(1));
      for (int k = 0; k < i; ++k) ff *= Poly::x() - Poly(Rational(k));
      indicial += ff * leading_coeff_at(cs[static_cast<size_t>(i)], alpha);
    }
    long emin = 0;
    bool has_candidate = false;
    for (long r : integer_roots(indicial)) {
      emin = has_candidate ? std::min(emin, r) : r;
      has_candidate = true;
    }
    int p_rhs = 0;
    for (const auto& part : parts_of(rhs)) {
      const int o = order_at(part, alpha);
      if (o != INT_MAX) p_rhs = std::max(p_rhs, -o);
    }
    if (p_rhs > 0) {
      const long cand = -static_cast<long>(p_rhs) - nu;
      emin = has_candidate ? std::min(emin, cand) : cand;
      has_candidate = true;
    }
    const long d_alpha = has_candidate ? std::max(0L, -emin) : 0;
    for (long k = 0; k < d_alpha; ++k) denom *= Poly::x() - Poly(alpha);
  }

  const RatFunc D(Poly(Rational(1)), denom);

  // Operator on the numerator N (y = N * D): sum_j h_j N^(j) with
  // h_j = sum_{i >= j} C(i, j) c_i D^{(i-j)}  (D = 1/denom).
  std::vector<RatFunc> h(static_cast<size_t>(n) + 1);
  std::vector<RatFunc> Dder{D};  // derivatives of D
  for (int k = 1; k <= n; ++k) Dder.push_back(Dder.back().derivative());
  std::vector<std::vector<mpz_class>> binom(static_cast<size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    binom[static_cast<size_t>(i)].assign(static_cast<size_t>(i) + 1, 0);
    binom[static_cast<size_t>(i)][0] = 1;
    for (int j = 1; j <= i; ++j)
      binom[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          binom[static_cast<size_t>(i - 1)][static_cast<size_t>(j - 1)] +
          (j <= i - 1 ? binom[static_cast<size_t>(i - 1)][static_cast<size_t>(j)] : 0);
  }
  for (int j = 0; j <= n; ++j) {
    RatFunc acc;
    for (int i = j; i <= n; ++i) {
      if (cs[static_cast<size_t>(i)].is_zero()) continue;
      acc += cs[static_cast<size_t>(i)] * Dder[static_cast<size_t>(i - j)] *
             RatFunc(Rational(binom[static_cast<size_t>(i)][static_cast<size_t>(j)]));
    }
    h[static_cast<size_t>(j)] = acc;
  }

  // Clear denominators: common denominator of all h_j and rhs parts.
  Poly delta(Rational(1));
  const auto lcm_in = [&delta](const Poly& d) {
    const Poly g = poly_gcd(delta, d);
    delta = delta.div_exact(g) * d;
  };
  for (const auto& f : h)
    if (!f.is_zero()) lcm_in(f.den());
  for (const auto& part : parts_of(rhs))
    if (!part.is_zero()) lcm_in(part.den());
  std::vector<Poly> ht(static_cast<size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) {
    const RatFunc v = h[static_cast<size_t>(j)] * RatFunc(delta);
    ht[static_cast<size_t>(j)] = v.num();  // denominator divides delta exactly
  }
  ParamAffine rhs_cleared = rhs * RatFunc(delta);

  // Degree bound for N from the indicial data at infinity.
  int sigma = INT_MIN;
  for (int j = 0; j <= n; ++j)
    if (!ht[static_cast<size_t>(j)].is_zero())
      sigma = std::max(sigma, ht[static_cast<size_t>(j)].degree() - j);
  Poly mu;
  for (int j = 0; j <= n; ++j) {
    if (ht[static_cast<size_t>(j)].is_zero()) continue;
    if (ht[static_cast<size_t>(j)].degree() - j != sigma) continue;
    Poly ff(Rational(1));
    for (int k = 0; k < j; ++k) ff *= Poly::x() - Poly(Rational(k));
    mu += ff * ht[static_cast<size_t>(j)].leading();
  }
  long dmax = -1;
  for (long r : integer_roots(mu)) dmax = std::max(dmax, r);
  for (const auto& part : parts_of(rhs_cleared)) {
    if (part.is_zero()) continue;
    dmax = std::max(dmax, static_cast<long>(part.num().degree()) - sigma);
  }

  // Ansatz N = sum u_k x^k; rows come from matching polynomial coefficients.
  ParamSolutionSpace out;
  std::vector<ParamId> uids;
  ParamAffine lhs_minus_rhs = -rhs_cleared;
  for (long k = 0; k <= dmax; ++k) {
    const ParamId u = store.fresh("u" + std::to_string(store.count()));
    uids.push_back(u);
    out.new_params.push_back(u);
    // Apply the cleared operator to x^k.
    Poly img;
    Poly xk = Poly::monomial(static_cast<int>(k), Rational(1));
    Poly der = xk;
    for (int j = 0; j <= n; ++j) {
      img += ht[static_cast<size_t>(j)] * der;
      der = der.derivative();
    }
    lhs_minus_rhs += ParamAffine::param(u, RatFunc(img));
  }
  for (const auto& row : vanishing_rows(lhs_minus_rhs)) out.constraints.add(row);
  if (!out.constraints.consistent()) {
    out.empty = true;
    out.particular.push_back(ParamAffine());
    return out;
  }
  ParamAffine y;
  for (size_t k = 0; k < uids.size(); ++k)
    y += ParamAffine::param(uids[k], RatFunc(Poly::monomial(static_cast<int>(k), Rational(1))) * D);
  // Eliminate determined parameters so the particular solution is expressed
  // in the free ones only.
  const auto sol = out.constraints.solve();
  y = y.substitute(sol.assignments);
  out.particular.push_back(y);

  // Soundness: L(y) - rhs must vanish modulo the constraints.
  ParamAffine residual = -rhs;
  ParamAffine der = y;
  for (int j = 0; j <= n; ++j) {
    residual += der * cs[static_cast<size_t>(j)];
    der = der.derivative();
  }
  for (const auto& row : vanishing_rows(residual))
    if (out.constraints.classify(row) == ConstraintSet::AddResult::Inconsistent)
      throw std::logic_error("scalar_rational_solutions: verification failed");
  return out;
}

ParamSolutionSpace triangular_system_rational_solutions(const RMat& M,
                                                        const std::vector<ParamAffine>& rhs,
                                                        const std::vector<int>& order,
                                                        ParamStore& store) {
  const int N = M.rows();
  if (static_cast<int>(rhs.size()) != N || static_cast<int>(order.size()) != N)
    throw std::invalid_argument("triangular_system_rational_solutions: size mismatch");
  std::vector<int> pos(static_cast<size_t>(N), -1);  // component -> solve position
  for (int k = 0; k < N; ++k) pos[static_cast<size_t>(order[static_cast<size_t>(k)])] = k;
  for (int k = 0; k < N; ++k) {
    const int i = order[static_cast<size_t>(k)];
    for (int j = 0; j < N; ++j)
      if (!M(i, j).is_zero() && j != i && pos[static_cast<size_t>(j)] >= k)
        throw std::invalid_argument(
            "triangular_system_rational_solutions: order violates triangularity at (" +
            std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
  }

  ParamSolutionSpace out;
  out.particular.assign(static_cast<size_t>(N), ParamAffine());
  for (int k = 0; k < N; ++k) {
    const int i = order[static_cast<size_t>(k)];
    ParamAffine eff = rhs[static_cast<size_t>(i)];
    for (int j = 0; j < N; ++j) {
      if (j == i || M(i, j).is_zero()) continue;
      eff += out.particular[static_cast<size_t>(j)] * M(i, j);
    }
    ParamSolutionSpace comp;
    if (M(i, i).is_zero()) {
      comp = param_antiderivative(eff, store, "c" + std::to_string(store.count()));
    } else {
      comp = scalar_rational_solutions({-M(i, i)}, eff, store);
    }
    out.constraints.merge(comp.constraints);
    for (ParamId p : comp.new_params) out.new_params.push_back(p);
    out.particular[static_cast<size_t>(i)] = comp.particular[0];
    if (comp.empty || !out.constraints.consistent()) {
      out.empty = true;
      return out;
    }
  }
  return out;
}

ParamSolutionSpace system_rational_solutions_cyclic(const RMat& M,
                                                    const std::vector<ParamAffine>& rhs,
                                                    ParamStore& store) {
  const int N = M.rows();
  if (N == 0 || M.cols() != N || static_cast<int>(rhs.size()) != N)
    throw std::invalid_argument("system_rational_solutions_cyclic: bad input");

  // Deterministic cyclic-covector candidates: coordinate covectors, then
  // small polynomial mixtures.
  std::vector<std::vector<RatFunc>> candidates;
  for (int i = 0; i < N; ++i) {
    std::vector<RatFunc> e(static_cast<size_t>(N));
    e[static_cast<size_t>(i)] = RatFunc(1);
    candidates.push_back(std::move(e));
  }
  {
    std::vector<RatFunc> e(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) e[static_cast<size_t>(i)] = RatFunc(Poly::x().pow(i));
    candidates.push_back(std::move(e));
    std::vector<RatFunc> e2(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) e2[static_cast<size_t>(i)] = RatFunc((Poly::x() + Poly(Rational(1))).pow(i));
    candidates.push_back(std::move(e2));
  }

  for (const auto& e0 : candidates) {
    // Row recurrence e_{k+1} = e_k' + e_k M.
    std::vector<std::vector<RatFunc>> es{e0};
    for (int k = 0; k < N; ++k) {
      const auto& ek = es.back();
      std::vector<RatFunc> next(static_cast<size_t>(N));
      for (int j = 0; j < N; ++j) {
        RatFunc acc = ek[static_cast<size_t>(j)].derivative();
        for (int i = 0; i < N; ++i) acc += ek[static_cast<size_t>(i)] * M(i, j);
        next[static_cast<size_t>(j)] = acc;
      }
      es.push_back(std::move(next));
    }
    RMat E(N, N);
    for (int k = 0; k < N; ++k)
      for (int j = 0; j < N; ++j) E(k, j) = es[static_cast<size_t>(k)][static_cast<size_t>(j)];
    if (!is_invertible(E)) continue;  // not cyclic, next candidate

    // Relation e_N = sum_k gamma_k e_k, i.e. gamma = e_N * E^{-1}.
    const RMat Einv = inverse(E);
    std::vector<RatFunc> gamma(static_cast<size_t>(N));
    for (int j = 0; j < N; ++j) {
      RatFunc acc;
      for (int i = 0; i < N; ++i) acc += es[static_cast<size_t>(N)][static_cast<size_t>(i)] * Einv(i, j);
      std::swap(acc, gamma[static_cast<size_t>(j)]);
    }

    // Scalar right-hand side bookkeeping: y^{(k)} = e_k F + r_k with
    // r_0 = 0, r_{k+1} = r_k' + e_k . rhs.
    std::vector<ParamAffine> r(static_cast<size_t>(N) + 1);
    for (int k = 0; k < N; ++k) {
      ParamAffine dot;
      for (int j = 0; j < N; ++j) dot += rhs[static_cast<size_t>(j)] * es[static_cast<size_t>(k)][static_cast<size_t>(j)];
      r[static_cast<size_t>(k) + 1] = r[static_cast<size_t>(k)].derivative() + dot;
    }
    // Operator: y^{(N)} - sum gamma_k y^{(k)} = r_N - sum gamma_k r_k.
    std::vector<RatFunc> coeffs(static_cast<size_t>(N));
    for (int k = 0; k < N; ++k) coeffs[static_cast<size_t>(k)] = -gamma[static_cast<size_t>(k)];
    ParamAffine scalar_rhs = r[static_cast<size_t>(N)];
    for (int k = 0; k < N; ++k) scalar_rhs -= r[static_cast<size_t>(k)] * gamma[static_cast<size_t>(k)];

    ParamSolutionSpace sc = scalar_rational_solutions(coeffs, scalar_rhs, store);
    ParamSolutionSpace out;
    out.new_params = sc.new_params;
    out.constraints = sc.constraints;
    out.empty = sc.empty;
    if (out.empty) {
      out.particular.assign(static_cast<size_t>(N), ParamAffine());
      return out;
    }
    // Recover F = E^{-1} (y^{(k)} - r_k)_k.
    std::vector<ParamAffine> w(static_cast<size_t>(N));
    ParamAffine der = sc.particular[0];
    for (int k = 0; k < N; ++k) {
      w[static_cast<size_t>(k)] = der - r[static_cast<size_t>(k)];
      der = der.derivative();
    }
    out.particular.assign(static_cast<size_t>(N), ParamAffine());
    for (int i = 0; i < N; ++i) {
      ParamAffine acc;
      for (int k = 0; k < N; ++k) acc += w[static_cast<size_t>(k)] * Einv(i, k);
      out.particular[static_cast<size_t>(i)] = acc;
    }
    // Verification: F' - M F - rhs = 0 modulo constraints.
    for (int i = 0; i < N; ++i) {
      ParamAffine res = out.particular[static_cast<size_t>(i)].derivative() - rhs[static_cast<size_t>(i)];
      for (int j = 0; j < N; ++j) res -= out.particular[static_cast<size_t>(j)] * M(i, j);
      for (const auto& row : vanishing_rows(res))
        if (out.constraints.classify(row) == ConstraintSet::AddResult::Inconsistent)
          throw std::logic_error("system_rational_solutions_cyclic: verification failed");
    }
    return out;
  }
  throw UnsupportedInput("no cyclic covector found for the system");
}

}  // namespace redform
