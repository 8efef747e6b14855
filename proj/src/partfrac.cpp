#include "redform/partfrac.hpp"

#include <algorithm>
#include <map>

namespace redform {

namespace {

// Trial-division factorization; large leftover cofactors must be (probable)
// primes or the input is rejected as beyond desk scale.
std::vector<std::pair<mpz_class, int>> factor_integer(mpz_class n) {
  std::vector<std::pair<mpz_class, int>> out;
  if (n < 0) n = -n;
  if (n <= 1) return out;
  const auto push = [&](const mpz_class& p) {
    if (!out.empty() && out.back().first == p) {
      out.back().second++;
    } else {
      out.push_back({p, 1});
    }
  };
  for (mpz_class p = 2; p <= 1000000 && p * p <= n;) {
    while (n % p == 0) {
      push(p);
      n /= p;
    }
    p += (p == 2) ? 1 : 2;
  }
  if (n > 1) {
    if (n <= mpz_class(1000000) * 1000000 || mpz_probab_prime_p(n.get_mpz_t(), 30)) {
      push(n);
    } else {
      throw UnsupportedInput("integer too hard to factor: " + n.get_str());
    }
  }
  return out;
}

std::vector<mpz_class> divisors(const mpz_class& n, size_t cap = 200000) {
  std::vector<mpz_class> out{1};
  for (const auto& [p, e] : factor_integer(n)) {
    const size_t sz = out.size();
    mpz_class pk = 1;
    for (int k = 1; k <= e; ++k) {
      pk *= p;
      for (size_t i = 0; i < sz; ++i) out.push_back(out[i] * pk);
      if (out.size() > cap) throw UnsupportedInput("divisor enumeration exceeds desk scale");
    }
  }
  return out;
}

// Clears denominators and content: returns a primitive integer polynomial
// proportional to p (p nonzero).
std::vector<mpz_class> primitive_integer(const Poly& p) {
  mpz_class lcm_den = 1;
  for (const auto& c : p.coeffs()) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), lcm_den.get_mpz_t(), c.den().get_mpz_t());
    lcm_den = lcm_den / g * c.den();
  }
  std::vector<mpz_class> zc;
  zc.reserve(p.coeffs().size());
  mpz_class content = 0;
  for (const auto& c : p.coeffs()) {
    mpz_class v = c.num() * (lcm_den / c.den());
    mpz_gcd(content.get_mpz_t(), content.get_mpz_t(), v.get_mpz_t());
    zc.push_back(v);
  }
  if (content == 0) content = 1;
  for (auto& v : zc) v /= content;
  return zc;
}

// All rational roots with multiplicities; divides them out of p (monic).
std::vector<std::pair<Rational, int>> extract_rational_roots(Poly& p) {
  std::vector<std::pair<Rational, int>> roots;
  // Roots at zero.
  int z = 0;
  while (!p.is_zero() && p.coeff(0).is_zero() && p.degree() >= 1) {
    std::vector<Rational> c(p.coeffs().begin() + 1, p.coeffs().end());
    p = Poly(std::move(c));
    ++z;
  }
  if (z > 0) roots.push_back({Rational(0), z});
  if (p.degree() < 1) return roots;

  const auto zc = primitive_integer(p);
  std::vector<mpz_class> ps = divisors(zc.front());
  std::vector<mpz_class> qs = divisors(zc.back());
  std::vector<Rational> candidates;
  for (const auto& pp : ps)
    for (const auto& qq : qs) {
      mpz_class g;
      mpz_gcd(g.get_mpz_t(), pp.get_mpz_t(), qq.get_mpz_t());
      if (g != 1) continue;
      candidates.push_back(Rational(pp, qq));
      candidates.push_back(Rational(-pp, qq));
    }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (const auto& r : candidates) {
    if (p.degree() < 1) break;
    int mult = 0;
    while (p.degree() >= 1 && p.eval(r).is_zero()) {
      Poly lin = Poly::x() - Poly(r);
      p = p.div_exact(lin);
      ++mult;
    }
    if (mult > 0) roots.push_back({r, mult});
  }
  return roots;
}

Poly interpolate(const std::vector<Rational>& xs, const std::vector<Rational>& ys) {
  // Lagrange interpolation.
  Poly acc;
  for (size_t i = 0; i < xs.size(); ++i) {
    Poly li(Rational(1));
    Rational denom(1);
    for (size_t j = 0; j < xs.size(); ++j) {
      if (i == j) continue;
      li *= Poly::x() - Poly(xs[j]);
      denom *= xs[i] - xs[j];
    }
    acc += li * (ys[i] / denom);
  }
  return acc;
}

// Kronecker-style search for a nontrivial factor of a squarefree polynomial
// with no rational roots, degree >= 4. Returns a monic factor or the zero
// polynomial if p is irreducible.
Poly kronecker_factor(const Poly& p) {
  const int n = p.degree();
  for (int d = 2; d <= n / 2; ++d) {
    // Evaluation points 0, 1, -1, 2, -2, ...
    std::vector<Rational> xs;
    for (long k = 0; static_cast<int>(xs.size()) < d + 1; ++k) {
      if (k == 0) {
        xs.push_back(Rational(0));
      } else {
        xs.push_back(Rational(k));
        if (static_cast<int>(xs.size()) < d + 1) xs.push_back(Rational(-k));
      }
    }
    std::vector<std::vector<mpz_class>> divs(xs.size());
    double combos = 1;
    for (size_t i = 0; i < xs.size(); ++i) {
      const Rational v = p.eval(xs[i]);
      // p has no rational roots, so v != 0; v is an integer for integer p,
      // but p is monic over Q here, so work with the numerator scaled.
      mpz_class scaled = v.num();  // candidate divisors of the numerator
      divs[i] = divisors(scaled);
      const size_t base = divs[i].size() * 2;
      combos *= static_cast<double>(i == 0 ? divs[i].size() : base);
      if (combos > 2e6) throw UnsupportedInput("factor search exceeds desk scale");
    }
    std::vector<size_t> idx(xs.size(), 0);
    std::vector<int> sign(xs.size(), 1);
    const auto advance = [&]() -> bool {
      for (size_t i = xs.size(); i-- > 0;) {
        if (i != 0 && sign[i] == 1) { sign[i] = -1; return true; }
        sign[i] = 1;
        if (++idx[i] < divs[i].size()) return true;
        idx[i] = 0;
      }
      return false;
    };
    do {
      std::vector<Rational> ys(xs.size());
      for (size_t i = 0; i < xs.size(); ++i)
        ys[i] = Rational(sign[i] == 1 ? divs[i][idx[i]] : -divs[i][idx[i]]);
      Poly g = interpolate(xs, ys);
      if (g.degree() != d) continue;
      auto [q, r] = p.divrem(g);
      if (r.is_zero()) return g.monic();
    } while (advance());
  }
  return Poly();
}

void factor_squarefree_into(const Poly& sf, int mult,
                            std::vector<std::pair<Poly, int>>& out) {
  Poly rest = sf.monic();
  auto roots = extract_rational_roots(rest);
  for (const auto& [r, m] : roots)
    out.push_back({Poly::x() - Poly(r), mult * m});  // m == 1 for squarefree input
  while (rest.degree() >= 1) {
    if (rest.degree() <= 3) {
      // No rational roots and degree 2 or 3: irreducible over Q.
      out.push_back({rest.monic(), mult});
      break;
    }
    Poly f = kronecker_factor(rest);
    if (f.is_zero()) {
      out.push_back({rest.monic(), mult});
      break;
    }
    factor_squarefree_into(f, mult, out);
    rest = rest.div_exact(f).monic();
  }
}

}  // namespace

std::vector<std::pair<Poly, int>> squarefree_decomposition(const Poly& p) {
  std::vector<std::pair<Poly, int>> out;
  if (p.degree() < 1) return out;
  // Yun's algorithm.
  Poly a = p.monic();
  Poly g = poly_gcd(a, a.derivative());
  Poly b = a.div_exact(g);
  Poly c = a.derivative().div_exact(g);
  Poly d = c - b.derivative();
  int i = 1;
  while (b.degree() >= 1) {
    Poly f = poly_gcd(b, d);
    if (f.degree() >= 1) out.push_back({f, i});
    b = b.div_exact(f);
    c = d.div_exact(f);
    d = c - b.derivative();
    ++i;
  }
  return out;
}

bool is_squarefree(const Poly& p) {
  if (p.degree() < 1) return true;
  return poly_gcd(p, p.derivative()).degree() == 0;
}

std::vector<std::pair<Poly, int>> factorize(const Poly& p) {
  std::vector<std::pair<Poly, int>> out;
  for (const auto& [sf, mult] : squarefree_decomposition(p)) factor_squarefree_into(sf, mult, out);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.first.degree() != b.first.degree()) return a.first.degree() < b.first.degree();
    for (int i = a.first.degree(); i >= 0; --i) {
      if (a.first.coeff(i) != b.first.coeff(i)) return a.first.coeff(i) < b.first.coeff(i);
    }
    return a.second < b.second;
  });
  return out;
}

RatFunc PartialFraction::recombine() const {
  RatFunc acc(polynomial_part);
  for (const auto& t : terms) acc += RatFunc(t.numerator, t.factor.pow(t.multiplicity));
  return acc;
}

PartialFraction squarefree_partfrac(const RatFunc& a) {
  PartialFraction out;
  auto [polypart, rem] = a.num().divrem(a.den());
  out.polynomial_part = polypart;
  if (rem.is_zero()) return out;

  const Poly den = a.den();
  const auto factors = factorize(den);
  for (const auto& [q, m] : factors) {
    const Poly Q = q.pow(m);
    const Poly rest = den.div_exact(Q);
    // Component of rem/den over Q: B = rem * rest^{-1} mod Q.
    Poly B = rest.is_one() ? rem.divrem(Q).second
                           : (rem * poly_invmod(rest.divrem(Q).second, Q)).divrem(Q).second;
    // q-adic expansion: B = sum C_k q^k, term C_k / q^{m-k}.
    Poly cur = B;
    for (int k = 0; k < m && !cur.is_zero(); ++k) {
      auto [quo, c] = cur.divrem(q);
      if (!c.is_zero()) out.terms.push_back({q, m - k, c});
      cur = quo;
    }
  }
  std::sort(out.terms.begin(), out.terms.end(), [](const auto& a_, const auto& b_) {
    Atom x{a_.factor, a_.multiplicity, 0}, y{b_.factor, b_.multiplicity, 0};
    return atom_less(x, y);
  });
  return out;
}

std::pair<RatFunc, RatFunc> hermite_reduce(const RatFunc& a) {
  auto [polypart, rem] = a.num().divrem(a.den());
  // Antiderivative of the polynomial part.
  Poly gpoly;
  for (int i = 0; i <= polypart.degree(); ++i)
    gpoly += Poly::monomial(i + 1, polypart.coeff(i) / Rational(i + 1));
  RatFunc g(gpoly), r;
  if (rem.is_zero()) return {g, r};

  const Poly den = a.den();
  for (const auto& [d, i] : squarefree_decomposition(den)) {
    const Poly D = d.pow(i);
    const Poly rest = den.div_exact(D);
    Poly T = rest.is_one() ? rem.divrem(D).second
                           : (rem * poly_invmod(rest.divrem(D).second, D)).divrem(D).second;
    // Reduce T/d^j down to j = 1.
    for (int j = i; j >= 2; --j) {
      if (T.is_zero()) break;
      const Poly dp = d.derivative();
      const Poly t = (T * poly_invmod(dp.divrem(d).second, d)).divrem(d).second;
      const Poly s = (T - t * dp).div_exact(d);
      const Rational c = Rational(1) / Rational(j - 1);
      g += RatFunc(-(t * c), d.pow(j - 1));
      T = s + t.derivative() * c;
    }
    if (!T.is_zero()) r += RatFunc(T, d);
  }
  return {g, r};
}

RatFunc Atom::value() const {
  if (is_monomial()) return RatFunc(Poly::monomial(numer_degree, Rational(1)));
  return RatFunc(Poly::monomial(numer_degree, Rational(1)), factor.pow(multiplicity));
}

bool atom_less(const Atom& a, const Atom& b) {
  if (a.is_monomial() != b.is_monomial()) return a.is_monomial();
  if (a.is_monomial()) return a.numer_degree < b.numer_degree;
  if (a.factor.degree() != b.factor.degree()) return a.factor.degree() < b.factor.degree();
  if (a.factor != b.factor) {
    if (a.factor.degree() == 1) {
      // Linear factors ordered by root value.
      return -a.factor.coeff(0) < -b.factor.coeff(0);
    }
    for (int i = a.factor.degree(); i >= 0; --i)
      if (a.factor.coeff(i) != b.factor.coeff(i)) return a.factor.coeff(i) < b.factor.coeff(i);
  }
  if (a.multiplicity != b.multiplicity) return a.multiplicity < b.multiplicity;
  return a.numer_degree < b.numer_degree;
}

AtomDecomp atom_decompose(const std::vector<RatFunc>& fs) {
  struct AtomCmp {
    bool operator()(const Atom& a, const Atom& b) const { return atom_less(a, b); }
  };
  std::map<Atom, size_t, AtomCmp> index;
  std::vector<std::map<size_t, Rational>> rows(fs.size());
  for (size_t i = 0; i < fs.size(); ++i) {
    const PartialFraction pf = squarefree_partfrac(fs[i]);
    for (int j = 0; j <= pf.polynomial_part.degree(); ++j) {
      const Rational c = pf.polynomial_part.coeff(j);
      if (c.is_zero()) continue;
      const Atom at{Poly(), 0, j};
      auto [it, _] = index.try_emplace(at, index.size());
      rows[i][it->second] = c;
    }
    for (const auto& t : pf.terms) {
      for (int e = 0; e <= t.numerator.degree(); ++e) {
        const Rational c = t.numerator.coeff(e);
        if (c.is_zero()) continue;
        const Atom at{t.factor, t.multiplicity, e};
        auto [it, _] = index.try_emplace(at, index.size());
        rows[i][it->second] = c;
      }
    }
  }
  AtomDecomp out;
  std::vector<size_t> newpos(index.size());
  size_t k = 0;
  for (const auto& [atom, old] : index) {
    newpos[old] = k++;
    out.atoms.push_back(atom);
  }
  out.coords.assign(fs.size(), std::vector<Rational>(out.atoms.size(), Rational(0)));
  for (size_t i = 0; i < fs.size(); ++i)
    for (const auto& [old, c] : rows[i]) out.coords[i][newpos[old]] = c;
  return out;
}

CoeffBasis coeff_basis(const std::vector<RatFunc>& fs) {
  const AtomDecomp d = atom_decompose(fs);
  CoeffBasis out;
  out.atoms = d.atoms;
  out.coords = d.coords;
  out.basis.reserve(d.atoms.size());
  for (const auto& a : d.atoms) out.basis.push_back(a.value());
  return out;
}

}  // namespace redform
