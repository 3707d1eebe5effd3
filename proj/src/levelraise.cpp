#include "hlr/levelraise.hpp"

#include <algorithm>
#include <numeric>

#include "hlr/arith.hpp"
#include "hlr/error.hpp"

namespace hlr {

std::string to_string(const Depth& d) {
  if (d.infinite) return "inf";
  return (d.capped ? ">=" : "") + std::to_string(d.value);
}

namespace {

Integer big(std::int64_t x) { return Integer(static_cast<long>(x)); }

Integer big_pow(std::int64_t b, int e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(b), static_cast<unsigned long>(e));
  return r;
}

Depth exact_depth(const Integer& x, std::int64_t p) {
  if (x == 0) return {0, true, false};
  return {valp(x, p), false, false};
}

// Largest e <= cap with p^e representable by PrimePower.
int usable_exponent(std::int64_t p, int cap) {
  int e = 0;
  __int128 m = 1;
  while (e < cap && m * p < (static_cast<__int128>(1) << 62)) {
    m *= p;
    ++e;
  }
  return e;
}

Depth residue_depth(const Integer& x, const PrimePower& m) {
  ZmodPr y(m, x);
  if (y.value() == 0) return {m.r, false, true};
  return {y.valuation(), false, false};
}

std::set<std::int64_t> bad_primes(std::int64_t n) {
  auto ps = prime_divisors(n);
  return {ps.begin(), ps.end()};
}

std::int64_t residue(const Integer& x, std::int64_t mod) {
  return static_cast<std::int64_t>(mpz_fdiv_ui(x.get_mpz_t(), static_cast<unsigned long>(mod)));
}

}  // namespace

std::vector<std::string> lrc_warnings(const LRCInput& in) {
  const std::int64_t n = in.f.level;
  const int k = in.f.weight;
  if (!is_prime(in.l)) throw Error(ErrorKind::InvalidInput, "l must be prime");
  if (in.p < 3 || !is_prime(in.p)) throw Error(ErrorKind::InvalidInput, "p must be an odd prime");
  if (in.l == in.p || n % in.l == 0) throw Error(ErrorKind::InvalidInput, "l must not divide pN");
  if (n % in.p == 0) throw Error(ErrorKind::InvalidInput, "p must not divide N");
  if (floor_mod(in.chi_l, in.p) == 0) throw Error(ErrorKind::InvalidInput, "chi(l) must be a unit mod p");
  if (in.r < 1) throw Error(ErrorKind::InvalidInput, "r must be positive");
  std::vector<std::string> out;
  if (euler_phi(n) % in.p == 0) out.push_back("p divides phi(N): outside proven hypotheses");
  if (in.p <= k - 2) out.push_back("p divides (k-2)!: outside proven hypotheses");
  if (k == in.p || k == in.p + 1) out.push_back("k in {p, p+1}: Gorenstein regime, outside proven hypotheses");
  return out;
}

ZmodPr r_l_scalar(std::int64_t l, int weight, const ZmodPr& chi_l, const PrimePower& m) {
  if (l % m.p == 0) throw Error(ErrorKind::NotUnit, "l must differ from p");
  if (!chi_l.is_unit()) throw Error(ErrorKind::NotUnit, "chi(l) must be a unit");
  if (weight % 2 == 0 && chi_l.value() == 1) return ZmodPr(m, big_pow(l, (weight - 2) / 2));
  ZmodPr target = ZmodPr(m, big_pow(l, weight - 2)) * chi_l;
  try {
    return hensel_sqrt(target).first;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NonResidue)
      throw Error(ErrorKind::InsufficientField, "l^(k-2) chi(l) has no square root in Z/p^r");
    throw;
  }
}

LRCReport lrc_depths(const LRCInput& in, int cap) {
  LRCReport out;
  out.warnings = lrc_warnings(in);
  const int k = in.f.weight;
  const Integer al = in.f.a(in.l);
  const Integer l1 = big(in.l + 1);
  out.s_sq = exact_depth(al * al - l1 * l1 * big_pow(in.l, k - 2) * big(in.chi_l), in.p);
  out.v = valp(l1, in.p);
  if (k % 2 == 0 && in.chi_l == 1) {
    out.r_l = big_pow(in.l, (k - 2) / 2);
    out.s_plus = exact_depth(al - l1 * out.r_l, in.p);
    out.s_minus = exact_depth(al + l1 * out.r_l, in.p);
    return out;
  }
  const auto m = PrimePower::make(in.p, usable_exponent(in.p, cap));
  ZmodPr r = r_l_scalar(in.l, k, ZmodPr(m, in.chi_l), m);
  out.r_l = big(r.value());
  out.r_l_exact = false;
  out.s_plus = residue_depth(al - l1 * out.r_l, m);
  out.s_minus = residue_depth(al + l1 * out.r_l, m);
  return out;
}

int certify_congruence(const Eigensystem& f, const Eigensystem& g, std::int64_t p,
                       const std::optional<std::set<std::int64_t>>& exclude, std::int64_t b, int cap) {
  if (f.weight != g.weight) throw Error(ErrorKind::InvalidInput, "weights differ");
  const std::int64_t level = std::lcm(f.level, g.level);
  const std::int64_t need = sturm_bound(level, f.weight);
  if (b < need)
    throw Error(ErrorKind::BoundTooSmall, "bound " + std::to_string(b) + " below the Sturm bound " + std::to_string(need));
  std::set<std::int64_t> ex = exclude ? *exclude : bad_primes(p * level);
  int d = cap;
  for (auto q : primes_up_to(b)) {
    if (ex.count(q)) continue;
    Integer diff = f.a(q) - g.a(q);
    if (diff != 0) d = std::min(d, valp(diff, p));
    if (d == 0) break;
  }
  return d;
}

bool trace_relation_check(const Eigensystem& f, const Eigensystem& g, std::int64_t l, std::int64_t p, int d) {
  if (d <= 0) return true;
  Integer diff = f.a(l) - big(l + 1) * g.a(l);
  return diff == 0 || valp(diff, p) >= d;
}

// ------------------------------------------------------------ lattices

namespace {

struct Lattice {
  std::vector<std::vector<Integer>> rows;
  std::vector<std::size_t> cols;  // the basis restricted to these columns is invertible mod p
};

ZmodPrMatrix reduce_rows(const std::vector<std::vector<Integer>>& rows, std::size_t n, const PrimePower& m) {
  ZmodPrMatrix a(m, rows.size(), n);
  const std::int64_t mod = m.modulus();
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < n; ++j) a.set(i, j, residue(rows[i][j], mod));
  return a;
}

// Z_(p)-basis of w intersected with Z_(p)^n.
Lattice saturate(const Subspace& w, std::int64_t p) {
  Lattice lat;
  const std::size_t n = w.ambient_dim();
  for (std::size_t i = 0; i < w.dim(); ++i) lat.rows.push_back(primitive_integer_vector(w.basis().row(i)));
  const auto mp = PrimePower::make(p, 1);
  const Integer bp = big(p);
  for (;;) {
    auto ker = kernel_modpr(reduce_rows(lat.rows, n, mp).transpose());
    if (ker.empty()) break;
    const auto& c = ker.front();
    std::vector<Integer> comb(n, 0);
    std::size_t first = lat.rows.size();
    for (std::size_t i = 0; i < lat.rows.size(); ++i) {
      if (c[i] == 0) continue;
      if (first == lat.rows.size()) first = i;
      for (std::size_t j = 0; j < n; ++j) comb[j] += big(c[i]) * lat.rows[i][j];
    }
    for (auto& x : comb) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), bp.get_mpz_t());
    lat.rows[first] = std::move(comb);
  }
  auto h = howell_form(reduce_rows(lat.rows, n, mp));
  for (std::size_t i = 0; i < h.rows(); ++i) {
    std::size_t j = 0;
    while (h.at(i, j) == 0) ++j;
    lat.cols.push_back(j);
  }
  return lat;
}

}  // namespace

LatticeEigenvector lattice_eigenvector(const ModSymSpace& s, const Subspace& w, std::int64_t p,
                                       const std::map<std::int64_t, Integer>& lambda, int cap) {
  LatticeEigenvector out;
  if (w.dim() == 0) return out;
  const Lattice lat = saturate(w, p);
  const std::size_t r = lat.rows.size();
  out.lattice_rank = r;
  const int e = usable_exponent(p, cap);
  const auto m = PrimePower::make(p, e);
  const std::int64_t mod = m.modulus();

  ZmodPrMatrix bj(m, r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) bj.set(i, j, residue(lat.rows[i][lat.cols[j]], mod));
  const ZmodPrMatrix bj_inv = inverse_modpr(bj);

  std::vector<std::vector<std::int64_t>> rows_mod;
  for (const auto& row : lat.rows) {
    std::vector<std::int64_t> x;
    for (const auto& v : row) x.push_back(residue(v, mod));
    rows_mod.push_back(std::move(x));
  }
  const ZmodPrMatrix bj_inv_t = bj_inv.transpose();

  // Row i of each operator holds the lattice coordinates of T b_i.
  std::vector<ZmodPrMatrix> ops;
  std::vector<std::int64_t> eig;
  for (const auto& [q, a] : lambda) {
    const QMatrix& t = s.hecke_matrix(q);
    std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> trows(r);
    for (std::size_t j = 0; j < r; ++j) {
      auto trow = t.row(lat.cols[j]);
      for (std::size_t k = 0; k < trow.size(); ++k)
        if (sgn(trow[k]) != 0) trows[j].emplace_back(k, reduce(trow[k], m).value());
    }
    ZmodPrMatrix op(m, r, r);
    for (std::size_t i = 0; i < r; ++i) {
      std::vector<std::int64_t> y(r);
      for (std::size_t j = 0; j < r; ++j) {
        __int128 acc = 0;
        for (const auto& [k, x] : trows[j]) acc += static_cast<__int128>(x) * rows_mod[i][k];
        y[j] = static_cast<std::int64_t>(acc % mod);
      }
      auto coords = bj_inv_t.apply(y);
      for (std::size_t j = 0; j < r; ++j) op.set(i, j, coords[j]);
    }
    ops.push_back(std::move(op));
    eig.push_back(residue(a, mod));
  }

  for (int depth = 1; depth <= e; ++depth) {
    const auto ms = PrimePower::make(p, depth);
    std::vector<std::int64_t> found;
    if (ops.empty()) {
      found.assign(r, 0);
      found[0] = 1;
    } else {
      ZmodPrMatrix a(ms, ops.size() * r, r);
      for (std::size_t o = 0; o < ops.size(); ++o)
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < r; ++j) a.set(o * r + i, j, ops[o].at(j, i) - (i == j ? eig[o] : 0));
      for (auto& g : kernel_modpr(a))
        if (std::any_of(g.begin(), g.end(), [&](std::int64_t x) { return x % p != 0; })) {
          found = std::move(g);
          break;
        }
    }
    if (found.empty()) break;
    out.depth = depth;
    out.coordinates = std::move(found);
  }
  return out;
}

// ------------------------------------------------------------ Diamond families

DiamondFamily diamond_family(Workspace& ws, const Eigensystem& f, std::int64_t l, std::int64_t p, std::int64_t b,
                             int cap) {
  DiamondFamily out;
  out.f = f;
  out.l = l;
  out.p = p;
  out.lrc = lrc_depths(LRCInput{f, l, p, 1, 1}, cap);
  const int k = f.weight;
  const std::int64_t n = f.level;
  if (b == 0) b = sturm_bound(l * n, k);
  out.bound = b;
  const auto exclude = bad_primes(l * p * n);
  std::map<std::int64_t, Integer> lambda;
  for (auto q : primes_up_to(b))
    if (!exclude.count(q)) lambda[q] = f.a(q);

  for (auto d : divisors(n)) {
    const std::int64_t level = l * d;
    const auto& dec = ws.newforms(level, k, b);
    for (const auto& g : dec.forms) {
      int depth = certify_congruence(f, g, p, exclude, b, cap);
      if (depth >= 1) out.members.push_back({g, depth});
    }
    if (dec.undecomposed_dim == 0) continue;
    out.undecomposed_dim += dec.undecomposed_dim * divisors(n / d).size();
    auto lat = lattice_eigenvector(ws.space(level, k), dec.undecomposed_space, p, lambda, cap);
    out.components.push_back({level, dec.undecomposed_dim, lat.depth});
  }
  for (const auto& m : out.members) out.sum_d += m.d;

  const Depth& sp = out.lrc.s_plus;
  const Depth& sm = out.lrc.s_minus;
  const int target = std::max(sp.infinite ? cap : sp.value, sm.infinite ? cap : sm.value);
  if (target >= 1) {
    for (const auto& m : out.members)
      if (m.d == target) {
        out.full = true;
        out.full_source = "rational member";
      }
    for (const auto& c : out.components)
      if (!out.full && c.depth >= target) {
        out.full = true;
        out.full_source = "irrational component";
      }
    if (out.full) out.full_depth = target;
  }
  return out;
}

// ------------------------------------------------------------ eigenforms mod p^r

EigenCheck verify_eigenform_modpr(const ModPrEigenform& h) {
  const auto& m = h.modulus;
  const std::int64_t mod = m.modulus();
  const auto b = static_cast<std::int64_t>(h.coefficients.size());
  auto a = [&](std::int64_t n) { return floor_mod(h.a(n), mod); };
  auto mul = [&](std::int64_t x, std::int64_t y) {
    return static_cast<std::int64_t>(static_cast<__int128>(x) * y % mod);
  };
  if (b >= 1 && a(1) != 1 % mod) return {false, "a1", 1, 1};
  for (std::int64_t n = 2; n <= b; ++n) {
    auto [q, e] = factor(n).front();
    const std::int64_t qe = ipow(q, e);
    if (qe != n) {
      if (a(n) != mul(a(qe), a(n / qe))) return {false, "multiplicative", qe, n / qe};
      continue;
    }
    if (e == 1) continue;
    std::int64_t expect = mul(a(q), a(n / q));
    if (h.level % q != 0) {
      std::int64_t qk = residue(big_pow(q, h.weight - 1), mod);
      expect = floor_mod(expect - mul(qk, a(n / q / q)), mod);
    }
    if (a(n) != expect) return {false, "prime-power", q, e};
  }
  return {};
}

namespace {

std::vector<std::vector<std::int64_t>> reduced_expansions(const std::vector<Eigensystem>& forms, std::int64_t mod,
                                                          std::int64_t b) {
  std::vector<std::vector<std::int64_t>> out;
  for (const auto& f : forms) {
    std::vector<std::int64_t> row;
    for (const auto& x : eigen_qexpansion(f, b)) row.push_back(residue(x, mod));
    out.push_back(std::move(row));
  }
  return out;
}

ModPrEigenform combine_reduced(const std::vector<Eigensystem>& forms, const std::vector<std::vector<std::int64_t>>& ex,
                               const std::vector<std::int64_t>& c, const PrimePower& m, std::int64_t b) {
  const std::int64_t mod = m.modulus();
  ModPrEigenform h;
  h.modulus = m;
  h.level = 1;
  h.weight = forms.front().weight;
  for (const auto& f : forms) {
    h.level = std::lcm(h.level, f.level);
    h.span.push_back(f.label);
  }
  for (auto x : c) h.combination.push_back(floor_mod(x, mod));
  h.coefficients.assign(static_cast<std::size_t>(b), 0);
  for (std::size_t j = 0; j < forms.size(); ++j)
    for (std::size_t n = 0; n < h.coefficients.size(); ++n)
      h.coefficients[n] =
          static_cast<std::int64_t>((h.coefficients[n] + static_cast<__int128>(h.combination[j]) * ex[j][n]) % mod);
  return h;
}

}  // namespace

ModPrEigenform combine_forms(const std::vector<Eigensystem>& forms, const std::vector<std::int64_t>& c,
                             const PrimePower& m, std::int64_t b) {
  if (forms.empty()) throw Error(ErrorKind::EmptySpan, "no forms to combine");
  if (c.size() != forms.size()) throw Error(ErrorKind::DimensionMismatch, "one coefficient per form");
  return combine_reduced(forms, reduced_expansions(forms, m.modulus(), b), c, m, b);
}

std::vector<ModPrEigenform> eigenforms_modpr_in_span(const std::vector<Eigensystem>& forms, const PrimePower& m,
                                                     const std::map<std::int64_t, std::int64_t>& constraints,
                                                     std::int64_t b, std::size_t limit) {
  if (forms.empty()) throw Error(ErrorKind::EmptySpan, "empty span");
  std::int64_t level = 1;
  for (const auto& f : forms) {
    if (f.weight != forms.front().weight) throw Error(ErrorKind::InvalidInput, "weights differ");
    level = std::lcm(level, f.level);
  }
  for (const auto& [q, lam] : constraints)
    if (!is_prime(q) || q > b) throw Error(ErrorKind::InvalidInput, "constraint at " + std::to_string(q) + " outside the bound");
  const std::int64_t mod = m.modulus();
  const std::size_t nf = forms.size();
  const auto ex = reduced_expansions(forms, mod, b);
  auto mul = [&](std::int64_t x, std::int64_t y) {
    return static_cast<std::int64_t>(static_cast<__int128>(x) * y % mod);
  };

  // a_1 = 1, and (T_q - lambda_q) h = 0 coefficientwise wherever every form is a T_q eigenform.
  std::vector<std::vector<std::int64_t>> rows{std::vector<std::int64_t>(nf, 1)};
  std::vector<std::int64_t> rhs{1 % mod};
  std::vector<std::pair<std::int64_t, std::int64_t>> deferred;
  for (const auto& [q, lam] : constraints) {
    bool linear = std::all_of(forms.begin(), forms.end(), [&](const Eigensystem& f) {
      return level % q != 0 || f.level % q == 0;
    });
    if (!linear) {
      deferred.emplace_back(q, floor_mod(lam, mod));
      continue;
    }
    for (std::int64_t n = 0; n < b; ++n) {
      std::vector<std::int64_t> row(nf);
      bool nonzero = false;
      for (std::size_t j = 0; j < nf; ++j) {
        std::int64_t aq = ex[j][static_cast<std::size_t>(q - 1)];
        row[j] = mul(floor_mod(aq - lam, mod), ex[j][static_cast<std::size_t>(n)]);
        nonzero = nonzero || row[j] != 0;
      }
      if (!nonzero) continue;
      rows.push_back(std::move(row));
      rhs.push_back(0);
    }
  }

  SolveResult sol;
  try {
    sol = solve(ZmodPrMatrix::from_rows(m, rows, nf), rhs);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoSolution) throw;
    if (!constraints.empty()) throw Error(ErrorKind::UnstableConstraint, "constraints admit no normalized combination");
    return {};
  }

  // Howell rows give each kernel element a unique coefficient vector with digit i in [0, p^(r - v_i)).
  std::vector<std::vector<std::int64_t>> gens;
  std::vector<std::int64_t> radix;
  if (!sol.kernel.empty()) {
    auto h = howell_form(ZmodPrMatrix::from_rows(m, sol.kernel, nf));
    for (std::size_t i = 0; i < h.rows(); ++i) {
      auto row = h.row(i);
      auto piv = *std::find_if(row.begin(), row.end(), [](std::int64_t x) { return x != 0; });
      radix.push_back(mod / ipow(m.p, ZmodPr(m, piv).valuation()));
      gens.push_back(std::move(row));
    }
  }
  double total = 1;
  for (auto x : radix) total *= static_cast<double>(x);
  if (total > static_cast<double>(limit))
    throw Error(ErrorKind::InvalidInput, "solution module too large to enumerate; add constraints");

  std::vector<ModPrEigenform> out;
  std::vector<std::int64_t> digits(radix.size(), 0);
  for (;;) {
    std::vector<std::int64_t> c = sol.particular;
    for (std::size_t i = 0; i < gens.size(); ++i)
      for (std::size_t j = 0; j < nf; ++j) c[j] = (c[j] + mul(digits[i], gens[i][j])) % mod;
    auto h = combine_reduced(forms, ex, c, m, b);
    bool ok = verify_eigenform_modpr(h).ok;
    for (const auto& [q, lam] : deferred) ok = ok && h.a(q) == lam;
    if (ok) out.push_back(std::move(h));
    std::size_t i = 0;
    while (i < digits.size() && ++digits[i] == radix[i]) digits[i++] = 0;
    if (i == digits.size()) break;
  }
  if (out.empty() && !constraints.empty())
    throw Error(ErrorKind::UnstableConstraint, "no eigenform in the span satisfies the constraints");
  std::sort(out.begin(), out.end(),
            [](const ModPrEigenform& x, const ModPrEigenform& y) { return x.combination < y.combination; });
  return out;
}

// ------------------------------------------------------------ level raising report

RaiseReport classify_level_raising(Workspace& ws, const LRCInput& in, std::int64_t b, int cap) {
  RaiseReport out;
  out.lrc = lrc_depths(in, cap);
  out.family = diamond_family(ws, in.f, in.l, in.p, b, cap);
  b = out.family.bound;
  const int k = in.f.weight;
  const std::int64_t ln = in.l * in.f.level;
  const auto exclude = bad_primes(in.l * in.p * in.f.level);

  std::vector<Eigensystem> rational;
  for (const auto& mem : out.family.members) rational.push_back(mem.g);

  for (int eps : {1, -1}) {
    const Depth& s = eps > 0 ? out.lrc.s_plus : out.lrc.s_minus;
    if (!s.infinite && s.value < 1) continue;
    RaiseBranch br;
    br.eps = eps;
    br.s = s;
    const int depth = std::min(s.infinite ? cap : s.value, usable_exponent(in.p, cap));
    const auto m = PrimePower::make(in.p, depth);
    const std::int64_t mod = m.modulus();
    const std::int64_t target = residue(big(eps) * out.lrc.r_l, mod);
    const Integer l_pow = big_pow(in.l, k - 2) * big(in.chi_l);
    br.witness = "none";
    br.witness_depth = depth;
    br.a_l = target;

    for (const auto& mem : out.family.members)
      if (mem.d >= depth && residue(mem.g.a(in.l), mod) == target) {
        br.witness = "member";
        br.member_label = mem.g.label;
        break;
      }

    if (br.witness == "none" && !rational.empty()) {
      std::map<std::int64_t, std::int64_t> constraints{{in.l, target}};
      for (auto q : primes_up_to(b))
        if (!exclude.count(q)) constraints[q] = residue(in.f.a(q), mod);
      try {
        auto found = eigenforms_modpr_in_span(rational, m, constraints, b);
        br.witness = "span";
        br.combination = found.front().combination;
        br.span = found.front().span;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::UnstableConstraint && e.kind() != ErrorKind::InvalidInput) throw;
      }
    }

    if (br.witness == "none") {
      const auto& big_space = ws.space(ln, k);
      std::map<std::int64_t, Integer> lambda{{in.l, big(target)}};
      for (auto q : primes_up_to(b))
        if (!exclude.count(q)) lambda[q] = in.f.a(q);
      auto lat = lattice_eigenvector(big_space, l_new_subspace(big_space, in.l), in.p, lambda, depth);
      if (lat.depth >= depth) br.witness = "module";
    }

    br.hida = residue(big(br.a_l) * big(br.a_l) - l_pow, mod) == 0;
    out.branches.push_back(std::move(br));
  }
  return out;
}

}  // namespace hlr
