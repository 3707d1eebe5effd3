#include "hlr/modsym.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "hlr/arith.hpp"
#include "hlr/error.hpp"

namespace hlr {

// ---------------------------------------------------------------- P^1(Z/N)

P1Point p1_normalize(std::int64_t c, std::int64_t d, std::int64_t n) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "level must be positive");
  if (std::gcd(std::gcd(c, d), n) != 1) throw Error(ErrorKind::NotCoprime, "gcd(c, d, N) > 1");
  c = floor_mod(c, n);
  d = floor_mod(d, n);
  P1Point best{c, d};
  for (std::int64_t u = 1; u < n; ++u) {
    if (std::gcd(u, n) != 1) continue;
    P1Point cand{u * c % n, u * d % n};
    if (cand.c < best.c || (cand.c == best.c && cand.d < best.d)) best = cand;
  }
  return best;
}

P1List::P1List(std::int64_t n) : n_(n), table_(static_cast<std::size_t>(n * n), -1) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "level must be positive");
  std::vector<std::int64_t> units;
  for (std::int64_t u = 0; u < n; ++u)
    if (std::gcd(u, n) == 1) units.push_back(u);
  for (std::int64_t c = 0; c < n; ++c) {
    for (std::int64_t d = 0; d < n; ++d) {
      if (table_[static_cast<std::size_t>(c * n + d)] >= 0) continue;
      if (std::gcd(std::gcd(c, d), n) != 1) continue;
      int idx = static_cast<int>(points_.size());
      points_.push_back({c, d});
      for (auto u : units) table_[static_cast<std::size_t>((u * c % n) * n + (u * d % n))] = idx;
    }
  }
}

int P1List::index(std::int64_t c, std::int64_t d) const {
  c = floor_mod(c, n_);
  d = floor_mod(d, n_);
  return table_[static_cast<std::size_t>(c * n_ + d)];
}

Mat2 lift_to_sl2z(std::int64_t c, std::int64_t d, std::int64_t n) {
  if (n == 1) return {1, 0, 0, 1};
  c = floor_mod(c, n);
  d = floor_mod(d, n);
  if (c == 0) {
    if (d == 1) return {1, 0, 0, 1};
    if (d == n - 1) return {-1, 0, 0, -1};
    c = n;
  }
  auto x = xgcd(c, d);
  if (x.g == 1) return {x.t, -x.s, c, d};
  // Shift d by a multiple of N to make it coprime to c.
  std::int64_t m = c;
  for (std::int64_t g = std::gcd(m, d); g != 1; g = std::gcd(m, d)) m /= g;
  for (std::int64_t g = std::gcd(m, n); g != 1; g = std::gcd(m, n)) m /= g;
  d += n * m;
  x = xgcd(c, d);
  if (x.g != 1) throw Error(ErrorKind::NotCoprime, "cannot lift to SL_2(Z)");
  return {x.t, -x.s, c, d};
}

// --------------------------------------------------------- Heilbronn lists

std::vector<Mat2> heilbronn_cremona(std::int64_t p) {
  if (p == 2) return heilbronn_merel(2);
  std::vector<Mat2> out;
  out.push_back({1, 0, 0, p});
  for (std::int64_t r = -(p - 1) / 2; r <= (p - 1) / 2; ++r) {
    std::int64_t x1 = p, x2 = -r, y1 = 0, y2 = 1, a = -p, b = r;
    out.push_back({x1, x2, y1, y2});
    while (b != 0) {
      auto q = static_cast<std::int64_t>(std::lround(static_cast<double>(a) / static_cast<double>(b)));
      std::int64_t c = a - b * q;
      a = -b;
      b = c;
      std::int64_t x3 = q * x2 - x1;
      x1 = x2;
      x2 = x3;
      std::int64_t y3 = q * y2 - y1;
      y1 = y2;
      y2 = y3;
      out.push_back({x1, x2, y1, y2});
    }
  }
  return out;
}

std::vector<Mat2> heilbronn_merel(std::int64_t n) {
  std::vector<Mat2> out;
  for (std::int64_t a = 1; a <= n; ++a) {
    std::int64_t q = n / a;
    if (q * a == n) {
      std::int64_t d = q;
      for (std::int64_t b = 0; b < a; ++b) out.push_back({a, b, 0, d});
      for (std::int64_t c = 1; c < d; ++c) out.push_back({a, 0, c, d});
    }
    for (std::int64_t d = q + 1; d <= n; ++d) {
      std::int64_t bc = a * d - n;
      for (std::int64_t c = bc / a + 1; c < d; ++c)
        if (bc % c == 0) out.push_back({a, bc / c, c, d});
    }
  }
  return out;
}

// ------------------------------------------------------------------- cusps

namespace {

std::pair<std::int64_t, std::int64_t> normalize_cusp(std::int64_t a, std::int64_t c) {
  if (c < 0 || (c == 0 && a < 0)) {
    a = -a;
    c = -c;
  }
  if (c == 0) return {1, 0};
  std::int64_t g = std::gcd(a, c);
  return {a / g, c / g};
}

std::int64_t cusp_s(std::int64_t a, std::int64_t c) {
  if (c == 0) return a;
  if (c == 1) return 0;
  return floor_mod(xgcd(a, c).s, c);
}

}  // namespace

bool CuspClasses::equivalent(std::int64_t a1, std::int64_t c1, std::int64_t a2, std::int64_t c2, std::int64_t n) {
  std::tie(a1, c1) = normalize_cusp(a1, c1);
  std::tie(a2, c2) = normalize_cusp(a2, c2);
  std::int64_t s1 = cusp_s(a1, c1);
  std::int64_t s2 = cusp_s(a2, c2);
  auto prod = static_cast<__int128>(c1) * c2;
  std::int64_t g = std::gcd(static_cast<std::int64_t>(prod % n), n);
  if (prod == 0) g = n;
  auto diff = static_cast<__int128>(s1) * c2 - static_cast<__int128>(s2) * c1;
  return diff % g == 0;
}

CuspClasses::CuspClasses(std::int64_t n) : n_(n) {
  for (std::int64_t c : divisors(n)) {
    for (std::int64_t a = 0; a < n; ++a) {
      if (std::gcd(a, c) != 1) continue;
      bool known = std::any_of(reps_.begin(), reps_.end(),
                               [&](const auto& r) { return equivalent(a, c, r.first, r.second, n_); });
      if (!known) reps_.push_back(normalize_cusp(a, c));
    }
  }
}

std::size_t CuspClasses::classify(std::int64_t a, std::int64_t c) const {
  for (std::size_t i = 0; i < reps_.size(); ++i)
    if (equivalent(a, c, reps_[i].first, reps_[i].second, n_)) return i;
  throw Error(ErrorKind::StructuralError, "cusp not in any class");
}

// ------------------------------------------------------------- polynomials

namespace {

Integer binomial(int n, int k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

// (aX + bY)^e as coefficients of X^j Y^(e-j).
Poly linear_power(const Integer& a, const Integer& b, int e) {
  Poly out(static_cast<std::size_t>(e + 1));
  for (int j = 0; j <= e; ++j) {
    Integer ap, bp;
    mpz_pow_ui(ap.get_mpz_t(), a.get_mpz_t(), static_cast<unsigned long>(j));
    mpz_pow_ui(bp.get_mpz_t(), b.get_mpz_t(), static_cast<unsigned long>(e - j));
    out[static_cast<std::size_t>(j)] = binomial(e, j) * ap * bp;
  }
  return out;
}

Poly poly_mul(const Poly& x, const Poly& y) {
  Poly out(x.size() + y.size() - 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0) continue;
    for (std::size_t j = 0; j < y.size(); ++j) out[i + j] += x[i] * y[j];
  }
  return out;
}

// P(aX + bY, cX + dY) for an integer matrix (a b; c d).
Poly substitute(const Poly& p, const Integer& a, const Integer& b, const Integer& c, const Integer& d) {
  const int m = static_cast<int>(p.size()) - 1;
  Poly out(p.size());
  for (int i = 0; i <= m; ++i) {
    if (p[static_cast<std::size_t>(i)] == 0) continue;
    Poly term = poly_mul(linear_power(a, b, i), linear_power(c, d, m - i));
    for (int j = 0; j <= m; ++j) out[static_cast<std::size_t>(j)] += p[static_cast<std::size_t>(i)] * term[static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace

Poly act_on_monomial(const Mat2& h, int i, int m) {
  return poly_mul(linear_power(Integer(static_cast<long>(h.a)), Integer(static_cast<long>(h.b)), i),
                  linear_power(Integer(static_cast<long>(h.c)), Integer(static_cast<long>(h.d)), m - i));
}

Poly left_act(const Mat2& g, const Poly& p) {
  return substitute(p, Integer(static_cast<long>(g.d)), Integer(static_cast<long>(-g.b)),
                    Integer(static_cast<long>(-g.c)), Integer(static_cast<long>(g.a)));
}

// ------------------------------------------------------------ presentation

struct ModSymSpace::Cache {
  std::mutex mutex;
  std::unique_ptr<Subspace> cuspidal;
  std::map<std::int64_t, QMatrix> hecke;
  std::map<std::int64_t, QMatrix> hecke_cusp;
};

ModSymSpace::ModSymSpace(std::int64_t level, int weight, Sign sign)
    : level_(level), weight_(weight), sign_(sign), p1_(level), cache_(std::make_unique<Cache>()) {}

ModSymSpace::ModSymSpace(ModSymSpace&&) noexcept = default;
ModSymSpace& ModSymSpace::operator=(ModSymSpace&&) noexcept = default;
ModSymSpace::~ModSymSpace() = default;

ModSymSpace ModSymSpace::build(std::int64_t level, int weight, Sign sign) {
  if (weight < 2 || weight % 2 != 0)
    throw Error(ErrorKind::UnsupportedWeight, "weight must be even and at least 2 for trivial character");
  if (level < 5) throw Error(ErrorKind::LevelTooSmall, "level must be at least 5");
  return build_unchecked(level, weight, sign);
}

ModSymSpace ModSymSpace::build_unchecked(std::int64_t level, int weight, Sign sign) {
  if (weight < 2 || weight % 2 != 0)
    throw Error(ErrorKind::UnsupportedWeight, "weight must be even and at least 2 for trivial character");
  if (level < 1) throw Error(ErrorKind::InvalidInput, "level must be positive");
  ModSymSpace s(level, weight, sign);
  s.present();
  return s;
}

namespace {

// Union-find over generators tracking x = sign * parent(x).
class SignedUnionFind {
 public:
  explicit SignedUnionFind(std::size_t n) : parent_(n), sign_(n, 1), zero_(n, false) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::pair<std::size_t, int> find(std::size_t x) {
    int s = 1;
    std::size_t r = x;
    while (parent_[r] != r) {
      s *= sign_[r];
      r = parent_[r];
    }
    // path compression
    int acc = s;
    std::size_t cur = x;
    while (parent_[cur] != cur) {
      std::size_t next = parent_[cur];
      int next_sign = acc * sign_[cur];
      parent_[cur] = r;
      sign_[cur] = acc;
      acc = next_sign;
      cur = next;
    }
    return {r, s};
  }

  // Records x = s * y.
  void relate(std::size_t x, std::size_t y, int s) {
    auto [rx, sx] = find(x);
    auto [ry, sy] = find(y);
    int rel = sx * s * sy;  // rx = rel * ry
    if (rx == ry) {
      if (rel == -1) zero_[rx] = true;
      return;
    }
    // keep the smaller index as root so classes are ordered by first generator
    if (rx < ry) {
      parent_[ry] = rx;
      sign_[ry] = rel;
      zero_[rx] = zero_[rx] || zero_[ry];
    } else {
      parent_[rx] = ry;
      sign_[rx] = rel;
      zero_[ry] = zero_[ry] || zero_[rx];
    }
  }

  bool is_zero_root(std::size_t r) const { return zero_[r]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> sign_;
  std::vector<bool> zero_;
};

using SparseRow = std::vector<std::pair<std::uint32_t, Rational>>;

// a -= f * b, both sorted by column.
void sub_scaled(SparseRow& a, const Rational& f, const SparseRow& b) {
  SparseRow out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  Rational tmp;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(std::move(a[i++]));
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.emplace_back(b[j].first, -f * b[j].second);
      ++j;
    } else {
      tmp = f * b[j].second;
      a[i].second -= tmp;
      if (sgn(a[i].second) != 0) out.push_back(std::move(a[i]));
      ++i;
      ++j;
    }
  }
  a = std::move(out);
}

}  // namespace

void ModSymSpace::present() {
  const int m = weight_ - 2;
  const std::size_t nmono = static_cast<std::size_t>(m + 1);
  const std::size_t ngen = generator_count();
  auto gen = [&](int point, int i) { return static_cast<std::size_t>(point) * nmono + static_cast<std::size_t>(i); };

  SignedUnionFind uf(ngen);
  for (std::size_t pt = 0; pt < p1_.size(); ++pt) {
    const auto& [u, v] = p1_[pt];
    int spt = p1_.index(v, -u);
    for (int i = 0; i <= m; ++i) {
      // x + (-1)^i [X^(m-i) Y^i, (v:-u)] = 0
      int s = (i % 2 == 0) ? -1 : 1;
      uf.relate(gen(static_cast<int>(pt), i), gen(spt, m - i), s);
      if (sign_ == Sign::Plus) {
        int ept = p1_.index(-u, v);
        int es = ((m - i) % 2 == 0) ? 1 : -1;
        uf.relate(gen(static_cast<int>(pt), i), gen(ept, i), es);
      }
    }
  }

  // Classes: non-zero roots, numbered by generator order.
  std::vector<int> root_class(ngen, -1);
  std::vector<std::size_t> class_root;
  gen_class_.assign(ngen, {});
  for (std::size_t g = 0; g < ngen; ++g) {
    auto [r, s] = uf.find(g);
    if (uf.is_zero_root(r)) continue;
    if (root_class[r] < 0) {
      root_class[r] = static_cast<int>(class_root.size());
      class_root.push_back(r);
    }
    gen_class_[g] = {root_class[r], s};
  }
  const std::size_t nclass = class_root.size();

  // Three-term relations, one block per orbit of T = (0 -1; 1 -1) on P^1.
  const Mat2 t1{0, -1, 1, -1};
  const Mat2 t2{-1, 1, -1, 0};
  std::vector<bool> seen(p1_.size(), false);
  std::vector<SparseRow> pivot_rows(nclass);
  std::vector<bool> has_pivot(nclass, false);
  std::vector<Integer> dense(nclass);
  std::vector<std::uint32_t> touched;

  for (std::size_t pt = 0; pt < p1_.size(); ++pt) {
    if (seen[pt]) continue;
    const auto& [u, v] = p1_[pt];
    int pt1 = p1_.index(u * t1.a + v * t1.c, u * t1.b + v * t1.d);
    int pt2 = p1_.index(u * t2.a + v * t2.c, u * t2.b + v * t2.d);
    seen[pt] = seen[static_cast<std::size_t>(pt1)] = seen[static_cast<std::size_t>(pt2)] = true;
    for (int i = 0; i <= m; ++i) {
      touched.clear();
      auto add = [&](int point, const Poly& poly) {
        for (int j = 0; j <= m; ++j) {
          const Integer& c = poly[static_cast<std::size_t>(j)];
          if (c == 0) continue;
          auto ref = gen_class_[gen(point, j)];
          if (ref.cls < 0) continue;
          auto cls = static_cast<std::uint32_t>(ref.cls);
          if (dense[cls] == 0) touched.push_back(cls);
          dense[cls] += ref.sign * c;
        }
      };
      Poly id(nmono);
      id[static_cast<std::size_t>(i)] = 1;
      add(static_cast<int>(pt), id);
      add(pt1, act_on_monomial(t1, i, m));
      add(pt2, act_on_monomial(t2, i, m));
      std::sort(touched.begin(), touched.end());
      SparseRow row;
      for (auto cls : touched) {
        if (dense[cls] != 0) row.emplace_back(cls, Rational(dense[cls]));
        dense[cls] = 0;
      }
      // forward elimination against existing pivots
      while (!row.empty()) {
        auto lead = row.front().first;
        if (!has_pivot[lead]) {
          Rational inv = 1 / row.front().second;
          for (auto& [c, x] : row) x *= inv;
          pivot_rows[lead] = std::move(row);
          has_pivot[lead] = true;
          break;
        }
        Rational f = row.front().second;
        sub_scaled(row, f, pivot_rows[lead]);
      }
    }
  }

  // Back substitution: express every pivot class through free classes.
  std::vector<std::uint32_t> basis_index(nclass, 0);
  std::size_t dim = 0;
  for (std::size_t c = 0; c < nclass; ++c) {
    if (has_pivot[c]) continue;
    basis_index[c] = static_cast<std::uint32_t>(dim++);
    const std::size_t g = class_root[c];
    basis_symbols_.push_back({p1_[g / nmono], static_cast<int>(g % nmono)});
  }
  std::vector<SparseRow> reduced(nclass);  // pivot class -> free part (columns are class ids)
  std::vector<Rational> acc(nclass);
  for (std::size_t c = nclass; c-- > 0;) {
    if (!has_pivot[c]) continue;
    touched.clear();
    Rational tmp;
    for (std::size_t e = 1; e < pivot_rows[c].size(); ++e) {
      const auto& [col, val] = pivot_rows[c][e];
      if (!has_pivot[col]) {
        if (sgn(acc[col]) == 0) touched.push_back(col);
        acc[col] += val;
        continue;
      }
      for (const auto& [fcol, fval] : reduced[col]) {
        if (sgn(acc[fcol]) == 0) touched.push_back(fcol);
        tmp = val * fval;
        acc[fcol] -= tmp;
      }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    SparseRow out;
    for (auto col : touched) {
      if (sgn(acc[col]) != 0) out.emplace_back(col, acc[col]);
      acc[col] = 0;
    }
    reduced[c] = std::move(out);
    pivot_rows[c].clear();
    pivot_rows[c].shrink_to_fit();
  }

  class_vectors_.assign(nclass, {});
  for (std::size_t c = 0; c < nclass; ++c) {
    if (!has_pivot[c]) {
      class_vectors_[c].emplace_back(basis_index[c], Rational(1));
      continue;
    }
    for (const auto& [col, val] : reduced[c]) class_vectors_[c].emplace_back(basis_index[col], -val);
  }

  class_den_ = 1;
  for (const auto& cv : class_vectors_)
    for (const auto& [b, val] : cv) class_den_ = lcm(class_den_, Integer(val.get_den()));
  const Integer limit = Integer(1) << 40;
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> small(nclass);
  for (std::size_t c = 0; c < nclass; ++c)
    for (const auto& [b, val] : class_vectors_[c]) {
      Integer x = val.get_num() * (class_den_ / val.get_den());
      if (abs(x) >= limit) return;
      small[c].emplace_back(static_cast<std::uint32_t>(b), x.get_si());
    }
  class_small_ = std::move(small);
}

ModSymSpace::ClassRef ModSymSpace::generator_class(std::size_t point_index, int i) const {
  return gen_class_[point_index * static_cast<std::size_t>(weight_ - 1) + static_cast<std::size_t>(i)];
}

void ModSymSpace::accumulate(Accumulator& acc, std::int64_t c, std::int64_t d, int i, const Integer& coef) const {
  if (coef == 0) return;
  int idx = p1_.index(c, d);
  if (idx < 0) return;
  auto ref = generator_class(static_cast<std::size_t>(idx), i);
  if (ref.cls < 0) return;
  if (acc.by_class.size() != class_count()) acc.by_class.assign(class_count(), Integer(0));
  auto cls = static_cast<std::uint32_t>(ref.cls);
  if (acc.by_class[cls] == 0) acc.touched.push_back(cls);
  if (ref.sign > 0)
    acc.by_class[cls] += coef;
  else
    acc.by_class[cls] -= coef;
}

QVector ModSymSpace::finish(const Accumulator& acc) const {
  QVector v(dimension());
  Rational tmp;
  std::vector<std::uint32_t> touched = acc.touched;
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (auto cls : touched) {
    const Integer& n = acc.by_class[cls];
    if (n == 0) continue;
    for (const auto& [b, val] : class_vectors_[cls]) {
      tmp = val * n;
      v[b] += tmp;
    }
  }
  return v;
}

QVector ModSymSpace::manin_symbol_vector(const ManinSymbol& s) const {
  Accumulator acc;
  accumulate(acc, s.point.c, s.point.d, s.monomial_degree, Integer(1));
  return finish(acc);
}

QVector ModSymSpace::modular_symbol_vector(const Poly& p, std::int64_t a, std::int64_t c) const {
  const int m = weight_ - 2;
  if (static_cast<int>(p.size()) != m + 1) throw Error(ErrorKind::DimensionMismatch, "polynomial degree");
  std::tie(a, c) = normalize_cusp(a, c);
  Accumulator acc;
  auto add_term = [&](const Mat2& g) {
    // g (Q {0, oo}) with Q = g^{-1} P, i.e. P(aX + bY, cX + dY)
    Poly q = substitute(p, Integer(static_cast<long>(g.a)), Integer(static_cast<long>(g.b)),
                        Integer(static_cast<long>(g.c)), Integer(static_cast<long>(g.d)));
    for (int i = 0; i <= m; ++i) accumulate(acc, g.c, g.d, i, q[static_cast<std::size_t>(i)]);
  };
  if (c == 0) {
    add_term({1, 0, 0, 1});
    return finish(acc);
  }
  // Convergents of a/c; {0, a/c} = sum_j {p_{j-1}/q_{j-1}, p_j/q_j}.
  std::int64_t pm2 = 0, qm2 = 1, pm1 = 1, qm1 = 0;
  std::int64_t x = a, y = c;
  int j = -1;
  add_term({1, 0, 0, 1});
  while (y != 0) {
    std::int64_t q = x / y;
    if ((x % y != 0) && ((x < 0) != (y < 0))) --q;
    std::tie(x, y) = std::make_pair(y, x - q * y);
    std::int64_t pj = q * pm1 + pm2;
    std::int64_t qj = q * qm1 + qm2;
    ++j;
    std::int64_t sgn_j = ((j - 1) % 2 == 0) ? 1 : -1;
    add_term({pj, sgn_j * pm1, qj, sgn_j * qm1});
    pm2 = pm1;
    qm2 = qm1;
    pm1 = pj;
    qm1 = qj;
  }
  return finish(acc);
}

// ---------------------------------------------------------------- boundary

namespace {

struct BoundaryLayout {
  CuspClasses classes;
  std::vector<std::size_t> column;  // class -> boundary row
  std::size_t rows = 0;
};

BoundaryLayout boundary_layout(std::int64_t level, Sign sign) {
  BoundaryLayout out{CuspClasses(level), {}, 0};
  const std::size_t n = out.classes.size();
  out.column.assign(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (out.column[i] != n) continue;
    out.column[i] = out.rows;
    if (sign == Sign::Plus) {
      auto [a, c] = out.classes.representative(i);
      std::size_t j = out.classes.classify(-a, c);
      out.column[j] = out.rows;
    }
    ++out.rows;
  }
  return out;
}

}  // namespace

std::size_t ModSymSpace::boundary_dimension() const { return boundary_layout(level_, sign_).rows; }

QMatrix ModSymSpace::boundary_map() const {
  auto layout = boundary_layout(level_, sign_);
  const int m = weight_ - 2;
  QMatrix out(layout.rows, dimension());
  for (std::size_t j = 0; j < dimension(); ++j) {
    const auto& sym = basis_symbols_[j];
    Mat2 g = lift_to_sl2z(sym.point.c, sym.point.d, level_);
    if (sym.monomial_degree == m) out(layout.column[layout.classes.classify(g.a, g.c)], j) += 1;
    if (sym.monomial_degree == 0) out(layout.column[layout.classes.classify(g.b, g.d)], j) -= 1;
  }
  return out;
}

const Subspace& ModSymSpace::cuspidal_subspace() const {
  std::lock_guard<std::mutex> lock(cache_->mutex);
  if (!cache_->cuspidal) cache_->cuspidal = std::make_unique<Subspace>(kernel_basis(boundary_map()));
  return *cache_->cuspidal;
}

QMatrix ModSymSpace::star_involution() const {
  const std::size_t d = dimension();
  if (sign_ == Sign::Plus) return QMatrix::identity(d);
  const int m = weight_ - 2;
  QMatrix out(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto& sym = basis_symbols_[j];
    Accumulator acc;
    Integer coef = ((m - sym.monomial_degree) % 2 == 0) ? 1 : -1;
    accumulate(acc, -sym.point.c, sym.point.d, sym.monomial_degree, coef);
    QVector col = finish(acc);
    for (std::size_t i = 0; i < d; ++i) out(i, j) = col[i];
  }
  return out;
}

Subspace ModSymSpace::plus_subspace() const {
  if (sign_ == Sign::Plus) return cuspidal_subspace();
  return intersect(kernel_basis(star_involution().shifted(1)), cuspidal_subspace());
}

Subspace ModSymSpace::minus_subspace() const {
  if (sign_ == Sign::Plus) return Subspace(dimension());
  return intersect(kernel_basis(star_involution().shifted(-1)), cuspidal_subspace());
}

// ------------------------------------------------------------------- Hecke

namespace {

using Wide = __int128;

// (aX + bY)^i (cX + dY)^(m-i) in 128-bit integers; false when the terms could overflow.
bool wide_act(const Mat2& h, int i, int m, std::vector<Wide>& out) {
  const double mx = static_cast<double>(std::max({std::abs(h.a), std::abs(h.b), std::abs(h.c), std::abs(h.d)}));
  if (m * std::log2(4.0 * (mx + 1.0)) > 100.0) return false;
  auto power = [](std::int64_t a, std::int64_t b, int e) {
    std::vector<Wide> c(static_cast<std::size_t>(e + 1));
    for (int j = 0; j <= e; ++j) {
      Wide binom = 1, t = 1;
      for (int k = 0; k < j; ++k) binom = binom * (e - k) / (k + 1);
      for (int k = 0; k < j; ++k) t *= a;
      for (int k = 0; k < e - j; ++k) t *= b;
      c[static_cast<std::size_t>(j)] = binom * t;
    }
    return c;
  };
  auto x = power(h.a, h.b, i);
  auto y = power(h.c, h.d, m - i);
  out.assign(static_cast<std::size_t>(m + 1), 0);
  for (std::size_t u = 0; u < x.size(); ++u)
    for (std::size_t v = 0; v < y.size(); ++v) out[u + v] += x[u] * y[v];
  return true;
}

Integer to_integer(Wide x) {
  const bool neg = x < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-x) : static_cast<unsigned __int128>(x);
  Integer hi = static_cast<unsigned long>(static_cast<std::uint64_t>(u >> 64));
  Integer lo = static_cast<unsigned long>(static_cast<std::uint64_t>(u));
  Integer out = (hi << 64) + lo;
  return neg ? Integer(-out) : out;
}

}  // namespace

QVector ModSymSpace::heilbronn_image(const std::vector<Mat2>& heil, std::size_t basis_index) const {
  const int m = weight_ - 2;
  const auto& sym = basis_symbols_.at(basis_index);
  const std::int64_t u = sym.point.c;
  const std::int64_t v = sym.point.d;
  std::vector<Wide> by_class(class_count(), 0);
  std::vector<std::uint32_t> touched;
  Accumulator slow;
  std::vector<Wide> poly;
  for (const auto& h : heil) {
    std::int64_t c = u * h.a + v * h.c;
    std::int64_t d = u * h.b + v * h.d;
    if (!wide_act(h, sym.monomial_degree, m, poly)) {
      Poly big = act_on_monomial(h, sym.monomial_degree, m);
      for (int j = 0; j <= m; ++j) accumulate(slow, c, d, j, big[static_cast<std::size_t>(j)]);
      continue;
    }
    int idx = p1_.index(c, d);
    if (idx < 0) continue;
    for (int j = 0; j <= m; ++j) {
      if (poly[static_cast<std::size_t>(j)] == 0) continue;
      auto ref = generator_class(static_cast<std::size_t>(idx), j);
      if (ref.cls < 0) continue;
      auto cls = static_cast<std::uint32_t>(ref.cls);
      touched.push_back(cls);
      by_class[cls] += ref.sign > 0 ? poly[static_cast<std::size_t>(j)] : -poly[static_cast<std::size_t>(j)];
    }
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  const Wide word = static_cast<Wide>(1) << 60;
  std::vector<Wide> scaled(class_small_.empty() ? 0 : dimension(), 0);
  bool used_scaled = false;
  for (auto cls : touched) {
    const Wide n = by_class[cls];
    if (n == 0) continue;
    if (!class_small_.empty() && n < word && n > -word) {
      for (const auto& [b, x] : class_small_[cls]) scaled[b] += n * x;
      used_scaled = true;
      continue;
    }
    if (slow.by_class.size() != class_count()) slow.by_class.assign(class_count(), Integer(0));
    if (slow.by_class[cls] == 0) slow.touched.push_back(cls);
    slow.by_class[cls] += to_integer(n);
  }
  QVector out = finish(slow);
  if (used_scaled)
    for (std::size_t b = 0; b < scaled.size(); ++b)
      if (scaled[b] != 0) {
        Rational x(to_integer(scaled[b]), class_den_);
        x.canonicalize();
        out[b] += x;
      }
  return out;
}

QVector ModSymSpace::hecke_image_of_basis(std::int64_t q, std::size_t basis_index) const {
  return heilbronn_image(heilbronn_cremona(q), basis_index);
}

const QMatrix& ModSymSpace::hecke_matrix(std::int64_t q) const {
  if (!is_prime(q)) throw Error(ErrorKind::InvalidInput, "Hecke operators are indexed by primes");
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->hecke.find(q);
    if (it != cache_->hecke.end()) return it->second;
  }
  const std::size_t d = dimension();
  const auto heil = heilbronn_cremona(q);
  QMatrix t(d, d);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < d; j = next++) {
      QVector col = heilbronn_image(heil, j);
      for (std::size_t i = 0; i < d; ++i) t(i, j) = std::move(col[i]);
    }
  };
  const unsigned nthreads = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()), d > 32 ? 8u : 1u);
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < nthreads; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  std::lock_guard<std::mutex> lock(cache_->mutex);
  return cache_->hecke.try_emplace(q, std::move(t)).first->second;
}

const QMatrix& ModSymSpace::hecke_on_cuspidal(std::int64_t q) const {
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->hecke_cusp.find(q);
    if (it != cache_->hecke_cusp.end()) return it->second;
  }
  QMatrix r = restrict_operator(hecke_matrix(q), cuspidal_subspace());
  std::lock_guard<std::mutex> lock(cache_->mutex);
  return cache_->hecke_cusp.try_emplace(q, std::move(r)).first->second;
}

// ------------------------------------------------------------- degeneracy

QMatrix degeneracy_map(const ModSymSpace& big, const ModSymSpace& small, std::int64_t t) {
  if (big.weight() != small.weight() || big.sign() != small.sign())
    throw Error(ErrorKind::DimensionMismatch, "degeneracy map between incompatible spaces");
  if (t < 1 || big.level() % (small.level() * t) != 0)
    throw Error(ErrorKind::BadDivisor, "t * M must divide N");
  const int m = big.weight() - 2;
  QMatrix out(small.dimension(), big.dimension());
  for (std::size_t j = 0; j < big.dimension(); ++j) {
    const auto& sym = big.basis_symbols()[j];
    Mat2 g = lift_to_sl2z(sym.point.c, sym.point.d, big.level());
    Poly mono(static_cast<std::size_t>(m + 1));
    mono[static_cast<std::size_t>(sym.monomial_degree)] = 1;
    // diag(t,1) g (P {0, oo}) = Q {t b/d, t a/c}
    Poly q = left_act({t * g.a, t * g.b, g.c, g.d}, mono);
    QVector hi = small.modular_symbol_vector(q, t * g.a, g.c);
    QVector lo = small.modular_symbol_vector(q, t * g.b, g.d);
    for (std::size_t i = 0; i < small.dimension(); ++i) out(i, j) = hi[i] - lo[i];
  }
  return out;
}

QMatrix degeneracy_up_map(const ModSymSpace& small, const ModSymSpace& big) {
  if (big.weight() != small.weight() || big.sign() != small.sign())
    throw Error(ErrorKind::DimensionMismatch, "degeneracy map between incompatible spaces");
  if (big.level() % small.level() != 0) throw Error(ErrorKind::BadDivisor, "M must divide N");
  const std::int64_t lo = small.level();
  std::vector<std::vector<std::size_t>> fiber(small.p1().size());
  for (std::size_t i = 0; i < big.p1().size(); ++i) {
    const auto& pt = big.p1()[i];
    fiber[static_cast<std::size_t>(small.p1().index(pt.c % lo, pt.d % lo))].push_back(i);
  }
  QMatrix out(big.dimension(), small.dimension());
  for (std::size_t j = 0; j < small.dimension(); ++j) {
    const auto& sym = small.basis_symbols()[j];
    ModSymSpace::Accumulator acc;
    for (auto idx : fiber[static_cast<std::size_t>(small.p1().index(sym.point.c, sym.point.d))]) {
      const auto& pt = big.p1()[idx];
      big.accumulate(acc, pt.c, pt.d, sym.monomial_degree, Integer(1));
    }
    QVector col = big.finish(acc);
    for (std::size_t i = 0; i < big.dimension(); ++i) out(i, j) = col[i];
  }
  return out;
}

std::int64_t sturm_bound(std::int64_t level, int weight) {
  if (level < 1 || weight < 2) throw Error(ErrorKind::InvalidInput, "sturm_bound needs N >= 1, k >= 2");
  return static_cast<std::int64_t>(weight) * gamma0_index(level) / 12;
}

}  // namespace hlr
