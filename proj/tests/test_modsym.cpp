#include "doctest.h"

#include <map>
#include <numeric>
#include <set>

#include "hlr/arith.hpp"
#include "hlr/error.hpp"
#include "hlr/modsym.hpp"
#include "hlr/newforms.hpp"

using namespace hlr;

namespace {

// Test-side oracles, computed by brute force without the library's arithmetic helpers.

long naive_phi(long n) {
  long c = 0;
  for (long i = 1; i <= n; ++i) c += std::gcd(i, n) == 1;
  return c;
}

long count_roots(long n, long a, long b, long c) {
  long r = 0;
  for (long x = 0; x < n; ++x) r += ((a * x * x + b * x + c) % n) == 0;
  return r;
}

// #P^1(Z/N): pairs (c, d) with gcd(c, d, N) = 1, modulo units.
long naive_index(long n) {
  long pairs = 0;
  for (long c = 0; c < n; ++c)
    for (long d = 0; d < n; ++d) pairs += std::gcd(std::gcd(c, d), n) == 1;
  return pairs / naive_phi(n);
}

long naive_cusps(long n) {
  long c = 0;
  for (long d = 1; d <= n; ++d)
    if (n % d == 0) c += naive_phi(std::gcd(d, n / d));
  return c;
}

// dim S_k(Gamma_0(N)) from the genus formula, k even.
long dim_cusp_forms(long n, long k) {
  long mu = n == 1 ? 1 : naive_index(n);
  long nu2 = n % 4 == 0 ? 0 : count_roots(n, 1, 0, 1);
  long nu3 = n % 9 == 0 ? 0 : count_roots(n, 1, 1, 1);
  if (n == 1) nu2 = nu3 = 1;
  long c = naive_cusps(n);
  // 12 (g - 1) = mu - 3 nu2 - 4 nu3 - 6 c
  long g12 = mu - 3 * nu2 - 4 * nu3 - 6 * c;
  if (k == 2) return g12 / 12 + 1;
  long twelve = (k - 1) * g12 + 12 * ((k / 2 - 1) * c + nu2 * (k / 4) + nu3 * (k / 3));
  return twelve / 12;
}

bool all_zero(const QVector& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& x) { return sgn(x) == 0; });
}

QVector mul(const QMatrix& m, const QVector& v) { return m * std::span<const Rational>(v); }

// Points on y^2 + y = x^3 - x^2 - 10x - 20 over F_p, with the point at infinity.
long points_11a(long p) {
  long count = 1;
  for (long x = 0; x < p; ++x)
    for (long y = 0; y < p; ++y) {
      long lhs = (y * y + y) % p;
      long rhs = ((x * x % p * x - x * x - 10 * x - 20) % p + 2 * p * p) % p;
      count += lhs == rhs % p;
    }
  return count;
}

}  // namespace

TEST_CASE("oracle sanity: classical genus values") {
  // genus of X_0(11), X_0(37), X_0(60) are 1, 2, 7; dim S_12(SL_2(Z)) = 1
  CHECK(dim_cusp_forms(11, 2) == 1);
  CHECK(dim_cusp_forms(37, 2) == 2);
  CHECK(dim_cusp_forms(60, 2) == 7);
  CHECK(dim_cusp_forms(1, 12) == 1);
  CHECK(naive_index(110) == 216);
}

TEST_CASE("P1 list size and cusp counts match brute force") {
  for (long n = 1; n <= 60; ++n) {
    CAPTURE(n);
    CHECK(static_cast<long>(P1List(n).size()) == naive_index(n));
    CHECK(gamma0_index(n) == naive_index(n));
    CHECK(static_cast<long>(CuspClasses(n).size()) == naive_cusps(n));
  }
  CHECK(P1List(110).size() == 216);
  CHECK(gamma0_index(110) == 216);
}

TEST_CASE("p1_normalize respects the unit action") {
  for (long n : {12, 22, 45}) {
    for (long c = 0; c < n; ++c)
      for (long d = 0; d < n; ++d) {
        if (std::gcd(std::gcd(c, d), n) != 1) continue;
        auto base = p1_normalize(c, d, n);
        for (long u = 1; u < n; ++u) {
          if (std::gcd(u, n) != 1) continue;
          CHECK(p1_normalize(u * c % n, u * d % n, n) == base);
        }
      }
  }
  CHECK_THROWS_AS(p1_normalize(2, 4, 8), Error);
}

TEST_CASE("lift_to_sl2z has determinant one and the right bottom row") {
  for (long n : {7, 22, 60})
    for (long c = 0; c < n; ++c)
      for (long d = 0; d < n; ++d) {
        if (std::gcd(std::gcd(c, d), n) != 1) continue;
        Mat2 g = lift_to_sl2z(c, d, n);
        CHECK(g.det() == 1);
        CHECK(floor_mod(g.c - c, n) == 0);
        CHECK(floor_mod(g.d - d, n) == 0);
      }
}

TEST_CASE("modular symbol dimensions on the grid N <= 60, k in {2,4,6}") {
  for (long k : {2, 4, 6})
    for (long n = 1; n <= 60; ++n) {
      CAPTURE(n);
      CAPTURE(k);
      const long s = dim_cusp_forms(n, k);
      const long cusps = naive_cusps(n);
      const long eis = k == 2 ? cusps - 1 : cusps;
      auto both = ModSymSpace::build_unchecked(n, static_cast<int>(k), Sign::Both);
      auto plus = ModSymSpace::build_unchecked(n, static_cast<int>(k), Sign::Plus);
      CHECK(static_cast<long>(both.dimension()) == 2 * s + eis);
      CHECK(static_cast<long>(both.cuspidal_subspace().dim()) == 2 * s);
      CHECK(static_cast<long>(plus.cuspidal_subspace().dim()) == s);
    }
}

TEST_CASE("dimensions at the larger levels") {
  for (long n : {110, 115, 299, 522}) {
    CAPTURE(n);
    auto plus = ModSymSpace::build(n, 4, Sign::Plus);
    CHECK(static_cast<long>(plus.cuspidal_subspace().dim()) == dim_cusp_forms(n, 4));
  }
}

TEST_CASE("validated construction rejects bad input") {
  CHECK_THROWS_AS(ModSymSpace::build(22, 3), Error);
  CHECK_THROWS_AS(ModSymSpace::build(3, 4), Error);
  try {
    ModSymSpace::build(22, 3);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedWeight);
  }
}

TEST_CASE("star involution squares to one and splits the cuspidal space in halves") {
  for (long n : {11, 22, 30, 37})
    for (int k : {2, 4}) {
      auto both = ModSymSpace::build(n, k, Sign::Both);
      QMatrix star = both.star_involution();
      QMatrix sq = star * star;
      for (std::size_t i = 0; i < sq.rows(); ++i)
        for (std::size_t j = 0; j < sq.cols(); ++j) CHECK(sq(i, j) == Rational(i == j ? 1 : 0));
      const auto cusp = both.cuspidal_subspace().dim();
      CHECK(both.plus_subspace().dim() == cusp / 2);
      CHECK(both.minus_subspace().dim() == cusp / 2);
    }
}

TEST_CASE("Hecke operators commute") {
  for (long n : {11, 22, 30, 35, 46, 57})
    for (int k : {2, 4}) {
      CAPTURE(n);
      CAPTURE(k);
      auto s = ModSymSpace::build(n, k, Sign::Plus);
      std::vector<std::int64_t> qs{2, 3, 5, 7};
      for (std::size_t i = 0; i < qs.size(); ++i)
        for (std::size_t j = i + 1; j < qs.size(); ++j) {
          const QMatrix& a = s.hecke_matrix(qs[i]);
          const QMatrix& b = s.hecke_matrix(qs[j]);
          QMatrix ab = a * b, ba = b * a;
          bool same = true;
          for (std::size_t r = 0; r < ab.rows(); ++r)
            for (std::size_t c = 0; c < ab.cols(); ++c) same = same && ab(r, c) == ba(r, c);
          CHECK(same);
        }
    }
}

TEST_CASE("Hecke operators preserve the cuspidal subspace and one column matches the matrix") {
  auto s = ModSymSpace::build(22, 4, Sign::Plus);
  const Subspace& c = s.cuspidal_subspace();
  for (std::int64_t q : {2, 3, 5, 11}) {
    for (std::size_t i = 0; i < c.dim(); ++i) CHECK(c.contains(mul(s.hecke_matrix(q), c.basis_vector(i))));
    for (std::size_t i = 0; i < s.dimension(); ++i) {
      QVector col = s.hecke_image_of_basis(q, i);
      for (std::size_t r = 0; r < s.dimension(); ++r) CHECK(col[r] == s.hecke_matrix(q)(r, i));
    }
  }
}

TEST_CASE("weight 2 level 11 eigenvalues agree with point counts on 11a") {
  auto s = ModSymSpace::build(11, 2, Sign::Plus);
  REQUIRE(s.cuspidal_subspace().dim() == 1);
  for (auto p : primes_up_to(60)) {
    if (p == 11) continue;
    const QMatrix& t = s.hecke_on_cuspidal(p);
    CHECK(t(0, 0) == Rational(p + 1 - points_11a(p)));
  }
}

TEST_CASE("Heilbronn lists have the right determinant") {
  for (long p : {3, 5, 7, 11, 29}) {
    for (const auto& h : heilbronn_cremona(p)) CHECK(h.det() == p);
    for (const auto& h : heilbronn_merel(p)) CHECK(h.det() == p);
  }
}

TEST_CASE("old-space identity U_l^2 - T_l U_l + l^(k-1) = 0") {
  struct Case {
    std::int64_t n, l;
  };
  for (auto [n, l] : {Case{22, 5}, Case{23, 13}}) {
    CAPTURE(n);
    const int k = 4;
    auto small = ModSymSpace::build(n, k, Sign::Plus);
    auto big = ModSymSpace::build(n * l, k, Sign::Plus);
    QMatrix up = degeneracy_up_map(small, big);
    const QMatrix& u = big.hecke_matrix(l);
    const QMatrix& t = small.hecke_matrix(l);
    const Rational lk(ipow(l, k - 1));
    const Subspace& c = small.cuspidal_subspace();
    Subspace old = l_old_subspace(big, small, l);
    CHECK(old.dim() == 2 * c.dim());
    for (std::size_t i = 0; i < c.dim(); ++i) {
      QVector x = c.basis_vector(i);
      // on beta(x): U^2 beta(x) - U beta(T x) + l^(k-1) beta(x)
      QVector bx = mul(up, x);
      QVector lhs = mul(u, mul(u, bx));
      QVector rhs = mul(u, mul(up, mul(t, x)));
      QVector y = mul(u, bx);
      QVector lhs2 = mul(u, mul(u, y));
      QVector rhs2 = mul(u, mul(u, mul(up, mul(t, x))));
      for (std::size_t j = 0; j < lhs.size(); ++j) {
        lhs[j] += lk * bx[j] - rhs[j];
        lhs2[j] += lk * y[j] - rhs2[j];
      }
      CHECK(all_zero(lhs));
      CHECK(all_zero(lhs2));
    }
  }
}

TEST_CASE("sturm bound") {
  // k * [SL_2(Z) : Gamma_0(N)] / 12
  CHECK(sturm_bound(110, 4) == 72);
  CHECK(sturm_bound(299, 4) == 112);
  CHECK(sturm_bound(522, 4) == 360);
  CHECK(sturm_bound(11, 2) == 2);
}
