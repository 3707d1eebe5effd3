#include "doctest.h"

#include <numeric>
#include <set>

#include "hlr/arith.hpp"
#include "hlr/error.hpp"
#include "hlr/newforms.hpp"

using namespace hlr;

namespace {

long naive_phi(long n) {
  long c = 0;
  for (long i = 1; i <= n; ++i) c += std::gcd(i, n) == 1;
  return c;
}

long roots(long n, long b, long c) {
  long r = 0;
  for (long x = 0; x < n; ++x) r += ((x * x + b * x + c) % n) == 0;
  return r;
}

long dim_cusp(long n, long k) {
  if (n == 1) {
    if (k < 12) return 0;
    return k % 12 == 2 ? k / 12 - 1 : k / 12;
  }
  long pairs = 0;
  for (long c = 0; c < n; ++c)
    for (long d = 0; d < n; ++d) pairs += std::gcd(std::gcd(c, d), n) == 1;
  long mu = pairs / naive_phi(n);
  long nu2 = n % 4 == 0 ? 0 : roots(n, 0, 1);
  long nu3 = n % 9 == 0 ? 0 : roots(n, 1, 1);
  long cusps = 0;
  for (long d = 1; d <= n; ++d)
    if (n % d == 0) cusps += naive_phi(std::gcd(d, n / d));
  long g12 = mu - 3 * nu2 - 4 * nu3 - 6 * cusps;
  if (k == 2) return g12 / 12 + 1;
  return ((k - 1) * g12 + 12 * ((k / 2 - 1) * cusps + nu2 * (k / 4) + nu3 * (k / 3))) / 12;
}

// Multiplicative beta with beta(p) = -2, beta(p^2) = 1, beta(p^e) = 0 for e >= 3.
long beta(long n) {
  long r = 1;
  for (long p = 2; n > 1; ++p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e == 1) r *= -2;
    if (e >= 3) r = 0;
  }
  return r;
}

long dim_new(long n, long k) {
  long s = 0;
  for (long m = 1; m <= n; ++m)
    if (n % m == 0) s += beta(n / m) * dim_cusp(m, k);
  return s;
}

// a_p = p + 1 - #E(F_p) for y^2 + y = x^3 + a2 x^2 + a4 x + a6.
long curve_ap(long p, long a2, long a4, long a6) {
  long count = 1;
  for (long x = 0; x < p; ++x)
    for (long y = 0; y < p; ++y) {
      long lhs = (y * y + y) % p;
      long rhs = (((x * x % p) * x + a2 * x * x + a4 * x + a6) % p + p * p) % p;
      count += lhs == rhs;
    }
  return p + 1 - count;
}

std::vector<long> a2_to_a6(const Eigensystem& f) {
  auto an = eigen_qexpansion(f, 6);
  std::vector<long> out;
  for (std::size_t i = 1; i < an.size(); ++i) out.push_back(an[i].get_si());
  return out;
}

}  // namespace

TEST_CASE("new subspace dimensions agree with the Moebius-type oracle") {
  for (long k : {2, 4})
    for (long n = 5; n <= 60; ++n) {
      CAPTURE(n);
      CAPTURE(k);
      auto s = ModSymSpace::build(n, static_cast<int>(k), Sign::Plus);
      CHECK(static_cast<long>(new_subspace(s).dim()) == dim_new(n, k));
    }
}

TEST_CASE("rational newforms at level 22 weight 4") {
  Workspace ws;
  const auto& d = ws.newforms(22, 4, 13);
  CHECK(d.new_dim == 3);
  REQUIRE(d.forms.size() == 3);
  std::set<std::vector<long>> seen;
  for (const auto& f : d.forms) seen.insert(a2_to_a6(f));
  CHECK(seen.count({-2, -7, 4, -19, 14}) == 1);
  CHECK(seen.count({2, 1, 4, -3, 2}) == 1);
  CHECK(d.forms[0].label == "22.4.a.a");
  CHECK(a2_to_a6(d.forms[0]) == std::vector<long>{-2, -7, 4, -19, 14});
  CHECK(a2_to_a6(d.forms[2]) == std::vector<long>{2, 1, 4, -3, 2});
}

TEST_CASE("level 37 weight 2 eigenvalues match the two rational curves of conductor 37") {
  Workspace ws;
  const auto& d = ws.newforms(37, 2, 50);
  REQUIRE(d.forms.size() == 2);
  std::set<std::vector<long>> engine, curves;
  for (const auto& f : d.forms) {
    std::vector<long> v;
    for (auto p : primes_up_to(50))
      if (p != 37) v.push_back(f.a(p).get_si());
    engine.insert(v);
  }
  // 37a: y^2 + y = x^3 - x ; 37b: y^2 + y = x^3 + x^2 - 23x - 50
  for (auto [a2, a4, a6] : {std::tuple{0L, -1L, 0L}, std::tuple{1L, -23L, -50L}}) {
    std::vector<long> v;
    for (auto p : primes_up_to(50))
      if (p != 37) v.push_back(curve_ap(p, a2, a4, a6));
    curves.insert(v);
  }
  CHECK(engine == curves);
}

TEST_CASE("Deligne bound, Atkin-Lehner-type invariants and Hida on the grid") {
  Workspace ws;
  std::size_t checked = 0;
  for (int k : {2, 4})
    for (long n = 5; n <= 60; ++n) {
      const auto& d = ws.newforms(n, k, 30);
      for (const auto& f : d.forms) {
        for (auto q : primes_up_to(30)) {
          const Integer& a = f.a(q);
          if (n % q != 0) {
            CHECK(abs(a) <= deligne_window(q, k));
          } else if (n % (q * q) == 0) {
            CHECK(a == 0);
          } else {
            // Hida: a_q^2 = q^(k-2) for forms new at q || N
            CHECK(a * a == Integer(ipow(q, k - 2)));
            ++checked;
          }
        }
      }
    }
  CHECK(checked > 50);
}

TEST_CASE("rational newforms at 110 include the members used later") {
  Workspace ws;
  const auto& d = ws.newforms(110, 4, 72);
  std::set<std::string> labels;
  for (const auto& f : d.forms) labels.insert(f.label);
  for (const char* l : {"110.4.a.a", "110.4.a.c", "110.4.a.d", "110.4.a.f", "110.4.a.g"}) CHECK(labels.count(l) == 1);
  CHECK(d.new_dim == static_cast<std::size_t>(dim_new(110, 4)));
  CHECK(d.undecomposed_dim + d.forms.size() == d.new_dim);
}

TEST_CASE("l-new and l-old subspaces split the cuspidal space at level 110") {
  auto small = ModSymSpace::build(22, 4, Sign::Plus);
  auto big = ModSymSpace::build(110, 4, Sign::Plus);
  auto oldsp = l_old_subspace(big, small, 5);
  auto newsp = l_new_subspace(big, 5);
  CHECK(oldsp.dim() == 2 * small.cuspidal_subspace().dim());
  CHECK(oldsp.dim() + newsp.dim() == big.cuspidal_subspace().dim());
}

TEST_CASE("missing primes are reported") {
  Workspace ws;
  const auto& d = ws.newforms(11, 2, 5);
  CHECK_THROWS_AS(d.forms.front().a(7), Error);
  CHECK_THROWS_AS(eigen_qexpansion(d.forms.front(), 10), Error);
}
