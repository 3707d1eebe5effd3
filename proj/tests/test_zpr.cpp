#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "hlr/error.hpp"
#include "hlr/zpr.hpp"

using namespace hlr;

namespace {

using Vec = std::vector<std::int64_t>;

// Every vector of length n over Z/mod.
std::vector<Vec> all_vectors(std::size_t n, std::int64_t mod) {
  std::vector<Vec> out{Vec(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Vec> next;
    for (const auto& v : out)
      for (std::int64_t x = 0; x < mod; ++x) {
        Vec w = v;
        w[i] = x;
        next.push_back(w);
      }
    out = std::move(next);
  }
  return out;
}

// Closure of the generators under addition; finite so this is the Z/p^r span.
std::set<Vec> span_of(const std::vector<Vec>& gens, std::size_t n, std::int64_t mod) {
  std::set<Vec> seen{Vec(n, 0)};
  std::vector<Vec> frontier{Vec(n, 0)};
  while (!frontier.empty()) {
    std::vector<Vec> next;
    for (const auto& v : frontier)
      for (const auto& g : gens) {
        Vec w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = (v[i] + g[i]) % mod;
        if (seen.insert(w).second) next.push_back(w);
      }
    frontier = std::move(next);
  }
  return seen;
}

std::vector<Vec> rows_of(const ZmodPrMatrix& a) {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < a.rows(); ++i) out.push_back(a.row(i));
  return out;
}

ZmodPrMatrix random_matrix(const PrimePower& m, std::size_t r, std::size_t c, std::mt19937& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<std::int64_t> val(0, m.modulus() - 1);
  ZmodPrMatrix a(m, r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      // Bias towards zeros and p-multiples so torsion shows up.
      int t = kind(rng);
      a.set(i, j, t == 0 ? 0 : t == 1 ? m.p * val(rng) : val(rng));
    }
  return a;
}

}  // namespace

TEST_CASE("prime power validation") {
  CHECK_THROWS_AS(PrimePower::make(2, 3), Error);
  CHECK_THROWS_AS(PrimePower::make(9, 1), Error);
  CHECK_THROWS_AS(PrimePower::make(3, 0), Error);
  CHECK_THROWS_AS(PrimePower::make(3, 40), Error);
  CHECK(PrimePower::make(7, 2).modulus() == 49);
}

TEST_CASE("valuations") {
  CHECK(valp(Integer(27), 3) == 3);
  CHECK(valp(Integer(-539), 7) == 2);
  CHECK(valp(Rational(3, 7), 7) == -1);
  CHECK_THROWS_AS(valp(Integer(0), 3), Error);

  std::mt19937 rng(7);
  std::uniform_int_distribution<long> d(-2000, 2000);
  for (int i = 0; i < 500; ++i) {
    Integer x = d(rng), y = d(rng);
    if (x == 0 || y == 0 || x + y == 0) continue;
    int vx = valp(x, 3), vy = valp(y, 3), vs = valp(Integer(x + y), 3);
    CHECK(vs >= std::min(vx, vy));
    if (vx != vy) CHECK(vs == std::min(vx, vy));
    CHECK(valp(Integer(x * y), 3) == vx + vy);
  }
}

TEST_CASE("reduction") {
  auto m27 = PrimePower::make(3, 3);
  auto m9 = PrimePower::make(3, 2);
  CHECK(reduce(Rational(-3), m27).value() == 24);
  CHECK(reduce(Rational(1, 2), m9).value() == 5);
  try {
    reduce(Rational(1, 3), m9);
    FAIL("expected DenominatorNotUnit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DenominatorNotUnit);
  }

  std::mt19937 rng(11);
  std::uniform_int_distribution<long> num(-500, 500), den(1, 60);
  auto m = PrimePower::make(5, 3);
  for (int i = 0; i < 300; ++i) {
    long dx = den(rng), dy = den(rng);
    if (dx % 5 == 0 || dy % 5 == 0) continue;
    Rational x(num(rng), dx), y(num(rng), dy);
    x.canonicalize();
    y.canonicalize();
    CHECK(reduce(Rational(x + y), m) == reduce(x, m) + reduce(y, m));
    CHECK(reduce(Rational(x * y), m) == reduce(x, m) * reduce(y, m));
  }
}

TEST_CASE("hensel square roots against brute force") {
  auto m27 = PrimePower::make(3, 3);
  auto r = hensel_sqrt(ZmodPr(m27, 4));
  CHECK(r.first.value() == 2);
  CHECK(r.second.value() == 25);
  auto s = hensel_sqrt(ZmodPr(PrimePower::make(3, 2), 7));
  CHECK(s.first.value() == 4);
  CHECK(s.second.value() == 5);
  try {
    hensel_sqrt(ZmodPr(PrimePower::make(5, 2), 2));
    FAIL("expected NonResidue");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonResidue);
  }
  CHECK_THROWS_AS(hensel_sqrt(ZmodPr(m27, 9)), Error);

  for (std::int64_t p : {3, 5, 7, 11, 13})
    for (int e = 1; e <= 4; ++e) {
      auto m = PrimePower::make(p, e);
      const std::int64_t mod = m.modulus();
      std::map<std::int64_t, std::set<std::int64_t>> roots;
      for (std::int64_t x = 0; x < mod; ++x)
        if (x % p != 0) roots[x * x % mod].insert(x);
      for (std::int64_t u = 1; u < mod; ++u) {
        if (u % p == 0) continue;
        auto it = roots.find(u);
        if (it == roots.end()) {
          CHECK_THROWS_AS(hensel_sqrt(ZmodPr(m, u)), Error);
          continue;
        }
        auto [a, b] = hensel_sqrt(ZmodPr(m, u));
        CHECK(it->second == std::set<std::int64_t>{a.value(), b.value()});
        CHECK(a.value() < b.value());
      }
    }
}

TEST_CASE("howell form examples") {
  auto m = PrimePower::make(5, 2);
  CHECK(howell_form(ZmodPrMatrix::identity(m, 3)) == ZmodPrMatrix::identity(m, 3));
  auto t = ZmodPrMatrix::from_rows(m, {{5}}, 1);
  CHECK(howell_form(t) == t);
  auto a = ZmodPrMatrix::from_rows(m, {{2, 4}, {0, 5}}, 2);
  auto h = howell_form(a);
  CHECK(span_of(rows_of(h), 2, 25) == span_of(rows_of(a), 2, 25));
  CHECK(howell_form(h) == h);
}

TEST_CASE("howell form is canonical on small matrices") {
  std::mt19937 rng(3);
  for (std::int64_t p : {3, 5})
    for (int e = 1; e <= (p == 3 ? 3 : 2); ++e) {
      auto m = PrimePower::make(p, e);
      const auto mod = m.modulus();
      std::map<std::set<Vec>, ZmodPrMatrix> by_span;
      for (int trial = 0; trial < 150; ++trial) {
        auto a = random_matrix(m, 1 + trial % 3, 2, rng);
        auto h = howell_form(a);
        auto sp = span_of(rows_of(a), 2, mod);
        CHECK(span_of(rows_of(h), 2, mod) == sp);
        CHECK(howell_form(h) == h);
        auto [it, fresh] = by_span.emplace(sp, h);
        if (!fresh) CHECK(it->second == h);
      }
      // Distinct spans must give distinct forms.
      std::set<std::vector<Vec>> forms;
      for (const auto& [sp, h] : by_span) forms.insert(rows_of(h));
      CHECK(forms.size() == by_span.size());
    }
}

TEST_CASE("solve examples") {
  auto m = PrimePower::make(3, 2);
  auto id = ZmodPrMatrix::identity(m, 2);
  auto sol = solve(id, {4, 7});
  CHECK(sol.particular == Vec{4, 7});
  CHECK(sol.kernel.empty());

  auto a = ZmodPrMatrix::from_rows(m, {{3}}, 1);
  try {
    solve(a, {1});
    FAIL("expected NoSolution");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoSolution);
  }
  auto s = solve(a, {3});
  CHECK(s.particular == Vec{1});
  REQUIRE(s.kernel.size() == 1);
  CHECK(span_of(s.kernel, 1, 9) == std::set<Vec>{{0}, {3}, {6}});
  CHECK(span_of(kernel_modpr(a), 1, 9) == std::set<Vec>{{0}, {3}, {6}});
}

TEST_CASE("solver completeness against enumeration") {
  std::mt19937 rng(5);
  for (std::int64_t p : {3, 5})
    for (int e = 1; e <= 3; ++e) {
      auto m = PrimePower::make(p, e);
      const auto mod = m.modulus();
      const std::size_t cols = (mod > 30) ? 2 : 3;
      const auto candidates = all_vectors(cols, mod);
      for (int trial = 0; trial < 40; ++trial) {
        auto a = random_matrix(m, 2, cols, rng);
        Vec b{std::uniform_int_distribution<std::int64_t>(0, mod - 1)(rng), 0};
        if (trial % 2 == 0) b = a.apply(candidates[static_cast<std::size_t>(trial * 7) % candidates.size()]);
        std::set<Vec> brute;
        for (const auto& x : candidates)
          if (a.apply(x) == b) brute.insert(x);
        std::set<Vec> kernel_brute;
        for (const auto& x : candidates)
          if (a.apply(x) == Vec(2, 0)) kernel_brute.insert(x);
        CHECK(span_of(kernel_modpr(a), cols, mod) == kernel_brute);
        if (brute.empty()) {
          CHECK_THROWS_AS(solve(a, b), Error);
          continue;
        }
        auto s = solve(a, b);
        CHECK(a.apply(s.particular) == b);
        std::set<Vec> got;
        for (const auto& k : span_of(s.kernel, cols, mod)) {
          Vec x(cols);
          for (std::size_t i = 0; i < cols; ++i) x[i] = (s.particular[i] + k[i]) % mod;
          got.insert(x);
        }
        CHECK(got == brute);
      }
    }
}

TEST_CASE("inverse of unit-determinant matrices") {
  std::mt19937 rng(9);
  auto m = PrimePower::make(3, 3);
  int inverted = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_matrix(m, 3, 3, rng);
    auto mod_p = howell_form(ZmodPrMatrix::from_rows(PrimePower::make(3, 1), rows_of(a), 3));
    if (mod_p.rows() < 3) {
      CHECK_THROWS_AS(inverse_modpr(a), Error);
      continue;
    }
    auto inv = inverse_modpr(a);
    for (std::size_t j = 0; j < 3; ++j) {
      Vec e(3, 0);
      e[j] = 1;
      CHECK(a.apply(inv.apply(e)) == e);
    }
    ++inverted;
  }
  CHECK(inverted > 5);
}
