#pragma once

// Weight-k modular symbols for Gamma_0(N) with trivial character, presented by
// Manin symbols [X^i Y^(k-2-i), (c:d)] modulo the 2-term and 3-term relations.
//
// Conventions:
//  * [P, (c:d)] = g (P {0, oo}) for any g in SL_2(Z) with bottom row (c, d).
//  * GL_2(Q) acts on the left of polynomials by
//      g P(X, Y) = P(dX - bY, -cX + aY),  g = (a b; c d).
//  * Integer matrices h = (a b; c d) act on the right of Manin symbols by
//      [P, (u:v)] h = [P(aX + bY, cX + dY), (ua + vc : ub + vd)].
//  * The star involution is the action of diag(-1, 1):
//      [X^i Y^(k-2-i), (u:v)] -> (-1)^(k-2-i) [X^i Y^(k-2-i), (-u:v)].
//    A Sign::Plus space is the quotient by (star - 1); all Eisenstein cusp
//    classes survive there and the cuspidal part has dimension dim S_k.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "hlr/exactlin.hpp"

namespace hlr {

struct P1Point {
  std::int64_t c = 0;
  std::int64_t d = 0;
  bool operator==(const P1Point&) const = default;
};

// Canonical representative of (c:d) in P^1(Z/N): the lexicographically least
// pair (lambda c mod N, lambda d mod N) over units lambda. Throws NotCoprime.
P1Point p1_normalize(std::int64_t c, std::int64_t d, std::int64_t n);

class P1List {
 public:
  explicit P1List(std::int64_t n);

  std::int64_t level() const { return n_; }
  std::size_t size() const { return points_.size(); }
  const P1Point& operator[](std::size_t i) const { return points_[i]; }
  // Index of the class of (c:d), or -1 when gcd(c, d, N) > 1.
  int index(std::int64_t c, std::int64_t d) const;

 private:
  std::int64_t n_;
  std::vector<P1Point> points_;
  std::vector<int> table_;
};

struct Mat2 {
  std::int64_t a = 1, b = 0, c = 0, d = 1;
  std::int64_t det() const { return a * d - b * c; }
};

// g in SL_2(Z) whose bottom row is congruent to (c, d) mod N.
Mat2 lift_to_sl2z(std::int64_t c, std::int64_t d, std::int64_t n);

// Heilbronn matrices of determinant p (Cremona's continued-fraction list, p odd prime).
std::vector<Mat2> heilbronn_cremona(std::int64_t p);
// Merel's set: a > b >= 0, d > c >= 0, ad - bc = n.
std::vector<Mat2> heilbronn_merel(std::int64_t n);

struct ManinSymbol {
  P1Point point;
  int monomial_degree = 0;  // i in X^i Y^(k-2-i)
};

// Gamma_0(N)-classes of cusps. Cusps are fractions a/c in lowest terms, c >= 0; oo = 1/0.
class CuspClasses {
 public:
  explicit CuspClasses(std::int64_t n);
  std::size_t size() const { return reps_.size(); }
  std::size_t classify(std::int64_t a, std::int64_t c) const;
  std::pair<std::int64_t, std::int64_t> representative(std::size_t i) const { return reps_[i]; }
  static bool equivalent(std::int64_t a1, std::int64_t c1, std::int64_t a2, std::int64_t c2, std::int64_t n);

 private:
  std::int64_t n_;
  std::vector<std::pair<std::int64_t, std::int64_t>> reps_;
};

enum class Sign { Both = 0, Plus = 1 };

using SparseQVector = std::vector<std::pair<std::uint32_t, Rational>>;

// Homogeneous polynomial of degree k-2, coefficient i belongs to X^i Y^(k-2-i).
using Poly = std::vector<Integer>;

class ModSymSpace {
 public:
  // Validated construction: N >= 5, k >= 2 even.
  static ModSymSpace build(std::int64_t level, int weight, Sign sign = Sign::Both);
  // Any N >= 1, even k >= 2; used for degeneracy targets below level 5.
  static ModSymSpace build_unchecked(std::int64_t level, int weight, Sign sign = Sign::Both);

  ModSymSpace(ModSymSpace&&) noexcept;
  ModSymSpace& operator=(ModSymSpace&&) noexcept;
  ~ModSymSpace();

  std::int64_t level() const { return level_; }
  int weight() const { return weight_; }
  Sign sign() const { return sign_; }
  std::size_t dimension() const { return basis_symbols_.size(); }
  const P1List& p1() const { return p1_; }
  std::size_t generator_count() const { return p1_.size() * static_cast<std::size_t>(weight_ - 1); }
  const std::vector<ManinSymbol>& basis_symbols() const { return basis_symbols_; }

  QVector manin_symbol_vector(const ManinSymbol& s) const;
  // P {0, a/c} with a/c in lowest terms (c = 0 means oo).
  QVector modular_symbol_vector(const Poly& p, std::int64_t a, std::int64_t c) const;

  // Rows indexed by cusp classes (merged under the star involution for Plus spaces).
  QMatrix boundary_map() const;
  std::size_t boundary_dimension() const;
  const Subspace& cuspidal_subspace() const;

  // Matrix of the star involution; identity on a Plus space.
  QMatrix star_involution() const;
  Subspace plus_subspace() const;
  Subspace minus_subspace() const;

  // T_q for q not dividing N, U_q for q | N; full ambient matrix, cached.
  const QMatrix& hecke_matrix(std::int64_t q) const;
  // T_q on the cuspidal subspace in its echelon basis, cached.
  const QMatrix& hecke_on_cuspidal(std::int64_t q) const;
  // T_q applied to one basis element, without forming the matrix.
  QVector hecke_image_of_basis(std::int64_t q, std::size_t basis_index) const;

  // Internal accumulation interface: adds coef * [X^i Y^(k-2-i), (c:d)] into per-class counters.
  struct Accumulator;
  void accumulate(Accumulator& acc, std::int64_t c, std::int64_t d, int i, const Integer& coef) const;
  QVector finish(const Accumulator& acc) const;

  // Class of a generator: representative index (or -1 for zero) and sign.
  struct ClassRef {
    int cls = -1;
    int sign = 0;
  };
  ClassRef generator_class(std::size_t point_index, int i) const;
  std::size_t class_count() const { return class_vectors_.size(); }
  const SparseQVector& class_vector(std::size_t cls) const { return class_vectors_[cls]; }

 private:
  ModSymSpace(std::int64_t level, int weight, Sign sign);
  void present();
  QVector heilbronn_image(const std::vector<Mat2>& heil, std::size_t basis_index) const;

  std::int64_t level_;
  int weight_;
  Sign sign_;
  P1List p1_;
  std::vector<ClassRef> gen_class_;           // generator -> class
  std::vector<SparseQVector> class_vectors_;  // class -> vector in the basis
  // class_vectors_ scaled by class_den_, when every entry fits comfortably in a machine word
  Integer class_den_ = 1;
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> class_small_;
  std::vector<ManinSymbol> basis_symbols_;

  struct Cache;
  std::unique_ptr<Cache> cache_;
};

struct ModSymSpace::Accumulator {
  std::vector<Integer> by_class;
  std::vector<std::uint32_t> touched;
};

// Right action of an integer matrix on X^i Y^(m-i): coefficients of (aX+bY)^i (cX+dY)^(m-i).
Poly act_on_monomial(const Mat2& h, int i, int m);
// Left action g P(X, Y) = P(dX - bY, -cX + aY).
Poly left_act(const Mat2& g, const Poly& p);

// Down map x -> diag(t,1) x from level N to level M (t*M | N). Matrix is dim(small) x dim(big).
QMatrix degeneracy_map(const ModSymSpace& big, const ModSymSpace& small, std::int64_t t);
// Up map with t = 1 (transfer from Gamma_0(M) to Gamma_0(N)); dim(big) x dim(small).
QMatrix degeneracy_up_map(const ModSymSpace& small, const ModSymSpace& big);

std::int64_t sturm_bound(std::int64_t level, int weight);

}  // namespace hlr
