#pragma once

// Arithmetic and linear algebra over Z/p^r for odd primes p.

#include <cstdint>
#include <utility>
#include <vector>

#include "hlr/exactlin.hpp"

namespace hlr {

struct PrimePower {
  std::int64_t p = 3;
  int r = 1;

  // Validates p odd prime, r >= 1, p^r < 2^62. Throws InvalidModulus.
  static PrimePower make(std::int64_t p, int r);
  std::int64_t modulus() const;
  bool operator==(const PrimePower&) const = default;
};

class ZmodPr {
 public:
  ZmodPr(const PrimePower& m, std::int64_t value);
  ZmodPr(const PrimePower& m, const Integer& value);

  const PrimePower& modulus() const { return m_; }
  std::int64_t value() const { return v_; }
  bool is_unit() const { return v_ % m_.p != 0; }
  // p-adic valuation of the residue, r for zero.
  int valuation() const;
  ZmodPr inverse() const;  // throws NotUnit

  ZmodPr operator+(const ZmodPr& o) const;
  ZmodPr operator-(const ZmodPr& o) const;
  ZmodPr operator*(const ZmodPr& o) const;
  ZmodPr operator-() const;
  bool operator==(const ZmodPr& o) const = default;

 private:
  PrimePower m_;
  std::int64_t v_;
};

// v_p(x) for x != 0; throws ZeroInput.
int valp(const Rational& x, std::int64_t p);
int valp(const Integer& x, std::int64_t p);

// Throws DenominatorNotUnit.
ZmodPr reduce(const Rational& x, const PrimePower& m);

// Both square roots of a unit, smaller residue first. Throws NotUnit, NonResidue.
std::pair<ZmodPr, ZmodPr> hensel_sqrt(const ZmodPr& u);

class ZmodPrMatrix {
 public:
  ZmodPrMatrix(const PrimePower& m, std::size_t rows, std::size_t cols)
      : m_(m), rows_(rows), cols_(cols), data_(rows * cols, 0) {}
  static ZmodPrMatrix from_rows(const PrimePower& m, const std::vector<std::vector<std::int64_t>>& rows, std::size_t cols);
  static ZmodPrMatrix identity(const PrimePower& m, std::size_t n);

  const PrimePower& modulus() const { return m_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::int64_t at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  void set(std::size_t i, std::size_t j, std::int64_t v);
  std::vector<std::int64_t> row(std::size_t i) const;
  ZmodPrMatrix transpose() const;
  std::vector<std::int64_t> apply(const std::vector<std::int64_t>& x) const;  // A x

  bool operator==(const ZmodPrMatrix& o) const = default;

 private:
  PrimePower m_;
  std::size_t rows_, cols_;
  std::vector<std::int64_t> data_;
};

// Canonical Howell form of the row module; zero rows are dropped.
ZmodPrMatrix howell_form(const ZmodPrMatrix& a);

struct SolveResult {
  std::vector<std::int64_t> particular;
  std::vector<std::vector<std::int64_t>> kernel;  // generators of {x : A x = 0}
};

// All x with A x = b: particular + span(kernel). Throws NoSolution.
SolveResult solve(const ZmodPrMatrix& a, const std::vector<std::int64_t>& b);
std::vector<std::vector<std::int64_t>> kernel_modpr(const ZmodPrMatrix& a);
// Inverse of a square matrix whose determinant is a unit. Throws NotUnit.
ZmodPrMatrix inverse_modpr(const ZmodPrMatrix& a);

}  // namespace hlr
