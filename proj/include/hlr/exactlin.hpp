#pragma once

// Exact linear algebra over Q on top of GMP rationals.
//
// Vectors are column vectors; an operator matrix T acts as T * v, so column j
// of T is the image of the j-th basis vector. Subspaces store their basis as
// the rows of a matrix in reduced echelon form.

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace hlr {

using Rational = mpq_class;
using Integer = mpz_class;
using QVector = std::vector<Rational>;

class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static QMatrix identity(std::size_t n);
  static QMatrix diagonal(std::span<const Rational> diag);
  static QMatrix from_rows(std::size_t cols, const std::vector<QVector>& rows);
  static QMatrix from_columns(std::size_t rows, const std::vector<QVector>& cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<Rational> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const Rational> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  QVector row_vector(std::size_t i) const;
  QVector column(std::size_t j) const;

  QMatrix transpose() const;
  QMatrix operator*(const QMatrix& rhs) const;
  QVector operator*(std::span<const Rational> v) const;
  QMatrix operator+(const QMatrix& rhs) const;
  QMatrix operator-(const QMatrix& rhs) const;
  QMatrix scaled(const Rational& c) const;
  // this - c * identity
  QMatrix shifted(const Rational& c) const;

  bool is_zero() const;
  bool operator==(const QMatrix& rhs) const;

  static QMatrix vstack(const QMatrix& top, const QMatrix& bottom);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

struct RrefResult {
  QMatrix form;
  std::vector<std::size_t> pivots;
};

RrefResult rref(QMatrix m);
std::size_t rank(const QMatrix& m);

class Subspace {
 public:
  explicit Subspace(std::size_t ambient_dim = 0) : ambient_(ambient_dim), basis_(0, ambient_dim) {}

  // Row span of the given matrix (any spanning set).
  static Subspace span(const QMatrix& rows);
  static Subspace span(std::size_t ambient_dim, const std::vector<QVector>& vectors);
  static Subspace full(std::size_t ambient_dim);

  std::size_t ambient_dim() const { return ambient_; }
  std::size_t dim() const { return basis_.rows(); }
  const QMatrix& basis() const { return basis_; }
  const std::vector<std::size_t>& pivots() const { return pivots_; }
  QVector basis_vector(std::size_t i) const { return basis_.row_vector(i); }

  bool contains(std::span<const Rational> v) const;
  bool contains(const Subspace& other) const;
  // Coordinates of v in the echelon basis; false if v is not in the subspace.
  bool coordinates(std::span<const Rational> v, QVector& out) const;
  QVector from_coordinates(std::span<const Rational> coords) const;

  Subspace sum(const Subspace& other) const;

  bool operator==(const Subspace& rhs) const { return ambient_ == rhs.ambient_ && basis_ == rhs.basis_; }

 private:
  std::size_t ambient_;
  QMatrix basis_;
  std::vector<std::size_t> pivots_;
};

// Right null space {x : M x = 0}.
Subspace kernel_basis(const QMatrix& m);
// Column space of M, as a subspace of Q^rows.
Subspace image(const QMatrix& m);
Subspace intersect(const Subspace& a, const Subspace& b);

// Matrix of T on S with respect to S's echelon basis. Throws NotStable.
QMatrix restrict_operator(const QMatrix& t, const Subspace& s);

// Embeds a subspace of Q^dim(S) (given in S-coordinates) back into the ambient space of S.
Subspace lift_subspace(const Subspace& inner, const Subspace& outer);

struct EigenSplit {
  std::vector<std::pair<Integer, Subspace>> eigenspaces;  // ascending eigenvalue
  Subspace remainder;
};

// Splits the T-stable subspace S into eigenspaces for integer eigenvalues a with
// |a| <= bound, plus a T-stable complement. Throws NotSemisimple if the pieces do
// not add up to S.
EigenSplit integer_eigen_split(const QMatrix& t, const Subspace& s, const Integer& bound);

// Smallest common denominator scaling; returns the primitive integer vector on the same line.
std::vector<Integer> primitive_integer_vector(std::span<const Rational> v);

// Word-size modular helpers used to filter candidates quickly. Results are
// only used as necessary conditions; exact confirmation always follows.
namespace modp {

constexpr std::uint64_t kPrime = 2305843009213693951ULL;  // 2^61 - 1

std::uint64_t mul(std::uint64_t a, std::uint64_t b, std::uint64_t p = kPrime);
std::uint64_t pow(std::uint64_t a, std::uint64_t e, std::uint64_t p = kPrime);
std::uint64_t inv(std::uint64_t a, std::uint64_t p = kPrime);
// False if the denominator is divisible by p.
bool reduce(const Rational& x, std::uint64_t& out, std::uint64_t p = kPrime);
std::uint64_t reduce_int(const Integer& x, std::uint64_t p = kPrime);

using Matrix = std::vector<std::vector<std::uint64_t>>;

// Characteristic polynomial coefficients c_0..c_n (monic, c_n = 1), Hessenberg method.
std::vector<std::uint64_t> charpoly(Matrix a, std::uint64_t p = kPrime);
std::uint64_t eval_poly(const std::vector<std::uint64_t>& c, std::uint64_t x, std::uint64_t p = kPrime);
// Basis of the left kernel {w : w A = 0} of an n x m matrix, as rows.
Matrix left_kernel(const Matrix& a, std::uint64_t p = kPrime);

}  // namespace modp

}  // namespace hlr
