#include "hlr/exactlin.hpp"

#include <algorithm>
#include <cassert>
#include <optional>

#include "hlr/error.hpp"

namespace hlr {

QMatrix QMatrix::identity(std::size_t n) {
  QMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

QMatrix QMatrix::diagonal(std::span<const Rational> diag) {
  QMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

QMatrix QMatrix::from_rows(std::size_t cols, const std::vector<QVector>& rows) {
  QMatrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw Error(ErrorKind::DimensionMismatch, "row length");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

QMatrix QMatrix::from_columns(std::size_t rows, const std::vector<QVector>& cols) {
  QMatrix m(rows, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != rows) throw Error(ErrorKind::DimensionMismatch, "column length");
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = cols[j][i];
  }
  return m;
}

QVector QMatrix::row_vector(std::size_t i) const {
  auto r = row(i);
  return QVector(r.begin(), r.end());
}

QVector QMatrix::column(std::size_t j) const {
  QVector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

QMatrix QMatrix::transpose() const {
  QMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

QMatrix QMatrix::operator*(const QMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw Error(ErrorKind::DimensionMismatch, "matrix product");
  QMatrix out(rows_, rhs.cols_);
  Rational tmp;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const Rational& a = (*this)(i, k);
      if (sgn(a) == 0) continue;
      for (std::size_t j = 0; j < rhs.cols_; ++j) {
        const Rational& b = rhs(k, j);
        if (sgn(b) == 0) continue;
        tmp = a * b;
        out(i, j) += tmp;
      }
    }
  }
  return out;
}

QVector QMatrix::operator*(std::span<const Rational> v) const {
  if (cols_ != v.size()) throw Error(ErrorKind::DimensionMismatch, "matrix-vector product");
  QVector out(rows_);
  Rational tmp;
  for (std::size_t k = 0; k < cols_; ++k) {
    if (sgn(v[k]) == 0) continue;
    for (std::size_t i = 0; i < rows_; ++i) {
      const Rational& a = (*this)(i, k);
      if (sgn(a) == 0) continue;
      tmp = a * v[k];
      out[i] += tmp;
    }
  }
  return out;
}

QMatrix QMatrix::operator+(const QMatrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw Error(ErrorKind::DimensionMismatch, "matrix sum");
  QMatrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
  return out;
}

QMatrix QMatrix::operator-(const QMatrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw Error(ErrorKind::DimensionMismatch, "matrix difference");
  QMatrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
  return out;
}

QMatrix QMatrix::scaled(const Rational& c) const {
  QMatrix out = *this;
  for (auto& x : out.data_) x *= c;
  return out;
}

QMatrix QMatrix::shifted(const Rational& c) const {
  if (rows_ != cols_) throw Error(ErrorKind::DimensionMismatch, "shift of non-square matrix");
  QMatrix out = *this;
  for (std::size_t i = 0; i < rows_; ++i) out(i, i) -= c;
  return out;
}

bool QMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const Rational& x) { return sgn(x) == 0; });
}

bool QMatrix::operator==(const QMatrix& rhs) const {
  return rows_ == rhs.rows_ && cols_ == rhs.cols_ && data_ == rhs.data_;
}

QMatrix QMatrix::vstack(const QMatrix& top, const QMatrix& bottom) {
  if (top.cols_ != bottom.cols_) throw Error(ErrorKind::DimensionMismatch, "vstack");
  QMatrix out(top.rows_ + bottom.rows_, top.cols_);
  std::copy(top.data_.begin(), top.data_.end(), out.data_.begin());
  std::copy(bottom.data_.begin(), bottom.data_.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(top.data_.size()));
  return out;
}

namespace {

// Cheapest pivot in a column: fewest limbs, so entries grow slowly.
std::size_t entry_size(const Rational& x) {
  return mpz_size(x.get_num_mpz_t()) + mpz_size(x.get_den_mpz_t());
}

}  // namespace

static RrefResult rref_direct(QMatrix m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  Rational factor, tmp;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t best = rows;
    std::size_t best_size = 0;
    for (std::size_t i = r; i < rows; ++i) {
      if (sgn(m(i, c)) == 0) continue;
      std::size_t sz = entry_size(m(i, c));
      if (best == rows || sz < best_size) {
        best = i;
        best_size = sz;
      }
    }
    if (best == rows) continue;
    if (best != r) {
      auto a = m.row(best);
      auto b = m.row(r);
      std::swap_ranges(a.begin(), a.end(), b.begin());
    }
    auto prow = m.row(r);
    if (prow[c] != 1) {
      factor = 1 / prow[c];
      for (std::size_t j = c; j < cols; ++j)
        if (sgn(prow[j]) != 0) prow[j] *= factor;
    }
    std::vector<std::size_t> support;
    for (std::size_t j = c; j < cols; ++j)
      if (sgn(prow[j]) != 0) support.push_back(j);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      auto row = m.row(i);
      if (sgn(row[c]) == 0) continue;
      factor = row[c];
      for (std::size_t j : support) {
        tmp = factor * prow[j];
        row[j] -= tmp;
      }
    }
    pivots.push_back(c);
    ++r;
  }
  return {std::move(m), std::move(pivots)};
}

namespace {

using Residues = std::vector<std::vector<std::uint64_t>>;

// Reduced echelon form modulo a word prime; returns the pivot columns.
std::vector<std::size_t> rref_mod(Residues& a, std::size_t cols, std::uint64_t p) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < a.size(); ++c) {
    std::size_t piv = r;
    while (piv < a.size() && a[piv][c] == 0) ++piv;
    if (piv == a.size()) continue;
    std::swap(a[piv], a[r]);
    std::uint64_t h = modp::inv(a[r][c], p);
    for (std::size_t j = c; j < cols; ++j) a[r][j] = modp::mul(a[r][j], h, p);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == r || a[i][c] == 0) continue;
      std::uint64_t f = p - a[i][c];
      for (std::size_t j = c; j < cols; ++j)
        if (a[r][j] != 0) a[i][j] = (a[i][j] + modp::mul(f, a[r][j], p)) % p;
    }
    pivots.push_back(c);
    ++r;
  }
  a.resize(r);
  return pivots;
}

// Rational reconstruction of u mod m with |num|, den <= sqrt(m/2).
bool rational_reconstruct(const Integer& u, const Integer& m, Rational& out) {
  Integer bound = sqrt(Integer(m / 2));
  Integer r0 = m, r1 = u, t0 = 0, t1 = 1, q, tmp;
  while (r1 > bound) {
    q = r0 / r1;
    tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  if (abs(t1) > bound || t1 == 0) return false;
  Integer g = gcd(r1, t1);
  if (g != 1) return false;
  out = Rational(r1, t1);
  out.canonicalize();
  return true;
}

// Row span of m equals the row span of the candidate echelon form r (rank(r) is
// a lower bound for rank(m) because it came from a reduction mod p).
bool spans_match(const QMatrix& m, const QMatrix& r, const std::vector<std::size_t>& pivots) {
  Rational acc, tmp;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) {
      acc = 0;
      for (std::size_t k = 0; k < pivots.size(); ++k) {
        const Rational& c = row[pivots[k]];
        if (sgn(c) == 0 || sgn(r(k, j)) == 0) continue;
        tmp = c * r(k, j);
        acc += tmp;
      }
      if (acc != row[j]) return false;
    }
  }
  return true;
}

std::optional<RrefResult> rref_multimodular(const QMatrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  std::vector<std::vector<Integer>> a(rows, std::vector<Integer>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    Integer den = 1;
    for (const auto& x : m.row(i)) den = lcm(den, Integer(x.get_den()));
    for (std::size_t j = 0; j < cols; ++j) a[i][j] = m(i, j).get_num() * (den / m(i, j).get_den());
  }
  Integer prime = Integer(1) << 62;
  std::vector<std::size_t> best;
  std::vector<std::vector<Integer>> crt;
  Integer modulus = 1;
  std::size_t used = 0, next_try = 1;
  for (int attempt = 0; attempt < 400; ++attempt) {
    mpz_nextprime(prime.get_mpz_t(), prime.get_mpz_t());
    const std::uint64_t p = mpz_get_ui(prime.get_mpz_t());
    Residues red(rows, std::vector<std::uint64_t>(cols));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) red[i][j] = mpz_fdiv_ui(a[i][j].get_mpz_t(), p);
    auto piv = rref_mod(red, cols, p);
    bool better = used == 0 || piv.size() > best.size() ||
                  (piv.size() == best.size() && std::lexicographical_compare(piv.begin(), piv.end(), best.begin(), best.end()));
    if (!better && piv != best) continue;
    if (better && piv != best) {
      best = piv;
      used = 0;
      next_try = 1;
      modulus = 1;
      crt.assign(piv.size(), std::vector<Integer>(cols));
    }
    // CRT update
    Integer inv_m;
    Integer pp = static_cast<unsigned long>(p);
    mpz_invert(inv_m.get_mpz_t(), Integer(modulus % pp).get_mpz_t(), pp.get_mpz_t());
    Integer diff;
    for (std::size_t i = 0; i < piv.size(); ++i)
      for (std::size_t j = 0; j < cols; ++j) {
        diff = Integer(static_cast<unsigned long>(red[i][j])) - crt[i][j];
        diff = diff * inv_m % pp;
        if (diff < 0) diff += pp;
        crt[i][j] += modulus * diff;
      }
    modulus *= pp;
    ++used;
    if (used < next_try) continue;
    next_try = used + std::max<std::size_t>(1, used / 2);
    QMatrix r(rows, cols);
    bool ok = true;
    for (std::size_t i = 0; i < piv.size() && ok; ++i)
      for (std::size_t j = 0; j < cols && ok; ++j) ok = rational_reconstruct(crt[i][j], modulus, r(i, j));
    if (ok && spans_match(m, r, best)) return RrefResult{std::move(r), best};
  }
  return std::nullopt;
}

}  // namespace

RrefResult rref(QMatrix m) {
  if (m.rows() * m.cols() <= 400) return rref_direct(std::move(m));
  auto res = rref_multimodular(m);
  if (res) return std::move(*res);
  return rref_direct(std::move(m));
}

std::size_t rank(const QMatrix& m) { return rref(m).pivots.size(); }

Subspace Subspace::span(const QMatrix& rows) {
  auto res = rref(rows);
  Subspace s(rows.cols());
  s.basis_ = QMatrix(res.pivots.size(), rows.cols());
  for (std::size_t i = 0; i < res.pivots.size(); ++i) {
    auto src = res.form.row(i);
    std::copy(src.begin(), src.end(), s.basis_.row(i).begin());
  }
  s.pivots_ = std::move(res.pivots);
  return s;
}

Subspace Subspace::span(std::size_t ambient_dim, const std::vector<QVector>& vectors) {
  return span(QMatrix::from_rows(ambient_dim, vectors));
}

Subspace Subspace::full(std::size_t ambient_dim) { return span(QMatrix::identity(ambient_dim)); }

bool Subspace::coordinates(std::span<const Rational> v, QVector& out) const {
  if (v.size() != ambient_) throw Error(ErrorKind::DimensionMismatch, "coordinates");
  out.assign(dim(), Rational(0));
  for (std::size_t i = 0; i < pivots_.size(); ++i) out[i] = v[pivots_[i]];
  // v must equal sum out[i] * basis_i exactly
  QVector check(ambient_);
  Rational tmp;
  for (std::size_t i = 0; i < pivots_.size(); ++i) {
    if (sgn(out[i]) == 0) continue;
    auto b = basis_.row(i);
    for (std::size_t j = 0; j < ambient_; ++j) {
      if (sgn(b[j]) == 0) continue;
      tmp = out[i] * b[j];
      check[j] += tmp;
    }
  }
  for (std::size_t j = 0; j < ambient_; ++j)
    if (check[j] != v[j]) return false;
  return true;
}

bool Subspace::contains(std::span<const Rational> v) const {
  QVector coords;
  return coordinates(v, coords);
}

bool Subspace::contains(const Subspace& other) const {
  if (other.ambient_ != ambient_) throw Error(ErrorKind::DimensionMismatch, "contains");
  for (std::size_t i = 0; i < other.dim(); ++i)
    if (!contains(other.basis_.row(i))) return false;
  return true;
}

QVector Subspace::from_coordinates(std::span<const Rational> coords) const {
  if (coords.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "from_coordinates");
  QVector v(ambient_);
  Rational tmp;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (sgn(coords[i]) == 0) continue;
    auto b = basis_.row(i);
    for (std::size_t j = 0; j < ambient_; ++j) {
      if (sgn(b[j]) == 0) continue;
      tmp = coords[i] * b[j];
      v[j] += tmp;
    }
  }
  return v;
}

Subspace Subspace::sum(const Subspace& other) const {
  if (other.ambient_ != ambient_) throw Error(ErrorKind::DimensionMismatch, "sum");
  return span(QMatrix::vstack(basis_, other.basis_));
}

Subspace kernel_basis(const QMatrix& m) {
  const std::size_t cols = m.cols();
  auto res = rref(m);
  std::vector<bool> is_pivot(cols, false);
  for (auto c : res.pivots) is_pivot[c] = true;
  std::vector<QVector> vecs;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    QVector v(cols);
    v[free] = 1;
    for (std::size_t i = 0; i < res.pivots.size(); ++i) v[res.pivots[i]] = -res.form(i, free);
    vecs.push_back(std::move(v));
  }
  return Subspace::span(cols, vecs);
}

Subspace image(const QMatrix& m) { return Subspace::span(m.transpose()); }

Subspace intersect(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim()) throw Error(ErrorKind::DimensionMismatch, "intersect");
  const std::size_t n = a.ambient_dim();
  if (a.dim() == 0 || b.dim() == 0) return Subspace(n);
  // x in A and B: sum x_i a_i = sum y_j b_j, kernel of [A^T | -B^T].
  const std::size_t da = a.dim();
  const std::size_t db = b.dim();
  QMatrix sys(n, da + db);
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < n; ++j) sys(j, i) = a.basis()(i, j);
  for (std::size_t i = 0; i < db; ++i)
    for (std::size_t j = 0; j < n; ++j) sys(j, da + i) = -b.basis()(i, j);
  Subspace ker = kernel_basis(sys);
  std::vector<QVector> vecs;
  for (std::size_t r = 0; r < ker.dim(); ++r) {
    auto row = ker.basis().row(r);
    vecs.push_back(a.from_coordinates(row.subspan(0, da)));
  }
  return Subspace::span(n, vecs);
}

QMatrix restrict_operator(const QMatrix& t, const Subspace& s) {
  if (t.rows() != s.ambient_dim() || t.cols() != s.ambient_dim())
    throw Error(ErrorKind::DimensionMismatch, "restrict_operator");
  const std::size_t d = s.dim();
  QMatrix out(d, d);
  QVector coords;
  for (std::size_t j = 0; j < d; ++j) {
    QVector img = t * s.basis().row(j);
    if (!s.coordinates(img, coords)) throw Error(ErrorKind::NotStable, "operator does not preserve the subspace");
    for (std::size_t i = 0; i < d; ++i) out(i, j) = coords[i];
  }
  return out;
}

Subspace lift_subspace(const Subspace& inner, const Subspace& outer) {
  if (inner.ambient_dim() != outer.dim()) throw Error(ErrorKind::DimensionMismatch, "lift_subspace");
  std::vector<QVector> vecs;
  for (std::size_t i = 0; i < inner.dim(); ++i) vecs.push_back(outer.from_coordinates(inner.basis().row(i)));
  return Subspace::span(outer.ambient_dim(), vecs);
}

std::vector<Integer> primitive_integer_vector(std::span<const Rational> v) {
  Integer den = 1;
  for (const auto& x : v) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), x.get_den_mpz_t());
  std::vector<Integer> out(v.size());
  Integer g = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i].get_num() * (den / v[i].get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), out[i].get_mpz_t());
  }
  if (g > 1)
    for (auto& x : out) x /= g;
  return out;
}

EigenSplit integer_eigen_split(const QMatrix& t, const Subspace& s, const Integer& bound) {
  const std::size_t n = s.ambient_dim();
  EigenSplit out{{}, Subspace(n)};
  if (s.dim() == 0) return out;
  QMatrix r = restrict_operator(t, s);
  const std::size_t d = r.rows();

  // Candidate filter: det(R - a) mod p must vanish for an eigenvalue a.
  bool have_filter = true;
  modp::Matrix rp(d, std::vector<std::uint64_t>(d));
  for (std::size_t i = 0; i < d && have_filter; ++i)
    for (std::size_t j = 0; j < d && have_filter; ++j) have_filter = modp::reduce(r(i, j), rp[i][j]);
  std::vector<std::uint64_t> cp;
  if (have_filter) cp = modp::charpoly(rp);

  QMatrix remainder_op = QMatrix::identity(d);
  std::size_t total = 0;
  for (Integer a = -bound; a <= bound; ++a) {
    if (have_filter && modp::eval_poly(cp, modp::reduce_int(a)) != 0) continue;
    Subspace ker = kernel_basis(r.shifted(Rational(a)));
    if (ker.dim() == 0) continue;
    total += ker.dim();
    out.eigenspaces.emplace_back(a, lift_subspace(ker, s));
    remainder_op = r.shifted(Rational(a)) * remainder_op;
  }
  Subspace rem = image(remainder_op);
  if (total + rem.dim() != d) throw Error(ErrorKind::NotSemisimple, "eigenspaces and remainder do not span");
  out.remainder = lift_subspace(rem, s);
  return out;
}

namespace modp {

std::uint64_t mul(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}

std::uint64_t pow(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1 % p;
  a %= p;
  while (e) {
    if (e & 1) r = mul(r, a, p);
    a = mul(a, a, p);
    e >>= 1;
  }
  return r;
}

std::uint64_t inv(std::uint64_t a, std::uint64_t p) { return pow(a, p - 2, p); }

std::uint64_t reduce_int(const Integer& x, std::uint64_t p) {
  Integer m = x % Integer(static_cast<unsigned long>(p));
  if (m < 0) m += static_cast<unsigned long>(p);
  return m.get_ui();
}

bool reduce(const Rational& x, std::uint64_t& out, std::uint64_t p) {
  std::uint64_t den = reduce_int(x.get_den(), p);
  if (den == 0) return false;
  out = mul(reduce_int(x.get_num(), p), inv(den, p), p);
  return true;
}

namespace {
std::uint64_t add(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  std::uint64_t s = a + b;
  return s >= p ? s - p : s;
}
std::uint64_t sub(std::uint64_t a, std::uint64_t b, std::uint64_t p) { return a >= b ? a - b : a + p - b; }
}  // namespace

std::vector<std::uint64_t> charpoly(Matrix a, std::uint64_t p) {
  const std::size_t n = a.size();
  // Similarity reduction to upper Hessenberg form.
  for (std::size_t j = 0; j + 2 < n; ++j) {
    std::size_t piv = n;
    for (std::size_t i = j + 1; i < n; ++i)
      if (a[i][j] != 0) {
        piv = i;
        break;
      }
    if (piv == n) continue;
    if (piv != j + 1) {
      std::swap(a[piv], a[j + 1]);
      for (std::size_t r = 0; r < n; ++r) std::swap(a[r][piv], a[r][j + 1]);
    }
    std::uint64_t hinv = inv(a[j + 1][j], p);
    for (std::size_t i = j + 2; i < n; ++i) {
      if (a[i][j] == 0) continue;
      std::uint64_t u = mul(a[i][j], hinv, p);
      for (std::size_t c = 0; c < n; ++c) a[i][c] = sub(a[i][c], mul(u, a[j + 1][c], p), p);
      for (std::size_t r = 0; r < n; ++r) a[r][j + 1] = add(a[r][j + 1], mul(u, a[r][i], p), p);
    }
  }
  // polys[m] = charpoly of the leading m x m block.
  std::vector<std::vector<std::uint64_t>> polys(n + 1);
  polys[0] = {1};
  for (std::size_t m = 1; m <= n; ++m) {
    const auto& prev = polys[m - 1];
    std::vector<std::uint64_t> cur(m + 1, 0);
    for (std::size_t k = 0; k < prev.size(); ++k) {
      cur[k + 1] = add(cur[k + 1], prev[k], p);
      cur[k] = sub(cur[k], mul(a[m - 1][m - 1], prev[k], p), p);
    }
    std::uint64_t t = 1;
    for (std::size_t i = 1; i < m; ++i) {
      t = mul(t, a[m - i][m - i - 1], p);
      std::uint64_t coef = mul(t, a[m - i - 1][m - 1], p);
      if (coef == 0) continue;
      const auto& q = polys[m - i - 1];
      for (std::size_t k = 0; k < q.size(); ++k) cur[k] = sub(cur[k], mul(coef, q[k], p), p);
    }
    polys[m] = std::move(cur);
  }
  return polys[n];
}

std::uint64_t eval_poly(const std::vector<std::uint64_t>& c, std::uint64_t x, std::uint64_t p) {
  std::uint64_t r = 0;
  for (std::size_t i = c.size(); i-- > 0;) r = add(mul(r, x, p), c[i], p);
  return r;
}

Matrix left_kernel(const Matrix& a, std::uint64_t p) {
  const std::size_t n = a.size();
  if (n == 0) return {};
  const std::size_t m = a[0].size();
  // Row-reduce [A | I]; rows whose A-part vanishes give kernel vectors.
  Matrix aug(n, std::vector<std::uint64_t>(m + n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(a[i].begin(), a[i].end(), aug[i].begin());
    aug[i][m + i] = 1;
  }
  std::size_t r = 0;
  for (std::size_t c = 0; c < m && r < n; ++c) {
    std::size_t piv = n;
    for (std::size_t i = r; i < n; ++i)
      if (aug[i][c] != 0) {
        piv = i;
        break;
      }
    if (piv == n) continue;
    std::swap(aug[piv], aug[r]);
    std::uint64_t hinv = inv(aug[r][c], p);
    for (auto& x : aug[r]) x = mul(x, hinv, p);
    for (std::size_t i = r + 1; i < n; ++i) {
      if (aug[i][c] == 0) continue;
      std::uint64_t u = aug[i][c];
      for (std::size_t k = c; k < m + n; ++k) aug[i][k] = sub(aug[i][k], mul(u, aug[r][k], p), p);
    }
    ++r;
  }
  Matrix out;
  for (std::size_t i = r; i < n; ++i) out.emplace_back(aug[i].begin() + static_cast<std::ptrdiff_t>(m), aug[i].end());
  return out;
}

}  // namespace modp

}  // namespace hlr
