#include "hlr/zpr.hpp"

#include <algorithm>

#include "hlr/arith.hpp"
#include "hlr/error.hpp"

namespace hlr {

namespace {

std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t m) {
  return static_cast<std::int64_t>(static_cast<__int128>(a) * b % m);
}

std::int64_t powmod(std::int64_t a, std::int64_t e, std::int64_t m) {
  std::int64_t r = 1 % m;
  a = floor_mod(a, m);
  while (e > 0) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

std::int64_t invmod(std::int64_t a, std::int64_t m) {
  auto x = xgcd(floor_mod(a, m), m);
  if (x.g != 1) throw Error(ErrorKind::NotUnit, "element is not invertible");
  return floor_mod(x.s, m);
}

int val_int(std::int64_t x, std::int64_t p) {
  int v = 0;
  while (x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

}  // namespace

PrimePower PrimePower::make(std::int64_t p, int r) {
  if (p < 3 || !is_prime(p)) throw Error(ErrorKind::InvalidModulus, "p must be an odd prime");
  if (r < 1) throw Error(ErrorKind::InvalidModulus, "r must be positive");
  __int128 m = 1;
  for (int i = 0; i < r; ++i) {
    m *= p;
    if (m >= (static_cast<__int128>(1) << 62)) throw Error(ErrorKind::InvalidModulus, "p^r too large");
  }
  return {p, r};
}

std::int64_t PrimePower::modulus() const { return ipow(p, r); }

ZmodPr::ZmodPr(const PrimePower& m, std::int64_t value) : m_(m), v_(floor_mod(value, m.modulus())) {}

ZmodPr::ZmodPr(const PrimePower& m, const Integer& value) : m_(m), v_(0) {
  Integer mod = static_cast<long>(m.modulus());
  Integer r = value % mod;
  if (r < 0) r += mod;
  v_ = r.get_si();
}

int ZmodPr::valuation() const { return v_ == 0 ? m_.r : val_int(v_, m_.p); }

ZmodPr ZmodPr::inverse() const { return {m_, invmod(v_, m_.modulus())}; }

ZmodPr ZmodPr::operator+(const ZmodPr& o) const { return {m_, (v_ + o.v_) % m_.modulus()}; }
ZmodPr ZmodPr::operator-(const ZmodPr& o) const { return {m_, v_ - o.v_}; }
ZmodPr ZmodPr::operator*(const ZmodPr& o) const { return {m_, mulmod(v_, o.v_, m_.modulus())}; }
ZmodPr ZmodPr::operator-() const { return {m_, -v_}; }

int valp(const Integer& x, std::int64_t p) {
  if (x == 0) throw Error(ErrorKind::ZeroInput, "valuation of zero");
  Integer pp = static_cast<long>(p);
  Integer y = x;
  return static_cast<int>(mpz_remove(y.get_mpz_t(), x.get_mpz_t(), pp.get_mpz_t()));
}

int valp(const Rational& x, std::int64_t p) {
  if (sgn(x) == 0) throw Error(ErrorKind::ZeroInput, "valuation of zero");
  return valp(Integer(x.get_num()), p) - valp(Integer(x.get_den()), p);
}

ZmodPr reduce(const Rational& x, const PrimePower& m) {
  if (x.get_den() % m.p == 0) throw Error(ErrorKind::DenominatorNotUnit, "p divides the denominator");
  ZmodPr num(m, Integer(x.get_num()));
  ZmodPr den(m, Integer(x.get_den()));
  return num * den.inverse();
}

std::pair<ZmodPr, ZmodPr> hensel_sqrt(const ZmodPr& u) {
  const auto& m = u.modulus();
  const std::int64_t p = m.p;
  if (!u.is_unit()) throw Error(ErrorKind::NotUnit, "square root of a non-unit");
  const std::int64_t a = u.value() % p;
  if (powmod(a, (p - 1) / 2, p) != 1) throw Error(ErrorKind::NonResidue, "not a square modulo p");
  // Tonelli-Shanks modulo p.
  std::int64_t q = p - 1;
  int s = 0;
  while (q % 2 == 0) {
    q /= 2;
    ++s;
  }
  std::int64_t z = 2;
  while (powmod(z, (p - 1) / 2, p) != p - 1) ++z;
  std::int64_t c = powmod(z, q, p), x = powmod(a, (q + 1) / 2, p), t = powmod(a, q, p);
  int mm = s;
  while (t != 1) {
    int i = 0;
    std::int64_t tt = t;
    while (tt != 1) {
      tt = mulmod(tt, tt, p);
      ++i;
    }
    std::int64_t bb = c;
    for (int j = 0; j < mm - i - 1; ++j) bb = mulmod(bb, bb, p);
    x = mulmod(x, bb, p);
    c = mulmod(bb, bb, p);
    t = mulmod(t, c, p);
    mm = i;
  }
  // Newton steps lift the root to p^r.
  const std::int64_t mod = m.modulus();
  for (int k = 0; k < m.r; ++k) {
    std::int64_t f = floor_mod(mulmod(x, x, mod) - u.value(), mod);
    x = floor_mod(x - mulmod(f, invmod(2 * x % mod, mod), mod), mod);
  }
  std::int64_t y = floor_mod(-x, mod);
  if (y < x) std::swap(x, y);
  return {ZmodPr(m, x), ZmodPr(m, y)};
}

// ---------------------------------------------------------------- matrices

ZmodPrMatrix ZmodPrMatrix::from_rows(const PrimePower& m, const std::vector<std::vector<std::int64_t>>& rows,
                                     std::size_t cols) {
  ZmodPrMatrix a(m, rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw Error(ErrorKind::DimensionMismatch, "row length");
    for (std::size_t j = 0; j < cols; ++j) a.set(i, j, rows[i][j]);
  }
  return a;
}

ZmodPrMatrix ZmodPrMatrix::identity(const PrimePower& m, std::size_t n) {
  ZmodPrMatrix a(m, n, n);
  for (std::size_t i = 0; i < n; ++i) a.set(i, i, 1);
  return a;
}

void ZmodPrMatrix::set(std::size_t i, std::size_t j, std::int64_t v) {
  data_[i * cols_ + j] = floor_mod(v, m_.modulus());
}

std::vector<std::int64_t> ZmodPrMatrix::row(std::size_t i) const {
  return {data_.begin() + static_cast<std::ptrdiff_t>(i * cols_), data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_)};
}

ZmodPrMatrix ZmodPrMatrix::transpose() const {
  ZmodPrMatrix t(m_, cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t.set(j, i, at(i, j));
  return t;
}

std::vector<std::int64_t> ZmodPrMatrix::apply(const std::vector<std::int64_t>& x) const {
  if (x.size() != cols_) throw Error(ErrorKind::DimensionMismatch, "matrix-vector product");
  const std::int64_t mod = m_.modulus();
  std::vector<std::int64_t> out(rows_, 0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[i] = (out[i] + mulmod(at(i, j), floor_mod(x[j], mod), mod)) % mod;
  return out;
}

namespace {

using Row = std::vector<std::int64_t>;

struct HowellRows {
  std::vector<Row> rows;
  std::vector<std::size_t> pivot_cols;
  std::vector<int> pivot_vals;  // valuation of each pivot
};

HowellRows howell_rows(std::vector<Row> work, std::size_t cols, const PrimePower& m) {
  const std::int64_t mod = m.modulus();
  const std::int64_t p = m.p;
  HowellRows out;
  for (std::size_t c = 0; c < cols; ++c) {
    std::size_t best = work.size();
    int best_v = m.r;
    for (std::size_t i = 0; i < work.size(); ++i) {
      if (work[i][c] == 0) continue;
      int v = val_int(work[i][c], p);
      if (v < best_v) {
        best_v = v;
        best = i;
      }
    }
    if (best == work.size()) continue;
    Row piv = std::move(work[best]);
    work.erase(work.begin() + static_cast<std::ptrdiff_t>(best));
    const std::int64_t pv = ipow(p, best_v);
    const std::int64_t unit_inv = invmod(piv[c] / pv, mod);
    for (auto& x : piv) x = mulmod(x, unit_inv, mod);
    for (auto& row : work) {
      if (row[c] == 0) continue;
      const std::int64_t f = row[c] / pv;
      for (std::size_t j = c; j < cols; ++j) row[j] = floor_mod(row[j] - mulmod(f, piv[j], mod), mod);
    }
    // p^(r-v) * pivot row vanishes in column c but may survive further right.
    Row extra(cols, 0);
    const std::int64_t ann = ipow(p, m.r - best_v);
    bool nonzero = false;
    for (std::size_t j = c + 1; j < cols; ++j) {
      extra[j] = mulmod(piv[j], ann, mod);
      nonzero = nonzero || extra[j] != 0;
    }
    if (nonzero) work.push_back(std::move(extra));
    out.rows.push_back(std::move(piv));
    out.pivot_cols.push_back(c);
    out.pivot_vals.push_back(best_v);
    std::erase_if(work, [](const Row& r) { return std::all_of(r.begin(), r.end(), [](std::int64_t x) { return x == 0; }); });
  }
  // Reduce entries above each pivot into [0, p^v).
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    const std::size_t c = out.pivot_cols[k];
    const std::int64_t pv = ipow(p, out.pivot_vals[k]);
    for (std::size_t i = 0; i < k; ++i) {
      const std::int64_t f = out.rows[i][c] / pv;
      if (f == 0) continue;
      for (std::size_t j = c; j < cols; ++j) out.rows[i][j] = floor_mod(out.rows[i][j] - mulmod(f, out.rows[k][j], mod), mod);
    }
  }
  return out;
}

}  // namespace

ZmodPrMatrix howell_form(const ZmodPrMatrix& a) {
  std::vector<Row> work;
  for (std::size_t i = 0; i < a.rows(); ++i) work.push_back(a.row(i));
  auto h = howell_rows(std::move(work), a.cols(), a.modulus());
  ZmodPrMatrix out(a.modulus(), h.rows.size(), a.cols());
  for (std::size_t i = 0; i < h.rows.size(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out.set(i, j, h.rows[i][j]);
  return out;
}

SolveResult solve(const ZmodPrMatrix& a, const std::vector<std::int64_t>& b) {
  const std::size_t m = a.rows(), n = a.cols();
  if (b.size() != m) throw Error(ErrorKind::DimensionMismatch, "right-hand side length");
  const auto& pm = a.modulus();
  const std::int64_t mod = pm.modulus();
  // Rows (A y, y) for y = e_j span {(A y, y)}.
  std::vector<Row> work;
  for (std::size_t j = 0; j < n; ++j) {
    Row r(m + n, 0);
    for (std::size_t i = 0; i < m; ++i) r[i] = a.at(i, j);
    r[m + j] = 1;
    work.push_back(std::move(r));
  }
  auto h = howell_rows(std::move(work), m + n, pm);
  Row w(m + n, 0);
  for (std::size_t i = 0; i < m; ++i) w[i] = floor_mod(b[i], mod);
  SolveResult out;
  for (std::size_t k = 0; k < h.rows.size(); ++k) {
    const std::size_t c = h.pivot_cols[k];
    if (c >= m) {
      out.kernel.emplace_back(h.rows[k].begin() + static_cast<std::ptrdiff_t>(m), h.rows[k].end());
      continue;
    }
    const std::int64_t pv = ipow(pm.p, h.pivot_vals[k]);
    if (w[c] % pv != 0) throw Error(ErrorKind::NoSolution, "right-hand side not in the column span");
    const std::int64_t f = w[c] / pv;
    for (std::size_t j = c; j < m + n; ++j) w[j] = floor_mod(w[j] - mulmod(f, h.rows[k][j], mod), mod);
  }
  for (std::size_t i = 0; i < m; ++i)
    if (w[i] != 0) throw Error(ErrorKind::NoSolution, "right-hand side not in the column span");
  for (std::size_t j = 0; j < n; ++j) out.particular.push_back(floor_mod(-w[m + j], mod));
  return out;
}

std::vector<std::vector<std::int64_t>> kernel_modpr(const ZmodPrMatrix& a) {
  return solve(a, std::vector<std::int64_t>(a.rows(), 0)).kernel;
}

ZmodPrMatrix inverse_modpr(const ZmodPrMatrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorKind::DimensionMismatch, "inverse of a non-square matrix");
  const std::int64_t mod = a.modulus().modulus();
  std::vector<Row> w(n, Row(2 * n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) w[i][j] = a.at(i, j);
    w[i][n + i] = 1;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && w[piv][c] % a.modulus().p == 0) ++piv;
    if (piv == n) throw Error(ErrorKind::NotUnit, "determinant is not a unit");
    std::swap(w[piv], w[c]);
    const std::int64_t inv = invmod(w[c][c], mod);
    for (auto& x : w[c]) x = mulmod(x, inv, mod);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || w[i][c] == 0) continue;
      const std::int64_t f = w[i][c];
      for (std::size_t j = 0; j < 2 * n; ++j) w[i][j] = floor_mod(w[i][j] - mulmod(f, w[c][j], mod), mod);
    }
  }
  ZmodPrMatrix out(a.modulus(), n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.set(i, j, w[i][n + j]);
  return out;
}

}  // namespace hlr
