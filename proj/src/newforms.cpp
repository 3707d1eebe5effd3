#include "hlr/newforms.hpp"

#include <algorithm>

#include "hlr/arith.hpp"
#include "hlr/error.hpp"

namespace hlr {

const Integer& Eigensystem::a(std::int64_t q) const {
  auto it = eigenvalues.find(q);
  if (it == eigenvalues.end())
    throw Error(ErrorKind::MissingPrime, "a_" + std::to_string(q) + " missing for " + label);
  return it->second;
}

Integer deligne_window(std::int64_t q, int weight) {
  Integer x = 4;
  Integer qq = static_cast<long>(q);
  for (int i = 0; i < weight - 1; ++i) x *= qq;
  return sqrt(x);
}

std::vector<Integer> eigen_qexpansion(const Eigensystem& e, std::int64_t b) {
  std::vector<Integer> a(static_cast<std::size_t>(std::max<std::int64_t>(b, 1)) + 1);
  a[1] = 1;
  for (std::int64_t n = 2; n <= b; ++n) {
    auto f = factor(n);
    auto [q, ex] = f.front();
    std::int64_t qe = ipow(q, ex);
    auto un = static_cast<std::size_t>(n);
    if (qe != n) {
      a[un] = a[static_cast<std::size_t>(qe)] * a[static_cast<std::size_t>(n / qe)];
      continue;
    }
    const Integer& aq = e.a(q);
    if (ex == 1) {
      a[un] = aq;
      continue;
    }
    a[un] = aq * a[static_cast<std::size_t>(n / q)];
    if (e.level % q != 0) {
      Integer qk = static_cast<long>(q);
      mpz_pow_ui(qk.get_mpz_t(), qk.get_mpz_t(), static_cast<unsigned long>(e.weight - 1));
      a[un] -= qk * a[static_cast<std::size_t>(n / q / q)];
    }
  }
  a.erase(a.begin());
  a.resize(static_cast<std::size_t>(std::max<std::int64_t>(b, 0)));
  return a;
}

// ------------------------------------------------------------ subspaces

namespace {

// Rows of both degeneracy maps from s to level small_level.
QMatrix degeneracy_rows(const ModSymSpace& big, std::int64_t small_level, std::int64_t t) {
  auto small = ModSymSpace::build_unchecked(small_level, big.weight(), big.sign());
  return QMatrix::vstack(degeneracy_map(big, small, 1), degeneracy_map(big, small, t));
}

}  // namespace

Subspace new_subspace(const ModSymSpace& s) {
  QMatrix m = s.boundary_map();
  for (auto q : prime_divisors(s.level())) m = QMatrix::vstack(m, degeneracy_rows(s, s.level() / q, q));
  return kernel_basis(m);
}

Subspace l_new_subspace(const ModSymSpace& big, std::int64_t l) {
  if (!is_prime(l) || big.level() % l != 0 || (big.level() / l) % l == 0)
    throw Error(ErrorKind::BadDivisor, "l must divide the level exactly once");
  return kernel_basis(QMatrix::vstack(big.boundary_map(), degeneracy_rows(big, big.level() / l, l)));
}

Subspace l_old_subspace(const ModSymSpace& big, const ModSymSpace& small, std::int64_t l) {
  if (big.level() != small.level() * l || small.level() % l == 0)
    throw Error(ErrorKind::BadDivisor, "expected levels N and lN with l not dividing N");
  QMatrix up = degeneracy_up_map(small, big);
  const QMatrix& u = big.hecke_matrix(l);
  const Subspace& c = small.cuspidal_subspace();
  std::vector<QVector> gens;
  for (std::size_t i = 0; i < c.dim(); ++i) {
    QVector v = up * c.basis().row(i);
    gens.push_back(u * std::span<const Rational>(v));
    gens.push_back(std::move(v));
  }
  return Subspace::span(big.dimension(), gens);
}

// ------------------------------------------------------------ newforms

namespace {

// Eigenvalue of T_q (or U_q) on the line through v, computed exactly.
Integer eigenvalue_on_line(const ModSymSpace& s, std::int64_t q, std::span<const Rational> v) {
  QVector image = s.hecke_matrix(q) * v;
  std::size_t piv = 0;
  while (sgn(v[piv]) == 0) ++piv;
  Rational a = image[piv] / v[piv];
  for (std::size_t i = 0; i < v.size(); ++i)
    if (image[i] != a * v[i]) throw Error(ErrorKind::StructuralError, "eigenline is not Hecke-stable");
  if (a.get_den() != 1) throw Error(ErrorKind::StructuralError, "non-integral eigenvalue on a rational line");
  return a.get_num();
}

modp::Matrix reduce_matrix(const QMatrix& m) {
  modp::Matrix out(m.rows(), std::vector<std::uint64_t>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!modp::reduce(m(i, j), out[i][j])) throw Error(ErrorKind::StructuralError, "denominator divisible by the filter prime");
  return out;
}

// A functional w on the ambient space with w T_q = a_q w for all good q, determined
// modulo the filter prime. Once its kernel is one-dimensional, the reduction of the
// true eigen-functional spans it, so w(T_q e_j) / w(e_j) recovers a_q mod P exactly.
struct DualFunctional {
  std::vector<std::uint64_t> w;
  std::size_t j = 0;
};

DualFunctional dual_functional(const ModSymSpace& s, std::map<std::int64_t, Integer>& known,
                               std::span<const Rational> line) {
  const std::size_t n = s.dimension();
  modp::Matrix stacked(n);
  for (std::int64_t q = 2; q < 400; ++q) {
    if (!is_prime(q) || s.level() % q == 0) continue;
    if (!known.count(q)) known[q] = eigenvalue_on_line(s, q, line);
    modp::Matrix t = reduce_matrix(s.hecke_matrix(q));
    std::uint64_t a = modp::reduce_int(known[q]);
    for (std::size_t i = 0; i < n; ++i) {
      t[i][i] = (t[i][i] + modp::kPrime - a) % modp::kPrime;
      stacked[i].insert(stacked[i].end(), t[i].begin(), t[i].end());
    }
    modp::Matrix ker = modp::left_kernel(stacked);
    if (ker.size() > 1) continue;
    if (ker.empty()) throw Error(ErrorKind::StructuralError, "eigen-functional vanished modulo the filter prime");
    DualFunctional out{ker[0], 0};
    while (out.w[out.j] == 0) ++out.j;
    return out;
  }
  throw Error(ErrorKind::StructuralError, "could not isolate an eigen-functional");
}

Integer dual_eigenvalue(const ModSymSpace& s, const DualFunctional& f, std::int64_t q) {
  QVector y = s.hecke_image_of_basis(q, f.j);
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (sgn(y[i]) == 0 || f.w[i] == 0) continue;
    std::uint64_t yi = 0;
    if (!modp::reduce(y[i], yi)) throw Error(ErrorKind::StructuralError, "denominator divisible by the filter prime");
    acc = (acc + modp::mul(yi, f.w[i])) % modp::kPrime;
  }
  std::uint64_t val = modp::mul(acc, modp::inv(f.w[f.j]));
  Integer a = static_cast<unsigned long>(val);
  if (val > modp::kPrime / 2) a -= static_cast<unsigned long>(modp::kPrime);
  return a;
}

}  // namespace

std::string form_letter(std::size_t index) {
  std::string out;
  ++index;
  while (index > 0) {
    --index;
    out.insert(out.begin(), static_cast<char>('a' + index % 26));
    index /= 26;
  }
  return out;
}

NewformDecomposition rational_newforms(const ModSymSpace& s, std::int64_t b) {
  if (s.sign() != Sign::Plus) throw Error(ErrorKind::InvalidInput, "newform extraction runs on a Plus space");
  if (b < 2) throw Error(ErrorKind::InvalidInput, "prime bound must be at least 2");
  const std::int64_t n = s.level();
  const int k = s.weight();
  NewformDecomposition out;
  out.level = n;
  out.weight = k;
  const Subspace& c = s.cuspidal_subspace();
  out.cuspidal_dim = c.dim();
  Subspace nw = new_subspace(s);
  out.new_dim = nw.dim();

  std::vector<QVector> coords;
  for (std::size_t i = 0; i < nw.dim(); ++i) {
    QVector x;
    c.coordinates(nw.basis().row(i), x);
    coords.push_back(std::move(x));
  }
  std::vector<Subspace> pieces;
  if (nw.dim() > 0) pieces.push_back(Subspace::span(c.dim(), coords));
  std::vector<Subspace> lines;
  std::vector<QVector> leftover;
  for (std::int64_t q = 2; !pieces.empty(); ++q) {
    if (!is_prime(q) || n % q == 0) continue;
    if (q > 400) throw Error(ErrorKind::StructuralError, "eigenspaces failed to separate");
    const QMatrix& r = s.hecke_on_cuspidal(q);
    std::vector<Subspace> next;
    for (const auto& piece : pieces) {
      auto split = integer_eigen_split(r, piece, deligne_window(q, k));
      out.undecomposed_dim += split.remainder.dim();
      for (std::size_t i = 0; i < split.remainder.dim(); ++i)
        leftover.push_back(c.from_coordinates(split.remainder.basis().row(i)));
      for (auto& [a, e] : split.eigenspaces) (e.dim() == 1 ? lines : next).push_back(std::move(e));
    }
    pieces = std::move(next);
  }
  out.undecomposed_space = Subspace::span(s.dimension(), leftover);

  const auto primes = primes_up_to(b);
  for (const auto& line : lines) {
    QVector v = c.from_coordinates(line.basis().row(0));
    Eigensystem e;
    e.level = n;
    e.weight = k;
    e.bound = b;
    for (auto p : prime_divisors(n)) e.new_at.insert(p);
    std::map<std::int64_t, Integer> known;
    for (auto q : primes)
      if (q <= 13 || n % q == 0) known[q] = eigenvalue_on_line(s, q, v);
    DualFunctional f = dual_functional(s, known, v);
    for (auto q : primes) {
      auto it = known.find(q);
      Integer a = it != known.end() ? it->second : dual_eigenvalue(s, f, q);
      if (n % q != 0 && abs(a) > deligne_window(q, k))
        throw Error(ErrorKind::StructuralError, "eigenvalue outside the Deligne bound");
      e.eigenvalues[q] = a;
    }
    out.forms.push_back(std::move(e));
  }
  std::sort(out.forms.begin(), out.forms.end(), [](const Eigensystem& x, const Eigensystem& y) {
    return std::lexicographical_compare(x.eigenvalues.begin(), x.eigenvalues.end(), y.eigenvalues.begin(),
                                        y.eigenvalues.end(), [](const auto& p, const auto& q) { return p.second < q.second; });
  });
  for (std::size_t i = 0; i < out.forms.size(); ++i)
    out.forms[i].label = std::to_string(n) + "." + std::to_string(k) + ".a." + form_letter(i);
  return out;
}

// ------------------------------------------------------------ workspace

const ModSymSpace& Workspace::space(std::int64_t level, int weight) {
  auto key = std::make_pair(level, weight);
  auto it = spaces_.find(key);
  if (it == spaces_.end())
    it = spaces_.emplace(key, std::make_unique<ModSymSpace>(ModSymSpace::build_unchecked(level, weight, Sign::Plus))).first;
  return *it->second;
}

bool covers_bound(const NewformDecomposition& d, std::int64_t b) {
  return std::all_of(d.forms.begin(), d.forms.end(), [&](const Eigensystem& e) { return e.bound >= b; });
}

const NewformDecomposition& Workspace::newforms(std::int64_t level, int weight, std::int64_t b) {
  auto key = std::make_pair(level, weight);
  auto it = forms_.find(key);
  if (it != forms_.end() && covers_bound(it->second, b)) return it->second;
  if (store_) {
    auto loaded = store_->load(level, weight);
    if (loaded && covers_bound(*loaded, b)) return forms_[key] = std::move(*loaded);
  }
  forms_[key] = rational_newforms(space(level, weight), b);
  if (store_) store_->save(forms_[key]);
  return forms_[key];
}

void Workspace::store(const NewformDecomposition& d) { forms_[{d.level, d.weight}] = d; }

}  // namespace hlr
