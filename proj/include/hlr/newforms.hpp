#pragma once

// New subspaces, degeneracy kernels and rational newform extraction.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "hlr/modsym.hpp"

namespace hlr {

struct Eigensystem {
  std::int64_t level = 0;
  int weight = 0;
  // a_q for primes q <= bound: T_q eigenvalue if q does not divide the level, U_q otherwise.
  std::map<std::int64_t, Integer> eigenvalues;
  std::set<std::int64_t> new_at;
  std::int64_t bound = 0;
  std::string label;

  // Throws MissingPrime.
  const Integer& a(std::int64_t q) const;
  bool operator==(const Eigensystem&) const = default;
};

// |a_q| <= 2 q^((k-1)/2), as floor(sqrt(4 q^(k-1))).
Integer deligne_window(std::int64_t q, int weight);

// a_1 .. a_B (index 0 holds a_1). Throws MissingPrime if a prime <= B is absent.
std::vector<Integer> eigen_qexpansion(const Eigensystem& e, std::int64_t b);

// Intersection of the cuspidal kernels of the two degeneracy maps to level N / q, for every prime q | N.
Subspace new_subspace(const ModSymSpace& s);
// Cuspidal kernel of the t = 1 and t = l maps from level lN to level N.
Subspace l_new_subspace(const ModSymSpace& big, std::int64_t l);
// beta_1(C_N) + U_l beta_1(C_N) inside the cuspidal space at level lN.
Subspace l_old_subspace(const ModSymSpace& big, const ModSymSpace& small, std::int64_t l);

struct NewformDecomposition {
  std::int64_t level = 0;
  int weight = 0;
  std::size_t cuspidal_dim = 0;
  std::size_t new_dim = 0;
  std::vector<Eigensystem> forms;  // sorted by eigenvalue tuple, labelled N.k.a.<letter>
  std::size_t undecomposed_dim = 0;
  // Hecke-stable span of the pieces without rational eigenlines, in ambient coordinates.
  Subspace undecomposed_space;
};

// Rational newforms of a Plus space, eigenvalues at all primes <= b.
NewformDecomposition rational_newforms(const ModSymSpace& s, std::int64_t b);

// Persistent backing for decompositions; load returns nothing on a miss.
class DecompositionStore {
 public:
  virtual ~DecompositionStore() = default;
  virtual std::optional<NewformDecomposition> load(std::int64_t level, int weight) = 0;
  virtual void save(const NewformDecomposition& d) = 0;
};

// Memoizes Plus spaces and newform decompositions per (level, weight).
class Workspace {
 public:
  explicit Workspace(DecompositionStore* store = nullptr) : store_(store) {}
  const ModSymSpace& space(std::int64_t level, int weight);
  // Decomposition with eigenvalues to at least b.
  const NewformDecomposition& newforms(std::int64_t level, int weight, std::int64_t b);
  void store(const NewformDecomposition& d);

 private:
  std::map<std::pair<std::int64_t, int>, std::unique_ptr<ModSymSpace>> spaces_;
  std::map<std::pair<std::int64_t, int>, NewformDecomposition> forms_;
  DecompositionStore* store_ = nullptr;
};

// True when every form carries eigenvalues up to b.
bool covers_bound(const NewformDecomposition& d, std::int64_t b);

std::string form_letter(std::size_t index);

}  // namespace hlr
