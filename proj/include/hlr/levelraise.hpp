#pragma once

// Level raising conditions, congruence depths between levels N and lN, Diamond
// families and eigenforms modulo p^r.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hlr/newforms.hpp"
#include "hlr/zpr.hpp"

namespace hlr {

inline constexpr int kDefaultDepthCap = 10;

// A p-adic valuation. infinite: the quantity vanishes exactly. capped: only known
// to be at least value.
struct Depth {
  int value = 0;
  bool infinite = false;
  bool capped = false;

  bool finite() const { return !infinite && !capped; }
  bool operator==(const Depth&) const = default;
};

std::string to_string(const Depth& d);

struct LRCInput {
  Eigensystem f;
  std::int64_t l = 0;
  std::int64_t p = 0;
  std::int64_t chi_l = 1;  // integer representative of chi(l), a unit mod p
  int r = 1;
};

// Throws InvalidInput when l | pN, p | N, or l, p are not primes with p odd.
// Returns the hypothesis diagnostics that do not block computation.
std::vector<std::string> lrc_warnings(const LRCInput& in);

struct LRCReport {
  Depth s_sq, s_plus, s_minus;
  int v = 0;  // v_p(l + 1)
  Integer r_l;
  bool r_l_exact = true;  // otherwise r_l is a residue modulo p^cap
  std::vector<std::string> warnings;
};

// r with r^2 = l^(k-2) chi_l in Z/p^r. Even k with chi_l = 1 gives l^((k-2)/2); otherwise the
// smaller Hensel root. Throws InsufficientField, NotUnit.
ZmodPr r_l_scalar(std::int64_t l, int weight, const ZmodPr& chi_l, const PrimePower& m);

LRCReport lrc_depths(const LRCInput& in, int cap = kDefaultDepthCap);

// min over primes q <= b, q not excluded, of v_p(a_q(f) - a_q(g)), capped at cap.
// exclude defaults to the primes dividing p * lcm(levels). Throws BoundTooSmall.
int certify_congruence(const Eigensystem& f, const Eigensystem& g, std::int64_t p,
                       const std::optional<std::set<std::int64_t>>& exclude, std::int64_t b,
                       int cap = kDefaultDepthCap);

bool trace_relation_check(const Eigensystem& f, const Eigensystem& g, std::int64_t l, std::int64_t p, int d);

// Largest s <= cap for which the p-saturated lattice of the Hecke-stable subspace w
// has a primitive vector x with T x = lambda_T x mod p^s for every prescribed operator.
struct LatticeEigenvector {
  int depth = 0;
  std::vector<std::int64_t> coordinates;  // in the saturated lattice basis, mod p^depth
  std::size_t lattice_rank = 0;
};
LatticeEigenvector lattice_eigenvector(const ModSymSpace& s, const Subspace& w, std::int64_t p,
                                       const std::map<std::int64_t, Integer>& lambda, int cap = kDefaultDepthCap);

struct DiamondMember {
  Eigensystem g;
  int d = 0;
};

// Eigenvector depth of the irrational part of the l-new space contributed by level M.
struct ComponentWitness {
  std::int64_t level = 0;
  std::size_t dim = 0;
  int depth = 0;
};

struct DiamondFamily {
  Eigensystem f;
  std::int64_t l = 0, p = 0, bound = 0;
  LRCReport lrc;
  std::vector<DiamondMember> members;
  int sum_d = 0;
  std::size_t undecomposed_dim = 0;
  std::vector<ComponentWitness> components;
  bool full = false;
  int full_depth = 0;
  std::string full_source;  // "rational member" or "irrational component"
};

// b = 0 selects sturm_bound(lN, k).
DiamondFamily diamond_family(Workspace& ws, const Eigensystem& f, std::int64_t l, std::int64_t p,
                             std::int64_t b = 0, int cap = kDefaultDepthCap);

struct ModPrEigenform {
  PrimePower modulus;
  std::int64_t level = 0;
  int weight = 0;
  std::vector<std::int64_t> coefficients;  // a_1 .. a_B
  std::vector<std::int64_t> combination;
  std::vector<std::string> span;  // labels the combination refers to
  bool ingested = false;

  std::int64_t a(std::int64_t n) const { return coefficients.at(static_cast<std::size_t>(n - 1)); }
};

struct EigenCheck {
  bool ok = true;
  std::string failure;  // "a1", "multiplicative" (m, n) or "prime-power" (q, e) for a_{q^e}
  std::int64_t m = 0, n = 0;
};

EigenCheck verify_eigenform_modpr(const ModPrEigenform& h);

// sum_j c_j f_j modulo p^r up to b, at level lcm of the form levels.
ModPrEigenform combine_forms(const std::vector<Eigensystem>& forms, const std::vector<std::int64_t>& c,
                             const PrimePower& m, std::int64_t b);

// Every combination of the forms that is a normalized eigenform mod p^r up to b, with
// eigenvalue lambda_q at each constrained prime q. Throws EmptySpan, UnstableConstraint,
// and InvalidInput when the candidate set exceeds limit.
std::vector<ModPrEigenform> eigenforms_modpr_in_span(const std::vector<Eigensystem>& forms, const PrimePower& m,
                                                     const std::map<std::int64_t, std::int64_t>& constraints,
                                                     std::int64_t b, std::size_t limit = 1u << 20);

struct RaiseBranch {
  int eps = 1;
  Depth s;
  // "member": reduction of a rational l-new eigenform; "span": combination of rational
  // l-new eigenforms; "module": Hecke eigenvector mod p^s in the l-new lattice, outside the
  // rational span; "none": not found within the rational span or the l-new lattice.
  std::string witness;
  std::string member_label;
  std::vector<std::int64_t> combination;
  std::vector<std::string> span;
  int witness_depth = 0;
  std::int64_t a_l = 0;  // U_l eigenvalue of the witness mod p^witness_depth
  bool hida = false;
};

struct RaiseReport {
  LRCReport lrc;
  DiamondFamily family;
  std::vector<RaiseBranch> branches;
};

RaiseReport classify_level_raising(Workspace& ws, const LRCInput& in, std::int64_t b = 0, int cap = kDefaultDepthCap);

}  // namespace hlr
