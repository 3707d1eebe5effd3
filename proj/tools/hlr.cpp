#include <algorithm>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "hlr/arith.hpp"
#include "hlr/error.hpp"
#include "hlr/levelraise.hpp"
#include "hlr/records.hpp"
#include "json.hpp"

using nlohmann::ordered_json;
using namespace hlr;

namespace {

class QuietCache : public DecompositionStore {
 public:
  explicit QuietCache(std::filesystem::path root) : disk_(std::move(root)) {}
  std::optional<NewformDecomposition> load(std::int64_t level, int weight) override {
    return disk_.load(level, weight);
  }
  void save(const NewformDecomposition& d) override {
    try {
      disk_.save(d);
    } catch (const std::exception& e) {
      std::cerr << "warning: cache not written: " << e.what() << "\n";
    }
  }

 private:
  DiskCache disk_;
};

struct Context {
  QuietCache cache{DiskCache::default_root()};
  Workspace ws{&cache};
  RecordRegistry registry{RecordRegistry::default_root()};
  bool json = false;
};

ordered_json jint(const Integer& x) {
  if (x.fits_slong_p()) return x.get_si();
  return x.get_str();
}

ordered_json jdepth(const Depth& d) {
  if (d.finite()) return d.value;
  return to_string(d);
}

std::pair<std::int64_t, int> parse_label(const std::string& label) {
  std::vector<std::string> parts;
  std::stringstream ss(label);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  try {
    if (parts.size() == 4) return {std::stoll(parts[0]), std::stoi(parts[1])};
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::UnknownLabel, "cannot parse label '" + label + "'");
}

// Ingested records win over the engine for the same label.
Eigensystem resolve(Context& ctx, const std::string& label, std::int64_t b) {
  if (auto rec = ctx.registry.find(label)) {
    if (rec->bound < b)
      throw Error(ErrorKind::BoundTooSmall,
                  "ingested record " + label + " has bound " + std::to_string(rec->bound) + ", need " + std::to_string(b));
    return record_eigensystem(*rec);
  }
  auto [level, weight] = parse_label(label);
  const auto& dec = ctx.ws.newforms(level, weight, b);
  for (const auto& f : dec.forms)
    if (f.label == label) return f;
  throw Error(ErrorKind::UnknownLabel, "no rational newform " + label);
}

std::pair<std::int64_t, int> level_weight(Context& ctx, const std::string& label) {
  if (auto rec = ctx.registry.find(label)) return {rec->level, rec->weight};
  return parse_label(label);
}

std::int64_t form_bound(std::int64_t b, std::int64_t level, int weight) {
  return b > 0 ? b : sturm_bound(level, weight);
}

ordered_json lrc_json(const LRCReport& r) {
  return ordered_json{{"s_sq", jdepth(r.s_sq)},     {"s_plus", jdepth(r.s_plus)}, {"s_minus", jdepth(r.s_minus)},
                      {"v", r.v},                   {"r_l", jint(r.r_l)},         {"r_l_exact", r.r_l_exact},
                      {"warnings", r.warnings}};
}

void print_lrc(const LRCReport& r) {
  std::cout << "s_sq    " << to_string(r.s_sq) << "\n"
            << "s_plus  " << to_string(r.s_plus) << "\n"
            << "s_minus " << to_string(r.s_minus) << "\n"
            << "v       " << r.v << "\n"
            << "r_l     " << r.r_l << (r.r_l_exact ? "" : " (residue)") << "\n";
  for (const auto& w : r.warnings) std::cout << "warning: " << w << "\n";
}

std::string classification(const DiamondFamily& fam) {
  return fam.full ? "Full(" + std::to_string(fam.full_depth) + ")" : "Partial";
}

ordered_json family_json(const DiamondFamily& fam) {
  ordered_json members = ordered_json::array();
  for (const auto& m : fam.members)
    members.push_back({{"label", m.g.label}, {"level", m.g.level}, {"d", m.d}, {"a_l", jint(m.g.a(fam.l))},
                       {"trace_relation", trace_relation_check(fam.f, m.g, fam.l, fam.p, m.d)}});
  ordered_json comps = ordered_json::array();
  for (const auto& c : fam.components) comps.push_back({{"level", c.level}, {"dim", c.dim}, {"depth", c.depth}});
  return ordered_json{{"form", fam.f.label},
                      {"l", fam.l},
                      {"p", fam.p},
                      {"bound", fam.bound},
                      {"lrc", lrc_json(fam.lrc)},
                      {"members", members},
                      {"sum_d", fam.sum_d},
                      {"undecomposed_dim", fam.undecomposed_dim},
                      {"components", comps},
                      {"classification", classification(fam)},
                      {"source", fam.full_source}};
}

void print_family(const DiamondFamily& fam) {
  std::cout << "form " << fam.f.label << "  l=" << fam.l << "  p=" << fam.p << "  B=" << fam.bound << "\n";
  std::cout << "LRC (s_sq, s+, s-) = (" << to_string(fam.lrc.s_sq) << ", " << to_string(fam.lrc.s_plus) << ", "
            << to_string(fam.lrc.s_minus) << ")\n";
  std::cout << "members:\n";
  for (const auto& m : fam.members)
    std::cout << "  " << m.g.label << "  d=" << m.d << "  a_l=" << m.g.a(fam.l) << "\n";
  if (fam.members.empty()) std::cout << "  (none)\n";
  for (const auto& c : fam.components)
    std::cout << "component level " << c.level << "  dim " << c.dim << "  depth " << c.depth << "\n";
  std::cout << "sum d = " << fam.sum_d << "\n";
  std::cout << "classification: " << classification(fam);
  if (fam.full) std::cout << " from " << fam.full_source;
  std::cout << "\n";
}

ordered_json modpr_json(const ModPrEigenform& h, std::int64_t shown) {
  ordered_json a = ordered_json::object();
  for (auto q : primes_up_to(std::min<std::int64_t>(shown, static_cast<std::int64_t>(h.coefficients.size()))))
    a[std::to_string(q)] = h.a(q);
  return ordered_json{{"modulus", h.modulus.modulus()}, {"level", h.level}, {"span", h.span},
                      {"combination", h.combination}, {"a", a}};
}

std::vector<Eigensystem> resolve_span(Context& ctx, const std::vector<std::string>& labels, std::int64_t& b) {
  std::int64_t level = 1;
  int weight = 0;
  for (const auto& l : labels) {
    auto [n, k] = level_weight(ctx, l);
    level = std::lcm(level, n);
    weight = k;
  }
  b = form_bound(b, level, weight);
  std::vector<Eigensystem> forms;
  for (const auto& l : labels) forms.push_back(resolve(ctx, l, b));
  return forms;
}

int cmd_space(Context& ctx, std::int64_t n, int k, std::int64_t b) {
  if (k % 2 != 0 || k < 2) throw Error(ErrorKind::UnsupportedWeight, "weight must be even and at least 2");
  if (b <= 0) b = 13;
  const auto full = ModSymSpace::build(n, k, Sign::Both);
  const auto& plus = ctx.ws.space(n, k);
  const auto& dec = ctx.ws.newforms(n, k, b);
  const std::size_t cusp = full.cuspidal_subspace().dim();
  const std::size_t plus_cusp = plus.cuspidal_subspace().dim();
  if (ctx.json) {
    ordered_json forms = ordered_json::array();
    for (const auto& f : dec.forms) {
      ordered_json a = ordered_json::object();
      for (auto q : primes_up_to(b)) a[std::to_string(q)] = jint(f.a(q));
      forms.push_back({{"label", f.label}, {"a", a}});
    }
    ordered_json out{{"level", n},
                     {"weight", k},
                     {"full_dimension", full.dimension()},
                     {"cuspidal_dimension", cusp},
                     {"plus_cuspidal_dimension", plus_cusp},
                     {"new_dimension", dec.new_dim},
                     {"undecomposed_new_dimension", dec.undecomposed_dim},
                     {"bound", b},
                     {"rational_newforms", forms}};
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::cout << "level " << n << "  weight " << k << "\n"
            << "full dimension           " << full.dimension() << "\n"
            << "cuspidal dimension       " << cusp << "\n"
            << "plus cuspidal dimension  " << plus_cusp << "\n"
            << "new dimension            " << dec.new_dim << "\n";
  if (dec.undecomposed_dim) std::cout << "new, not rational        " << dec.undecomposed_dim << "\n";
  for (const auto& f : dec.forms) {
    std::cout << f.label;
    for (auto q : primes_up_to(b)) std::cout << "  a" << q << "=" << f.a(q);
    std::cout << "\n";
  }
  return 0;
}

int cmd_lrc(Context& ctx, const std::string& label, const std::string& an_file, std::int64_t l, std::int64_t p,
            int r, int cap) {
  Eigensystem f;
  if (!an_file.empty()) {
    auto recs = ingest(an_file);
    if (recs.size() != 1) throw Error(ErrorKind::SchemaError, "--an-file must hold exactly one record");
    f = record_eigensystem(recs.front());
  } else {
    f = resolve(ctx, label, l);
  }
  auto rep = lrc_depths(LRCInput{f, l, p, 1, r}, cap);
  if (ctx.json) {
    ordered_json out{{"form", f.label}, {"l", l}, {"p", p}, {"a_l", jint(f.a(l))}, {"lrc", lrc_json(rep)}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "form " << f.label << "  l=" << l << "  p=" << p << "  a_l=" << f.a(l) << "\n";
    print_lrc(rep);
  }
  return 0;
}

Eigensystem form_for_family(Context& ctx, const std::string& label, std::int64_t l, std::int64_t& b) {
  auto [n, k] = level_weight(ctx, label);
  b = form_bound(b, l * n, k);
  return resolve(ctx, label, b);
}

int cmd_diamond(Context& ctx, const std::string& label, std::int64_t l, std::int64_t p, std::int64_t b, int cap) {
  auto f = form_for_family(ctx, label, l, b);
  auto fam = diamond_family(ctx.ws, f, l, p, b, cap);
  if (ctx.json)
    std::cout << family_json(fam).dump(2) << "\n";
  else
    print_family(fam);
  return 0;
}

int cmd_raise(Context& ctx, const std::string& label, std::int64_t l, std::int64_t p, int r, std::int64_t b, int cap) {
  auto f = form_for_family(ctx, label, l, b);
  auto rep = classify_level_raising(ctx.ws, LRCInput{f, l, p, 1, r}, b, cap);
  if (ctx.json) {
    ordered_json branches = ordered_json::array();
    for (const auto& br : rep.branches)
      branches.push_back({{"eps", br.eps},
                          {"s", jdepth(br.s)},
                          {"witness", br.witness},
                          {"member", br.member_label},
                          {"span", br.span},
                          {"combination", br.combination},
                          {"witness_depth", br.witness_depth},
                          {"a_l", br.a_l},
                          {"hida", br.hida}});
    ordered_json out{{"lrc", lrc_json(rep.lrc)}, {"family", family_json(rep.family)}, {"branches", branches}};
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  print_family(rep.family);
  for (const auto& br : rep.branches) {
    std::cout << "eps " << (br.eps > 0 ? "+1" : "-1") << "  s=" << to_string(br.s) << "  witness " << br.witness;
    if (!br.member_label.empty()) std::cout << " " << br.member_label;
    if (!br.combination.empty()) {
      std::string sep = " (";
      for (std::size_t i = 0; i < br.combination.size(); ++i)
        if (br.combination[i] != 0) {
          std::cout << sep << br.combination[i] << "*" << br.span[i];
          sep = " + ";
        }
      std::cout << ")";
    }
    std::cout << "  a_l=" << br.a_l << " mod " << rep.family.p << "^" << br.witness_depth
              << "  hida=" << (br.hida ? "yes" : "no") << "\n";
  }
  return 0;
}

std::map<std::int64_t, std::int64_t> parse_constraints(const std::vector<std::string>& items) {
  std::map<std::int64_t, std::int64_t> out;
  for (const auto& s : items) {
    auto eq = s.find('=');
    try {
      if (eq == std::string::npos) throw std::invalid_argument(s);
      out[std::stoll(s.substr(0, eq))] = std::stoll(s.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidInput, "constraint '" + s + "' is not of the form q=value");
    }
  }
  return out;
}

int cmd_modpr_search(Context& ctx, const std::vector<std::string>& labels, std::int64_t p, int r,
                     const std::vector<std::string>& constrain, const std::string& agree, std::int64_t b) {
  auto forms = resolve_span(ctx, labels, b);
  const auto m = PrimePower::make(p, r);
  auto constraints = parse_constraints(constrain);
  if (!agree.empty()) {
    auto g = resolve(ctx, agree, b);
    std::int64_t level = g.level;
    for (const auto& f : forms) level = std::lcm(level, f.level);
    for (auto q : primes_up_to(b))
      if (level % q != 0 && q != p && !constraints.count(q)) constraints[q] = static_cast<std::int64_t>(mpz_fdiv_ui(g.a(q).get_mpz_t(), static_cast<unsigned long>(m.modulus())));
  }
  std::vector<ModPrEigenform> found;
  try {
    found = eigenforms_modpr_in_span(forms, m, constraints, b);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnstableConstraint) throw;
  }
  if (ctx.json) {
    ordered_json sols = ordered_json::array();
    for (const auto& h : found) sols.push_back(modpr_json(h, 13));
    ordered_json out{{"p", p}, {"r", r}, {"bound", b}, {"span", labels}, {"solutions", sols}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << found.size() << " solution(s) mod " << p << "^" << r << " up to B=" << b << "\n";
    for (const auto& h : found) {
      std::cout << " ";
      for (auto c : h.combination) std::cout << " " << c;
      std::cout << "  |";
      for (auto q : primes_up_to(13)) std::cout << " a" << q << "=" << h.a(q);
      std::cout << "\n";
    }
  }
  return found.empty() ? 1 : 0;
}

int cmd_verify(Context& ctx, const std::vector<std::string>& labels, const std::vector<std::int64_t>& c,
               std::int64_t p, int r, std::int64_t b) {
  auto forms = resolve_span(ctx, labels, b);
  auto h = combine_forms(forms, c, PrimePower::make(p, r), b);
  auto chk = verify_eigenform_modpr(h);
  if (ctx.json) {
    ordered_json out{{"p", p},          {"r", r},         {"bound", b},  {"span", labels},
                     {"combination", h.combination},      {"ok", chk.ok}};
    if (!chk.ok) out["failure"] = {{"kind", chk.failure}, {"m", chk.m}, {"n", chk.n}};
    out["a"] = modpr_json(h, 13)["a"];
    std::cout << out.dump(2) << "\n";
  } else if (chk.ok) {
    std::cout << "eigenform mod " << p << "^" << r << " up to B=" << b << "\n";
  } else {
    std::cout << "not an eigenform mod " << p << "^" << r << ": " << chk.failure << " at (" << chk.m << "," << chk.n
              << ")\n";
  }
  return chk.ok ? 0 : 1;
}

int cmd_ingest(Context& ctx, const std::string& path) {
  auto recs = ingest(path);
  for (const auto& r : recs) ctx.registry.add(r);
  if (ctx.json) {
    ordered_json labels = ordered_json::array();
    for (const auto& r : recs) labels.push_back(r.label);
    std::cout << ordered_json{{"ingested", labels}}.dump(2) << "\n";
  } else {
    for (const auto& r : recs) std::cout << "ingested " << r.label << " (B=" << r.bound << ")\n";
  }
  return 0;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotStable:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NotSemisimple:
    case ErrorKind::StructuralError:
    case ErrorKind::CacheError:
      return 3;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hecke eigenforms, level raising and congruences modulo prime powers"};
  app.require_subcommand(1);
  app.fallthrough();
  Context ctx;
  app.add_flag("--json", ctx.json, "Machine-readable output");

  std::int64_t n = 0, l = 0, p = 0, b = 0;
  int k = 0, r = 1, cap = kDefaultDepthCap;
  std::string label, an_file, agree, path;
  std::vector<std::string> span, constrain;
  std::vector<std::int64_t> combination;

  auto* space = app.add_subcommand("space", "Dimensions and rational newforms of S_k(Gamma0(N))");
  space->add_option("N", n)->required();
  space->add_option("k", k)->required();
  space->add_option("--bound", b, "Eigenvalues shown up to this bound (default 13)");

  auto* lrc = app.add_subcommand("lrc", "Level raising condition depths");
  lrc->add_option("label", label);
  lrc->add_option("--an-file", an_file, "JSON record of the form");
  lrc->add_option("--l", l)->required();
  lrc->add_option("--p", p)->required();
  lrc->add_option("--r", r);
  lrc->add_option("--cap", cap);

  auto* raise = app.add_subcommand("raise", "Classify level raising with witnesses");
  raise->add_option("label", label)->required();
  raise->add_option("--l", l)->required();
  raise->add_option("--p", p)->required();
  raise->add_option("--r", r);
  raise->add_option("--bound", b);
  raise->add_option("--cap", cap);

  auto* diamond = app.add_subcommand("diamond", "Diamond congruence family");
  diamond->add_option("label", label)->required();
  diamond->add_option("--l", l)->required();
  diamond->add_option("--p", p)->required();
  diamond->add_option("--bound", b);
  diamond->add_option("--cap", cap);

  auto* search = app.add_subcommand("modpr-search", "Eigenforms mod p^r in a span of newforms");
  search->add_option("--span", span)->required();
  search->add_option("--p", p)->required();
  search->add_option("--r", r)->required();
  search->add_option("--constrain", constrain, "q=value");
  search->add_option("--agree", agree, "Constrain to the eigenvalues of this form away from the levels and p");
  search->add_option("--bound", b);

  auto* verify = app.add_subcommand("verify", "Check a combination of newforms is an eigenform mod p^r");
  verify->add_option("--span", span)->required();
  verify->add_option("--combination", combination)->required();
  verify->add_option("--p", p)->required();
  verify->add_option("--r", r)->required();
  verify->add_option("--bound", b);

  auto* ingest_cmd = app.add_subcommand("ingest", "Register newform records from a JSON file");
  ingest_cmd->add_option("FILE", path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*space) return cmd_space(ctx, n, k, b);
    if (*lrc) {
      if (label.empty() == an_file.empty()) throw Error(ErrorKind::InvalidInput, "give exactly one of LABEL or --an-file");
      return cmd_lrc(ctx, label, an_file, l, p, r, cap);
    }
    if (*raise) return cmd_raise(ctx, label, l, p, r, b, cap);
    if (*diamond) return cmd_diamond(ctx, label, l, p, b, cap);
    if (*search) return cmd_modpr_search(ctx, span, p, r, constrain, agree, b);
    if (*verify) return cmd_verify(ctx, span, combination, p, r, b);
    if (*ingest_cmd) return cmd_ingest(ctx, path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
