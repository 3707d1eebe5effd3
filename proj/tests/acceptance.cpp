// Acceptance checks. One line per criterion; the process fails when a criterion fails
// that is not listed in kKnownUnattainable.

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "hlr/arith.hpp"
#include "hlr/levelraise.hpp"
#include "hlr/records.hpp"

using namespace hlr;
namespace fs = std::filesystem;

namespace {

// Criterion 5 asks for the combination (1, 3, 5, 18), which has a_1 = 27 and is not a
// normalized eigenform mod 27; see the README.
const std::set<int> kKnownUnattainable{5};

struct Line {
  int id;
  bool pass;
  std::string text;
};
std::vector<Line> results;

void report(int id, bool pass, const std::string& text) {
  results.push_back({id, pass, text});
  std::cout << (pass ? "PASS" : "FAIL") << "  #" << id << "  " << text << std::endl;
}

std::string join(const std::vector<std::int64_t>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

std::vector<std::int64_t> a2_to_a6(const Eigensystem& f) {
  auto an = eigen_qexpansion(f, 6);
  std::vector<std::int64_t> out;
  for (std::size_t i = 1; i < an.size(); ++i) out.push_back(an[i].get_si());
  return out;
}

const Eigensystem* find_form(const NewformDecomposition& d, std::vector<std::int64_t> a2_a6) {
  for (const auto& f : d.forms)
    if (a2_to_a6(f) == a2_a6) return &f;
  return nullptr;
}

const Eigensystem* find_label(const NewformDecomposition& d, const std::string& label) {
  for (const auto& f : d.forms)
    if (f.label == label) return &f;
  return nullptr;
}

std::int64_t mod(const Integer& x, std::int64_t m) {
  return static_cast<std::int64_t>(mpz_fdiv_ui(x.get_mpz_t(), static_cast<unsigned long>(m)));
}

std::string depths(const LRCReport& r) {
  return "(" + to_string(r.s_sq) + ", " + to_string(r.s_plus) + ", " + to_string(r.s_minus) + ")";
}

struct Run {
  std::string out;
  int code = -1;
};

Run run(const std::string& cmd) {
  Run r;
  FILE* pipe = ::popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

int main() {
  const fs::path tmp = fs::temp_directory_path() / ("hlr-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(tmp / "data");
  ::setenv("HLR_CACHE_DIR", (tmp / "cache").c_str(), 1);
  ::setenv("HLR_DATA_DIR", (tmp / "data").c_str(), 1);

  DiskCache cache(tmp / "cache");
  Workspace ws(&cache);

  // 1. engine cross-check at level 22
  const auto d22 = ws.newforms(22, 4, 72);
  const Eigensystem* f1p = find_form(d22, {-2, -7, 4, -19, 14});
  const Eigensystem* f2p = find_form(d22, {2, 1, 4, -3, 2});
  report(1, f1p && f2p,
         "S_4(Gamma0(22)) rational newforms contain f1 a2..a6 = (-2,-7,4,-19,14) and f2 a2..a6 = (2,1,4,-3,2) "
         "[exact]");
  if (!f1p || !f2p) return 1;
  const Eigensystem f1 = *f1p, f2 = *f2p;
  const Eigensystem f13 = ws.newforms(13, 4, 112).forms.at(0);
  const Eigensystem f23 = ws.newforms(23, 4, 112).forms.at(0);
  const Eigensystem f18 = ws.newforms(18, 4, 360).forms.at(0);

  // 8 runs first, so that the first CLI pass starts from an empty cache.
  const std::string cli = HLR_CLI_PATH;
  const std::string span = f2.label + " 110.4.a.g 110.4.a.d 110.4.a.c";
  const std::vector<std::string> commands{
      "space 22 4",
      "lrc " + f1.label + " --l 5 --p 7",
      "lrc " + f2.label + " --l 5 --p 3",
      "lrc " + f13.label + " --l 23 --p 3",
      "lrc " + f23.label + " --l 13 --p 5",
      "lrc " + f18.label + " --l 29 --p 5",
      "diamond " + f2.label + " --l 5 --p 3",
      "raise " + f1.label + " --l 5 --p 7",
      "raise " + f2.label + " --l 5 --p 3",
      "raise " + f13.label + " --l 23 --p 3",
      "raise " + f23.label + " --l 13 --p 5",
      "raise " + f18.label + " --l 29 --p 5",
      "modpr-search --span " + span + " --p 3 --r 3 --agree " + f2.label,
      "verify --span " + span + " --combination 1 3 5 18 --p 3 --r 3",
      "verify --span " + span + " --combination 0 -3 4 0 --p 3 --r 3",
      "verify --span " + span + " --combination 0 -3 4 0 --p 3 --r 4",
  };
  std::vector<Run> first, second;
  const fs::path cache_dir = tmp / "cli-cache";
  for (const auto& c : commands) first.push_back(run("HLR_CACHE_DIR=" + cache_dir.string() + " " + cli + " --json " + c));
  for (const auto& c : commands) second.push_back(run("HLR_CACHE_DIR=" + cache_dir.string() + " " + cli + " --json " + c));

  // 2. LRC depths
  {
    auto a = lrc_depths(LRCInput{f1, 5, 7});
    auto b = lrc_depths(LRCInput{f2, 5, 3});
    auto c = lrc_depths(LRCInput{f13, 23, 3});
    auto d = lrc_depths(LRCInput{f23, 13, 5});
    auto e = lrc_depths(LRCInput{f18, 29, 5});
    auto is = [](const LRCReport& r, int x, int y, int z) {
      return r.s_sq == Depth{x, false, false} && r.s_plus == Depth{y, false, false} &&
             r.s_minus == Depth{z, false, false};
    };
    bool ok = is(a, 2, 2, 0) && is(b, 4, 1, 3) && is(c, 5, 4, 1) && (d.s_sq.infinite || d.s_sq.value >= 3) &&
              (d.s_minus.infinite || d.s_minus.value >= 3) && is(e, 3, 2, 1);
    report(2, ok,
           "LRC (s_sq,s+,s-): f1/5/7 " + depths(a) + ", f2/5/3 " + depths(b) + ", " + f13.label + "/23/3 " +
               depths(c) + " (a23=" + f13.a(23).get_str() + "), " + f23.label + "/13/5 " + depths(d) + " (a13=" +
               f23.a(13).get_str() + "), " + f18.label + "/29/5 " + depths(e) + " (a29=" + f18.a(29).get_str() +
               ") [exact]");
  }

  // 3. Diamond family for f2
  std::vector<std::pair<DiamondFamily, std::string>> families;
  {
    auto fam = diamond_family(ws, f2, 5, 3);
    std::multiset<int> ds;
    bool depth2_ok = true, none3 = true;
    std::string listing;
    for (const auto& m : fam.members) {
      ds.insert(m.d);
      none3 = none3 && m.d < 3;
      if (m.d == 2) depth2_ok = depth2_ok && m.g.a(5) == -5 && m.g.a(2) == 2 && m.g.a(3) == -8;
      listing += " " + m.g.label + ":" + std::to_string(m.d);
    }
    bool ok = fam.members.size() == 5 && ds == std::multiset<int>{1, 1, 1, 1, 2} && depth2_ok && fam.sum_d == 6 &&
              fam.sum_d >= 4 && !fam.full && none3;
    report(3, ok,
           "Diamond(f2, l=5, p=3): members" + listing + ", sum d = " + std::to_string(fam.sum_d) + ", " +
               (fam.full ? "Full" : "Partial") + " [exact]");
    families.emplace_back(fam, "f2/5/3");
  }

  // 4. Full level raising
  {
    auto a = diamond_family(ws, f1, 5, 7);
    bool a_member = std::any_of(a.members.begin(), a.members.end(),
                                [](const DiamondMember& m) { return m.g.level == 110 && m.d == 2; });
    bool a_ok = a_member && a.full && a.full_depth == 2;

    auto b = diamond_family(ws, f13, 23, 3);
    bool b_299 = std::any_of(b.members.begin(), b.members.end(),
                             [](const DiamondMember& m) { return m.g.level == 299 && m.d == 4; }) ||
                 std::any_of(b.components.begin(), b.components.end(),
                             [](const ComponentWitness& c) { return c.level == 299 && c.depth >= 4; });
    bool b_ok = b_299 && b.full && b.full_depth == 4 && b.lrc.s_plus.value == 4;

    auto c = diamond_family(ws, f18, 29, 5);
    bool c_ok = std::none_of(c.members.begin(), c.members.end(), [](const DiamondMember& m) { return m.d >= 2; }) &&
                !c.full;
    std::string b_how = b.full_source == "irrational component" ? "23-new component of level 299 (no rational member)"
                                                                : "rational member";
    report(4, a_ok && b_ok && c_ok,
           std::string("f1/5/7 ") + (a.full ? "Full(" + std::to_string(a.full_depth) + ")" : "Partial") +
               " via a level-110 member of depth 2; " + f13.label + "/23/3 " +
               (b.full ? "Full(" + std::to_string(b.full_depth) + ")" : "Partial") + " via " + b_how +
               " at depth 4; " + f18.label + "/29/5 " + (c.full ? "Full" : "Partial") +
               " with no member of depth >= 2 [exact]");
    families.emplace_back(a, "f1/5/7");
    families.emplace_back(b, "13/23/3");
    families.emplace_back(c, "18/29/5");
  }

  // 5. The printed non-liftable combination
  {
    const auto& d110 = ws.newforms(110, 4, 72);
    std::vector<Eigensystem> span_forms{f2, *find_label(d110, "110.4.a.g"), *find_label(d110, "110.4.a.d"),
                                        *find_label(d110, "110.4.a.c")};
    auto m27 = PrimePower::make(3, 3), m81 = PrimePower::make(3, 4);
    std::map<std::int64_t, std::int64_t> cons;
    for (auto q : primes_up_to(72))
      if (330 % q != 0) cons[q] = mod(f2.a(q), 27);
    auto sols = eigenforms_modpr_in_span(span_forms, m27, cons, 72);
    const std::vector<std::int64_t> printed{1, 3, 5, 18};
    bool printed_found = false;
    for (std::int64_t u = 1; u < 27; ++u) {
      if (u % 3 == 0) continue;
      std::vector<std::int64_t> c;
      for (auto x : printed) c.push_back(u * x % 27);
      for (const auto& s : sols) printed_found = printed_found || s.combination == c;
    }
    auto h = combine_forms(span_forms, printed, m27, 72);
    auto chk27 = verify_eigenform_modpr(h);
    auto chk81 = verify_eigenform_modpr(combine_forms(span_forms, printed, m81, 72));
    bool ok = printed_found && chk27.ok && !chk81.ok && h.a(5) == 5;

    std::string found_text = "solutions mod 27:";
    const ModPrEigenform* plus5 = nullptr;
    for (const auto& s : sols) {
      found_text += " " + join(s.combination) + "[a5=" + std::to_string(s.a(5)) + "]";
      if (s.a(5) == 5 && !plus5) plus5 = &s;
    }
    std::vector<std::int64_t> lift{0, -3, 4, 0};
    auto l27 = verify_eigenform_modpr(combine_forms(span_forms, lift, m27, 72));
    auto l81 = verify_eigenform_modpr(combine_forms(span_forms, lift, m81, 72));
    report(5, ok,
           "(1,3,5,18) mod 27: a1 = " + std::to_string(h.a(1)) + ", a5 = " + std::to_string(h.a(5)) + ", verify r=3 " +
               (chk27.ok ? "true" : "false (" + chk27.failure + ")") + ", in solution set " +
               (printed_found ? "yes" : "no") + "; " + found_text + "; witness (0,-3,4,0): r=3 " +
               (l27.ok ? "true" : "false") + ", r=4 " + (l81.ok ? "true" : "false") + " at " + l81.failure + " (" +
               std::to_string(l81.m) + "," + std::to_string(l81.n) + "), a5 = -5 mod 27; a5 = +5 solutions: " +
               (plus5 ? join(plus5->combination) : std::string("none")) + " [exact]");
  }

  // 6. Trace relation on every member from 3 and 4
  {
    bool ok = true;
    int count = 0;
    for (const auto& [fam, name] : families)
      for (const auto& m : fam.members) {
        ok = ok && trace_relation_check(fam.f, m.g, fam.l, fam.p, m.d);
        ++count;
      }
    report(6, ok && count > 0,
           "a_l(f) = (l+1) a_l(g_i) mod p^d_i for all " + std::to_string(count) + " Diamond members [exact]");
  }

  // 7. Property suites, run as the unit test binaries
  {
    const std::string dir = HLR_TEST_DIR;
    struct Suite {
      std::string what, binary, filter;
    };
    const std::vector<Suite> suites{
        {"(a) LRC identities, random tuples", "test_levelraise", "LRC*"},
        {"(b) Hida a_l^2 = l^(k-2) on the grid", "test_newforms", "Deligne bound*"},
        {"(b) Hida on Diamond members", "test_levelraise", "Diamond family*"},
        {"(c) old-space identity at (110,4) and (299,4)", "test_modsym", "old-space identity*"},
        {"(d) Hecke commutation", "test_modsym", "Hecke operators commute"},
        {"(d) dimensions on the grid", "test_modsym", "modular symbol dimensions*,dimensions at the larger levels"},
        {"(d) new dimensions on the grid", "test_newforms", "new subspace dimensions*"},
        {"(e) zpr brute-force oracles", "test_zpr", "*"},
    };
    bool ok = true;
    std::string text;
    for (const auto& s : suites) {
      auto r = run(dir + "/" + s.binary + " --test-case=\"" + s.filter + "\"");
      bool pass = r.code == 0 && r.out.find("Status: SUCCESS") != std::string::npos &&
                  r.out.find("test cases:    0") == std::string::npos;
      ok = ok && pass;
      text += std::string(text.empty() ? "" : "; ") + s.what + (pass ? " ok" : " FAILED");
    }
    report(7, ok, text + " [exact]");
  }

  // 8. Determinism of the CLI output
  {
    bool ok = true;
    std::string bad;
    for (std::size_t i = 0; i < commands.size(); ++i) {
      bool same = first[i].out == second[i].out && first[i].code == second[i].code && !first[i].out.empty() &&
                  first[i].code >= 0 && first[i].code <= 1;
      if (!same) bad += " [" + commands[i] + "]";
      ok = ok && same;
    }
    report(8, ok,
           std::to_string(commands.size()) + " commands run twice (cold then warm cache) give byte-identical --json " +
               "output and exit codes" + (bad.empty() ? "" : "; differing:" + bad) + " [exact]");
  }

  std::error_code ec;
  fs::remove_all(tmp, ec);

  int passed = 0;
  bool unexpected = false;
  for (const auto& r : results) {
    passed += r.pass;
    if (!r.pass && !kKnownUnattainable.count(r.id)) unexpected = true;
  }
  std::cout << passed << "/" << results.size() << " criteria pass";
  if (passed < static_cast<int>(results.size())) {
    std::cout << "; failing:";
    for (const auto& r : results)
      if (!r.pass) std::cout << " #" << r.id << (kKnownUnattainable.count(r.id) ? " (known unattainable)" : "");
  }
  std::cout << std::endl;
  return unexpected ? 1 : 0;
}
