// Acceptance harness: eight numbered criteria, one printed pass/fail line per
// criterion, nonzero exit when any fails. Expected values are frozen from a
// reference computation done before this implementation existed.
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <cantorcf/arith.hpp>
#include <cantorcf/build.hpp>
#include <cantorcf/numth.hpp>
#include <cantorcf/psi.hpp>
#include <cantorcf/verify.hpp>
#include <cantorcf/words.hpp>

using namespace cantorcf;

namespace {

#include "sweep_table.inc"

std::vector<std::string> g_notes;

void req(bool ok, const std::string& what) {
  if (!ok) g_notes.push_back(what);
}

unsigned long bits_of(const Int& x) { return mpz_sizeinbase(x.get_mpz_t(), 2); }

build::ConstructionParams golden_a_params() {
  build::ConstructionParams p(words::DigitPair(3, 0, 1, {0, 1}));
  p.mode = build::Mode::Relaxed;
  p.max_depth = 3;
  return p;
}

build::ConstructionParams golden_b_params() {
  build::ConstructionParams p(words::DigitPair(3, 0, 2, {0, 2}));
  p.mode = build::Mode::Strict;
  p.max_depth = 2;
  return p;
}

// Certificates produced by criteria 1-3, reused by criteria 4-8.
std::optional<build::Certificate> g_a;
std::optional<build::Certificate> g_b;
std::vector<build::Certificate> g_sweep;

std::vector<const build::Certificate*> all_certs() {
  std::vector<const build::Certificate*> cs;
  if (g_a) cs.push_back(&*g_a);
  if (g_b) cs.push_back(&*g_b);
  for (const auto& c : g_sweep) cs.push_back(&c);
  return cs;
}

const verify::CheckReport* find_report(const verify::VerifyResult& res,
                                       const std::string& scope) {
  for (const auto& r : res.reports)
    if (r.scope == scope) return &r;
  return nullptr;
}

void criterion1() {
  auto cert = build::run(golden_a_params());
  req(cert.status == build::Status::Complete, "run A did not complete");
  req(cert.steps.size() == 3, "run A must certify 3 steps");
  if (cert.steps.size() == 3) {
    Int q3 = (pow_ui(3, 42ul) - 1) / 13;
    const Int wantQ[3] = {Int(2), Int(13), q3};
    const Int wantP[3] = {Int(1), Int(6), Int("3884697838988604469")};
    for (int k = 0; k < 3; ++k) {
      req(cert.steps[k].q == wantQ[k], "q" + std::to_string(k + 1) + " mismatch");
      req(cert.steps[k].p == wantP[k], "p" + std::to_string(k + 1) + " mismatch");
    }
  }
  auto res = verify::verify_all(cert);
  req(res.overall, "verification of run A failed");
  for (const auto& r : res.reports)
    if (!r.informational)
      req(r.verdict == verify::Verdict::Pass || r.verdict == verify::Verdict::SkippedBudget,
          "mandatory check not passing: " + r.name + " / " + r.scope);
  g_a = std::move(cert);
}

void criterion2() {
  auto cert = build::run(golden_b_params());
  req(cert.status == build::Status::Complete, "run B did not complete");
  req(cert.m1 == 7, "m1 must be 7");
  req(cert.steps.size() == 2, "run B must certify 2 steps");
  if (cert.steps.size() == 2) {
    const auto& s1 = cert.steps[0];
    const auto& s2 = cert.steps[1];
    req(s1.q == 3280, "q1 must be 3280");
    req(cert.u2 * s1.q == pow_ui(3, 8ul) - 1, "u2 q1 != b^(m1+1) - 1");
    req(pow_ui(3, cert.m1) % cert.u1 == 0, "u1 does not divide b^m1");
    req(s2.m >= 3280, "m2 must be at least q1");
    // m2 sits in the residue class fixed by the congruence on q0 p1 (m2 + 1)
    Int witness = cert.q0 * s1.p * (s2.m + 1) + s1.sigma;
    req(witness % s1.q == 0, "m2 outside the congruence class");
    std::string q2 = dec(s2.q);
    req(q2.size() == 25028, "q2 must have 25028 decimal digits");
    req(q2.substr(0, 40) == "2485893497145860904985696350931708562710", "q2 head mismatch");
    req(q2.substr(q2.size() - 40) == "2599290342454248520179379995810950097279",
        "q2 tail mismatch");
  }
  auto res = verify::verify_all(cert);
  req(res.overall, "verification of run B failed");
  g_b = std::move(cert);
}

void criterion3() {
  req(!kSweepRows.empty(), "sweep table is empty");
  for (const auto& row : kSweepRows) {
    std::string tag = "b=" + std::to_string(row.b) + " (" + std::to_string(row.d1) + "," +
                      std::to_string(row.d2) + ")";
    build::ConstructionParams p(words::DigitPair(row.b, row.d1, row.d2, {row.d1, row.d2}));
    p.mode = build::Mode::Relaxed;
    p.max_depth = 3;
    p.max_bits = 1'000'000;
    build::Certificate cert = build::run(p);
    req(cert.steps.size() == row.depth, tag + ": depth mismatch");
    req((cert.status == build::Status::Complete) == row.complete, tag + ": status mismatch");
    req(cert.m1 == row.m1, tag + ": m1 mismatch");
    std::size_t n = std::min<std::size_t>(cert.steps.size(), row.depth);
    for (std::size_t k = 0; k < n; ++k) {
      req(bits_of(cert.steps[k].q) == row.q_bits[k],
          tag + ": q bit length mismatch at step " + std::to_string(k + 1));
      req(cert.steps[k].m == Int(row.ms[k]),
          tag + ": m mismatch at step " + std::to_string(k + 1));
    }
    for (std::size_t k = 0; k + 1 < cert.steps.size(); ++k) {
      Int det = cert.steps[k + 1].p * cert.steps[k].q - cert.steps[k + 1].q * cert.steps[k].p;
      req(det == cert.steps[k].sigma, tag + ": determinant != sigma at step pair " +
                                          std::to_string(k + 1));
      req(abs(det) == 1, tag + ": determinant not a unit");
    }
    auto chain = verify::check_convergent_chain(cert);
    req(chain.verdict == verify::Verdict::Pass, tag + ": convergent chain rejected");
    g_sweep.push_back(std::move(cert));
  }
}

void criterion4() {
  auto certs = all_certs();
  req(certs.size() == 2 + kSweepRows.size(), "prerequisite certificates missing");
  std::size_t checked = 0;
  for (const auto* cert : certs)
    for (std::size_t i = 1; i <= cert->steps.size(); ++i) {
      auto r = verify::check_identity(*cert, i);
      req(r.verdict == verify::Verdict::Pass,
          "identity fails at step " + std::to_string(i) + ": " + r.witness);
      ++checked;
    }
  req(checked >= 100, "identity suite must cover at least 100 steps");
}

void criterion5() {
  auto certs = all_certs();
  req(!certs.empty(), "prerequisite certificates missing");
  std::size_t checked = 0;
  for (const auto* cert : certs)
    for (std::size_t i = 1; i <= cert->steps.size(); ++i) {
      if (cert->steps[i - 1].N > 100'000) continue;
      auto r = verify::check_membership(*cert, i, 100'000);
      req(r.verdict == verify::Verdict::Pass,
          "membership fails at step " + std::to_string(i) + ": " + r.witness);
      ++checked;
    }
  req(checked >= 100, "membership suite must cover at least 100 steps");
}

void criterion6() {
  auto certs = all_certs();
  req(!certs.empty(), "prerequisite certificates missing");
  for (const auto* cert : certs)
    for (std::size_t i = 1; i <= cert->steps.size(); ++i) {
      auto r = verify::check_growth(*cert, i);
      req(r.verdict == verify::Verdict::Pass,
          "growth fails at step " + std::to_string(i) + ": " + r.witness);
    }
  req(g_b.has_value(), "strict-mode certificate missing");
  if (g_b) {
    auto res = verify::verify_all(*g_b);
    for (const auto& r : res.reports)
      req(r.verdict != verify::Verdict::Indistinguishable,
          "indistinguishable verdict in strict run: " + r.name + " / " + r.scope);
    const auto* qq = find_report(res, "step 1 upper (q^-q)");
    req(qq != nullptr, "tower-growth clause missing from strict report");
    if (qq) {
      req(qq->verdict == verify::Verdict::Pass, "q_{i+1} >= q_i^{q_i} not certified");
      req(!qq->informational, "tower-growth clause must be mandatory in strict mode");
    }
  }
}

std::vector<std::pair<std::string, build::Certificate>> single_field_mutations(
    const build::Certificate& base, const std::string& tag) {
  std::vector<std::pair<std::string, build::Certificate>> out;
  auto add = [&](const std::string& name, std::function<void(build::Certificate&)> f) {
    build::Certificate c = base;
    f(c);
    out.emplace_back(tag + "." + name, std::move(c));
  };
  for (std::size_t k = 0; k < base.steps.size(); ++k) {
    std::string s = "step" + std::to_string(k + 1);
    add(s + ".p+1", [k](build::Certificate& c) { c.steps[k].p += 1; });
    add(s + ".q+1", [k](build::Certificate& c) { c.steps[k].q += 1; });
    add(s + ".m+1", [k](build::Certificate& c) { c.steps[k].m += 1; });
    add(s + ".N+1", [k](build::Certificate& c) { c.steps[k].N += 1; });
    add(s + ".sigma", [k](build::Certificate& c) { c.steps[k].sigma = -c.steps[k].sigma; });
  }
  add("m1+1", [](build::Certificate& c) { c.m1 += 1; });
  add("q0+1", [](build::Certificate& c) { c.q0 += 1; });
  add("u+1", [](build::Certificate& c) { c.u += 1; });
  add("u1+1", [](build::Certificate& c) { c.u1 += 1; });
  add("u2+1", [](build::Certificate& c) { c.u2 += 1; });
  add("c1+1", [](build::Certificate& c) { c.c1 += 1; });
  add("v.extended", [](build::Certificate& c) {
    auto digits = words::expand_digits(c.v, 1000);
    digits.push_back(c.params.pair.d1);
    c.v = words::DigitWord::literal(digits);
  });
  if (base.steps.size() >= 2) {
    add("word2.power+1", [](build::Certificate& c) {
      const auto& w = c.steps[1].word;
      c.steps[1].word =
          words::DigitWord::composite(w.base(), w.power() + 1, w.flip(), c.params.pair);
    });
    add("word2.noflip", [](build::Certificate& c) {
      const auto& w = c.steps[1].word;
      c.steps[1].word = words::DigitWord::composite(w.base(), w.power(), false, c.params.pair);
    });
  }
  return out;
}

void criterion7() {
  req(g_a.has_value() && g_b.has_value(), "prerequisite certificates missing");
  if (!g_a || !g_b) return;

  auto resB = verify::verify_all(*g_b);
  const auto* upper = find_report(resB, "step 1 upper (gap function)");
  req(upper && upper->verdict == verify::Verdict::Pass && !upper->informational,
      "|p1/q1 - p2/q2| < psi(q1) not certified exactly");

  // the tower side of the minimum, compared through log brackets
  const Int& q1 = g_b->steps[0].q;
  const Int& q2 = g_b->steps[1].q;
  Rat delta1{Int(1), q1 * q2};
  auto cmp = psi::compare_via_logs(psi::qty(delta1, 3), psi::qty_pow(q1, Rat(-q1), 3));
  req(cmp == psi::Cmp::Less, "|p1/q1 - p2/q2| < q1^-q1 not certified");

  // lower clause: reported per index, threshold controls which rows count
  const auto* lowB = find_report(resB, "step 1 lower");
  req(lowB && lowB->verdict == verify::Verdict::SkippedBudget && lowB->informational,
      "depth-2 lower clause must be reported as skipped and informational");
  const auto* sumB = find_report(resB, "summary");
  req(sumB && sumB->witness.find("not certified") != std::string::npos,
      "summary must state the lower bound is not certified at depth 2");

  auto resA = verify::verify_all(*g_a);
  const auto* low1 = find_report(resA, "step 1 lower");
  const auto* low2 = find_report(resA, "step 2 lower");
  const auto* sumA = find_report(resA, "summary");
  req(low1 && low1->verdict == verify::Verdict::Fail && low1->informational,
      "below-threshold lower row must be an informational failure");
  req(low2 && low2->verdict == verify::Verdict::Pass && !low2->informational,
      "threshold lower row must pass and count");
  req(sumA && sumA->witness == "lower bound certified from step 2 on",
      "summary must name the threshold step");

  // tamper rigidity: every single-field mutation must be rejected
  std::size_t total = 0, caught = 0;
  for (const auto* cert : {&*g_a, &*g_b}) {
    auto muts = single_field_mutations(*cert, cert == &*g_a ? "A" : "B");
    for (auto& [name, mutated] : muts) {
      ++total;
      bool overall = true;
      try {
        overall = verify::verify_all(mutated).overall;
      } catch (const std::exception&) {
        overall = false;  // a hard error is also a rejection
      }
      if (!overall)
        ++caught;
      else
        req(false, "mutation not detected: " + name);
    }
  }
  req(total >= 40, "tamper matrix unexpectedly small");
  req(caught == total, "tamper detection below 100%");
}

void criterion8() {
  for (unsigned b : {3u, 4u, 5u}) {
    unsigned long mismatches = 0, cases = 0;
    for (unsigned long q = 1; q <= 2000; ++q)
      for (unsigned long p = 0; p <= q; ++p) {
        if (std::gcd(p, q) != 1) continue;
        ++cases;
        Rat x(static_cast<long>(p), static_cast<long>(q));
        auto e = words::rational_to_expansion(x, b);
        if (words::periodic_to_rational(e.pre, e.per, b) != x) ++mismatches;
      }
    req(mismatches == 0, "base " + std::to_string(b) + ": " + std::to_string(mismatches) +
                             " expansion round-trip mismatches");
    req(cases > 1'000'000, "round-trip suite unexpectedly small");
  }

  req(g_a.has_value() && g_b.has_value(), "prerequisite certificates missing");
  build::ConstructionParams p7(words::DigitPair(7, 0, 1, {0, 1}));
  p7.max_depth = 3;
  auto exhausted = build::run(p7);
  req(exhausted.status == build::Status::BudgetExhausted, "reference exhausted run changed");
  std::vector<const build::Certificate*> certs;
  if (g_a) certs.push_back(&*g_a);
  if (g_b) certs.push_back(&*g_b);
  certs.push_back(&exhausted);
  for (const auto* cert : certs) {
    std::string s1 = build::serialize_certificate(*cert);
    auto back = build::parse_certificate(s1);
    req(build::serialize_certificate(back) == s1, "serialize/parse round trip not stable");
    req(verify::verify_all(back).overall, "parsed certificate fails verification");
  }
}

struct Criterion {
  int n;
  const char* label;
  double budget_seconds;  // 0: no explicit budget
  void (*body)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "golden run A: exact step sequence and full verification", 1.0, criterion1},
      {2, "golden run B: strict first two steps with exact 25028-digit q2", 30.0, criterion2},
      {3, "digit-pair sweep b=3..8: frozen outcomes, unit determinants, convergent chains",
       120.0, criterion3},
      {4, "master identity at every step of every certificate", 0.0, criterion4},
      {5, "digit membership for every step within the digit budget", 0.0, criterion5},
      {6, "growth bounds, tower growth mandatory and decisive in strict mode", 0.0, criterion6},
      {7, "approximation bounds on run B, threshold reporting, 100% tamper detection", 0.0,
       criterion7},
      {8, "expansion and certificate round trips", 60.0, criterion8},
  };
  bool all_ok = true;
  for (const auto& c : criteria) {
    g_notes.clear();
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.body();
    } catch (const std::exception& e) {
      g_notes.push_back(std::string("unhandled exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds)
      g_notes.push_back("runtime " + std::to_string(secs) + "s exceeds budget " +
                        std::to_string(c.budget_seconds) + "s");
    bool ok = g_notes.empty();
    all_ok = all_ok && ok;
    std::printf("criterion %d: %s  %s (%.2f s)\n", c.n, ok ? "PASS" : "FAIL", c.label, secs);
    for (std::size_t k = 0; k < g_notes.size() && k < 6; ++k)
      std::printf("    - %s\n", g_notes[k].c_str());
    if (g_notes.size() > 6)
      std::printf("    - ... and %zu more\n", g_notes.size() - 6);
    std::fflush(stdout);
  }
  std::printf("acceptance: %s\n", all_ok ? "PASS" : "FAIL");
  return all_ok ? 0 : 1;
}
