#include "cantorcf/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace cantorcf::verify {

using build::Certificate;
using build::ConstructionStep;
using build::Mode;
using build::Status;

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "FAIL";
    case Verdict::SkippedBudget: return "skipped(budget)";
    case Verdict::Indistinguishable: return "indistinguishable";
  }
  return "?";
}

namespace {

constexpr std::size_t kPowCap = std::size_t(1) << 27;  // bits; beyond this, skip

CheckReport pass(std::string name, std::string scope, std::string witness) {
  return {std::move(name), std::move(scope), Verdict::Pass, false, std::move(witness)};
}

CheckReport fail(std::string name, std::string scope, std::string witness) {
  return {std::move(name), std::move(scope), Verdict::Fail, false, std::move(witness)};
}

template <typename F>
CheckReport guarded(const char* name, const std::string& scope, F&& body) {
  try {
    return body();
  } catch (const budget_error& e) {
    return {name, scope, Verdict::SkippedBudget, false, e.what()};
  } catch (const error& e) {
    return {name, scope, Verdict::Fail, false, std::string("aborted: ") + e.what()};
  }
}

std::string step_scope(std::size_t i) { return "step " + std::to_string(i); }

const Int& q_before(const Certificate& c, std::size_t i) {
  // q_{i-1} with q_0 falling back to the certificate's q0 field
  return i >= 2 ? c.steps[i - 2].q : c.q0;
}

}  // namespace

CfData euclid_convergents(const Int& p, const Int& q) {
  if (q < 1 || p < 0 || p >= q) throw value_error("expected 0 <= p < q");
  CfData out;
  out.quotients.push_back(0);
  Int x = q, y = p;
  while (y != 0) {
    Int a = x / y;
    Int r = x - a * y;
    out.quotients.push_back(a);
    x = y;
    y = r;
  }
  if (out.quotients.size() > 1 && out.quotients.back() == 1) {
    out.quotients.pop_back();
    out.quotients.back() += 1;
  }
  Int hp = 1, hq = 0;  // k-2 values
  Int cp = 0, cq = 1;  // k-1 values seeded so the first iteration lands on a0
  bool first = true;
  for (const Int& a : out.quotients) {
    if (first) {
      cp = a;  // a0 = 0 gives 0/1
      cq = 1;
      first = false;
    } else {
      Int np = a * cp + hp;
      Int nq = a * cq + hq;
      hp = cp;
      hq = cq;
      cp = np;
      cq = nq;
    }
    out.convergents.emplace_back(cp, cq);
  }
  return out;
}

CheckReport check_initial(const Certificate& cert) {
  return guarded("initial", "setup", [&]() -> CheckReport {
    const char* name = "initial";
    const words::DigitPair& pair = cert.params.pair;
    unsigned b = pair.b;
    if (cert.steps.empty()) return fail(name, "setup", "certificate has no steps");

    Int u(pair.u());
    numth::USplit us = numth::split_u(u, b);
    numth::M1Choice mc = numth::choose_m1(pair);
    if (cert.u != u || cert.u1 != us.u1 || cert.u2 != us.u2)
      return fail(name, "setup", "u split mismatch: expected " + dec(u) + " = " + dec(us.u1) +
                                     " * " + dec(us.u2));
    if (cert.m1 != mc.m1 || cert.N != mc.N)
      return fail(name, "setup",
                  "expected m1 = " + std::to_string(mc.m1) + ", N = " + dec(mc.N));

    Int Bm1 = pow_ui(b, cert.m1, kPowCap);
    if (!mpz_divisible_p(Bm1.get_mpz_t(), cert.u1.get_mpz_t()))
      return fail(name, "setup", "u1 does not divide b^m1");
    if (cert.q0 != Bm1 / cert.u1) return fail(name, "setup", "q0 != b^m1 / u1");

    std::vector<unsigned> vd(cert.m1, pair.d1);
    if (cert.v.length() != Int(cert.m1) ||
        words::expand_digits(cert.v, cert.m1) != vd)
      return fail(name, "setup", "preperiod word is not d1^m1");
    std::vector<unsigned> w1d;
    w1d.push_back(pair.d2);
    w1d.insert(w1d.end(), vd.begin(), vd.end());
    const ConstructionStep& s1 = cert.steps[0];
    if (s1.word.length() != Int(cert.m1) + 1 ||
        words::expand_digits(s1.word, cert.m1 + 1) != w1d)
      return fail(name, "setup", "first word is not d2 d1^m1");

    Rat frac = words::periodic_to_rational(cert.v, s1.word, pair);
    Rat claimed(s1.p, s1.q);
    claimed.canonicalize();
    if (frac != claimed) return fail(name, "setup", "p1/q1 does not equal 0.(v)(w1 repeated)");

    Int Bm1p1 = pow_ui(b, cert.m1 + 1, kPowCap);
    if (cert.u2 * s1.q != Bm1p1 - 1)
      return fail(name, "setup", "u2 * q1 != b^(m1+1) - 1: " + dec(cert.u2) + " * " +
                                     short_int(s1.q) + " vs " + short_int(Bm1p1 - 1));
    if (gcd(Int(cert.q0 * s1.p), s1.q) != 1)
      return fail(name, "setup", "q0 * p1 shares a factor with q1");
    int sigma1 = cert.m1 >= 1 ? 1 : -1;
    if (s1.sigma != sigma1)
      return fail(name, "setup", "sigma_1 must be " + std::to_string(sigma1));

    return pass(name, "setup",
                "u=" + dec(u) + "=" + dec(us.u1) + "*" + dec(us.u2) + ", m1=" +
                    std::to_string(cert.m1) + ", u2*q1=b^(m1+1)-1, gcd(q0 p1, q1)=1");
  });
}

CheckReport check_structure(const Certificate& cert) {
  return guarded("structure", "all steps", [&]() -> CheckReport {
    const char* name = "structure";
    const std::string scope = "all steps";
    const words::DigitPair& pair = cert.params.pair;
    const auto& st = cert.steps;
    if (st.empty()) return fail(name, scope, "certificate has no steps");

    for (std::size_t k = 0; k < st.size(); ++k) {
      const ConstructionStep& s = st[k];
      std::string at = " at step " + std::to_string(k + 1);
      if (s.i != k + 1) return fail(name, scope, "index mismatch" + at);
      if (s.q < 2 || s.p < 1 || s.p >= s.q)
        return fail(name, scope, "p/q out of range" + at);
      if (gcd(s.p, s.q) != 1) return fail(name, scope, "p/q not reduced" + at);
      if (k > 0 && st[k].q <= st[k - 1].q)
        return fail(name, scope, "q not strictly increasing" + at);
      if (k > 0 && s.sigma != -st[k - 1].sigma)
        return fail(name, scope, "sigma does not alternate" + at);

      const words::DigitWord& w = s.word;
      if (w.length() != s.N) return fail(name, scope, "word length != N" + at);
      int sigma_from_word = w.last_digit() == pair.d1 ? 1 : -1;
      if (s.sigma != sigma_from_word)
        return fail(name, scope, "sigma contradicts the word's last digit" + at);
      if (k == 0) {
        if (s.m != Int(cert.m1) || s.N != cert.N || s.N != Int(cert.m1) + 1)
          return fail(name, scope, "initial m/N mismatch");
        if (!w.is_literal()) return fail(name, scope, "first word must be literal");
      } else {
        if (s.N != (s.m + 1) * st[k - 1].N)
          return fail(name, scope, "period recurrence N' = (m+1) N broken" + at);
        if (s.m < 1) return fail(name, scope, "m must be positive" + at);
        if (w.is_literal() || !w.flip() || w.power() != s.m ||
            w.base().length() != st[k - 1].N)
          return fail(name, scope, "word is not (previous word)^m with a flipped tail" + at);
      }
    }

    // congruence class of m2 and the mode floor
    if (st.size() >= 2) {
      const Int& m2 = st[1].m;
      Int lhs = cert.q0 * st[0].p * (m2 + 1) + st[0].sigma;
      if (!mpz_divisible_p(lhs.get_mpz_t(), st[0].q.get_mpz_t()))
        return fail(name, scope, "m2 violates q0 p1 (m2+1) = -sigma1 (mod q1)");
      Int floor_m = cert.params.mode == Mode::Strict ? st[0].q : Int(1);
      if (m2 < floor_m)
        return fail(name, scope, "m2 below the " + build::mode_name(cert.params.mode) +
                                     " floor " + short_int(floor_m));
    }
    for (std::size_t k = 2; k < st.size(); ++k) {
      if (!mpz_divisible_p(st[k].m.get_mpz_t(), st[k - 1].q.get_mpz_t()))
        return fail(name, scope,
                    "m_" + std::to_string(k + 1) + " is not a multiple of q_" +
                        std::to_string(k));
    }

    Int expect_c1 = (pair.d1 == 0 && pair.d2 == 1) ? Int(1) : st[0].q;
    if (cert.c1 != expect_c1)
      return fail(name, scope, "c1 must be " + short_int(expect_c1));

    bool q1_over = mpz_sizeinbase(st[0].q.get_mpz_t(), 2) > cert.params.max_bits;
    for (std::size_t k = 0; k < st.size(); ++k) {
      bool over = mpz_sizeinbase(st[k].q.get_mpz_t(), 2) > cert.params.max_bits;
      bool allowed = k == 0 && cert.status == Status::BudgetExhausted &&
                     cert.exhausted_at == 1 && st.size() == 1;
      if (over && !allowed)
        return fail(name, scope, "q exceeds the bit budget at step " + std::to_string(k + 1));
    }
    if (cert.status == Status::Complete) {
      if (st.size() != cert.params.max_depth)
        return fail(name, scope, "complete run must reach max depth");
    } else {
      bool at_one = cert.exhausted_at == 1 && st.size() == 1 && q1_over;
      bool beyond = cert.exhausted_at == st.size() + 1 && st.size() < cert.params.max_depth &&
                    !q1_over;
      if (!at_one && !beyond)
        return fail(name, scope, "exhausted_at inconsistent with the steps present");
    }
    return pass(name, scope,
                std::to_string(st.size()) + " steps; recurrences, congruence, floors, " +
                    "word chain, budget, and c1 all consistent");
  });
}

CheckReport check_identity(const Certificate& cert, std::size_t i) {
  return guarded("identity", step_scope(i), [&]() -> CheckReport {
    const char* name = "identity";
    if (i < 1 || i > cert.steps.size()) throw value_error("identity index out of range");
    unsigned b = cert.params.pair.b;
    const ConstructionStep& s = cert.steps[i - 1];
    // b^m1 (b^N_i - 1) = u q_{i-1} q_i, tested as u q_{i-1} q_i + b^m1 = b^(m1+N_i)
    Int Bm1 = pow_ui(b, cert.m1, kPowCap);
    Int t = cert.u * q_before(cert, i) * s.q + Bm1;
    if (!mpz_divisible_p(t.get_mpz_t(), Bm1.get_mpz_t()))
      return fail(name, step_scope(i), "u q_{i-1} q_i + b^m1 is not a multiple of b^m1");
    if (s.N < 0 || cmp_with_pow(Int(t / Bm1), b, s.N) != 0)
      return fail(name, step_scope(i),
                  "b^m1 (b^N - 1) != u q_{i-1} q_i with N = " + short_int(s.N));
    return pass(name, step_scope(i),
                "b^m1 (b^" + short_int(s.N) + " - 1) = " + dec(cert.u) + " * " +
                    short_int(q_before(cert, i)) + " * " + short_int(s.q));
  });
}

CheckReport check_determinant(const Certificate& cert, std::size_t i) {
  std::string scope = "steps " + std::to_string(i) + "," + std::to_string(i + 1);
  return guarded("determinant", scope, [&]() -> CheckReport {
    const char* name = "determinant";
    if (i < 1 || i + 1 > cert.steps.size())
      throw value_error("determinant needs steps i and i+1");
    const ConstructionStep& a = cert.steps[i - 1];
    const ConstructionStep& c = cert.steps[i];
    Int det = c.p * a.q - c.q * a.p;
    if (det != a.sigma)
      return fail(name, scope,
                  "p' q - q' p = " + short_int(det) + ", expected sigma_i = " +
                      std::to_string(a.sigma));
    return pass(name, scope, "p' q - q' p = " + std::to_string(a.sigma));
  });
}

CheckReport check_convergent_chain(const Certificate& cert) {
  return guarded("convergent-chain", "all steps", [&]() -> CheckReport {
    const char* name = "convergent-chain";
    const std::string scope = "all steps";
    if (cert.steps.empty()) return fail(name, scope, "certificate has no steps");
    const ConstructionStep& last = cert.steps.back();
    if (last.p < 0 || last.p >= last.q)
      return fail(name, scope, "deepest p/q is not a proper fraction");
    if (gcd(last.p, last.q) != 1) return fail(name, scope, "deepest p/q is not reduced");

    CfData cf = euclid_convergents(last.p, last.q);
    const auto& conv = cf.convergents;
    std::size_t j0 = conv.size();
    for (std::size_t j = 0; j < conv.size(); ++j) {
      if (conv[j].first == cert.steps[0].p && conv[j].second == cert.steps[0].q) {
        j0 = j;
        break;
      }
    }
    if (j0 == conv.size())
      return fail(name, scope, "p1/q1 is not a convergent of the deepest fraction");
    if (j0 + cert.steps.size() != conv.size())
      return fail(name, scope, "certified steps do not form the convergent tail");
    for (std::size_t t = 0; t < cert.steps.size(); ++t) {
      if (conv[j0 + t].first != cert.steps[t].p || conv[j0 + t].second != cert.steps[t].q)
        return fail(name, scope,
                    "step " + std::to_string(t + 1) + " is not the expected convergent");
    }
    std::size_t exceptional = 0;
    for (std::size_t j = 0; j < j0; ++j) {
      if (conv[j].second < cert.c1) continue;
      Rat val(conv[j].first, conv[j].second);
      val.canonicalize();
      if (!words::in_cantor(val, cert.params.pair, 10'000))
        return fail(name, scope,
                    "head convergent " + short_int(conv[j].first) + "/" +
                        short_int(conv[j].second) + " has q >= c1 and lies outside the set");
      ++exceptional;
    }
    return pass(name, scope,
                std::to_string(cert.steps.size()) + "-step tail of " +
                    std::to_string(conv.size()) + " convergents; " + std::to_string(j0) +
                    " admissible head convergents" +
                    (exceptional ? " (" + std::to_string(exceptional) +
                                       " with q >= c1 but inside the set)"
                                 : " (all below c1)"));
  });
}

namespace {

// Streams base-b digits of p/q (0 <= p < q) a uint64 chunk at a time.
class DigitStream {
 public:
  DigitStream(const Int& p, const Int& q, unsigned b) : q_(q), r_(p), b_(b) {
    cpow_ = 1;
    while (cpow_ < (1ull << 62) / b_) {
      cpow_ *= b_;
      ++clen_;
    }
  }
  unsigned next() {
    if (pos_ == buf_.size()) refill();
    return buf_[pos_++];
  }

 private:
  void refill() {
    Int t = r_ * static_cast<unsigned long>(cpow_);
    Int chunk;
    mpz_tdiv_qr(chunk.get_mpz_t(), r_.get_mpz_t(), t.get_mpz_t(), q_.get_mpz_t());
    unsigned long c = chunk.get_ui();
    buf_.assign(clen_, 0);
    for (std::size_t idx = clen_; idx-- > 0;) {
      buf_[idx] = static_cast<unsigned>(c % b_);
      c /= b_;
    }
    pos_ = 0;
  }
  Int q_, r_;
  unsigned b_;
  unsigned clen_ = 0;
  unsigned long cpow_;
  std::vector<unsigned> buf_;
  std::size_t pos_ = 0;
};

}  // namespace

CheckReport check_membership(const Certificate& cert, std::size_t i,
                             std::size_t digit_budget) {
  return guarded("membership", step_scope(i), [&]() -> CheckReport {
    const char* name = "membership";
    if (i < 1 || i > cert.steps.size()) throw value_error("membership index out of range");
    const ConstructionStep& s = cert.steps[i - 1];
    const words::DigitPair& pair = cert.params.pair;
    if (s.q < 1 || s.p < 0 || s.p >= s.q)
      return fail(name, step_scope(i), "p/q is not a proper fraction");

    bool structural_ok = false;
    std::string structural_note;
    try {
      Rat exact = words::periodic_to_rational(cert.v, s.word, pair);
      Rat claimed(s.p, s.q);
      claimed.canonicalize();
      if (exact != claimed)
        return fail(name, step_scope(i), "p/q does not equal 0.(v)(word repeated)");
      structural_ok = true;
    } catch (const budget_error&) {
      structural_note = "structural value too large to materialize; ";
    }
    if (s.N > Int(static_cast<unsigned long>(digit_budget))) {
      return {name, step_scope(i), Verdict::SkippedBudget, false,
              structural_note +
                  (structural_ok ? std::string("structural equality holds; ") : std::string()) +
                  "positional check skipped: period " + short_int(s.N) +
                  " digits exceeds budget " + std::to_string(digit_budget)};
    }

    unsigned long Nl = to_ulong_checked(s.N, "period length");
    unsigned long total = cert.m1 + 2 * Nl;
    if (total > digit_budget) total = digit_budget;
    std::vector<unsigned> vd = words::expand_digits(cert.v, cert.m1);
    if (vd.size() < std::min<unsigned long>(cert.m1, total))
      return fail(name, step_scope(i), "preperiod word shorter than m1");
    std::vector<unsigned> wd = words::expand_digits(
        s.word, std::min<std::size_t>(Nl, total > cert.m1 ? total - cert.m1 : 0));
    DigitStream stream(s.p, s.q, pair.b);
    for (unsigned long j = 0; j < total; ++j) {
      unsigned expect = j < cert.m1 ? vd[j] : wd[(j - cert.m1) % (wd.empty() ? 1 : wd.size())];
      unsigned got = stream.next();
      if (got != expect)
        return fail(name, step_scope(i),
                    "digit " + std::to_string(j) + " is " + std::to_string(got) +
                        ", expansion expects " + std::to_string(expect));
      if (!pair.in_D(got))
        return fail(name, step_scope(i),
                    "digit " + std::to_string(j) + " = " + std::to_string(got) +
                        " lies outside the digit set");
    }
    return pass(name, step_scope(i),
                (structural_ok ? std::string("structural equality and ") : structural_note) +
                    std::to_string(total) + " leading digits match the periodic expansion");
  });
}

CheckReport check_gap_bounds(const Certificate& cert, std::size_t i) {
  std::string scope = "steps " + std::to_string(i) + "," + std::to_string(i + 1);
  return guarded("gap-bounds", scope, [&]() -> CheckReport {
    const char* name = "gap-bounds";
    if (i < 1 || i + 1 > cert.steps.size())
      throw value_error("gap bounds need steps i and i+1");
    unsigned b = cert.params.pair.b;
    const ConstructionStep& a = cert.steps[i - 1];
    const ConstructionStep& c = cert.steps[i];
    if (a.q < 1 || c.q < 1) return fail(name, scope, "q must be positive");

    Int BNp = pow_ui(b, c.N, kPowCap);  // budget_error -> skipped via guard
    Int Bm1 = pow_ui(b, cert.m1, kPowCap);
    Rat g(cert.u, Bm1 * (BNp - 1));
    g.canonicalize();

    Rat delta = Rat(c.p, c.q) - Rat(a.p, a.q);
    Rat want = a.sigma > 0 ? g : Rat(-g);
    if (delta != want)
      return fail(name, scope, "p'/q' - p/q != sigma_i u / (b^m1 (b^N' - 1))");
    Rat inv_qq(Int(1), Int(a.q * c.q));
    inv_qq.canonicalize();
    if (g != inv_qq) return fail(name, scope, "closed form differs from 1/(q_i q_{i+1})");

    psi::ExpForm gap_ef(g, b);
    psi::ExpForm psival = psi::eval_psi(cert.params.psi_expr, a.q, b);
    if (psi::compare_expforms(gap_ef, psival) >= 0)
      return fail(name, scope, "1/(q_i q_{i+1}) is not below psi(q_i)");

    std::string tail_note;
    if (i + 2 <= cert.steps.size()) {
      const ConstructionStep& d = cert.steps[i + 1];
      Rat g2(Int(1), Int(c.q * d.q));
      g2.canonicalize();
      Rat half(Int(1), Int(2 * a.q * c.q));
      half.canonicalize();
      if (g - g2 < half)
        return fail(name, scope, "successive gaps are not nested: g_i - g_{i+1} < 1/(2 q_i q_{i+1})");
      tail_note = "; nesting margin holds against step " + std::to_string(i + 2);
    }
    return pass(name, scope,
                "difference law exact, gap below psi(q_" + std::to_string(i) + ")" + tail_note);
  });
}

CheckReport check_growth(const Certificate& cert, std::size_t i) {
  return guarded("growth", step_scope(i), [&]() -> CheckReport {
    const char* name = "growth";
    if (i < 1 || i > cert.steps.size()) throw value_error("growth index out of range");
    unsigned b = cert.params.pair.b;
    const ConstructionStep& s = cert.steps[i - 1];
    if (s.q < 1) return fail(name, step_scope(i), "q must be positive");
    Int N_prev = i >= 2 ? cert.steps[i - 2].N : Int(1);
    Int e_lo = s.m * N_prev;
    if (e_lo < 0 || s.N < 0) return fail(name, step_scope(i), "negative exponent");
    if (cmp_with_pow(s.q, b, e_lo) < 0)
      return fail(name, step_scope(i),
                  "q < b^(m_i N_{i-1}) with exponent " + short_int(e_lo));
    if (cmp_with_pow(s.q, b, s.N) >= 0)
      return fail(name, step_scope(i), "q >= b^N_i with N_i = " + short_int(s.N));
    return pass(name, step_scope(i),
                "b^" + short_int(e_lo) + " <= q < b^" + short_int(s.N));
  });
}

std::vector<CheckReport> check_theorem_bounds(const Certificate& cert,
                                              const VerifyOptions& opt) {
  const char* name = "theorem-bounds";
  std::vector<CheckReport> out;
  std::size_t k = cert.steps.size();
  if (k < 2) {
    out.push_back({name, "summary", Verdict::SkippedBudget, false,
                   "needs at least two steps to bound approximation errors"});
    return out;
  }
  unsigned b = cert.params.pair.b;
  bool strict = cert.params.mode == Mode::Strict;
  std::vector<std::size_t> lower_index;  // positions of lower reports in `out`
  std::size_t threshold = 0;             // first index whose lower bound certifies

  for (std::size_t i = 1; i < k; ++i) {
    const ConstructionStep& a = cert.steps[i - 1];
    const ConstructionStep& c = cert.steps[i];
    if (a.q < 1 || c.q < 1) {
      out.push_back(fail(name, step_scope(i), "q must be positive"));
      lower_index.push_back(out.size() - 1);
      continue;
    }
    Rat delta(Int(1), Int(a.q * c.q));
    delta.canonicalize();

    out.push_back(guarded(name, step_scope(i) + " upper (gap function)", [&]() -> CheckReport {
      psi::ExpForm lhs(delta, b);
      psi::ExpForm rhs = psi::eval_psi(cert.params.psi_expr, a.q, b);
      if (psi::compare_expforms(lhs, rhs) >= 0)
        return fail(name, step_scope(i) + " upper (gap function)",
                    "|xi - p/q| = 1/(q_i q_{i+1}) is not below psi(q_i)");
      return pass(name, step_scope(i) + " upper (gap function)",
                  "1/(q_i q_{i+1}) < psi(q_i) exactly");
    }));

    std::string qq_scope = step_scope(i) + " upper (q^-q)";
    CheckReport qq = guarded(name, qq_scope, [&]() -> CheckReport {
      psi::Quantity lhs = psi::qty(Rat(c.q), b);
      psi::Quantity rhs = psi::qty_pow(a.q, Rat(a.q), b);
      psi::Cmp cmpres = psi::compare_via_logs(lhs, rhs, opt.max_log_k);
      if (cmpres == psi::Cmp::Greater)
        return pass(name, qq_scope, "q_{i+1} > q_i^{q_i}, so 1/q_{i+1} < q_i^{-q_i}");
      if (cmpres == psi::Cmp::Indistinguishable)
        return {name, qq_scope, Verdict::Indistinguishable, false,
                "log brackets could not separate q_{i+1} from q_i^{q_i}"};
      return fail(name, qq_scope, "q_{i+1} <= q_i^{q_i}");
    });
    qq.informational = !strict;  // the q^-q clause is only promised by the strict schedule
    out.push_back(std::move(qq));

    std::string lo_scope = step_scope(i) + " lower";
    CheckReport lo = guarded(name, lo_scope, [&]() -> CheckReport {
      psi::ExpForm psival = psi::eval_psi(cert.params.psi_expr, a.q, b);
      Rat expo = Rat(-(Rat(1) + cert.params.epsilon) * Rat(a.q));
      expo.canonicalize();
      psi::Quantity rhs = psi::qty_scale(psival, psi::qty_pow(a.q, expo, b));
      if (i + 2 <= k) {
        const ConstructionStep& d = cert.steps[i + 1];
        Rat tail(Int(1), Int(c.q * d.q));
        Rat lhs_val = delta - tail;
        lhs_val.canonicalize();
        if (lhs_val <= 0)
          return fail(name, lo_scope, "gap to the next convergent is not positive");
        psi::Cmp cmpres = psi::compare_via_logs(psi::qty(lhs_val, b), rhs, opt.max_log_k);
        if (cmpres == psi::Cmp::Greater)
          return pass(name, lo_scope,
                      "|xi - p/q| >= 1/(q_i q_{i+1}) - 1/(q_{i+1} q_{i+2}) > psi(q_i) "
                      "q_i^{-(1+eps) q_i}");
        if (cmpres == psi::Cmp::Indistinguishable)
          return {name, lo_scope, Verdict::Indistinguishable, false,
                  "log brackets could not separate the sandwich from the target"};
        return fail(name, lo_scope,
                    "two-sided gap does not exceed psi(q_i) q_i^{-(1+eps) q_i}");
      }
      Rat fallback(Int(1), Int(2 * a.q * c.q));
      fallback.canonicalize();
      psi::Cmp cmpres = psi::compare_via_logs(psi::qty(fallback, b), rhs, opt.max_log_k);
      if (cmpres == psi::Cmp::Greater)
        return pass(name, lo_scope,
                    "|xi - p/q| >= 1/(2 q_i q_{i+1}) > psi(q_i) q_i^{-(1+eps) q_i} "
                    "(one-sided bound, no further step available)");
      return {name, lo_scope, Verdict::SkippedBudget, false,
              "one-sided bound 1/(2 q_i q_{i+1}) is inconclusive and no step i+2 exists"};
    });
    lower_index.push_back(out.size());
    if (threshold == 0 && lo.verdict == Verdict::Pass) threshold = i;
    out.push_back(std::move(lo));
  }

  // Below the first certified index the lower clause is reported but not
  // binding; with no certified index at all, every lower report is
  // informational.
  for (std::size_t t = 0; t < lower_index.size(); ++t) {
    std::size_t idx = t + 1;
    if (threshold == 0 || idx < threshold) out[lower_index[t]].informational = true;
  }
  out.push_back({name, "summary", Verdict::Pass, true,
                 threshold > 0
                     ? "lower bound certified from step " + std::to_string(threshold) + " on"
                     : "lower bound not certified within the available depth"});
  return out;
}

VerifyResult verify_all(const Certificate& cert, const VerifyOptions& opt) {
  auto wants = [&](const char* n) {
    return opt.only.empty() ||
           std::find(opt.only.begin(), opt.only.end(), n) != opt.only.end();
  };
  VerifyResult res;
  std::size_t k = cert.steps.size();

  if (wants("initial")) res.reports.push_back(check_initial(cert));
  if (wants("structure")) res.reports.push_back(check_structure(cert));
  if (wants("identity"))
    for (std::size_t i = 1; i <= k; ++i) res.reports.push_back(check_identity(cert, i));
  if (wants("determinant")) {
    if (k < 2)
      res.reports.push_back({"determinant", "summary", Verdict::SkippedBudget, false,
                             "needs at least two steps"});
    for (std::size_t i = 1; i + 1 <= k; ++i)
      res.reports.push_back(check_determinant(cert, i));
  }
  if (wants("convergent-chain")) res.reports.push_back(check_convergent_chain(cert));
  if (wants("membership"))
    for (std::size_t i = 1; i <= k; ++i)
      res.reports.push_back(check_membership(cert, i, opt.digit_budget));
  if (wants("gap-bounds")) {
    if (k < 2)
      res.reports.push_back({"gap-bounds", "summary", Verdict::SkippedBudget, false,
                             "needs at least two steps"});
    for (std::size_t i = 1; i + 1 <= k; ++i)
      res.reports.push_back(check_gap_bounds(cert, i));
  }
  if (wants("growth"))
    for (std::size_t i = 1; i <= k; ++i) res.reports.push_back(check_growth(cert, i));
  if (wants("theorem-bounds")) {
    auto tb = check_theorem_bounds(cert, opt);
    res.reports.insert(res.reports.end(), tb.begin(), tb.end());
  }

  res.overall = true;
  for (const CheckReport& r : res.reports) {
    if (r.informational) continue;
    if (r.verdict == Verdict::Fail || r.verdict == Verdict::Indistinguishable)
      res.overall = false;
  }
  return res;
}

std::string render_report(const VerifyResult& result) {
  std::ostringstream os;
  auto col = [](const std::string& s, std::size_t w) {
    return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
  };
  os << col("check", 18) << col("scope", 30) << col("verdict", 18) << "details\n";
  for (const CheckReport& r : result.reports) {
    std::string v = verdict_name(r.verdict);
    if (r.informational) v += " (info)";
    os << col(r.name, 18) << col(r.scope, 30) << col(v, 18) << r.witness << "\n";
  }
  os << "overall: " << (result.overall ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string report_json(const VerifyResult& result) {
  nlohmann::json j;
  j["overall"] = result.overall ? "pass" : "fail";
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckReport& r : result.reports) {
    checks.push_back(nlohmann::json{{"name", r.name},
                                    {"scope", r.scope},
                                    {"verdict", verdict_name(r.verdict)},
                                    {"informational", r.informational},
                                    {"witness", r.witness}});
  }
  j["checks"] = std::move(checks);
  return j.dump(1) + "\n";
}

}  // namespace cantorcf::verify
