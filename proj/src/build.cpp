#include "cantorcf/build.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>

namespace cantorcf::build {

using nlohmann::json;

std::string mode_name(Mode m) { return m == Mode::Strict ? "strict" : "relaxed"; }

Mode mode_from_name(const std::string& s) {
  if (s == "strict") return Mode::Strict;
  if (s == "relaxed") return Mode::Relaxed;
  throw value_error("unknown mode '" + s + "' (expected strict or relaxed)");
}

void ConstructionParams::validate() const {
  if (max_depth < 1) throw value_error("max depth must be >= 1");
  if (max_bits < 64) throw value_error("bit budget must be >= 64");
  if (epsilon <= 0) throw value_error("epsilon must be positive");
  if (!psi_expr) throw value_error("gap function not parsed");
}

InitialData initial_data(const ConstructionParams& params) {
  const words::DigitPair& pair = params.pair;
  unsigned b = pair.b;
  Int u(pair.u());
  numth::USplit us = numth::split_u(u, b);
  numth::M1Choice mc = numth::choose_m1(pair);

  InitialData d{mc.m1, mc.N + 0, us, {}, {}, {}, {}};
  std::vector<unsigned> vdigits(mc.m1, pair.d1);
  d.v = words::DigitWord::literal(vdigits);
  std::vector<unsigned> w1digits;
  w1digits.reserve(mc.m1 + 1);
  w1digits.push_back(pair.d2);
  w1digits.insert(w1digits.end(), vdigits.begin(), vdigits.end());
  d.w1 = words::DigitWord::literal(std::move(w1digits));

  Rat frac = words::periodic_to_rational(d.v, d.w1, pair);
  Int Bm1 = pow_ui(b, mc.m1);
  if (!mpz_divisible_p(Bm1.get_mpz_t(), us.u1.get_mpz_t()))
    throw invariant_error("u1 does not divide b^m1");
  d.q0 = Bm1 / us.u1;

  Int q1 = frac.get_den();
  Int Bm1p1 = pow_ui(b, mc.m1 + 1);
  if (us.u2 * q1 != Bm1p1 - 1)
    throw invariant_error("u2 * q1 != b^(m1+1) - 1");
  if (gcd(Int(d.q0 * frac.get_num()), q1) != 1)
    throw invariant_error("q0 * p1 shares a factor with q1");

  int sigma1 = mc.m1 >= 1 ? 1 : -1;
  d.step1 = ConstructionStep{1, Int(mc.m1), Int(mc.m1) + 1, sigma1, frac.get_num(), q1, d.w1};
  return d;
}

Int m2_residue(const Certificate& cert) {
  if (cert.steps.empty()) throw value_error("certificate has no steps");
  const ConstructionStep& s1 = cert.steps[0];
  Int a = (cert.q0 * s1.p) % s1.q;
  Int inv = numth::mod_inverse(a, s1.q);
  Int t = Int(-s1.sigma) * inv - 1;
  Int r;
  mpz_fdiv_r(r.get_mpz_t(), t.get_mpz_t(), s1.q.get_mpz_t());
  return r;
}

namespace {

struct BuiltStep {
  bool fits = false;
  Int S;
  Int q;
  Int BNp;  // b^N' materialized when fits
};

// Applies the bit budget to the q that candidate m would produce: quick
// rejection on the base-exponent alone when it is far beyond the budget,
// exact bit count otherwise.
BuiltStep try_build(const Certificate& cert, std::size_t i, const Int& Np) {
  unsigned b = cert.params.pair.b;
  const Int& q_i = cert.steps[i - 1].q;
  const Int& N_i = cert.steps[i - 1].N;
  const Int& q_prev = i >= 2 ? cert.steps[i - 2].q : cert.q0;

  unsigned long lg = 1;
  while ((1ul << (lg + 1)) <= b) ++lg;  // floor(log2 b)
  Int slack(mpz_sizeinbase(q_i.get_mpz_t(), 2) + 64);
  if (Np * static_cast<long>(lg) > Int(cert.params.max_bits) + slack) return {};

  BuiltStep out;
  out.BNp = pow_ui(b, Np, std::size_t(8) * (cert.params.max_bits + (std::size_t(1) << 16)));
  Int BNi = pow_ui(b, N_i);
  Int num = out.BNp - 1;
  Int den = BNi - 1;
  if (!mpz_divisible_p(num.get_mpz_t(), den.get_mpz_t()))
    throw invariant_error("period length is not a multiple of the previous one");
  out.S = num / den;
  out.q = q_prev * out.S;
  out.fits = mpz_sizeinbase(out.q.get_mpz_t(), 2) <= cert.params.max_bits;
  return out;
}

}  // namespace

NextM next_m(const Certificate& cert, std::size_t i) {
  if (i < 1 || i > cert.steps.size()) throw value_error("next_m index out of range");
  const ConstructionStep& si = cert.steps[i - 1];
  const Int& q_i = si.q;
  const Int& N_i = si.N;
  unsigned b = cert.params.pair.b;
  Int u(cert.params.pair.u());
  Int Bm1 = pow_ui(b, cert.m1);

  Int cand, stride;
  if (i == 1) {
    cand = m2_residue(cert);
    stride = q_i;
    Int floor_m = cert.params.mode == Mode::Strict ? q_i : Int(1);
    if (cand < floor_m) {
      Int deficit = floor_m - cand;
      Int hops;
      mpz_cdiv_q(hops.get_mpz_t(), deficit.get_mpz_t(), stride.get_mpz_t());
      cand += hops * stride;
    }
  } else {
    cand = q_i;
    stride = q_i;
  }

  psi::ExpForm psival = psi::eval_psi(cert.params.psi_expr, q_i, b);
  for (;;) {
    Int Np = (cand + 1) * N_i;
    BuiltStep bs = try_build(cert, i, Np);
    if (!bs.fits) return {false, cand};
    psi::ExpForm gap(Rat(u, Bm1 * (bs.BNp - 1)), b);
    if (psi::compare_expforms(gap, psival) < 0) return {true, cand};
    cand += stride;
  }
}

ConstructionStep step(const Certificate& cert, const Int& m_next) {
  if (cert.steps.empty()) throw value_error("certificate has no steps");
  std::size_t i = cert.steps.size();
  const ConstructionStep& si = cert.steps[i - 1];
  const Int& q_prev = i >= 2 ? cert.steps[i - 2].q : cert.q0;
  unsigned b = cert.params.pair.b;

  Int Np = (m_next + 1) * si.N;
  BuiltStep bs = try_build(cert, i, Np);
  if (!bs.fits)
    throw budget_error("step " + std::to_string(i + 1) + " exceeds the bit budget");

  Int R = q_prev * si.p * bs.S + si.sigma;
  if (!mpz_divisible_p(R.get_mpz_t(), si.q.get_mpz_t()))
    throw invariant_error("numerator recurrence is not divisible by q_i");
  Int p_next = R / si.q;

  Int u(cert.params.pair.u());
  Int Bm1 = pow_ui(b, cert.m1);
  if (Bm1 * (bs.BNp - 1) != u * si.q * bs.q)
    throw invariant_error("product identity failed at step " + std::to_string(i + 1));
  if (p_next * si.q - bs.q * si.p != si.sigma)
    throw invariant_error("determinant identity failed at step " + std::to_string(i + 1));
  if (gcd(p_next, bs.q) != 1)
    throw invariant_error("p/q not reduced at step " + std::to_string(i + 1));
  Int blow = bs.BNp / pow_ui(b, si.N);  // b^(m' N_i)
  if (!(blow <= bs.q && bs.q < bs.BNp))
    throw invariant_error("growth bounds failed at step " + std::to_string(i + 1));

  words::DigitWord w_next =
      words::DigitWord::composite(si.word, m_next, true, cert.params.pair);
  return ConstructionStep{si.i + 1, m_next, Np, -si.sigma, p_next, bs.q, w_next};
}

Certificate run(const ConstructionParams& params) {
  ConstructionParams p = params;
  if (!p.psi_expr) p.psi_expr = psi::parse_psi(p.psi_text);
  p.validate();

  InitialData init = initial_data(p);
  Certificate cert{p, init.m1, init.N, init.us.u, init.us.u1, init.us.u2,
                   init.q0, init.v,  {},      Status::Complete, 0, {}};
  cert.steps.push_back(init.step1);
  cert.c1 = (p.pair.d1 == 0 && p.pair.d2 == 1) ? Int(1) : init.step1.q;

  if (mpz_sizeinbase(init.step1.q.get_mpz_t(), 2) > p.max_bits) {
    cert.status = Status::BudgetExhausted;
    cert.exhausted_at = 1;
    return cert;
  }
  while (cert.steps.size() < p.max_depth) {
    NextM nm = next_m(cert, cert.steps.size());
    if (!nm.fits) {
      cert.status = Status::BudgetExhausted;
      cert.exhausted_at = cert.steps.size() + 1;
      break;
    }
    cert.steps.push_back(step(cert, nm.m));
  }
  return cert;
}

words::DigitPair choose_pair(unsigned b, const std::vector<unsigned>& D,
                             std::optional<std::pair<unsigned, unsigned>> override_pair) {
  if (override_pair) {
    auto [lo, hi] = *override_pair;
    return words::DigitPair(b, lo, hi, D);
  }
  std::vector<unsigned> sorted = D;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() < 2) throw value_error("digit set needs at least 2 digits");
  bool has0 = std::binary_search(sorted.begin(), sorted.end(), 0u);
  bool has1 = std::binary_search(sorted.begin(), sorted.end(), 1u);
  if (has0 && has1) return words::DigitPair(b, 0, 1, D);
  return words::DigitPair(b, sorted[0], sorted[1], D);
}

namespace {

json word_chain_json(const Certificate& cert) {
  json arr = json::array();
  for (std::size_t k = 0; k < cert.steps.size(); ++k) {
    const words::DigitWord& w = cert.steps[k].word;
    if (k == 0) {
      if (!w.is_literal()) throw invariant_error("first word must be literal");
      arr.push_back(json{{"literal", words::digits_to_string(w.lit())}});
    } else {
      arr.push_back(json{{"base_word", k - 1}, {"power", dec(w.power())}, {"flip", w.flip()}});
    }
  }
  return arr;
}

Int json_int(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_string()) throw parse_error(std::string(key) + " must be a decimal string");
  return int_from_string(v.get<std::string>());
}

unsigned long json_ulong(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) throw parse_error(std::string(key) + " must be a non-negative number");
  return v.get<unsigned long>();
}

}  // namespace

std::string serialize_certificate(const Certificate& cert) {
  json j;
  j["version"] = 1;
  j["b"] = cert.params.pair.b;
  j["digits"] = cert.params.pair.fullD;
  j["pair"] = {cert.params.pair.d1, cert.params.pair.d2};
  j["mode"] = mode_name(cert.params.mode);
  j["psi"] = cert.params.psi_text;
  j["epsilon"] = rat_to_string(cert.params.epsilon);
  j["max_depth"] = cert.params.max_depth;
  j["max_bits"] = cert.params.max_bits;
  j["m1"] = cert.m1;
  j["N"] = dec(cert.N);
  j["u"] = dec(cert.u);
  j["u1"] = dec(cert.u1);
  j["u2"] = dec(cert.u2);
  j["q0"] = dec(cert.q0);
  j["c1"] = dec(cert.c1);
  j["v"] = words::digits_to_string(
      cert.v.is_literal() ? cert.v.lit() : words::expand_digits(cert.v, SIZE_MAX));
  j["status"] = cert.status == Status::Complete ? "complete" : "budget-exhausted";
  if (cert.status == Status::BudgetExhausted) j["exhausted_at"] = cert.exhausted_at;
  json steps = json::array();
  for (const ConstructionStep& s : cert.steps) {
    steps.push_back(json{{"i", s.i},
                         {"m", dec(s.m)},
                         {"N", dec(s.N)},
                         {"sigma", s.sigma},
                         {"p", dec(s.p)},
                         {"q", dec(s.q)}});
  }
  j["steps"] = std::move(steps);
  j["words"] = word_chain_json(cert);
  return j.dump(1) + "\n";
}

Certificate parse_certificate(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw parse_error(std::string("certificate is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object()) throw parse_error("certificate must be a JSON object");
    if (json_ulong(j, "version") != 1) throw parse_error("unsupported certificate version");

    unsigned b = static_cast<unsigned>(json_ulong(j, "b"));
    std::vector<unsigned> D = j.at("digits").get<std::vector<unsigned>>();
    auto pr = j.at("pair").get<std::vector<unsigned>>();
    if (pr.size() != 2) throw parse_error("pair must hold exactly two digits");
    words::DigitPair pair(b, pr[0], pr[1], D);

    ConstructionParams params(pair);
    params.mode = mode_from_name(j.at("mode").get<std::string>());
    params.psi_text = j.at("psi").get<std::string>();
    params.psi_expr = psi::parse_psi(params.psi_text);
    params.epsilon = rat_from_string(j.at("epsilon").get<std::string>());
    params.max_depth = json_ulong(j, "max_depth");
    params.max_bits = json_ulong(j, "max_bits");
    params.validate();

    Certificate cert{params, json_ulong(j, "m1"), json_int(j, "N"),
                     json_int(j, "u"), json_int(j, "u1"), json_int(j, "u2"),
                     json_int(j, "q0"), {}, {}, Status::Complete, 0, json_int(j, "c1")};
    cert.v = words::DigitWord::literal(
        words::digits_from_string(j.at("v").get<std::string>(), b));

    std::string status = j.at("status").get<std::string>();
    if (status == "complete") {
      cert.status = Status::Complete;
      if (j.contains("exhausted_at"))
        throw parse_error("complete certificate must not carry exhausted_at");
    } else if (status == "budget-exhausted") {
      cert.status = Status::BudgetExhausted;
      cert.exhausted_at = json_ulong(j, "exhausted_at");
    } else {
      throw parse_error("unknown status '" + status + "'");
    }

    const json& steps = j.at("steps");
    const json& wordsj = j.at("words");
    if (!steps.is_array() || steps.empty()) throw parse_error("steps must be a non-empty array");
    if (!wordsj.is_array() || wordsj.size() != steps.size())
      throw parse_error("words must parallel steps");

    std::vector<words::DigitWord> chain;
    for (std::size_t k = 0; k < wordsj.size(); ++k) {
      const json& w = wordsj[k];
      if (k == 0) {
        if (!w.contains("literal")) throw parse_error("first word must be a literal");
        chain.push_back(words::DigitWord::literal(
            words::digits_from_string(w.at("literal").get<std::string>(), b)));
      } else {
        if (json_ulong(w, "base_word") != k - 1)
          throw parse_error("word chain must reference its predecessor");
        Int power = json_int(w, "power");
        if (power < 1) throw parse_error("word power must be positive");
        bool flip = w.at("flip").get<bool>();
        chain.push_back(words::DigitWord::composite(chain.back(), power, flip, pair));
      }
    }
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const json& s = steps[k];
      ConstructionStep st{json_ulong(s, "i"), json_int(s, "m"), json_int(s, "N"),
                          static_cast<int>(s.at("sigma").get<long>()), json_int(s, "p"),
                          json_int(s, "q"), chain[k]};
      if (st.sigma != 1 && st.sigma != -1) throw parse_error("sigma must be +1 or -1");
      if (st.q < 1 || st.p < 0) throw parse_error("p/q out of range");
      cert.steps.push_back(std::move(st));
    }
    return cert;
  } catch (const json::exception& e) {
    throw parse_error(std::string("malformed certificate: ") + e.what());
  }
}

}  // namespace cantorcf::build
