#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cantorcf/arith.hpp"
#include "cantorcf/numth.hpp"
#include "cantorcf/psi.hpp"
#include "cantorcf/words.hpp"

namespace cantorcf::build {

enum class Mode { Strict, Relaxed };

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& s);

struct ConstructionParams {
  words::DigitPair pair;
  std::string psi_text = "1";
  psi::PsiPtr psi_expr;  // parsed from psi_text when absent
  Rat epsilon = Rat(1);
  Mode mode = Mode::Relaxed;
  unsigned long max_depth = 3;
  unsigned long max_bits = 1'000'000;  // bit budget on each q_i

  explicit ConstructionParams(words::DigitPair p) : pair(std::move(p)) {}
  void validate() const;
};

// One index of the construction. sigma is the sign of the next difference
// p_{i+1}/q_{i+1} - p_i/q_i: +1 iff word_i ends in d1.
struct ConstructionStep {
  unsigned long i;
  Int m;
  Int N;
  int sigma;
  Int p;
  Int q;
  words::DigitWord word;
};

enum class Status { Complete, BudgetExhausted };

struct Certificate {
  ConstructionParams params;
  unsigned long m1 = 0;
  Int N;  // initial period length m1 + 1
  Int u, u1, u2;
  Int q0;
  words::DigitWord v;
  std::vector<ConstructionStep> steps;
  Status status = Status::Complete;
  unsigned long exhausted_at = 0;  // depth that did not fit, when exhausted
  Int c1;
};

struct InitialData {
  unsigned long m1;
  Int N;
  numth::USplit us;
  words::DigitWord v;
  words::DigitWord w1;
  ConstructionStep step1;
  Int q0;
};

// m1, v = d1^m1, w1 = d2 d1^m1, p1/q1, q0 = b^m1/u1; asserts u1 | b^m1,
// u2*q1 = b^(m1+1)-1, gcd(q0*p1, q1) = 1.
InitialData initial_data(const ConstructionParams& params);

// Residue r mod q1 making q0*p1*(m2+1) = -sigma1 (mod q1).
Int m2_residue(const Certificate& cert);

struct NextM {
  bool fits;  // false: the next q would exceed the bit budget
  Int m;
};

// Smallest admissible m_{i+1} given steps 1..i: congruence class of
// m2_residue for i = 1 (floor q1 in strict mode, 1 in relaxed mode),
// multiples of q_i for i >= 2; candidates must satisfy the gap condition
// 1/(q_i q_{i+1}) < psi(q_i), evaluated via the closed form
// u / (b^m1 (b^{N_{i+1}} - 1)) without building the step.
NextM next_m(const Certificate& cert, std::size_t i);

// Materializes step i+1 from m_{i+1}: S = (b^{N'} - 1)/(b^{N_i} - 1),
// q' = q_{i-1} S, p' = (q_{i-1} p_i S + sigma_i)/q_i; divisibility asserted.
ConstructionStep step(const Certificate& cert, const Int& m_next);

Certificate run(const ConstructionParams& params);

// (0,1) when {0,1} is contained in D, else the two smallest digits; an
// explicit override wins.
words::DigitPair choose_pair(unsigned b, const std::vector<unsigned>& D,
                             std::optional<std::pair<unsigned, unsigned>> override_pair);

std::string serialize_certificate(const Certificate& cert);
Certificate parse_certificate(const std::string& text);

}  // namespace cantorcf::build
