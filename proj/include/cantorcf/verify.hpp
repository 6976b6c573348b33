#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cantorcf/build.hpp"

namespace cantorcf::verify {

enum class Verdict { Pass, Fail, SkippedBudget, Indistinguishable };

std::string verdict_name(Verdict v);

// One check outcome. Informational reports never affect the overall verdict
// (used for the theorem lower clause below its threshold index and for the
// q^-q clause outside strict mode).
struct CheckReport {
  std::string name;
  std::string scope;
  Verdict verdict;
  bool informational = false;
  std::string witness;
};

struct VerifyOptions {
  std::size_t digit_budget = 100'000;  // positional membership digits
  unsigned max_log_k = 4096;           // log bracket width 2^-k ceiling
  std::vector<std::string> only;       // run only these check names when non-empty
};

// Canonical continued fraction (last quotient >= 2) with full convergent list
// starting 0/1; independent of the construction.
struct CfData {
  std::vector<Int> quotients;
  std::vector<std::pair<Int, Int>> convergents;
};
CfData euclid_convergents(const Int& p, const Int& q);

CheckReport check_initial(const build::Certificate& cert);
// Cross-field consistency: index/N/m recurrences, sigma rule and alternation,
// congruence and divisibility conditions on the m-sequence, mode floor,
// reduced p/q, word-chain shape, c1 rule, bit budget.
CheckReport check_structure(const build::Certificate& cert);
CheckReport check_identity(const build::Certificate& cert, std::size_t i);
CheckReport check_determinant(const build::Certificate& cert, std::size_t i);
CheckReport check_convergent_chain(const build::Certificate& cert);
CheckReport check_membership(const build::Certificate& cert, std::size_t i,
                             std::size_t digit_budget);
CheckReport check_gap_bounds(const build::Certificate& cert, std::size_t i);
CheckReport check_growth(const build::Certificate& cert, std::size_t i);
std::vector<CheckReport> check_theorem_bounds(const build::Certificate& cert,
                                              const VerifyOptions& opt);

struct VerifyResult {
  std::vector<CheckReport> reports;
  bool overall;
};

VerifyResult verify_all(const build::Certificate& cert, const VerifyOptions& opt = {});

std::string render_report(const VerifyResult& result);
std::string report_json(const VerifyResult& result);

}  // namespace cantorcf::verify
