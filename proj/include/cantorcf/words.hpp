#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "cantorcf/arith.hpp"

namespace cantorcf::words {

inline constexpr std::size_t kDefaultDigitBudget = 1'000'000;

// Two working digits d1 < d2 inside the user's digit set D, over base b.
// D must be a proper subset of {0..b-1} with at least 2 elements.
struct DigitPair {
  unsigned b;
  unsigned d1;
  unsigned d2;
  std::vector<unsigned> fullD;  // sorted, deduplicated

  DigitPair(unsigned base, unsigned lo, unsigned hi, std::vector<unsigned> D);
  unsigned u() const { return d2 - d1; }
  bool in_D(unsigned digit) const;
};

// Immutable digit word: either a literal digit sequence or base^power followed
// by base with its last digit flipped within {d1, d2} (flip=false keeps it,
// giving base^(power+1)). Length and last digit are cached; composites are
// never expanded implicitly.
class DigitWord {
 public:
  DigitWord() = default;
  static DigitWord literal(std::vector<unsigned> digits);
  static DigitWord composite(const DigitWord& base, const Int& power, bool flip,
                             const DigitPair& pair);

  bool is_literal() const;
  const std::vector<unsigned>& lit() const;
  DigitWord base() const;
  const Int& power() const;
  bool flip() const;

  const Int& length() const;
  bool empty() const { return length() == 0; }
  unsigned last_digit() const;  // error on empty words

 private:
  struct Node;
  std::shared_ptr<const Node> n_;
};

// Minimal eventually periodic expansion: x = 0.(pre)(per repeated).
struct PeriodicExpansion {
  std::vector<unsigned> pre;
  std::vector<unsigned> per;
};

Int word_value(const std::vector<unsigned>& digits, unsigned b);
Int word_value(const DigitWord& w, unsigned b);

DigitWord flip_last(const DigitWord& w, const DigitPair& pair);

// First min(limit, |w|) digits, streamed from the compressed form.
std::vector<unsigned> expand_digits(const DigitWord& w, std::size_t limit);

// Exact reduced value of 0.v(w repeated) in base b; w non-empty.
Rat periodic_to_rational(const DigitWord& v, const DigitWord& w, const DigitPair& pair);
Rat periodic_to_rational(const std::vector<unsigned>& v, const std::vector<unsigned>& w,
                         unsigned b);

// Minimal (pre, per) for x in [0, 1] by long division with cycle detection;
// terminating expansions get period "0"; x = 1 yields period (b-1).
PeriodicExpansion rational_to_expansion(const Rat& x, unsigned b,
                                        std::size_t budget = kDefaultDigitBudget);

// True iff some base-b expansion of x uses only digits of pair.fullD; both
// expansions of base-adic rationals are tried.
bool in_cantor(const Rat& x, const DigitPair& pair,
               std::size_t budget = kDefaultDigitBudget);

// Digits as base-36 characters ("0".."9", "a".."z").
std::string digits_to_string(const std::vector<unsigned>& digits);
std::vector<unsigned> digits_from_string(const std::string& s, unsigned b);

}  // namespace cantorcf::words
