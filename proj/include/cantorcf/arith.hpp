#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cantorcf {

using Int = mpz_class;
using Rat = mpq_class;

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A mathematical invariant of the construction failed; indicates a bug, not bad input.
struct invariant_error : error {
  using error::error;
};

// A digit/bit/precision budget was exhausted before the operation could finish.
struct budget_error : error {
  using error::error;
};

// Malformed textual input (expression, certificate, number).
struct parse_error : error {
  parse_error(const std::string& msg, std::size_t pos)
      : error(msg + " at position " + std::to_string(pos)), position(pos) {}
  explicit parse_error(const std::string& msg) : error(msg), position(0) {}
  std::size_t position;
};

// Structurally valid input outside an operation's domain.
struct value_error : error {
  using error::error;
};

unsigned long to_ulong_checked(const Int& x, const char* what);

// b^e materialized; throws budget_error when the result would exceed cap_bits.
Int pow_ui(unsigned b, unsigned long e, std::size_t cap_bits = std::size_t(1) << 26);
Int pow_ui(unsigned b, const Int& e, std::size_t cap_bits = std::size_t(1) << 26);

// Exact floor(log_b(x)) for x >= 1.
unsigned long floor_log(const Int& x, unsigned b);

// Exact digit count of x >= 1 in base b (floor_log + 1); 1 for x = 0.
unsigned long digit_count(const Int& x, unsigned b);

// sign(x - b^e) for x >= 1, e >= 0, never materializing b^e unless its size
// matches x's.
int cmp_with_pow(const Int& x, unsigned b, const Int& e);

std::string dec(const Int& x);
Int int_from_string(const std::string& s);
// Accepts "a" or "a/b" with optional leading '-'; canonicalizes.
Rat rat_from_string(const std::string& s);
std::string rat_to_string(const Rat& r);

// Decimal rendering truncated for display: full when short, head..tail with a
// digit count otherwise.
std::string short_int(const Int& x, std::size_t keep = 20);

}  // namespace cantorcf
