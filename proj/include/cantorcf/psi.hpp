#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cantorcf/arith.hpp"

namespace cantorcf::psi {

// Gap-function AST. Grammar:
//   expr := term ('*' term)*
//   term := atom ['^' int]
//   atom := RATIONAL | 'q' | 'min(' expr ',' expr ')' | 'expb(-' expr ')' | '(' expr ')'
// Every evaluation must land in (0, 1]; checked lazily per evaluation.
struct PsiExpr;
using PsiPtr = std::shared_ptr<const PsiExpr>;

struct PsiExpr {
  enum class Kind { Const, Q, Prod, Pow, Min, ExpbNeg };
  Kind kind;
  Rat value;                 // Const
  std::vector<PsiPtr> kids;  // Prod (2+), Pow (1), Min (2), ExpbNeg (1)
  long long expo = 1;        // Pow
};

PsiPtr parse_psi(std::string_view text);

// Exact nonzero value mantissa * b^texp, kept canonical: 1 <= |mantissa| < b.
class ExpForm {
 public:
  ExpForm(const Rat& value, unsigned base);              // value * b^0
  ExpForm(const Rat& m, const Int& t, unsigned base);    // m * b^t
  const Rat& mantissa() const { return m_; }
  const Int& texp() const { return t_; }
  unsigned base() const { return b_; }
  int sign() const { return sgn(m_); }
  // Exact rational value; throws budget_error when |texp| is too large to
  // materialize.
  Rat materialize(std::size_t cap_bits = std::size_t(1) << 26) const;

 private:
  Rat m_;
  Int t_;
  unsigned b_;
  void canonicalize();
};

// Exact trichotomy: -1, 0, +1 as sign of x - y.
int compare_expforms(const ExpForm& x, const ExpForm& y);

ExpForm eval_psi(const PsiExpr& e, const Int& q, unsigned b);
inline ExpForm eval_psi(const PsiPtr& e, const Int& q, unsigned b) {
  return eval_psi(*e, q, b);
}

// Rational bracket lo <= log_b(value) <= hi.
struct LogBound {
  Rat lo;
  Rat hi;
  bool is_point() const { return lo == hi; }
};

// Positive quantity factor * q^e; covers every comparison the construction
// needs (q^-q, q^q, psi(q) * q^-(1+eps)q) without materializing towers.
struct Quantity {
  ExpForm factor;
  bool has_pow = false;
  Int q;   // >= 1
  Rat e;

  explicit Quantity(const ExpForm& f) : factor(f) {}
  Quantity(const ExpForm& f, const Int& base_q, const Rat& exponent)
      : factor(f), has_pow(true), q(base_q), e(exponent) {}
};

Quantity qty(const Rat& value, unsigned b);
Quantity qty_pow(const Int& q, const Rat& e, unsigned b);     // q^e
Quantity qty_scale(const ExpForm& f, const Quantity& rest);   // f * rest

// Bracket of width <= 2^-k (exact point brackets where possible).
LogBound logbound_of(const Quantity& x, unsigned k);

enum class Cmp { Less, Equal, Greater, Indistinguishable };

// Refines brackets through widths 2^-64 .. 2^-max_k; exact when both sides
// are materializable; Indistinguishable is reported, never guessed.
Cmp compare_via_logs(const Quantity& x, const Quantity& y, unsigned max_k = 4096);

}  // namespace cantorcf::psi
