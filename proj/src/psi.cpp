#include "cantorcf/psi.hpp"

#include <mpfr.h>

#include <cctype>
#include <cstring>
#include <optional>

namespace cantorcf::psi {

namespace {

struct Parser {
  std::string_view s;
  std::size_t pos = 0;

  void ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    ws();
    if (pos >= s.size() || s[pos] != c)
      throw parse_error(std::string("expected '") + c + "'", pos);
    ++pos;
  }
  bool keyword(const char* w) {
    ws();
    std::size_t n = std::strlen(w);
    if (s.compare(pos, n, w) == 0) {
      pos += n;
      return true;
    }
    return false;
  }

  PsiPtr expr();
  PsiPtr term();
  PsiPtr atom();
  Int digits();
  long long exponent();
};

PsiPtr make(PsiExpr e) { return std::make_shared<PsiExpr>(std::move(e)); }

Int Parser::digits() {
  ws();
  std::size_t start = pos;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos == start) throw parse_error("expected a number", pos);
  return Int(std::string(s.substr(start, pos - start)), 10);
}

long long Parser::exponent() {
  ws();
  bool neg = eat('-');
  ws();
  std::size_t start = pos;
  long long v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    if (v > 1'000'000'000'000'000'000ll / 10)
      throw parse_error("exponent out of machine range", pos);
    v = v * 10 + (s[pos] - '0');
    ++pos;
  }
  if (pos == start) throw parse_error("expected an integer exponent", pos);
  return neg ? -v : v;
}

PsiPtr Parser::atom() {
  ws();
  if (pos >= s.size()) throw parse_error("unexpected end of expression", pos);
  char c = s[pos];
  if (std::isdigit(static_cast<unsigned char>(c))) {
    Int num = digits();
    Int den = 1;
    if (pos < s.size() && s[pos] == '/') {
      ++pos;
      std::size_t dpos = pos;
      den = digits();
      if (den == 0) throw parse_error("zero denominator", dpos);
    }
    Rat r(num, den);
    r.canonicalize();
    return make({PsiExpr::Kind::Const, r, {}, 1});
  }
  if (keyword("min")) {
    expect('(');
    PsiPtr a = expr();
    expect(',');
    PsiPtr b = expr();
    expect(')');
    return make({PsiExpr::Kind::Min, Rat(), {a, b}, 1});
  }
  if (keyword("expb")) {
    expect('(');
    expect('-');
    PsiPtr a = expr();
    expect(')');
    return make({PsiExpr::Kind::ExpbNeg, Rat(), {a}, 1});
  }
  if (c == 'q') {
    ++pos;
    return make({PsiExpr::Kind::Q, Rat(), {}, 1});
  }
  if (c == '(') {
    ++pos;
    PsiPtr a = expr();
    expect(')');
    return a;
  }
  throw parse_error("expected a rational, 'q', 'min', 'expb', or '('", pos);
}

PsiPtr Parser::term() {
  PsiPtr a = atom();
  ws();
  if (pos < s.size() && s[pos] == '^') {
    ++pos;
    long long e = exponent();
    return make({PsiExpr::Kind::Pow, Rat(), {a}, e});
  }
  return a;
}

PsiPtr Parser::expr() {
  std::vector<PsiPtr> kids{term()};
  while (eat('*')) kids.push_back(term());
  if (kids.size() == 1) return kids[0];
  return make({PsiExpr::Kind::Prod, Rat(), std::move(kids), 1});
}

}  // namespace

PsiPtr parse_psi(std::string_view text) {
  Parser p{text};
  PsiPtr root = p.expr();
  p.ws();
  if (p.pos != text.size()) throw parse_error("unexpected trailing input", p.pos);
  return root;
}

ExpForm::ExpForm(const Rat& value, unsigned base) : m_(value), t_(0), b_(base) {
  canonicalize();
}

ExpForm::ExpForm(const Rat& m, const Int& t, unsigned base) : m_(m), t_(t), b_(base) {
  canonicalize();
}

void ExpForm::canonicalize() {
  if (b_ < 2) throw value_error("exponential form base must be >= 2");
  if (m_ == 0) throw value_error("exponential form mantissa must be nonzero");
  bool neg = m_ < 0;
  Rat a = neg ? Rat(-m_) : m_;
  long k = static_cast<long>(floor_log(a.get_num(), b_)) -
           static_cast<long>(floor_log(a.get_den(), b_));
  if (k != 0) {
    unsigned long ak = static_cast<unsigned long>(k < 0 ? -k : k);
    Int scale = pow_ui(b_, ak, std::size_t(1) << 30);
    if (k > 0)
      a /= Rat(scale);
    else
      a *= Rat(scale);
  }
  while (a >= static_cast<int>(b_)) {
    a /= static_cast<int>(b_);
    ++k;
  }
  while (a < 1) {
    a *= static_cast<int>(b_);
    --k;
  }
  m_ = neg ? Rat(-a) : a;
  t_ += k;
}

Rat ExpForm::materialize(std::size_t cap_bits) const {
  if (t_ >= 0) return m_ * Rat(pow_ui(b_, t_, cap_bits));
  return m_ / Rat(pow_ui(b_, Int(-t_), cap_bits));
}

namespace {

// |x| vs |y| under canonical mantissas: the base exponent decides strictly.
int cmp_abs(const ExpForm& x, const ExpForm& y) {
  if (x.texp() != y.texp()) return x.texp() < y.texp() ? -1 : 1;
  Rat ax = x.mantissa() < 0 ? Rat(-x.mantissa()) : x.mantissa();
  Rat ay = y.mantissa() < 0 ? Rat(-y.mantissa()) : y.mantissa();
  return cmp(ax, ay);
}

ExpForm ef_mul(const ExpForm& x, const ExpForm& y) {
  return ExpForm(x.mantissa() * y.mantissa(), x.texp() + y.texp(), x.base());
}

}  // namespace

int compare_expforms(const ExpForm& x, const ExpForm& y) {
  if (x.base() != y.base()) throw invariant_error("exponential form base mismatch");
  int sx = x.sign(), sy = y.sign();
  if (sx != sy) return sx < sy ? -1 : 1;
  int c = cmp_abs(x, y);
  return sx > 0 ? c : -c;
}

namespace {

ExpForm ev_psi(const PsiExpr& e, const Int& q, unsigned b) {
  switch (e.kind) {
    case PsiExpr::Kind::Const:
      if (e.value <= 0) throw value_error("gap function constant must be positive");
      return ExpForm(e.value, b);
    case PsiExpr::Kind::Q:
      return ExpForm(Rat(q), b);
    case PsiExpr::Kind::Prod: {
      ExpForm r = ev_psi(*e.kids[0], q, b);
      for (std::size_t i = 1; i < e.kids.size(); ++i)
        r = ef_mul(r, ev_psi(*e.kids[i], q, b));
      return r;
    }
    case PsiExpr::Kind::Pow: {
      ExpForm v = ev_psi(*e.kids[0], q, b);
      long long ex = e.expo;
      if (ex == 0) return ExpForm(Rat(1), b);
      unsigned long ae = static_cast<unsigned long>(ex < 0 ? -ex : ex);
      const Rat& m = v.mantissa();
      std::size_t mbits = mpz_sizeinbase(m.get_num().get_mpz_t(), 2) +
                          mpz_sizeinbase(m.get_den().get_mpz_t(), 2);
      if (ae > (std::size_t(1) << 26) || mbits * ae > (std::size_t(1) << 26))
        throw budget_error("gap function power too large to evaluate exactly");
      Int pn, pd;
      mpz_pow_ui(pn.get_mpz_t(), m.get_num().get_mpz_t(), ae);
      mpz_pow_ui(pd.get_mpz_t(), m.get_den().get_mpz_t(), ae);
      Rat mp = ex > 0 ? Rat(pn, pd) : Rat(pd, pn);
      mp.canonicalize();
      return ExpForm(mp, v.texp() * static_cast<long>(ex), b);
    }
    case PsiExpr::Kind::Min: {
      ExpForm a = ev_psi(*e.kids[0], q, b);
      ExpForm c = ev_psi(*e.kids[1], q, b);
      return compare_expforms(a, c) <= 0 ? a : c;
    }
    case PsiExpr::Kind::ExpbNeg: {
      ExpForm v = ev_psi(*e.kids[0], q, b);
      if (v.sign() <= 0) throw value_error("expb exponent must be positive");
      Rat n = v.materialize();
      if (n.get_den() != 1 || n.get_num() < 1)
        throw value_error("expb exponent must be a positive integer");
      return ExpForm(Rat(1), Int(-n.get_num()), b);
    }
  }
  throw invariant_error("unreachable gap function node");
}

}  // namespace

ExpForm eval_psi(const PsiExpr& e, const Int& q, unsigned b) {
  if (q < 1) throw value_error("gap function argument must be >= 1");
  ExpForm r = ev_psi(e, q, b);
  if (r.sign() <= 0 || compare_expforms(r, ExpForm(Rat(1), b)) > 0)
    throw value_error("gap function value outside (0, 1] at q = " + short_int(q));
  return r;
}

namespace {

struct Mpfr {
  mpfr_t v;
  explicit Mpfr(mpfr_prec_t p) { mpfr_init2(v, p); }
  ~Mpfr() { mpfr_clear(v); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
};

Rat mpfr_to_rat(const mpfr_t x) {
  mpq_t q;
  mpq_init(q);
  mpfr_get_q(q, x);
  Rat r{mpq_class(q)};
  mpq_clear(q);
  return r;
}

// Directed ln(z) for integer z >= 1.
Rat ln_int(const Int& z, mpfr_prec_t prec, mpfr_rnd_t rnd) {
  Mpfr t(prec), r(prec);
  mpfr_set_z(t.v, z.get_mpz_t(), rnd);
  mpfr_log(r.v, t.v, rnd);
  return mpfr_to_rat(r.v);
}

Rat pow2_inv(unsigned k) { return Rat(Int(1), pow_ui(2, static_cast<unsigned long>(k))); }

// lo <= log_b(z) <= hi with hi - lo <= 2^-k, exact for powers of b.
LogBound bracket_log_int(const Int& z, unsigned b, unsigned k) {
  if (z < 1) throw value_error("log bracket requires z >= 1");
  if (z == 1) return {Rat(0), Rat(0)};
  Int j(static_cast<unsigned long>(floor_log(z, b)));
  if (cmp_with_pow(z, b, j) == 0) return {Rat(j), Rat(j)};
  Rat target = pow2_inv(k);
  mpfr_prec_t prec = static_cast<mpfr_prec_t>(k) + 128;
  for (int attempt = 0; attempt < 8; ++attempt, prec *= 2) {
    Rat lnz_lo = ln_int(z, prec, MPFR_RNDD);
    Rat lnz_hi = ln_int(z, prec, MPFR_RNDU);
    Rat lnb_lo = ln_int(Int(b), prec, MPFR_RNDD);
    Rat lnb_hi = ln_int(Int(b), prec, MPFR_RNDU);
    if (lnb_lo <= 0) continue;  // precision too low for ln b > 0
    Rat lo = lnz_lo / lnb_hi;
    Rat hi = lnz_hi / lnb_lo;
    if (hi - lo <= target) return {lo, hi};
  }
  throw invariant_error("log bracket failed to converge");
}

// Bracket of log_b(num/den) for a positive rational.
LogBound bracket_log_rat(const Rat& m, unsigned b, unsigned k) {
  if (m <= 0) throw value_error("log bracket requires a positive value");
  if (m.get_den() == 1) return bracket_log_int(m.get_num(), b, k);
  LogBound n = bracket_log_int(m.get_num(), b, k + 1);
  LogBound d = bracket_log_int(m.get_den(), b, k + 1);
  return {n.lo - d.hi, n.hi - d.lo};
}

std::optional<ExpForm> try_exact(const Quantity& x) {
  if (!x.has_pow || x.q == 1 || x.e == 0) return x.factor;
  unsigned b = x.factor.base();
  Int j(static_cast<unsigned long>(floor_log(x.q, b)));
  if (cmp_with_pow(x.q, b, j) == 0) {
    Rat je = x.e * Rat(j);
    if (je.get_den() == 1) return ef_mul(x.factor, ExpForm(Rat(1), je.get_num(), b));
    return std::nullopt;
  }
  if (x.e.get_den() == 1) {
    const Int& en = x.e.get_num();
    Int aen = abs(en);
    if (aen.fits_ulong_p() &&
        mpz_sizeinbase(x.q.get_mpz_t(), 2) * aen.get_ui() <= (std::size_t(1) << 22)) {
      Int qe;
      mpz_pow_ui(qe.get_mpz_t(), x.q.get_mpz_t(), aen.get_ui());
      ExpForm f2 = en > 0 ? ExpForm(Rat(qe), b) : ExpForm(Rat(Int(1), qe), b);
      return ef_mul(x.factor, f2);
    }
  }
  return std::nullopt;
}

}  // namespace

Quantity qty(const Rat& value, unsigned b) {
  ExpForm f(value, b);
  if (f.sign() <= 0) throw value_error("quantity must be positive");
  return Quantity(f);
}

Quantity qty_pow(const Int& q, const Rat& e, unsigned b) {
  if (q < 1) throw value_error("quantity power base must be >= 1");
  if (q == 1 || e == 0) return Quantity(ExpForm(Rat(1), b));
  return Quantity(ExpForm(Rat(1), b), q, e);
}

Quantity qty_scale(const ExpForm& f, const Quantity& rest) {
  if (f.sign() <= 0) throw value_error("quantity scale must be positive");
  ExpForm prod = ef_mul(f, rest.factor);
  if (rest.has_pow) return Quantity(prod, rest.q, rest.e);
  return Quantity(prod);
}

LogBound logbound_of(const Quantity& x, unsigned k) {
  if (x.factor.sign() <= 0) throw value_error("log bracket requires a positive quantity");
  unsigned b = x.factor.base();
  Rat lo(x.factor.texp());
  Rat hi = lo;
  if (x.factor.mantissa() != 1) {
    LogBound mb = bracket_log_rat(x.factor.mantissa(), b, k + 1);
    lo += mb.lo;
    hi += mb.hi;
  }
  if (x.has_pow && x.q != 1 && x.e != 0) {
    Int j(static_cast<unsigned long>(floor_log(x.q, b)));
    if (cmp_with_pow(x.q, b, j) == 0) {
      Rat part = x.e * Rat(j);
      lo += part;
      hi += part;
    } else {
      long long le = static_cast<long long>(mpz_sizeinbase(x.e.get_num().get_mpz_t(), 2)) -
                     static_cast<long long>(mpz_sizeinbase(x.e.get_den().get_mpz_t(), 2)) + 1;
      if (le < 0) le = 0;
      LogBound qb = bracket_log_int(x.q, b, k + 1 + static_cast<unsigned>(le));
      if (x.e > 0) {
        lo += x.e * qb.lo;
        hi += x.e * qb.hi;
      } else {
        lo += x.e * qb.hi;
        hi += x.e * qb.lo;
      }
    }
  }
  return {lo, hi};
}

Cmp compare_via_logs(const Quantity& x, const Quantity& y, unsigned max_k) {
  if (x.factor.base() != y.factor.base())
    throw invariant_error("quantity base mismatch in log comparison");
  std::optional<ExpForm> ex = try_exact(x);
  std::optional<ExpForm> ey = try_exact(y);
  if (ex && ey) {
    int c = compare_expforms(*ex, *ey);
    return c < 0 ? Cmp::Less : (c > 0 ? Cmp::Greater : Cmp::Equal);
  }
  std::vector<unsigned> ladder;
  for (unsigned k = 64;; k *= 8) {
    if (k >= max_k) {
      ladder.push_back(max_k);
      break;
    }
    ladder.push_back(k);
  }
  for (unsigned k : ladder) {
    LogBound bx = logbound_of(x, k);
    LogBound by = logbound_of(y, k);
    if (bx.hi < by.lo) return Cmp::Less;
    if (by.hi < bx.lo) return Cmp::Greater;
    if (bx.is_point() && by.is_point() && bx.lo == by.lo) return Cmp::Equal;
  }
  return Cmp::Indistinguishable;
}

}  // namespace cantorcf::psi
