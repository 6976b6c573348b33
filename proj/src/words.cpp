#include "cantorcf/words.hpp"

#include <algorithm>
#include <cstdint>
#include <map>

namespace cantorcf::words {

namespace {

constexpr unsigned long kValueDigitCap = 50'000'000;  // digits materializable as one value

void require_base(unsigned b) {
  if (b < 3 || b > 36) throw value_error("base must be in [3, 36]");
}

// Largest c with b^c < 2^62, and that power.
struct Chunk {
  unsigned len;
  unsigned long pow;
};

Chunk chunk_for(unsigned b) {
  Chunk c{0, 1};
  while (c.pow < (1ull << 62) / b) {
    c.pow *= b;
    ++c.len;
  }
  return c;
}

}  // namespace

DigitPair::DigitPair(unsigned base, unsigned lo, unsigned hi, std::vector<unsigned> D)
    : b(base), d1(lo), d2(hi), fullD(std::move(D)) {
  require_base(b);
  std::sort(fullD.begin(), fullD.end());
  fullD.erase(std::unique(fullD.begin(), fullD.end()), fullD.end());
  if (fullD.size() < 2) throw value_error("digit set needs at least 2 digits");
  if (fullD.size() >= b) throw value_error("digit set must omit at least one digit of the base");
  for (unsigned d : fullD)
    if (d >= b) throw value_error("digit " + std::to_string(d) + " out of range for base");
  if (!(d1 < d2) || d2 >= b) throw value_error("digit pair must satisfy 0 <= d1 < d2 < base");
  if (!in_D(d1) || !in_D(d2)) throw value_error("digit pair must lie inside the digit set");
}

bool DigitPair::in_D(unsigned digit) const {
  return std::binary_search(fullD.begin(), fullD.end(), digit);
}

struct DigitWord::Node {
  std::vector<unsigned> lit;
  std::shared_ptr<const Node> base;
  Int power;
  bool flipped = false;
  Int length;
  unsigned last = 0;
  long flip_delta = 0;  // last digit of the tail copy minus last digit of base
};

DigitWord DigitWord::literal(std::vector<unsigned> digits) {
  auto n = std::make_shared<Node>();
  n->length = digits.size();
  n->last = digits.empty() ? 0u : digits.back();
  n->lit = std::move(digits);
  DigitWord w;
  w.n_ = std::move(n);
  return w;
}

DigitWord DigitWord::composite(const DigitWord& base, const Int& power, bool flip,
                               const DigitPair& pair) {
  if (base.empty()) throw value_error("composite word needs a non-empty base");
  if (power < 1) throw value_error("composite power must be positive");
  unsigned last = base.last_digit();
  if (last != pair.d1 && last != pair.d2)
    throw value_error("base word's last digit lies outside the working pair");
  unsigned other = (last == pair.d1) ? pair.d2 : pair.d1;
  auto n = std::make_shared<Node>();
  n->base = base.n_;
  n->power = power;
  n->flipped = flip;
  n->length = (power + 1) * base.length();
  n->last = flip ? other : last;
  n->flip_delta = flip ? static_cast<long>(other) - static_cast<long>(last) : 0;
  DigitWord w;
  w.n_ = std::move(n);
  return w;
}

bool DigitWord::is_literal() const { return !n_ || !n_->base; }

const std::vector<unsigned>& DigitWord::lit() const {
  static const std::vector<unsigned> kEmpty;
  if (!n_) return kEmpty;
  if (n_->base) throw value_error("composite word accessed as literal");
  return n_->lit;
}

DigitWord DigitWord::base() const {
  if (is_literal()) throw value_error("literal word has no base");
  DigitWord w;
  w.n_ = n_->base;
  return w;
}

const Int& DigitWord::power() const {
  if (is_literal()) throw value_error("literal word has no power");
  return n_->power;
}

bool DigitWord::flip() const {
  if (is_literal()) throw value_error("literal word has no flip flag");
  return n_->flipped;
}

const Int& DigitWord::length() const {
  static const Int kZero = 0;
  return n_ ? n_->length : kZero;
}

unsigned DigitWord::last_digit() const {
  if (empty()) throw value_error("empty word has no last digit");
  return n_->last;
}

Int word_value(const std::vector<unsigned>& digits, unsigned b) {
  require_base(b);
  Chunk c = chunk_for(b);
  Int val = 0;
  std::size_t i = 0;
  while (i < digits.size()) {
    std::size_t take = std::min<std::size_t>(c.len, digits.size() - i);
    unsigned long group = 0;
    unsigned long scale = 1;
    for (std::size_t j = 0; j < take; ++j) {
      unsigned d = digits[i + j];
      if (d >= b) throw value_error("digit " + std::to_string(d) + " out of range for base");
      group = group * b + d;
      scale *= b;
    }
    mpz_mul_ui(val.get_mpz_t(), val.get_mpz_t(), scale);
    mpz_add_ui(val.get_mpz_t(), val.get_mpz_t(), group);
    i += take;
  }
  return val;
}

namespace {

Int node_value(const DigitWord& w, unsigned b) {
  if (w.is_literal()) return word_value(w.lit(), b);
  Int vb = node_value(w.base(), b);
  unsigned long L = to_ulong_checked(w.base().length(), "base word length");
  unsigned long total = to_ulong_checked(w.length(), "word length");
  // value(x^P x') = v(x) * b^L * (b^(P*L) - 1)/(b^L - 1) + v(x')
  Int BL = pow_ui(b, L, std::size_t(6) * kValueDigitCap);
  Int Btop = pow_ui(b, total - L, std::size_t(6) * kValueDigitCap);
  Int geo = (Btop - 1) / (BL - 1);
  Int tail = vb;
  if (w.flip()) {
    long delta = (w.last_digit() > w.base().last_digit())
                     ? static_cast<long>(w.last_digit()) - w.base().last_digit()
                     : -static_cast<long>(w.base().last_digit() - w.last_digit());
    tail += delta;
  }
  return vb * BL * geo + tail;
}

}  // namespace

Int word_value(const DigitWord& w, unsigned b) {
  require_base(b);
  if (w.length() > kValueDigitCap)
    throw budget_error("word of length " + short_int(w.length()) + " exceeds value cap");
  return node_value(w, b);
}

DigitWord flip_last(const DigitWord& w, const DigitPair& pair) {
  if (w.empty()) throw value_error("cannot flip the last digit of an empty word");
  if (w.is_literal()) {
    std::vector<unsigned> digits = w.lit();
    unsigned& last = digits.back();
    if (last == pair.d1)
      last = pair.d2;
    else if (last == pair.d2)
      last = pair.d1;
    else
      throw value_error("last digit lies outside the working pair");
    return DigitWord::literal(std::move(digits));
  }
  return DigitWord::composite(w.base(), w.power(), !w.flip(), pair);
}

namespace {

void emit_digits(const DigitWord& w, std::size_t need, std::vector<unsigned>& out) {
  if (need == 0 || w.empty()) return;
  if (w.is_literal()) {
    const auto& lit = w.lit();
    std::size_t take = std::min(need, lit.size());
    out.insert(out.end(), lit.begin(), lit.begin() + take);
    return;
  }
  DigitWord base = w.base();
  if (base.length() >= static_cast<unsigned long>(need)) {
    emit_digits(base, need, out);
    return;
  }
  std::size_t L = to_ulong_checked(base.length(), "base word length");
  std::vector<unsigned> base_digits;
  base_digits.reserve(L);
  emit_digits(base, L, out);  // first copy straight into out
  base_digits.assign(out.end() - L, out.end());
  std::size_t made = L;
  // remaining full/partial plain copies, then the flipped tail copy
  Int copies = w.power();
  for (Int c = 1; c < copies && made < need; ++c) {
    std::size_t take = std::min(need - made, L);
    out.insert(out.end(), base_digits.begin(), base_digits.begin() + take);
    made += take;
  }
  if (made < need) {
    std::size_t take = std::min(need - made, L);
    for (std::size_t j = 0; j < take; ++j) {
      unsigned d = base_digits[j];
      if (j == L - 1 && w.flip()) d = w.last_digit();
      out.push_back(d);
    }
  }
}

}  // namespace

std::vector<unsigned> expand_digits(const DigitWord& w, std::size_t limit) {
  std::size_t need = limit;
  if (w.length() < static_cast<unsigned long>(limit))
    need = to_ulong_checked(w.length(), "word length");
  std::vector<unsigned> out;
  out.reserve(need);
  emit_digits(w, need, out);
  return out;
}

Rat periodic_to_rational(const DigitWord& v, const DigitWord& w, const DigitPair& pair) {
  if (w.empty()) throw value_error("periodic part must be non-empty");
  unsigned b = pair.b;
  unsigned long m = to_ulong_checked(v.length(), "preperiod length");
  unsigned long N = to_ulong_checked(w.length(), "period length");
  if (Int(m) + Int(N) > kValueDigitCap)
    throw budget_error("expansion too long to evaluate exactly");
  // ((vw)_b - (v)_b) / (b^m (b^N - 1)) with (vw)_b - (v)_b = (v)_b (b^N - 1) + (w)_b
  Int BN = pow_ui(b, N, std::size_t(6) * kValueDigitCap);
  Int num = word_value(v, b) * (BN - 1) + word_value(w, b);
  Int den = pow_ui(b, m, std::size_t(6) * kValueDigitCap) * (BN - 1);
  Rat r(num, den);
  r.canonicalize();
  return r;
}

Rat periodic_to_rational(const std::vector<unsigned>& v, const std::vector<unsigned>& w,
                         unsigned b) {
  DigitPair pair(b, 0, 1, {0, 1});  // only b is consulted on the literal path
  return periodic_to_rational(DigitWord::literal(v), DigitWord::literal(w), pair);
}

namespace {

PeriodicExpansion expansion_small(unsigned long p, unsigned long q, unsigned b,
                                  std::size_t budget) {
  // Dense remainder stamps, reused across calls.
  thread_local std::vector<std::pair<std::uint32_t, std::uint32_t>> stamp;
  thread_local std::uint32_t epoch = 0;
  if (stamp.size() < q) stamp.resize(q, {0, 0});
  if (++epoch == 0) {
    std::fill(stamp.begin(), stamp.end(), std::make_pair(0u, 0u));
    epoch = 1;
  }
  std::vector<unsigned> digits;
  unsigned long r = p;
  for (std::size_t t = 0;; ++t) {
    auto& s = stamp[r];
    if (s.first == epoch) {
      std::size_t t0 = s.second;
      return {std::vector<unsigned>(digits.begin(), digits.begin() + t0),
              std::vector<unsigned>(digits.begin() + t0, digits.end())};
    }
    if (t >= budget)
      throw budget_error("expansion cycle exceeds digit budget of " + std::to_string(budget));
    s = {epoch, static_cast<std::uint32_t>(t)};
    r *= b;
    digits.push_back(static_cast<unsigned>(r / q));
    r %= q;
  }
}

PeriodicExpansion expansion_big(const Int& p, const Int& q, unsigned b, std::size_t budget) {
  std::map<Int, std::size_t> seen;
  std::vector<unsigned> digits;
  Int r = p;
  for (std::size_t t = 0;; ++t) {
    auto [it, fresh] = seen.emplace(r, t);
    if (!fresh) {
      std::size_t t0 = it->second;
      return {std::vector<unsigned>(digits.begin(), digits.begin() + t0),
              std::vector<unsigned>(digits.begin() + t0, digits.end())};
    }
    if (t >= budget)
      throw budget_error("expansion cycle exceeds digit budget of " + std::to_string(budget));
    r *= b;
    Int d = r / q;
    digits.push_back(static_cast<unsigned>(d.get_ui()));
    r -= d * q;
  }
}

}  // namespace

PeriodicExpansion rational_to_expansion(const Rat& x, unsigned b, std::size_t budget) {
  require_base(b);
  if (x < 0 || x > 1) throw value_error("expansion input must lie in [0, 1]");
  if (x == 1) return {{}, {b - 1}};
  const Int& p = x.get_num();
  const Int& q = x.get_den();
  if (q.fits_ulong_p() && q.get_ui() <= (1ul << 22))
    return expansion_small(p.get_ui(), q.get_ui(), b, budget);
  return expansion_big(p, q, b, budget);
}

bool in_cantor(const Rat& x, const DigitPair& pair, std::size_t budget) {
  if (x < 0 || x > 1) throw value_error("membership input must lie in [0, 1]");
  unsigned b = pair.b;
  if (x == 1) return pair.in_D(b - 1);
  PeriodicExpansion e = rational_to_expansion(x, b, budget);
  auto all_in = [&](const std::vector<unsigned>& ds) {
    return std::all_of(ds.begin(), ds.end(), [&](unsigned d) { return pair.in_D(d); });
  };
  if (all_in(e.pre) && all_in(e.per)) return true;
  bool terminating = e.per.size() == 1 && e.per[0] == 0;
  if (terminating && x > 0) {
    // second expansion of a base-adic rational: decrement the final digit,
    // then repeat b-1
    std::vector<unsigned> pre2 = e.pre;
    if (pre2.empty() || pre2.back() == 0)
      throw invariant_error("terminating expansion must end in a nonzero digit");
    --pre2.back();
    return all_in(pre2) && pair.in_D(b - 1);
  }
  return false;
}

std::string digits_to_string(const std::vector<unsigned>& digits) {
  std::string s;
  s.reserve(digits.size());
  for (unsigned d : digits) {
    if (d >= 36) throw value_error("digit too large for base-36 rendering");
    s.push_back(d < 10 ? static_cast<char>('0' + d) : static_cast<char>('a' + d - 10));
  }
  return s;
}

std::vector<unsigned> digits_from_string(const std::string& s, unsigned b) {
  require_base(b);
  std::vector<unsigned> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    unsigned d;
    if (c >= '0' && c <= '9')
      d = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'z')
      d = static_cast<unsigned>(c - 'a') + 10;
    else
      throw parse_error("invalid digit character '" + std::string(1, c) + "'", i);
    if (d >= b) throw parse_error("digit out of range for base " + std::to_string(b), i);
    out.push_back(d);
  }
  return out;
}

}  // namespace cantorcf::words
