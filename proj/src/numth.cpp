#include "cantorcf/numth.hpp"

#include <cstdint>
#include <map>
#include <numeric>

#include "cantorcf/words.hpp"

namespace cantorcf::numth {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(u128(a) * b % m); }

u64 powmod(u64 a, u64 e, u64 m) {
  u64 r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

u64 brent_rho(u64 n) {
  if ((n & 1) == 0) return 2;
  for (u64 c = 1;; ++c) {
    u64 x = 2, y = 2, d = 1;
    u64 power = 1, lam = 0, saved = 2;
    auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
    while (d == 1) {
      if (power == lam) {
        saved = x;
        power <<= 1;
        lam = 0;
      }
      x = f(x);
      ++lam;
      u64 diff = x > saved ? x - saved : saved - x;
      d = std::gcd(diff, n);
    }
    if (d != n) return d;
    (void)y;
  }
}

void factor_u64(u64 n, std::map<u64, unsigned>& out) {
  if (n == 1) return;
  if (is_prime_u64(n)) {
    ++out[n];
    return;
  }
  u64 d = brent_rho(n);
  factor_u64(d, out);
  factor_u64(n / d, out);
}

}  // namespace

USplit split_u(const Int& u, unsigned b) {
  if (u < 1) throw value_error("u must be positive");
  Int x = u;
  Int u1 = 1;
  Int B = b;
  Int g = gcd(x, B);
  while (g > 1) {
    x /= g;
    u1 *= g;
    g = gcd(x, B);
  }
  return {u, u1, x};
}

Int euler_phi(const Int& n) {
  if (n < 1) throw value_error("totient argument must be positive");
  Int result = 1;
  Int x = n;
  auto apply = [&](const Int& p) {
    Int pe = 1;
    while (mpz_divisible_p(x.get_mpz_t(), p.get_mpz_t())) {
      x /= p;
      pe *= p;
    }
    result *= pe / p * (p - 1);
  };
  if (mpz_even_p(x.get_mpz_t())) apply(2);
  for (unsigned long d = 3; d <= 1'000'000ul && Int(d) * d <= x; d += 2) {
    if (mpz_divisible_ui_p(x.get_mpz_t(), d)) apply(Int(d));
  }
  if (x > 1) {
    if (Int(1'000'000ul) * 1'000'000ul >= x) {
      Int p = x;  // copy: apply() mutates x, which must not alias p
      apply(p);   // no factor below 10^6, so the cofactor is prime
    } else if (x.fits_ulong_p()) {
      std::map<u64, unsigned> fac;
      factor_u64(x.get_ui(), fac);
      for (auto& [p, e] : fac) {
        Int P(static_cast<unsigned long>(p));
        Int pe = 1;
        for (unsigned i = 0; i < e; ++i) pe *= P;
        result *= pe / P * (P - 1);
      }
      x = 1;
    } else {
      throw budget_error("totient cofactor too large to factor: " + short_int(x));
    }
  }
  return result;
}

Int mod_inverse(const Int& a, const Int& n) {
  if (n < 1) throw value_error("modulus must be positive");
  Int r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), n.get_mpz_t()) == 0)
    throw value_error("no inverse: gcd(" + short_int(a) + ", " + short_int(n) + ") > 1");
  return r;
}

unsigned long valuation(const Int& p, const Int& n) {
  if (p < 2 || mpz_probab_prime_p(p.get_mpz_t(), 32) == 0)
    throw value_error("valuation base must be prime");
  if (n < 1) throw value_error("valuation argument must be positive");
  Int x = n;
  unsigned long k = 0;
  while (mpz_divisible_p(x.get_mpz_t(), p.get_mpz_t())) {
    x /= p;
    ++k;
  }
  return k;
}

M1Choice choose_m1(const words::DigitPair& pair) {
  unsigned b = pair.b;
  Int u = pair.u();
  USplit us = split_u(u, b);
  M1Choice out;
  if (pair.d2 == 1) {
    out.m1 = 0;
    out.N = 1;
  } else {
    Int M = us.u2 * us.u2 * (b - 1) * (b - 1);
    out.N = euler_phi(M);
    out.m1 = to_ulong_checked(out.N - 1, "m1");
  }
  // b^m1 must absorb u1, and (d1 S + u)/(b^N - 1) must reduce to denominator
  // (b^N - 1)/u2
  Int Bm1 = pow_ui(b, out.m1);
  if (!mpz_divisible_p(Bm1.get_mpz_t(), us.u1.get_mpz_t()))
    throw invariant_error("u1 does not divide b^m1");
  unsigned long Nl = to_ulong_checked(out.N, "N");
  Int BN = pow_ui(b, Nl);
  Int S = (BN - 1) / (b - 1);
  Int num = pair.d1 * S + u;
  if (gcd(num, BN - 1) != us.u2)
    throw invariant_error("digit pair does not reduce to the expected denominator");
  return out;
}

}  // namespace cantorcf::numth
