#pragma once

#include "cantorcf/arith.hpp"
#include "cantorcf/words.hpp"

namespace cantorcf::numth {

// u = u1*u2 with every prime of u1 dividing b and gcd(u2, b) = 1.
struct USplit {
  Int u;
  Int u1;
  Int u2;
};

USplit split_u(const Int& u, unsigned b);

// Totient via trial division below 10^6, then Brent-rho with deterministic
// Miller-Rabin certification below 2^64; larger uncertified cofactors error.
Int euler_phi(const Int& n);

// Inverse of a modulo n in [0, n); errors unless gcd(a, n) = 1.
Int mod_inverse(const Int& a, const Int& n);

// Largest e with p^e | n, for prime p.
unsigned long valuation(const Int& p, const Int& n);

struct M1Choice {
  unsigned long m1;
  Int N;
};

// m1 = 0, N = 1 when d2 = 1; otherwise N = phi(u2^2 (b-1)^2), m1 = N - 1.
// Postconditions checked: u1 | b^m1 and the reduced denominator of the initial
// fraction equals (b^N - 1)/u2.
M1Choice choose_m1(const words::DigitPair& pair);

}  // namespace cantorcf::numth
