#include "cantorcf/arith.hpp"

#include <cmath>

namespace cantorcf {

unsigned long to_ulong_checked(const Int& x, const char* what) {
  if (x < 0 || !x.fits_ulong_p())
    throw value_error(std::string(what) + " out of machine range: " + short_int(x));
  return x.get_ui();
}

Int pow_ui(unsigned b, unsigned long e, std::size_t cap_bits) {
  if (b < 2) throw value_error("power base must be >= 2");
  // bits(b^e) <= e*ceil(log2 b); cheap overflow guard before allocating.
  unsigned lg = 1;
  while ((1u << lg) < b) ++lg;
  if (e > cap_bits || e * static_cast<unsigned long>(lg) > cap_bits)
    throw budget_error("power of " + std::to_string(b) + " with exponent " +
                       std::to_string(e) + " exceeds materialization cap");
  Int r;
  mpz_ui_pow_ui(r.get_mpz_t(), b, e);
  return r;
}

Int pow_ui(unsigned b, const Int& e, std::size_t cap_bits) {
  if (e < 0) throw value_error("negative exponent in integer power");
  if (!e.fits_ulong_p())
    throw budget_error("exponent " + short_int(e) + " exceeds materialization cap");
  return pow_ui(b, e.get_ui(), cap_bits);
}

unsigned long floor_log(const Int& x, unsigned b) {
  if (x < 1) throw value_error("floor_log requires x >= 1");
  if (b < 2) throw value_error("floor_log requires base >= 2");
  // mpz_sizeinbase is exact or one too large; settle by comparing with b^k.
  std::size_t k = mpz_sizeinbase(x.get_mpz_t(), static_cast<int>(b)) - 1;
  if (k == 0) return 0;
  Int p = pow_ui(b, static_cast<unsigned long>(k), std::size_t(1) << 34);
  return p <= x ? k : k - 1;
}

unsigned long digit_count(const Int& x, unsigned b) {
  if (x == 0) return 1;
  return floor_log(x, b) + 1;
}

int cmp_with_pow(const Int& x, unsigned b, const Int& e) {
  if (x < 1) throw value_error("cmp_with_pow requires x >= 1");
  if (e < 0) throw value_error("cmp_with_pow requires e >= 0");
  Int fl(static_cast<unsigned long>(floor_log(x, b)));
  if (fl < e) return -1;  // x < b^(fl+1) <= b^e
  if (fl > e) return 1;   // x >= b^fl >= b^(e+1) > b^e
  // fl == e: b^e has x's digit count, safe to materialize.
  Int p = pow_ui(b, e, std::size_t(1) << 34);
  return cmp(x, p);
}

std::string dec(const Int& x) { return x.get_str(10); }

Int int_from_string(const std::string& s) {
  if (s.empty()) throw parse_error("empty integer literal");
  std::size_t start = (s[0] == '-') ? 1 : 0;
  if (start == s.size()) throw parse_error("empty integer literal");
  for (std::size_t i = start; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9')
      throw parse_error("invalid digit '" + std::string(1, s[i]) + "' in integer", i);
  return Int(s, 10);
}

Rat rat_from_string(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(int_from_string(s));
  Int num = int_from_string(s.substr(0, slash));
  Int den = int_from_string(s.substr(slash + 1));
  if (den == 0) throw value_error("zero denominator in rational literal");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

std::string rat_to_string(const Rat& r) {
  if (r.get_den() == 1) return dec(r.get_num());
  return dec(r.get_num()) + "/" + dec(r.get_den());
}

std::string short_int(const Int& x, std::size_t keep) {
  std::string s = dec(x);
  if (s.size() <= 2 * keep + 8) return s;
  return s.substr(0, keep) + ".." + s.substr(s.size() - keep) + " (" +
         std::to_string(s.size() - (s[0] == '-' ? 1 : 0)) + " digits)";
}

}  // namespace cantorcf
