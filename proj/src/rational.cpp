#include "frobjet/rational.hpp"

#include <cctype>

namespace frobjet {

Rat rat_parse(const std::string& s) {
  if (s.empty()) fail(Error::Kind::parse, "empty rational literal");
  std::string::size_type i = 0;
  auto scan_int = [&](const char* what) {
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    auto start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == start)
      fail(Error::Kind::parse, std::string("expected ") + what + " in rational literal '" + s + "'");
  };
  scan_int("numerator");
  if (i < s.size()) {
    if (s[i] != '/')
      fail(Error::Kind::parse, "bad character in rational literal '" + s + "'");
    ++i;
    scan_int("denominator");
    if (i != s.size())
      fail(Error::Kind::parse, "trailing garbage in rational literal '" + s + "'");
  }
  Rat r;
  if (r.set_str(s, 10) != 0)
    fail(Error::Kind::parse, "unparsable rational literal '" + s + "'");
  if (sgn(r.get_den()) == 0)
    fail(Error::Kind::parse, "zero denominator in rational literal '" + s + "'");
  r.canonicalize();
  return r;
}

std::string rat_str(const Rat& r) { return r.get_str(); }

Rat rat_factorial(unsigned n) {
  mpz_class z;
  mpz_fac_ui(z.get_mpz_t(), n);
  return Rat(z);
}

Rat rat_binomial(unsigned n, unsigned k) {
  if (k > n) return Rat(0);
  mpz_class z;
  mpz_bin_uiui(z.get_mpz_t(), n, k);
  return Rat(z);
}

Rat rat_pow(const Rat& r, unsigned n) {
  Rat acc(1), base(r);
  while (n) {
    if (n & 1) acc *= base;
    base *= base;
    n >>= 1;
  }
  return acc;
}

bool rat_integer(const Rat& r, long* out) {
  // Copy and canonicalize: two-argument mpq_class construction does not
  // reduce the fraction, and this helper must not be fooled by 14/7.
  Rat c = r;
  c.canonicalize();
  if (c.get_den() != 1) return false;
  if (out) {
    if (!c.get_num().fits_slong_p())
      fail(Error::Kind::internal, "integer out of range: " + rat_str(c));
    *out = c.get_num().get_si();
  }
  return true;
}

}  // namespace frobjet
