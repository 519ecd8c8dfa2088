#include "cpl/rational.hpp"

#include <cctype>

namespace cpl {

std::optional<Rational> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t slash = text.find('/');
  auto digits = [](const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  std::string num = text.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
  if (!digits(num) || !digits(den)) return std::nullopt;
  Integer d(den);
  if (d == 0) return std::nullopt;
  Rational q(Integer(num), d);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

Rational pow2(unsigned k) {
  Integer n;
  mpz_ui_pow_ui(n.get_mpz_t(), 2, k);
  return Rational(n);
}

Rational inv_pow2(unsigned k) {
  Rational r = 1 / pow2(k);
  return r;
}

bool in_unit_interval(const Rational& q) { return q >= 0 && q <= 1; }

bool in_dyadic_grid(const Rational& q, unsigned k) {
  Rational scaled = q * pow2(k);
  return scaled.get_den() == 1;
}

std::optional<unsigned> dyadic_exponent(const Rational& q) {
  Integer den = q.get_den();
  unsigned b = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++b;
  }
  if (den != 1) return std::nullopt;
  return b;
}

Rational ceil_to_grid(const Rational& q, unsigned b) {
  Rational scaled = q * pow2(b);
  Integer m;
  mpz_cdiv_q(m.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  return Rational(m) / pow2(b);
}

}  // namespace cpl
