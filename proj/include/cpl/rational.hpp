#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>

namespace cpl {

// Exact rationals. mpq_class keeps results canonical after every operation.
using Rational = mpq_class;
using Integer = mpz_class;

std::optional<Rational> parse_rational(const std::string& text);
std::string to_string(const Rational& q);

Rational pow2(unsigned k);
Rational inv_pow2(unsigned k);

bool in_unit_interval(const Rational& q);

// q in [0,1]_k: q = m / 2^k for an integer m.
bool in_dyadic_grid(const Rational& q, unsigned k);

// Smallest b with q = m / 2^b, if q is dyadic.
std::optional<unsigned> dyadic_exponent(const Rational& q);

Rational ceil_to_grid(const Rational& q, unsigned b);

}  // namespace cpl
