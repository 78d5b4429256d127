#pragma once

#include <complex>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace netctrl {

// Always normalized: positive denominator, reduced by gcd.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;
using Complex = std::complex<double>;

// Accepts "3", "-3/4", "0.125", "1e-3", "2.5e2". Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

// Exact conversion of a finite double (binary expansion).
Rational rational_from_double(double value);

std::string to_string(const Rational& value);

inline double to_double(const Rational& value) { return value.convert_to<double>(); }

// Best rational approximation with denominator at most max_den (continued fractions).
Rational best_rational(double value, const Integer& max_den);

}  // namespace netctrl
