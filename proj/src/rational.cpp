#include "netctrl/rational.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace netctrl {
namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

Integer pow10(long exp) {
  Integer out = 1;
  for (long i = 0; i < exp; ++i) out *= 10;
  return out;
}

Rational parse_decimal(std::string_view text) {
  bool negative = false;
  std::string_view s = text;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_part = s.substr(e + 1);
    bool exp_negative = false;
    if (!exp_part.empty() && (exp_part.front() == '-' || exp_part.front() == '+')) {
      exp_negative = exp_part.front() == '-';
      exp_part.remove_prefix(1);
    }
    if (!all_digits(exp_part) || exp_part.size() > 6) {
      throw std::invalid_argument("invalid exponent in '" + std::string(text) + "'");
    }
    exponent = std::stol(std::string(exp_part));
    if (exp_negative) exponent = -exponent;
    s = s.substr(0, e);
  }
  std::string digits;
  long frac_len = 0;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view ip = s.substr(0, dot);
    std::string_view fp = s.substr(dot + 1);
    if ((ip.empty() && fp.empty()) || (!ip.empty() && !all_digits(ip)) ||
        (!fp.empty() && !all_digits(fp))) {
      throw std::invalid_argument("invalid number '" + std::string(text) + "'");
    }
    digits = std::string(ip) + std::string(fp);
    frac_len = static_cast<long>(fp.size());
  } else {
    if (!all_digits(s)) throw std::invalid_argument("invalid number '" + std::string(text) + "'");
    digits = std::string(s);
  }
  if (digits.empty()) throw std::invalid_argument("invalid number '" + std::string(text) + "'");
  // a leading zero would select octal in the GMP string constructor
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  Rational value{Integer(digits)};
  long shift = exponent - frac_len;
  if (shift > 0) {
    value *= Rational(pow10(shift));
  } else if (shift < 0) {
    value /= Rational(pow10(-shift));
  }
  return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw std::invalid_argument("empty number");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_decimal(text.substr(0, slash));
    Rational den = parse_decimal(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return parse_decimal(text);
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite number");
  int exp = 0;
  double mant = std::frexp(value, &exp);
  // 53-bit mantissa scaled to an integer.
  auto scaled = static_cast<long long>(std::ldexp(mant, 53));
  Rational out{Integer(scaled)};
  int shift = exp - 53;
  Integer two_pow = 1;
  for (int i = 0; i < std::abs(shift); ++i) two_pow *= 2;
  if (shift >= 0) {
    out *= Rational(two_pow);
  } else {
    out /= Rational(two_pow);
  }
  return out;
}

std::string to_string(const Rational& value) {
  if (denominator(value) == 1) return numerator(value).str();
  return numerator(value).str() + "/" + denominator(value).str();
}

Rational best_rational(double value, const Integer& max_den) {
  // Convergents of the continued fraction of the exact binary value.
  Rational x = rational_from_double(value);
  Integer p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  Rational rest = x;
  for (int iter = 0; iter < 64; ++iter) {
    Integer a = numerator(rest) / denominator(rest);
    if (numerator(rest) < 0 && a * denominator(rest) != numerator(rest)) a -= 1;
    Integer p2 = a * p1 + p0;
    Integer q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    Rational frac = rest - Rational(a);
    if (frac == 0) break;
    rest = 1 / frac;
  }
  if (q1 == 0) return Rational(0);
  return Rational(p1, q1);
}

}  // namespace netctrl
