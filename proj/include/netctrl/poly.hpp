#pragma once

#include <string>
#include <utility>
#include <vector>

#include "netctrl/rational.hpp"

namespace netctrl {

// Univariate polynomial in lambda with exact coefficients, ascending degree.
// The zero polynomial has no coefficients.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Rational> coeffs);
  // Implicit so that Matrix<Poly> can be zero-filled and scaled like other scalars.
  Poly(const Rational& c);  // NOLINT(google-explicit-constructor)
  Poly(int c);              // NOLINT(google-explicit-constructor)

  static Poly monomial(const Rational& c, std::size_t degree);

  [[nodiscard]] int degree() const { return static_cast<int>(c_.size()) - 1; }
  [[nodiscard]] bool is_zero() const { return c_.empty(); }
  [[nodiscard]] const std::vector<Rational>& coeffs() const { return c_; }
  [[nodiscard]] Rational coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Rational(0); }
  [[nodiscard]] Rational leading() const { return c_.empty() ? Rational(0) : c_.back(); }

  [[nodiscard]] Rational eval(const Rational& x) const;
  [[nodiscard]] Complex eval(Complex x) const;
  [[nodiscard]] Poly derivative() const;
  [[nodiscard]] Poly monic() const;

  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(const Poly& o);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, const Poly& b) { return a *= b; }
  friend Poly operator-(Poly a) {
    for (auto& c : a.c_) c = -c;
    return a;
  }
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  // Quotient and remainder; b must be nonzero.
  static std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b);

  [[nodiscard]] std::string to_string(const std::string& var = "l") const;

 private:
  void trim();
  std::vector<Rational> c_;
};

// Monic gcd (zero if both are zero).
Poly gcd(Poly a, Poly b);
// a / gcd(a, a'), monic.
Poly squarefree_part(const Poly& a);

}  // namespace netctrl
