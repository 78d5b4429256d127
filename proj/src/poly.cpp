#include "netctrl/poly.hpp"

#include <stdexcept>

namespace netctrl {

Poly::Poly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

Poly::Poly(const Rational& c) {
  if (c != 0) c_.push_back(c);
}

Poly::Poly(int c) {
  if (c != 0) c_.emplace_back(c);
}

Poly Poly::monomial(const Rational& c, std::size_t degree) {
  if (c == 0) return Poly();
  std::vector<Rational> v(degree + 1);
  v[degree] = c;
  return Poly(std::move(v));
}

void Poly::trim() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Rational Poly::eval(const Rational& x) const {
  Rational acc = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Complex Poly::eval(Complex x) const {
  Complex acc = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + to_double(*it);
  return acc;
}

Poly Poly::derivative() const {
  if (c_.size() <= 1) return Poly();
  std::vector<Rational> d(c_.size() - 1);
  for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<long>(i);
  return Poly(std::move(d));
}

Poly Poly::monic() const {
  if (c_.empty()) return *this;
  Poly out = *this;
  Rational lead = c_.back();
  for (auto& c : out.c_) c /= lead;
  return out;
}

Poly& Poly::operator+=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
  for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
  trim();
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
  for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
  trim();
  return *this;
}

Poly& Poly::operator*=(const Poly& o) {
  if (c_.empty() || o.c_.empty()) {
    c_.clear();
    return *this;
  }
  std::vector<Rational> out(c_.size() + o.c_.size() - 1);
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (c_[i] == 0) continue;
    for (std::size_t j = 0; j < o.c_.size(); ++j) out[i + j] += c_[i] * o.c_[j];
  }
  c_ = std::move(out);
  trim();
  return *this;
}

std::pair<Poly, Poly> Poly::divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw std::invalid_argument("polynomial division by zero");
  std::vector<Rational> rem = a.c_;
  const int db = b.degree();
  if (a.degree() < db) return {Poly(), a};
  std::vector<Rational> quo(static_cast<std::size_t>(a.degree() - db + 1));
  for (int k = a.degree(); k >= db; --k) {
    Rational f = rem[static_cast<std::size_t>(k)] / b.leading();
    quo[static_cast<std::size_t>(k - db)] = f;
    if (f == 0) continue;
    for (int j = 0; j <= db; ++j) rem[static_cast<std::size_t>(k - db + j)] -= f * b.c_[static_cast<std::size_t>(j)];
  }
  return {Poly(std::move(quo)), Poly(std::move(rem))};
}

std::string Poly::to_string(const std::string& var) const {
  if (c_.empty()) return "0";
  std::string out;
  for (int k = degree(); k >= 0; --k) {
    const Rational& c = c_[static_cast<std::size_t>(k)];
    if (c == 0) continue;
    Rational mag = c < 0 ? Rational(-c) : c;
    if (out.empty()) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    bool unit = mag == 1 && k > 0;
    if (!unit) out += netctrl::to_string(mag);
    if (k > 0) {
      if (!unit) out += "*";
      out += var;
      if (k > 1) out += "^" + std::to_string(k);
    }
  }
  return out;
}

Poly gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = Poly::divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

Poly squarefree_part(const Poly& a) {
  if (a.degree() <= 0) return a.monic();
  Poly g = gcd(a, a.derivative());
  return Poly::divmod(a, g).first.monic();
}

}  // namespace netctrl
