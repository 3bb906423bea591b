#pragma once

// Exact rational scalars, always in lowest terms.

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace mcomb {

class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t n) : v_(static_cast<long>(n)) {}  // NOLINT(implicit)
  Rational(std::int64_t num, std::int64_t den);

  // Accepts "n", "-n", "n/d" with d != 0. Result is canonical.
  static Rational parse(std::string_view text);

  // The exact binary value of a finite double.
  static Rational from_double(double x);

  // Best rational approximation of x with denominator <= max_den
  // (continued-fraction convergents and semiconvergents).
  static Rational approximate(double x, std::int64_t max_den);

  // The rational of least denominator in [lo, hi]; requires 0 <= lo <= hi.
  static Rational simplest_between(const Rational& lo, const Rational& hi);

  // Always "num/den", e.g. "1/1", "0/1", "-3/4".
  std::string str() const;
  double to_double() const { return v_.get_d(); }

  std::string numerator_str() const { return v_.get_num().get_str(); }
  std::string denominator_str() const { return v_.get_den().get_str(); }
  bool denominator_at_most(std::int64_t cap) const { return v_.get_den() <= static_cast<long>(cap); }
  int sign() const { return sgn(v_); }
  bool is_zero() const { return sign() == 0; }
  bool is_integer() const { return v_.get_den() == 1; }
  Rational abs() const;
  Rational inverse() const;

  const mpq_class& raw() const { return v_; }

  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend Rational operator-(const Rational& a) { Rational r; r.v_ = -a.v_; return r; }

  friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) == 0; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.v_, b.v_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  explicit Rational(mpq_class v) : v_(std::move(v)) { v_.canonicalize(); }
  mpq_class v_;
};

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.to_double(); }

// Integer power with a possibly negative exponent.
Rational pow(const Rational& base, int exponent);

}  // namespace mcomb
