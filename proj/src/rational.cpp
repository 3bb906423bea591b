#include "markovcomb/rational.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include "markovcomb/errors.hpp"

namespace mcomb {

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator");
  v_ = mpq_class(mpz_class(static_cast<long>(num)), mpz_class(static_cast<long>(den)));
  v_.canonicalize();
}

Rational Rational::parse(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);

  auto valid_int = [](std::string_view d, bool allow_sign) {
    if (d.empty()) return false;
    std::size_t pos = 0;
    if (allow_sign && (d[0] == '-' || d[0] == '+')) pos = 1;
    if (pos == d.size()) return false;
    for (; pos < d.size(); ++pos)
      if (!std::isdigit(static_cast<unsigned char>(d[pos]))) return false;
    return true;
  };

  const auto slash = s.find('/');
  std::string num = slash == std::string::npos ? s : s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!valid_int(num, true) || !valid_int(den, false))
    throw Error(ErrorCode::ParseError, "not a rational: '" + std::string(text) + "'");
  if (num[0] == '+') num.erase(0, 1);

  mpz_class n(num, 10);
  mpz_class d(den, 10);
  if (d == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + std::string(text) + "'");
  Rational r;
  r.v_ = mpq_class(n, d);
  r.v_.canonicalize();
  return r;
}

Rational Rational::from_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite value");
  Rational r;
  r.v_ = mpq_class(x);  // exact
  return r;
}

namespace {

// Continued-fraction descent: take ceil(lo) when it fits, else recurse on the
// reciprocals of the fractional parts.
mpq_class simplest(const mpq_class& lo, const mpq_class& hi) {
  mpz_class a;
  mpz_fdiv_q(a.get_mpz_t(), lo.get_num_mpz_t(), lo.get_den_mpz_t());
  if (mpq_class(a) == lo) return lo;
  if (mpq_class(a + 1) <= hi) return mpq_class(a + 1);
  mpq_class tail = simplest(1 / (hi - a), 1 / (lo - a));
  mpq_class out = a + 1 / tail;
  out.canonicalize();
  return out;
}

}  // namespace

Rational Rational::simplest_between(const Rational& lo, const Rational& hi) {
  if (lo.v_ < 0 || hi.v_ < lo.v_) throw Error(ErrorCode::InvalidArgument, "need 0 <= lo <= hi");
  Rational r;
  r.v_ = simplest(lo.v_, hi.v_);
  return r;
}

Rational Rational::approximate(double x, std::int64_t max_den) {
  if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite value");
  if (max_den < 1) throw Error(ErrorCode::InvalidArgument, "max_den must be positive");

  const mpq_class target(x);
  const mpz_class cap(static_cast<long>(max_den));
  if (target.get_den() <= cap) return Rational(target);

  // Convergents h/k of the continued fraction of target.
  mpz_class h_prev2 = 0, h_prev = 1, k_prev2 = 1, k_prev = 0;
  mpq_class rest = target;
  while (true) {
    mpz_class a;
    mpz_fdiv_q(a.get_mpz_t(), rest.get_num_mpz_t(), rest.get_den_mpz_t());
    mpz_class h = a * h_prev + h_prev2;
    mpz_class k = a * k_prev + k_prev2;
    if (k > cap) {
      // Best semiconvergent within the cap, compared against the last convergent.
      mpz_class m = (cap - k_prev2) / k_prev;
      mpq_class semi(m * h_prev + h_prev2, m * k_prev + k_prev2);
      semi.canonicalize();
      mpq_class conv(h_prev, k_prev);
      conv.canonicalize();
      mpq_class ds = ::abs(mpq_class(semi - target));
      mpq_class dc = ::abs(mpq_class(conv - target));
      return Rational(ds < dc ? semi : conv);
    }
    h_prev2 = h_prev; h_prev = h;
    k_prev2 = k_prev; k_prev = k;
    mpq_class frac = rest - mpq_class(a);
    if (frac == 0) break;
    rest = 1 / frac;
  }
  return Rational(mpq_class(h_prev, k_prev));
}

std::string Rational::str() const {
  return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

Rational Rational::abs() const {
  Rational r;
  r.v_ = ::abs(v_);
  return r;
}

Rational Rational::inverse() const {
  if (is_zero()) throw Error(ErrorCode::InvalidArgument, "division by zero");
  Rational r;
  r.v_ = 1 / v_;
  return r;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw Error(ErrorCode::InvalidArgument, "division by zero");
  v_ /= o.v_;
  return *this;
}

Rational pow(const Rational& base, int exponent) {
  if (exponent < 0) return pow(base.inverse(), -exponent);
  Rational result(1);
  Rational b = base;
  unsigned e = static_cast<unsigned>(exponent);
  while (e) {
    if (e & 1u) result *= b;
    b *= b;
    e >>= 1u;
  }
  return result;
}

}  // namespace mcomb
