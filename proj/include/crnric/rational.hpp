#pragma once

// Exact rational scalars and their text form.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace crnric {

using Rational = mpq_class;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Prints `p/q`, or `p` when the denominator is 1.
inline std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Accepts `p`, `p/q`, and finite decimals such as `-0.125` (converted exactly).
inline Rational parse_rational(std::string_view text, std::size_t line = 0) {
  auto fail = [&] { throw ParseError(line, "malformed rational '" + std::string(text) + "'"); };
  if (text.empty()) fail();

  auto digits_only = [](std::string_view s, bool allow_sign) {
    if (s.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (s[0] == '-' || s[0] == '+')) ++i;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  auto strip_plus = [](std::string_view s) {
    return (!s.empty() && s[0] == '+') ? s.substr(1) : s;
  };

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    if (!digits_only(num, true) || !digits_only(den, false)) fail();
    mpz_class n{std::string(strip_plus(num))};
    mpz_class d{std::string(den)};
    if (d == 0) throw ParseError(line, "zero denominator in '" + std::string(text) + "'");
    Rational q(n, d);
    q.canonicalize();
    return q;
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto whole = text.substr(0, dot);
    auto frac = text.substr(dot + 1);
    bool negative = !whole.empty() && whole[0] == '-';
    if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) whole = whole.substr(1);
    if (whole.empty() && frac.empty()) fail();
    if (!whole.empty() && !digits_only(whole, false)) fail();
    if (!frac.empty() && !digits_only(frac, false)) fail();
    mpz_class scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    mpz_class n = whole.empty() ? mpz_class(0) : mpz_class(std::string(whole));
    n = n * scale + (frac.empty() ? mpz_class(0) : mpz_class(std::string(frac)));
    Rational q(negative ? mpz_class(-n) : n, scale);
    q.canonicalize();
    return q;
  }
  if (!digits_only(text, true)) fail();
  return Rational(mpz_class(std::string(strip_plus(text))));
}

inline double to_double(const Rational& q) { return q.get_d(); }

/// Exact value of a finite double.
inline Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw std::domain_error("non-finite value has no rational form");
  Rational q(x);
  return q;
}

/// Smallest-denominator continued-fraction convergent of `x` within `tolerance`.
/// Returns the exact binary value of `x` if no convergent is close enough first.
inline Rational nearest_simple_rational(double x, double tolerance) {
  const Rational target = exact_rational(x);
  const Rational tol = exact_rational(tolerance);
  // Convergents h_k / k_k of the continued fraction of `target`.
  mpz_class h_prev = 1, h_prev2 = 0, k_prev = 0, k_prev2 = 1;
  Rational rest = target;
  for (int iter = 0; iter < 200; ++iter) {
    mpz_class a;
    mpz_fdiv_q(a.get_mpz_t(), rest.get_num_mpz_t(), rest.get_den_mpz_t());
    mpz_class h = a * h_prev + h_prev2;
    mpz_class k = a * k_prev + k_prev2;
    Rational conv(h, k);
    conv.canonicalize();
    if (abs(conv - target) <= tol) return conv;
    Rational frac = rest - Rational(a);
    if (frac == 0) return conv;
    rest = 1 / frac;
    h_prev2 = h_prev;
    h_prev = h;
    k_prev2 = k_prev;
    k_prev = k;
  }
  return target;
}

inline Rational rational_abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

}  // namespace crnric
