#pragma once

// Double-double ("compensated") arithmetic: an unevaluated sum of two IEEE
// doubles giving ~106 bits (~31-32 decimal digits) of working precision.
// Built on the classic error-free transforms (two_sum / two_prod with FMA);
// the transcendental routines follow the well-known dd algorithms
// (argument reduction + Taylor for exp, one Newton step from a double seed
// for log).  Only what the error engine needs is provided: + - * /, sqrt,
// exp, log, pow, comparisons.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace qms {

struct DDouble {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DDouble() = default;
  constexpr DDouble(double h) : hi(h), lo(0.0) {}
  constexpr DDouble(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi + lo; }
};

namespace detail {

// s = fl(a+b), err = (a+b) - s, no assumption on magnitudes.
inline DDouble two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

// Requires |a| >= |b| (or a == 0).
inline DDouble quick_two_sum(double a, double b) {
  double s = a + b;
  double err = b - (s - a);
  return {s, err};
}

// p = fl(a*b), err = a*b - p (exact via FMA).
inline DDouble two_prod(double a, double b) {
  double p = a * b;
  double err = std::fma(a, b, -p);
  return {p, err};
}

}  // namespace detail

inline DDouble operator+(const DDouble& a, const DDouble& b) {
  using namespace detail;
  DDouble s = two_sum(a.hi, b.hi);
  DDouble t = two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline DDouble operator+(const DDouble& a, double b) {
  using namespace detail;
  DDouble s = two_sum(a.hi, b);
  s.lo += a.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline DDouble operator+(double a, const DDouble& b) { return b + a; }

inline DDouble operator-(const DDouble& a) { return {-a.hi, -a.lo}; }

inline DDouble operator-(const DDouble& a, const DDouble& b) { return a + (-b); }
inline DDouble operator-(const DDouble& a, double b) { return a + (-b); }
inline DDouble operator-(double a, const DDouble& b) { return (-b) + a; }

inline DDouble operator*(const DDouble& a, const DDouble& b) {
  using namespace detail;
  DDouble p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

inline DDouble operator*(const DDouble& a, double b) {
  using namespace detail;
  DDouble p = two_prod(a.hi, b);
  p.lo += a.lo * b;
  return quick_two_sum(p.hi, p.lo);
}

inline DDouble operator*(double a, const DDouble& b) { return b * a; }

inline DDouble operator/(const DDouble& a, const DDouble& b) {
  using namespace detail;
  double q1 = a.hi / b.hi;
  DDouble r = a - b * q1;
  double q2 = r.hi / b.hi;
  r = r - b * q2;
  double q3 = r.hi / b.hi;
  DDouble q = quick_two_sum(q1, q2);
  return q + q3;
}

inline DDouble operator/(const DDouble& a, double b) { return a / DDouble(b); }
inline DDouble operator/(double a, const DDouble& b) { return DDouble(a) / b; }

inline DDouble& operator+=(DDouble& a, const DDouble& b) { return a = a + b; }
inline DDouble& operator+=(DDouble& a, double b) { return a = a + b; }
inline DDouble& operator-=(DDouble& a, const DDouble& b) { return a = a - b; }
inline DDouble& operator-=(DDouble& a, double b) { return a = a - b; }
inline DDouble& operator*=(DDouble& a, const DDouble& b) { return a = a * b; }
inline DDouble& operator*=(DDouble& a, double b) { return a = a * b; }
inline DDouble& operator/=(DDouble& a, const DDouble& b) { return a = a / b; }

inline bool operator==(const DDouble& a, const DDouble& b) { return a.hi == b.hi && a.lo == b.lo; }
inline bool operator<(const DDouble& a, const DDouble& b) {
  return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}
inline bool operator>(const DDouble& a, const DDouble& b) { return b < a; }
inline bool operator<=(const DDouble& a, const DDouble& b) { return !(b < a); }
inline bool operator>=(const DDouble& a, const DDouble& b) { return !(a < b); }

inline double to_double(const DDouble& a) { return a.hi + a.lo; }

inline DDouble dd_abs(const DDouble& a) { return a.hi < 0.0 ? -a : a; }

// Exact scaling by a power of two.
inline DDouble dd_ldexp(const DDouble& a, int n) {
  return {std::ldexp(a.hi, n), std::ldexp(a.lo, n)};
}

inline DDouble dd_sqr(const DDouble& a) {
  using namespace detail;
  DDouble p = two_prod(a.hi, a.hi);
  p.lo += 2.0 * a.hi * a.lo + a.lo * a.lo;
  return quick_two_sum(p.hi, p.lo);
}

inline DDouble dd_sqrt(const DDouble& a) {
  if (a.hi == 0.0 && a.lo == 0.0) return DDouble(0.0);
  if (a.hi < 0.0) throw std::domain_error("dd_sqrt: negative argument");
  // One Karp-Markstein correction step from the double seed.
  double x = 1.0 / std::sqrt(a.hi);
  double ax = a.hi * x;
  DDouble err = a - dd_sqr(DDouble(ax));
  return DDouble(ax) + err.hi * (x * 0.5);
}

namespace detail {
// log(2) to double-double precision.
inline constexpr DDouble kLn2{6.931471805599453094e-01, 2.3190468138462995584e-17};
inline constexpr double kDDEps = 4.93038065763132e-32;  // 2^-104
}  // namespace detail

inline DDouble dd_exp(const DDouble& a) {
  // exp(a) = 2^m * exp(r)^(2^9) with r = (a - m ln2) / 2^9 small.
  if (a.hi <= -709.0) return DDouble(0.0);
  if (a.hi >= 709.0) return DDouble(std::numeric_limits<double>::infinity());
  if (a.hi == 0.0 && a.lo == 0.0) return DDouble(1.0);

  const double m = std::floor(a.hi / detail::kLn2.hi + 0.5);
  DDouble r = dd_ldexp(a - detail::kLn2 * m, -9);

  // Taylor series of exp(r) - 1.
  DDouble p = dd_sqr(r);
  DDouble s = r + dd_ldexp(p, -1);
  p = p * r;
  double fac = 6.0;
  DDouble t = p / fac;
  int i = 3;
  const double thresh = detail::kDDEps;
  do {
    s += t;
    p = p * r;
    ++i;
    fac *= i;
    t = p / fac;
  } while (std::abs(to_double(t)) > thresh && i < 20);
  s += t;

  // Undo the 2^9 scaling: repeated x -> 2x + x^2 keeps exp(r)-1 accurate.
  for (int k = 0; k < 9; ++k) s = dd_ldexp(s, 1) + dd_sqr(s);
  s += 1.0;
  return dd_ldexp(s, static_cast<int>(m));
}

inline DDouble dd_log(const DDouble& a) {
  if (a.hi <= 0.0) throw std::domain_error("dd_log: non-positive argument");
  if (a.hi == 1.0 && a.lo == 0.0) return DDouble(0.0);
  // Newton iteration on exp(x) = a from the double seed; one step doubles
  // the working precision, a second guards the last couple of bits.
  DDouble x(std::log(a.hi));
  x = x + a * dd_exp(-x) - 1.0;
  x = x + a * dd_exp(-x) - 1.0;
  return x;
}

inline DDouble dd_powi(DDouble base, int n) {
  if (n == 0) return DDouble(1.0);
  bool invert = n < 0;
  unsigned e = invert ? static_cast<unsigned>(-(long long)n) : static_cast<unsigned>(n);
  DDouble acc(1.0);
  while (e) {
    if (e & 1u) acc *= base;
    base = dd_sqr(base);
    e >>= 1;
  }
  return invert ? DDouble(1.0) / acc : acc;
}

// x^y for real exponents; x must be >= 0.  Integer and half-integer fast
// paths keep the cheap cases exact.
inline DDouble dd_pow(const DDouble& x, double y) {
  if (y == 0.0) return DDouble(1.0);
  if (x.hi == 0.0 && x.lo == 0.0) {
    if (y > 0.0) return DDouble(0.0);
    throw std::domain_error("dd_pow: zero base with non-positive exponent");
  }
  if (x.hi < 0.0) throw std::domain_error("dd_pow: negative base");
  if (y == 1.0) return x;
  if (y == 2.0) return dd_sqr(x);
  if (y == 0.5) return dd_sqrt(x);
  if (y == static_cast<double>(static_cast<int>(y)) && std::abs(y) <= 16.0)
    return dd_powi(x, static_cast<int>(y));
  return dd_exp(dd_log(x) * y);
}

}  // namespace qms
