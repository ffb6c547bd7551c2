#pragma once

// Forward-mode second-order derivative arithmetic in four variables
// (u1, u2, theta, nu). Used to differentiate the pair-copula formulas exactly.

#include <array>
#include <cmath>

namespace rvine::detail {

template <int Order>
struct Jet {
  static constexpr int N = 4;
  static constexpr int NH = Order >= 2 ? 10 : 0;
  static constexpr int idx(int a, int b) { return a * N - a * (a - 1) / 2 + (b - a); }

  double v = 0.0;
  std::array<double, N> g{};
  std::array<double, NH> h{};

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: constants mix freely

  static Jet variable(double value, int which) {
    Jet j(value);
    j.g[which] = 1.0;
    return j;
  }
};

inline double value(double x) { return x; }
template <int O>
double value(const Jet<O>& x) { return x.v; }

// f(a) given f, f', f''.
template <int O>
Jet<O> chain(const Jet<O>& a, double f, double f1, double f2) {
  Jet<O> r(f);
  for (int i = 0; i < 4; ++i) r.g[i] = f1 * a.g[i];
  if constexpr (O >= 2) {
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) {
        const int k = Jet<O>::idx(i, j);
        r.h[k] = f1 * a.h[k] + f2 * a.g[i] * a.g[j];
      }
  }
  return r;
}

// f(a, b) given the value and partials up to second order.
template <int O>
Jet<O> chain2(const Jet<O>& a, const Jet<O>& b, double f, double fa, double fb, double faa, double fab,
              double fbb) {
  Jet<O> r(f);
  for (int i = 0; i < 4; ++i) r.g[i] = fa * a.g[i] + fb * b.g[i];
  if constexpr (O >= 2) {
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) {
        const int k = Jet<O>::idx(i, j);
        r.h[k] = fa * a.h[k] + fb * b.h[k] + faa * a.g[i] * a.g[j] + fab * (a.g[i] * b.g[j] + b.g[i] * a.g[j]) +
                 fbb * b.g[i] * b.g[j];
      }
  }
  return r;
}

template <int O>
Jet<O> operator-(const Jet<O>& a) {
  Jet<O> r(-a.v);
  for (int i = 0; i < 4; ++i) r.g[i] = -a.g[i];
  for (int k = 0; k < Jet<O>::NH; ++k) r.h[k] = -a.h[k];
  return r;
}

template <int O>
Jet<O> operator+(const Jet<O>& a, const Jet<O>& b) {
  Jet<O> r(a.v + b.v);
  for (int i = 0; i < 4; ++i) r.g[i] = a.g[i] + b.g[i];
  for (int k = 0; k < Jet<O>::NH; ++k) r.h[k] = a.h[k] + b.h[k];
  return r;
}
template <int O>
Jet<O> operator-(const Jet<O>& a, const Jet<O>& b) {
  Jet<O> r(a.v - b.v);
  for (int i = 0; i < 4; ++i) r.g[i] = a.g[i] - b.g[i];
  for (int k = 0; k < Jet<O>::NH; ++k) r.h[k] = a.h[k] - b.h[k];
  return r;
}
template <int O>
Jet<O> operator+(const Jet<O>& a, double b) {
  Jet<O> r = a;
  r.v += b;
  return r;
}
template <int O>
Jet<O> operator+(double a, const Jet<O>& b) {
  return b + a;
}
template <int O>
Jet<O> operator-(const Jet<O>& a, double b) {
  Jet<O> r = a;
  r.v -= b;
  return r;
}
template <int O>
Jet<O> operator-(double a, const Jet<O>& b) {
  return -b + a;
}

template <int O>
Jet<O> operator*(const Jet<O>& a, const Jet<O>& b) {
  Jet<O> r(a.v * b.v);
  for (int i = 0; i < 4; ++i) r.g[i] = a.v * b.g[i] + b.v * a.g[i];
  if constexpr (O >= 2) {
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) {
        const int k = Jet<O>::idx(i, j);
        r.h[k] = a.v * b.h[k] + b.v * a.h[k] + a.g[i] * b.g[j] + b.g[i] * a.g[j];
      }
  }
  return r;
}
template <int O>
Jet<O> operator*(const Jet<O>& a, double b) {
  Jet<O> r(a.v * b);
  for (int i = 0; i < 4; ++i) r.g[i] = a.g[i] * b;
  for (int k = 0; k < Jet<O>::NH; ++k) r.h[k] = a.h[k] * b;
  return r;
}
template <int O>
Jet<O> operator*(double a, const Jet<O>& b) {
  return b * a;
}

template <int O>
Jet<O> recip(const Jet<O>& a) {
  const double r = 1.0 / a.v;
  return chain(a, r, -r * r, 2.0 * r * r * r);
}
template <int O>
Jet<O> operator/(const Jet<O>& a, const Jet<O>& b) {
  return a * recip(b);
}
template <int O>
Jet<O> operator/(const Jet<O>& a, double b) {
  return a * (1.0 / b);
}
template <int O>
Jet<O> operator/(double a, const Jet<O>& b) {
  return recip(b) * a;
}

template <int O>
Jet<O> exp(const Jet<O>& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
template <int O>
Jet<O> expm1(const Jet<O>& a) {
  const double e = std::exp(a.v);
  return chain(a, std::expm1(a.v), e, e);
}
template <int O>
Jet<O> log(const Jet<O>& a) {
  const double r = 1.0 / a.v;
  return chain(a, std::log(a.v), r, -r * r);
}
// log|a|
template <int O>
Jet<O> log_abs(const Jet<O>& a) {
  const double r = 1.0 / a.v;
  return chain(a, std::log(std::fabs(a.v)), r, -r * r);
}
inline double log_abs(double a) { return std::log(std::fabs(a)); }
inline double value_of(double a) { return a; }
template <int O>
double value_of(const Jet<O>& a) {
  return a.v;
}
template <int O>
Jet<O> log1p(const Jet<O>& a) {
  const double r = 1.0 / (1.0 + a.v);
  return chain(a, std::log1p(a.v), r, -r * r);
}
template <int O>
Jet<O> sqrt(const Jet<O>& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

using std::exp;
using std::expm1;
using std::log;
using std::log1p;
using std::sqrt;

}  // namespace rvine::detail
