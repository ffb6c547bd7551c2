#pragma once

// Normal and Student-t distribution functions on doubles and on jets.
// The t routines also supply derivatives with respect to the degrees of freedom.

#include "jet.hpp"

namespace rvine::detail {

double qnorm(double u);
double pnorm(double x);
double dnorm(double x);

double qt(double u, double nu);
double pt(double x, double nu);
double log_dt(double x, double nu);

double digamma(double x);
double trigamma(double x);

// dF/dnu and d2F/dnu2 of the Student-t CDF at fixed x.
struct TNuDerivs {
  double d1 = 0.0;
  double d2 = 0.0;
};
TNuDerivs pt_nu_derivs(double x, double nu, bool second);

// dlog f/dnu at fixed x.
double log_dt_dnu(double x, double nu);

template <int O>
Jet<O> qnorm(const Jet<O>& u) {
  const double x = qnorm(u.v);
  const double inv = 1.0 / dnorm(x);
  return chain(u, x, inv, x * inv * inv);
}

template <int O>
Jet<O> pnorm(const Jet<O>& y) {
  const double phi = dnorm(y.v);
  return chain(y, pnorm(y.v), phi, -y.v * phi);
}

template <int O>
Jet<O> lgamma(const Jet<O>& a) {
  return chain(a, std::lgamma(a.v), digamma(a.v), O >= 2 ? trigamma(a.v) : 0.0);
}
using std::lgamma;

// Student-t CDF with both x and nu carrying derivatives.
template <int O>
Jet<O> pt(const Jet<O>& x, const Jet<O>& nu) {
  const double xv = x.v, n = nu.v;
  const double f = std::exp(log_dt(xv, n));
  const TNuDerivs fn = pt_nu_derivs(xv, n, O >= 2);
  const double fx = -(n + 1.0) * xv / (n + xv * xv) * f;
  const double fnu = f * log_dt_dnu(xv, n);
  return chain2(x, nu, pt(xv, n), f, fn.d1, fx, fnu, fn.d2);
}

// Student-t quantile; derivatives by implicit differentiation of F(Q(u, nu), nu) = u.
template <int O>
Jet<O> qt(const Jet<O>& u, const Jet<O>& nu) {
  const double n = nu.v;
  const double x = qt(u.v, n);
  const double f = std::exp(log_dt(x, n));
  const TNuDerivs fn = pt_nu_derivs(x, n, O >= 2);
  const double fx = -(n + 1.0) * x / (n + x * x) * f;
  const double fnu = f * log_dt_dnu(x, n);
  const double qu = 1.0 / f;
  const double qn = -fn.d1 / f;
  const double quu = -fx * qu * qu / f;
  const double qun = -(fx * qn + fnu) * qu / f;
  const double qnn = -(fx * qn * qn + 2.0 * fnu * qn + fn.d2) / f;
  return chain2(u, nu, x, qu, qn, quu, qun, qnn);
}

}  // namespace rvine::detail
