#include "special.hpp"

#include <array>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <numbers>

namespace rvine::detail {

namespace {

using std::numbers::pi;

// Only for terms of the analytic derivatives; the CDF and quantile keep
// Boost's long double evaluation, whose last bits the finite-difference
// checks of the likelihood can see.
using Fast = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

// Fixed tanh-sinh rule on [0, 1]: node fraction and weight. Nodes cluster at
// both ends, which handles the algebraic-log endpoint behavior of the
// t-density derivative integrands.
struct TanhSinhRule {
  static constexpr int kHalf = 24;
  static constexpr double kStep = 1.0 / 8.0;
  std::array<double, 2 * kHalf + 1> frac{};
  std::array<double, 2 * kHalf + 1> weight{};

  TanhSinhRule() {
    for (int k = -kHalf; k <= kHalf; ++k) {
      const double t = k * kStep;
      const double a = 0.5 * pi * std::sinh(t);
      const double ca = std::cosh(a);
      frac[k + kHalf] = 1.0 / (1.0 + std::exp(-2.0 * a));
      weight[k + kHalf] = 0.5 * kStep * 0.5 * pi * std::cosh(t) / (ca * ca);
    }
  }
};

const TanhSinhRule& rule() {
  static const TanhSinhRule r;
  return r;
}

}  // namespace

double qnorm(double u) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u); }

double pnorm(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double dnorm(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi); }

double qt(double u, double nu) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(nu), u);
}

double pt(double x, double nu) { return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x); }

double log_dt(double x, double nu) {
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(pi * nu) -
         0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double digamma(double x) { return boost::math::digamma(x, Fast()); }
double trigamma(double x) { return boost::math::trigamma(x, Fast()); }

double log_dt_dnu(double x, double nu) {
  const double c1 = 0.5 * digamma(0.5 * (nu + 1.0)) - 0.5 * digamma(0.5 * nu) - 0.5 / nu;
  const double x2 = x * x;
  return c1 - 0.5 * std::log1p(x2 / nu) + (nu + 1.0) * x2 / (2.0 * nu * (nu + x2));
}

// With s = sqrt(nu) tan(a), f(s) ds = K cos(a)^(nu-1) da. Both derivative
// integrands are even in s and integrate to zero over the line, so the CDF
// derivatives are integrals from 0 to |x|, or minus the tail beyond |x|.
TNuDerivs pt_nu_derivs(double x, double nu, bool second) {
  TNuDerivs out;
  if (x == 0.0) return out;
  const double ax = std::fabs(x);
  const double sq = std::sqrt(nu);
  const double c1 = 0.5 * digamma(0.5 * (nu + 1.0)) - 0.5 * digamma(0.5 * nu) - 0.5 / nu;
  const double c2 = second ? 0.25 * trigamma(0.5 * (nu + 1.0)) - 0.25 * trigamma(0.5 * nu) + 0.5 / (nu * nu) : 0.0;
  const double kconst = std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) / std::sqrt(pi);

  const bool tail = ax * ax > nu;
  // Integration variable b in [0, bmax]; cos_a(b) and sin_a(b) give cos and sin of the angle a.
  const double bmax = tail ? std::atan2(sq, ax) : std::atan2(ax, sq);
  const auto& r = rule();
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t j = 0; j < r.frac.size(); ++j) {
    const double b = bmax * r.frac[j];
    double ca, sa;
    if (tail) {
      ca = std::sin(b);
      sa = std::cos(b);
    } else {
      ca = std::cos(b);
      sa = std::sin(b);
    }
    if (ca <= 0.0) continue;
    const double logc = std::log(ca);
    const double w = r.weight[j] * std::exp((nu - 1.0) * logc);
    const double s2a = sa * sa;
    const double lnu = c1 + logc + (nu + 1.0) * s2a / (2.0 * nu);
    s1 += w * lnu;
    if (second) {
      const double lnunu = c2 + s2a / (2.0 * nu) - s2a / (2.0 * nu * nu) - (nu + 1.0) * s2a * ca * ca / (2.0 * nu * nu);
      s2 += w * (lnu * lnu + lnunu);
    }
  }
  const double scale = kconst * bmax * (tail ? -1.0 : 1.0) * (x < 0 ? -1.0 : 1.0);
  out.d1 = scale * s1;
  out.d2 = scale * s2;
  return out;
}

}  // namespace rvine::detail
