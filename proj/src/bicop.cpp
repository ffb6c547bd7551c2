#include "rvine/bicop.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>

#include "jet.hpp"
#include "rvine/errors.hpp"
#include "special.hpp"

namespace rvine {

using detail::Jet;

int parameter_count(Family f) {
  switch (f) {
    case Family::Independence:
      return 0;
    case Family::StudentT:
      return 2;
    default:
      return 1;
  }
}

FamilyTag parse_family_code(std::string_view code) {
  FamilyTag tag;
  if (code.empty()) throw ParseError("empty family code");
  if (code.back() == 'r' || code.back() == 'R') {
    tag.rotation = Rotation::SecondArgReflected;
    code.remove_suffix(1);
  }
  if (code.size() != 1 || code[0] < '0' || code[0] > '5')
    throw ParseError("unknown family code '" + std::string(code) + "'");
  tag.code = static_cast<Family>(code[0] - '0');
  if (tag.code == Family::Independence && tag.rotation != Rotation::None)
    throw ParseError("independence cannot be rotated");
  return tag;
}

std::string family_code(const FamilyTag& tag) {
  std::string s(1, static_cast<char>('0' + static_cast<int>(tag.code)));
  if (tag.rotation == Rotation::SecondArgReflected) s += 'r';
  return s;
}

std::string family_name(const FamilyTag& tag) {
  static const char* names[] = {"Independence", "Gaussian", "StudentT", "Frank", "Gumbel", "Joe"};
  std::string s = names[static_cast<int>(tag.code)];
  if (tag.rotation == Rotation::SecondArgReflected) s += "(reflected)";
  return s;
}

bool in_domain(const FamilyTag& tag, const BicopParams& p) {
  switch (tag.code) {
    case Family::Independence:
      return true;
    case Family::Gaussian:
      return std::isfinite(p.theta) && std::fabs(p.theta) < 1.0;
    case Family::StudentT:
      return std::isfinite(p.theta) && std::fabs(p.theta) < 1.0 && std::isfinite(p.nu) && p.nu > 2.0;
    case Family::Frank:
      return std::isfinite(p.theta) && std::fabs(p.theta) >= kFrankMinAbsTheta;
    case Family::Gumbel:
    case Family::Joe:
      return std::isfinite(p.theta) && p.theta >= 1.0;
  }
  return false;
}

void check_domain(const FamilyTag& tag, const BicopParams& p) {
  if (!in_domain(tag, p))
    throw DomainError("parameters (" + std::to_string(p.theta) + ", " + std::to_string(p.nu) +
                      ") outside the domain of " + family_name(tag));
}

double clamp_unit(double u) {
  if (!(u >= kUnitClamp)) return kUnitClamp;  // also maps NaN to the lower clamp
  if (u > 1.0 - kUnitClamp) return 1.0 - kUnitClamp;
  return u;
}

double clamp_arg(double u) {
  if (!(u >= kArgLow)) return kArgLow;
  if (u > kArgHigh) return kArgHigh;
  return u;
}

namespace {

// Clamps the value only; the derivative parts are those of the unclamped input.
template <int O>
Jet<O> clamp_value(Jet<O> x) {
  x.v = clamp_arg(x.v);
  return x;
}
double clamp_value(double x) { return clamp_arg(x); }

template <class T>
T log_add_exp(const T& a, const T& b) {
  using namespace detail;
  return value_of(a) >= value_of(b) ? a + log1p(exp(b - a)) : b + log1p(exp(a - b));
}

template <class T>
struct Vals {
  T log_pdf;
  T h;
  T h_rev;
};

template <class T>
Vals<T> gaussian(const T& u1, const T& u2, const T& rho) {
  using namespace detail;
  const T x1 = qnorm(u1), x2 = qnorm(u2);
  const T r2 = 1.0 - rho * rho;
  const T s = sqrt(r2);
  Vals<T> v;
  v.log_pdf = -0.5 * log(r2) - (rho * rho * (x1 * x1 + x2 * x2) - 2.0 * rho * x1 * x2) / (2.0 * r2);
  v.h = pnorm((x1 - rho * x2) / s);
  v.h_rev = pnorm((x2 - rho * x1) / s);
  return v;
}

template <class T>
Vals<T> student(const T& u1, const T& u2, const T& rho, const T& nu) {
  using namespace detail;
  const T x1 = qt(u1, nu), x2 = qt(u2, nu);
  const T r2 = 1.0 - rho * rho;
  const T nu1 = nu + 1.0;
  const T logdt1 = lgamma(0.5 * nu1) - lgamma(0.5 * nu) - 0.5 * log(std::numbers::pi * nu) -
                   0.5 * nu1 * log1p(x1 * x1 / nu);
  const T logdt2 = lgamma(0.5 * nu1) - lgamma(0.5 * nu) - 0.5 * log(std::numbers::pi * nu) -
                   0.5 * nu1 * log1p(x2 * x2 / nu);
  Vals<T> v;
  v.log_pdf = -std::log(2.0 * std::numbers::pi) - 0.5 * log(r2) - logdt1 - logdt2 -
              0.5 * (nu + 2.0) * log1p((x1 * x1 + x2 * x2 - 2.0 * rho * x1 * x2) / (nu * r2));
  v.h = pt((x1 - rho * x2) / sqrt((nu + x2 * x2) * r2 / nu1), nu1);
  v.h_rev = pt((x2 - rho * x1) / sqrt((nu + x1 * x1) * r2 / nu1), nu1);
  return v;
}

template <class T>
Vals<T> frank(const T& u1, const T& u2, const T& th) {
  using namespace detail;
  const T em = expm1(-th);
  const T e1 = expm1(-th * u1), e2 = expm1(-th * u2);
  // -(em + e1 e2) as a sum of two terms of equal sign, no cancellation
  const T den = -(exp(-th * u1) * e2 + exp(-th * u2) * expm1(-th * (1.0 - u2)));
  Vals<T> v;
  v.log_pdf = log_abs(th * em) - th * (u1 + u2) - 2.0 * log_abs(den);
  v.h = -exp(-th * u2) * e1 / den;
  v.h_rev = -exp(-th * u1) * e2 / den;
  return v;
}

template <class T>
Vals<T> gumbel(const T& u1, const T& u2, const T& th) {
  using namespace detail;
  const T l1 = -log(u1), l2 = -log(u2);
  const T ll1 = log(l1), ll2 = log(l2);
  const T logA = log_add_exp(th * ll1, th * ll2);
  const T a1t = exp(logA / th);  // A^(1/theta)
  Vals<T> v;
  v.log_pdf = -a1t + l1 + l2 + (-2.0 + 2.0 / th) * logA + (th - 1.0) * (ll1 + ll2) + log1p((th - 1.0) / a1t);
  const T common = -a1t + (1.0 / th - 1.0) * logA;
  v.h = exp(common + (th - 1.0) * ll2 + l2);
  v.h_rev = exp(common + (th - 1.0) * ll1 + l1);
  return v;
}

template <class T>
Vals<T> joe(const T& u1, const T& u2, const T& th) {
  using namespace detail;
  const T lb1 = log1p(-u1), lb2 = log1p(-u2);
  const T b1 = exp(th * lb1), b2 = exp(th * lb2);
  const T omb1 = -expm1(th * lb1), omb2 = -expm1(th * lb2);  // 1 - b
  const T s = b1 + b2 - b1 * b2;
  const T logs = log(s);
  Vals<T> v;
  v.log_pdf = (1.0 / th - 2.0) * logs + (th - 1.0) * (lb1 + lb2) + log(th - 1.0 + s);
  v.h = exp((1.0 / th - 1.0) * logs + (th - 1.0) * lb2) * omb1;
  v.h_rev = exp((1.0 / th - 1.0) * logs + (th - 1.0) * lb1) * omb2;
  return v;
}

template <class T>
Vals<T> base(Family f, const T& u1, const T& u2, const T& th, const T& nu) {
  switch (f) {
    case Family::Independence:
      return {T(0.0), u1, u2};
    case Family::Gaussian:
      return gaussian(u1, u2, th);
    case Family::StudentT:
      return student(u1, u2, th, nu);
    case Family::Frank:
      return frank(u1, u2, th);
    case Family::Gumbel:
      return gumbel(u1, u2, th);
    case Family::Joe:
      return joe(u1, u2, th);
  }
  throw DomainError("unknown family");
}

template <class T>
Vals<T> tagged(const FamilyTag& tag, const T& u1, const T& u2, const T& th, const T& nu) {
  if (tag.rotation == Rotation::None) return base(tag.code, u1, u2, th, nu);
  // c(u1, 1-u2); h(u1|u2) = h_base(u1|1-u2); h(u2|u1) = 1 - h_base(1-u2|u1).
  Vals<T> b = base(tag.code, u1, clamp_value(T(1.0 - u2)), th, nu);
  b.h_rev = 1.0 - b.h_rev;
  return b;
}

void check_finite(double log_pdf, const FamilyTag& tag) {
  if (!std::isfinite(log_pdf)) throw EvalError("density of " + family_name(tag) + " is not representable");
}

double clamp_prob(double p) { return std::min(1.0, std::max(0.0, p)); }

Partials to_partials(const Jet<1>& j) {
  Partials p;
  p.value = j.v;
  p.grad = j.g;
  return p;
}
Partials to_partials(const Jet<2>& j) {
  Partials p;
  p.value = j.v;
  p.grad = j.g;
  p.hess = j.h;
  return p;
}

template <int O>
DerivBundle bundle(const FamilyTag& tag, const BicopParams& p, double u1, double u2) {
  check_domain(tag, p);
  const Jet<O> j1 = Jet<O>::variable(clamp_arg(u1), kU1);
  const Jet<O> j2 = Jet<O>::variable(clamp_arg(u2), kU2);
  const Jet<O> th = Jet<O>::variable(p.theta, kTheta);
  const Jet<O> nu = Jet<O>::variable(p.nu, kNu);
  Vals<Jet<O>> v;
  if (tag.code == Family::Independence) {
    v = {Jet<O>(0.0), j1, j2};
  } else {
    v = tagged(tag, j1, j2, th, nu);
  }
  check_finite(v.log_pdf.v, tag);
  DerivBundle b;
  b.order = O;
  b.log_pdf = to_partials(v.log_pdf);
  b.pdf = to_partials(detail::exp(v.log_pdf));
  b.h = to_partials(v.h);
  b.h_reverse = to_partials(v.h_rev);
  return b;
}

}  // namespace

PairValues evaluate_pair(const FamilyTag& tag, const BicopParams& p, double u1, double u2) {
  check_domain(tag, p);
  u1 = clamp_arg(u1);
  u2 = clamp_arg(u2);
  if (tag.code == Family::Independence) return {0.0, u1, u2};
  const Vals<double> v = tagged<double>(tag, u1, u2, p.theta, p.nu);
  check_finite(v.log_pdf, tag);
  return {v.log_pdf, clamp_prob(v.h), clamp_prob(v.h_rev)};
}

double log_pdf(const FamilyTag& tag, const BicopParams& p, double u1, double u2) {
  return evaluate_pair(tag, p, u1, u2).log_pdf;
}

double pdf(const FamilyTag& tag, const BicopParams& p, double u1, double u2) {
  const double c = std::exp(log_pdf(tag, p, u1, u2));
  if (!(c > 0.0)) throw EvalError("density of " + family_name(tag) + " underflows to zero");
  return c;
}

double h(const FamilyTag& tag, const BicopParams& p, double u1, double u2) {
  return evaluate_pair(tag, p, u1, u2).h;
}

double h_reverse(const FamilyTag& tag, const BicopParams& p, double u1, double u2) {
  return evaluate_pair(tag, p, u1, u2).h_reverse;
}

double h_inverse(const FamilyTag& tag, const BicopParams& p, double w, double u2) {
  check_domain(tag, p);
  if (!(w > 0.0)) return kArgLow;
  if (!(w < 1.0)) return kArgHigh;
  u2 = clamp_arg(u2);
  const double v2 = tag.rotation == Rotation::SecondArgReflected ? 1.0 - u2 : u2;
  switch (tag.code) {
    case Family::Independence:
      return w;
    case Family::Gaussian: {
      const double rho = p.theta;
      return clamp_arg(detail::pnorm(rho * detail::qnorm(v2) + std::sqrt(1.0 - rho * rho) * detail::qnorm(w)));
    }
    case Family::StudentT: {
      const double rho = p.theta, nu = p.nu;
      const double x2 = detail::qt(v2, nu);
      const double y = detail::qt(w, nu + 1.0);
      const double x1 = rho * x2 + y * std::sqrt((nu + x2 * x2) * (1.0 - rho * rho) / (nu + 1.0));
      return clamp_arg(detail::pt(x1, nu));
    }
    case Family::Frank: {
      const double th = p.theta;
      const double e2 = std::expm1(-th * v2);
      const double e1 = w * std::expm1(-th) / (std::exp(-th * v2) - w * e2);
      return clamp_arg(-std::log1p(e1) / th);
    }
    default:
      break;
  }
  // Gumbel and Joe: bracketing root search on the monotone h.
  const auto f = [&](double x) { return h(tag, p, x, u2) - w; };
  const double lo = kArgLow, hi = kArgHigh;
  const double flo = f(lo), fhi = f(hi);
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, [](double a, double b) { return std::fabs(b - a) <= 1e-15 * std::max(1.0, std::fabs(a)); },
      iters);
  if (iters >= 200) throw ConvergenceError("h_inverse did not converge for " + family_name(tag));
  const double x = 0.5 * (r.first + r.second);
  return x;
}

DerivBundle deriv_bundle_first(const FamilyTag& tag, const BicopParams& p, double u1, double u2) {
  return bundle<1>(tag, p, u1, u2);
}

DerivBundle deriv_bundle_second(const FamilyTag& tag, const BicopParams& p, double u1, double u2) {
  return bundle<2>(tag, p, u1, u2);
}

double kendall_tau(const FamilyTag& tag, const BicopParams& p) {
  check_domain(tag, p);
  const double th = p.theta;
  double tau = 0.0;
  switch (tag.code) {
    case Family::Independence:
      return 0.0;
    case Family::Gaussian:
    case Family::StudentT:
      tau = 2.0 / std::numbers::pi * std::asin(th);
      break;
    case Family::Gumbel:
      tau = 1.0 - 1.0 / th;
      break;
    case Family::Frank: {
      // 1 - 4/theta + 4 D1(theta)/theta with the Debye function D1.
      const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); }, 0.0, th, 10, 1e-14);
      tau = 1.0 - 4.0 / th + 4.0 * (integral / th) / th;
      break;
    }
    case Family::Joe:
      if (std::fabs(th - 2.0) < 1e-9)
        tau = 1.0 - detail::trigamma(2.0);
      else
        tau = 1.0 + 2.0 / (2.0 - th) * (detail::digamma(2.0) - detail::digamma(2.0 / th + 1.0));
      break;
  }
  return tag.rotation == Rotation::SecondArgReflected ? -tau : tau;
}

BicopParams start_from_tau(const FamilyTag& tag, double tau) {
  const double t = tag.rotation == Rotation::SecondArgReflected ? -tau : tau;
  BicopParams p;
  switch (tag.code) {
    case Family::Independence:
      break;
    case Family::Gaussian:
      p.theta = std::clamp(std::sin(0.5 * std::numbers::pi * t), -0.95, 0.95);
      break;
    case Family::StudentT:
      p.theta = std::clamp(std::sin(0.5 * std::numbers::pi * t), -0.95, 0.95);
      p.nu = 8.0;
      break;
    case Family::Gumbel:
      p.theta = t > 0.0 ? std::min(1.0 / (1.0 - t), 20.0) : 1.05;
      break;
    // No closed-form inverse: fixed interior defaults.
    case Family::Frank:
      p.theta = t >= 0.0 ? 2.0 : -2.0;
      break;
    case Family::Joe:
      p.theta = t > 0.0 ? 1.5 : 1.05;
      break;
  }
  return p;
}

}  // namespace rvine
