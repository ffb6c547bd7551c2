#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "rvine/bicop.hpp"
#include "rvine/errors.hpp"
#include "support/families.hpp"
#include "support/finite_diff.hpp"

using namespace rvine;
using testsupport::rel_err;
using testsupport::ridders;

namespace {

const FamilyTag kIndep{Family::Independence, Rotation::None};
const FamilyTag kGauss{Family::Gaussian, Rotation::None};
const FamilyTag kStudent{Family::StudentT, Rotation::None};
const FamilyTag kFrank{Family::Frank, Rotation::None};
const FamilyTag kGumbel{Family::Gumbel, Rotation::None};
const FamilyTag kJoe{Family::Joe, Rotation::None};

// Evaluates one of pdf / log pdf / h / h_reverse with one variable replaced.
enum class Fn { Pdf, LogPdf, H, HRev };

double eval_fn(Fn fn, const FamilyTag& tag, BicopParams p, double u1, double u2) {
  switch (fn) {
    case Fn::Pdf:
      return pdf(tag, p, u1, u2);
    case Fn::LogPdf:
      return log_pdf(tag, p, u1, u2);
    case Fn::H:
      return h(tag, p, u1, u2);
    case Fn::HRev:
      return h_reverse(tag, p, u1, u2);
  }
  return 0.0;
}

double eval_var(Fn fn, const FamilyTag& tag, BicopParams p, double u1, double u2, int var, double x) {
  switch (var) {
    case kU1:
      u1 = x;
      break;
    case kU2:
      u2 = x;
      break;
    case kTheta:
      p.theta = x;
      break;
    case kNu:
      p.nu = x;
      break;
  }
  return eval_fn(fn, tag, p, u1, u2);
}

double var_value(const BicopParams& p, double u1, double u2, int var) {
  switch (var) {
    case kU1:
      return u1;
    case kU2:
      return u2;
    case kTheta:
      return p.theta;
    default:
      return p.nu;
  }
}

const Partials& part(const DerivBundle& b, Fn fn) {
  switch (fn) {
    case Fn::Pdf:
      return b.pdf;
    case Fn::LogPdf:
      return b.log_pdf;
    case Fn::H:
      return b.h;
    default:
      return b.h_reverse;
  }
}

int nvars(const FamilyTag& tag) { return 2 + parameter_count(tag); }

double step_for(int var, double x) {
  if (var <= kU2) return std::min(1e-3, 0.25 * std::min(x, 1.0 - x));
  return 1e-3 * std::max(1.0, std::fabs(x));
}

// 2-d integral of the density over [a1,b1] x [a2,b2].
double integrate_pdf(const FamilyTag& tag, const BicopParams& p, double a1, double b1, double a2, double b2) {
  boost::math::quadrature::tanh_sinh<double> ts(8);
  return ts.integrate(
      [&](double x) { return ts.integrate([&](double y) { return pdf(tag, p, x, y); }, a2, b2, 1e-10); }, a1, b1,
      1e-9);
}

}  // namespace

TEST_CASE("trivial densities and h-functions") {
  CHECK(pdf(kGauss, {0.0, 0.0}, 0.3, 0.8) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pdf(kIndep, {}, 0.12, 0.77) == 1.0);
  CHECK(h(kIndep, {}, 0.12, 0.77) == 0.12);
  CHECK(h_inverse(kIndep, {}, 0.42, 0.9) == 0.42);
  CHECK(parameter_count(Family::Independence) == 0);
  CHECK(parameter_count(Family::Gaussian) == 1);
  CHECK(parameter_count(Family::StudentT) == 2);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(pdf(kGauss, {1.0, 0.0}, 0.3, 0.3), DomainError);
  CHECK_THROWS_AS(pdf(kStudent, {0.5, 2.0}, 0.3, 0.3), DomainError);
  CHECK_THROWS_AS(pdf(kFrank, {1e-7, 0.0}, 0.3, 0.3), DomainError);
  CHECK_THROWS_AS(pdf(kGumbel, {0.99, 0.0}, 0.3, 0.3), DomainError);
  CHECK_THROWS_AS(pdf(kJoe, {0.5, 0.0}, 0.3, 0.3), DomainError);
}

TEST_CASE("family codes round trip") {
  for (const auto& tag : testsupport::all_parametric_tags()) CHECK(parse_family_code(family_code(tag)) == tag);
  CHECK(parse_family_code("4r") == FamilyTag{Family::Gumbel, Rotation::SecondArgReflected});
  CHECK_THROWS_AS(parse_family_code("7"), ParseError);
  CHECK_THROWS_AS(parse_family_code("0r"), ParseError);
}

TEST_CASE("Frank density against multiprecision evaluation") {
  using MP = boost::multiprecision::cpp_bin_float_50;
  const MP th = 5, u1 = MP(3) / 10, u2 = MP(7) / 10;
  // theta (1 - e^-theta) e^{-theta(u1+u2)} / ((1 - e^-theta) - (1 - e^{-theta u1})(1 - e^{-theta u2}))^2
  const MP a = 1 - exp(-th);
  const MP den = a - (1 - exp(-th * u1)) * (1 - exp(-th * u2));
  const MP ref = th * a * exp(-th * (u1 + u2)) / (den * den);
  CHECK(pdf(kFrank, {5.0, 0.0}, 0.3, 0.7) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
}

TEST_CASE("Gaussian h is the derivative of the copula CDF") {
  const BicopParams p{0.5, 0.0};
  const double u1 = 0.3, u2 = 0.7, d = 1e-5;
  // [C(u1, u2 + d) - C(u1, u2 - d)] / 2d, with the CDF difference integrated directly over the strip.
  const double fd = integrate_pdf(kGauss, p, 0.0, u1, u2 - d, u2 + d) / (2.0 * d);
  CHECK(h(kGauss, p, u1, u2) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("Gaussian h approaches the comonotone step as rho tends to one") {
  double below = 1.0, above = 0.0;
  for (double rho : {0.9, 0.99, 0.999, 0.9999, 0.99999}) {
    const double b = h(kGauss, {rho, 0.0}, 0.29, 0.3);
    const double a = h(kGauss, {rho, 0.0}, 0.31, 0.3);
    CHECK(b < below);
    CHECK(a > above);
    below = b;
    above = a;
  }
  CHECK(below < 1e-6);
  CHECK(above > 1.0 - 1e-6);
}

TEST_CASE("h_inverse examples") {
  const BicopParams g{0.5, 0.0};
  CHECK(h_inverse(kGauss, g, h(kGauss, g, 0.3, 0.7), 0.7) == doctest::Approx(0.3).epsilon(1e-9));

  // Bisection oracle for Gumbel theta = 2.
  const BicopParams gp{2.0, 0.0};
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(kGumbel, gp, mid, 0.6) < 0.42 ? lo : hi) = mid;
  }
  CHECK(h_inverse(kGumbel, gp, 0.42, 0.6) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
}

TEST_CASE("first-order bundle examples") {
  const double u1 = 0.23, u2 = 0.81;
  const DerivBundle b = deriv_bundle_first(kGauss, {0.0, 0.0}, u1, u2);
  const double x1 = std::sqrt(2.0) * boost::math::erf_inv(2.0 * u1 - 1.0);
  const double x2 = std::sqrt(2.0) * boost::math::erf_inv(2.0 * u2 - 1.0);
  CHECK(b.pdf.d(kTheta) == doctest::Approx(x1 * x2).epsilon(1e-12));

  // Frank at theta = 3: every entry against a plain central difference with step 1e-6.
  const BicopParams fp{3.0, 0.0};
  const DerivBundle f = deriv_bundle_first(kFrank, fp, 0.2, 0.9);
  for (Fn fn : {Fn::Pdf, Fn::H}) {
    for (int var = 0; var < 3; ++var) {
      const double x = var_value(fp, 0.2, 0.9, var);
      const double fd =
          testsupport::central([&](double t) { return eval_var(fn, kFrank, fp, 0.2, 0.9, var, t); }, x, 1e-6);
      CHECK(rel_err(part(f, fn).d(var), fd) < 1e-6);
    }
  }
}

TEST_CASE("second-order bundle examples") {
  const DerivBundle ind = deriv_bundle_second(kIndep, {}, 0.3, 0.6);
  for (double v : ind.pdf.hess) CHECK(v == 0.0);
  for (double v : ind.pdf.grad) CHECK(v == 0.0);

  const BicopParams g{0.5, 0.0};
  const double e = 1e-4, u1 = 0.3, u2 = 0.7;
  const double d12 = (pdf(kGauss, g, u1 + e, u2 + e) - pdf(kGauss, g, u1 + e, u2 - e) -
                      pdf(kGauss, g, u1 - e, u2 + e) + pdf(kGauss, g, u1 - e, u2 - e)) /
                     (4.0 * e * e);
  CHECK(rel_err(deriv_bundle_second(kGauss, g, u1, u2).pdf.dd(kU1, kU2), d12) < 1e-4);

  const auto tp = [](double rho, double nu) { return pdf(kStudent, {rho, nu}, 0.4, 0.6); };
  const double r = 0.34, n = 3.0, er = 1e-4, en = 1e-3;
  const double drn =
      (tp(r + er, n + en) - tp(r + er, n - en) - tp(r - er, n + en) + tp(r - er, n - en)) / (4.0 * er * en);
  CHECK(rel_err(deriv_bundle_second(kStudent, {r, n}, 0.4, 0.6).pdf.dd(kTheta, kNu), drn) < 1e-4);
}

TEST_CASE("density integrates to one") {
  for (const auto& tag : testsupport::all_parametric_tags()) {
    std::vector<BicopParams> grid;
    switch (tag.code) {
      case Family::Gaussian:
        grid = {{-0.6, 0}, {0.3, 0}, {0.7, 0}};
        break;
      case Family::StudentT:
        grid = {{-0.4, 5}, {0.5, 8}};
        break;
      case Family::Frank:
        grid = {{-6, 0}, {2, 0}, {10, 0}};
        break;
      default:
        grid = {{1.3, 0}, {2.0, 0}};
        break;
    }
    for (const auto& p : grid) {
      INFO(family_name(tag), " theta=", p.theta);
      // Integral of h(u1|u2) over u2 on u1 = 1 gives the mass; integrate the density directly instead.
      const double mass = integrate_pdf(tag, p, 0.0, 1.0, 0.0, 1.0);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
    }
  }
}

TEST_CASE("rotation identity, h range and monotonicity") {
  std::mt19937_64 rng(11);
  for (const auto& tag : testsupport::all_parametric_tags()) {
    if (tag.rotation != Rotation::None) continue;
    const FamilyTag rot{tag.code, Rotation::SecondArgReflected};
    for (int rep = 0; rep < 5; ++rep) {
      const BicopParams p = testsupport::random_params(tag, rng);
      for (double u1 : {0.1, 0.45, 0.8})
        for (double u2 : {0.05, 0.5, 0.93}) CHECK(pdf(rot, p, u1, u2) == pdf(tag, p, u1, 1.0 - u2));
      for (const FamilyTag& t : {tag, rot}) {
        for (double u2 : {0.02, 0.3, 0.77, 0.99}) {
          double prev = 0.0;
          for (int k = 1; k <= 50; ++k) {
            const double v = h(t, p, k / 51.0, u2);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(v >= prev);
            prev = v;
          }
        }
      }
    }
  }
}

TEST_CASE("analytic partials agree with finite differences on a random grid") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.03, 0.97);
  for (const auto& tag : testsupport::all_parametric_tags()) {
    double worst1 = 0.0, worst2 = 0.0, worst_id = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const BicopParams p = testsupport::random_params(tag, rng);
      const double u1 = U(rng), u2 = U(rng);
      const DerivBundle b = deriv_bundle_second(tag, p, u1, u2);
      worst_id = std::max(worst_id, rel_err(b.h.d(kU1), b.pdf.value, 1e-300));
      for (Fn fn : {Fn::Pdf, Fn::LogPdf, Fn::H, Fn::HRev}) {
        for (int a = 0; a < nvars(tag); ++a) {
          const double x = var_value(p, u1, u2, a);
          const auto fd = ridders([&](double t) { return eval_var(fn, tag, p, u1, u2, a, t); }, x, step_for(a, x));
          worst1 = std::max(worst1, rel_err(part(b, fn).d(a), fd.value));
          // Second order: differentiate the analytic first partials.
          for (int c = 0; c < nvars(tag); ++c) {
            const auto fd2 = ridders(
                [&](double t) {
                  BicopParams q = p;
                  double v1 = u1, v2 = u2;
                  (a == kU1 ? v1 : a == kU2 ? v2 : a == kTheta ? q.theta : q.nu) = t;
                  return part(deriv_bundle_first(tag, q, v1, v2), fn).d(c);
                },
                x, step_for(a, x));
            worst2 = std::max(worst2, rel_err(part(b, fn).dd(a, c), fd2.value));
          }
        }
      }
    }
    INFO(family_name(tag), " first=", worst1, " second=", worst2, " identity=", worst_id);
    CHECK(worst1 < 1e-6);
    CHECK(worst2 < 1e-4);
    CHECK(worst_id < 1e-10);
  }
}

TEST_CASE("h_inverse inverts h on a random grid") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.001, 0.999);
  for (const auto& tag : testsupport::all_parametric_tags()) {
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
      const BicopParams p = testsupport::random_params(tag, rng);
      const double u1 = U(rng), u2 = U(rng);
      const double back = h_inverse(tag, p, h(tag, p, u1, u2), u2);
      // Where h is nearly flat the inverse is only determined up to eps / pdf.
      const double conditioning = 4.0 * std::numeric_limits<double>::epsilon() / pdf(tag, p, u1, u2);
      worst = std::max(worst, std::fabs(back - u1) / (1.0 + conditioning / 1e-9));
    }
    INFO(family_name(tag), " worst=", worst);
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("Kendall's tau closed forms match a quadrature oracle") {
  // tau = 1 - 4 * integral of h(u1|u2) h(u2|u1) over the unit square.
  const std::vector<std::pair<FamilyTag, BicopParams>> cases = {
      {kGauss, {0.5, 0}}, {kStudent, {-0.3, 6}}, {kFrank, {4, 0}}, {kFrank, {-3, 0}},
      {kGumbel, {1.8, 0}}, {kJoe, {2.5, 0}},     {kJoe, {2.0, 0}}, {{Family::Gumbel, Rotation::SecondArgReflected}, {1.5, 0}}};
  for (const auto& [tag, p] : cases) {
    boost::math::quadrature::tanh_sinh<double> ts(8);
    const double integral = ts.integrate(
        [&](double x) {
          return ts.integrate(
              [&](double y) {
                const auto v = evaluate_pair(tag, p, x, y);
                return v.h * v.h_reverse;
              },
              0.0, 1.0, 1e-9);
        },
        0.0, 1.0, 1e-8);
    INFO(family_name(tag), " theta=", p.theta);
    CHECK(kendall_tau(tag, p) == doctest::Approx(1.0 - 4.0 * integral).epsilon(1e-5));
  }
}
