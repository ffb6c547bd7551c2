#pragma once

#include <array>
#include <utility>
#include <string>
#include <string_view>

namespace rvine {

enum class Family { Independence = 0, Gaussian = 1, StudentT = 2, Frank = 3, Gumbel = 4, Joe = 5 };

// SecondArgReflected: c_rot(u1, u2) = c(u1, 1 - u2).
enum class Rotation { None, SecondArgReflected };

struct FamilyTag {
  Family code = Family::Independence;
  Rotation rotation = Rotation::None;

  bool operator==(const FamilyTag&) const = default;
};

struct BicopParams {
  double theta = 0.0;
  double nu = 0.0;  // Student-t degrees of freedom only

  bool operator==(const BicopParams&) const = default;
};

// Observed data are clamped to [kUnitClamp, 1 - kUnitClamp].
inline constexpr double kUnitClamp = 1e-10;
// Pair-copula arguments (often conditional CDFs deep in the tails) only need to
// stay off 0 and 1: [kArgLow, kArgHigh].
inline constexpr double kArgLow = 1e-50;
inline constexpr double kArgHigh = 1.0 - 0x1.0p-53;
inline constexpr double kFrankMinAbsTheta = 1e-6;

int parameter_count(Family f);
inline int parameter_count(const FamilyTag& t) { return parameter_count(t.code); }

// Spec-file codes: "0".."5" with an optional "r" suffix for the reflection.
FamilyTag parse_family_code(std::string_view code);
std::string family_code(const FamilyTag& tag);
std::string family_name(const FamilyTag& tag);

// Throws DomainError when p lies outside the family domain.
void check_domain(const FamilyTag& tag, const BicopParams& p);
bool in_domain(const FamilyTag& tag, const BicopParams& p);

double clamp_unit(double u);
double clamp_arg(double u);

double pdf(const FamilyTag& tag, const BicopParams& p, double u1, double u2);
double log_pdf(const FamilyTag& tag, const BicopParams& p, double u1, double u2);
// Conditional CDF of the first argument given the second: dC(u1, u2)/du2.
double h(const FamilyTag& tag, const BicopParams& p, double u1, double u2);
// Conditional CDF of the second argument given the first.
double h_reverse(const FamilyTag& tag, const BicopParams& p, double u1, double u2);
// Solves h(x, u2) = w for x.
double h_inverse(const FamilyTag& tag, const BicopParams& p, double w, double u2);

// log c, h(u1|u2) and h(u2|u1) at one point; this is what the vine recursion needs.
struct PairValues {
  double log_pdf = 0.0;
  double h = 0.0;
  double h_reverse = 0.0;
};
PairValues evaluate_pair(const FamilyTag& tag, const BicopParams& p, double u1, double u2);

// Variables of a derivative bundle.
enum Var { kU1 = 0, kU2 = 1, kTheta = 2, kNu = 3 };

// Value, gradient and (optionally) Hessian of a scalar function of
// (u1, u2, theta, nu). Hessian stored as a packed upper triangle.
struct Partials {
  double value = 0.0;
  std::array<double, 4> grad{};
  std::array<double, 10> hess{};

  static constexpr int index(int a, int b) {
    if (a > b) std::swap(a, b);
    return a * 4 - a * (a - 1) / 2 + (b - a);
  }
  double d(int a) const { return grad[a]; }
  double dd(int a, int b) const { return hess[index(a, b)]; }
};

struct DerivBundle {
  int order = 1;
  Partials pdf;
  Partials log_pdf;
  Partials h;
  Partials h_reverse;
};

DerivBundle deriv_bundle_first(const FamilyTag& tag, const BicopParams& p, double u1, double u2);
DerivBundle deriv_bundle_second(const FamilyTag& tag, const BicopParams& p, double u1, double u2);

// Population Kendall's tau of the family.
double kendall_tau(const FamilyTag& tag, const BicopParams& p);
// Starting value for theta from an empirical Kendall's tau.
BicopParams start_from_tau(const FamilyTag& tag, double tau);

}  // namespace rvine
