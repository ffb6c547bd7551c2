#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "rvine/deriv.hpp"
#include "rvine/evaluate.hpp"
#include "rvine/structure.hpp"

namespace rvine {

// Bounds of one scalar parameter as used by the optimizer.
struct ParamBounds {
  double lo = 0.0;
  double hi = 0.0;
};
ParamBounds parameter_bounds(const FamilyTag& tag, int slot);

// Internal coordinates: Fisher z for correlations, log(theta - 1) for
// Gumbel/Joe, identity for Frank, log(nu - 2) for degrees of freedom.
double to_internal(const FamilyTag& tag, int slot, double value);
double from_internal(const FamilyTag& tag, int slot, double x);
// d value / d x
double internal_jacobian(const FamilyTag& tag, int slot, double x);

enum class FitMethod { ML, Sequential };
enum class GradientMode { Analytic, FiniteDifference };
enum class StartMode { Sequential, Spec };

struct FitOptions {
  int maxiter = 1000;
  // Infinity norm of the projected gradient of the mean log-likelihood.
  double gtol = 1e-6;
  bool transform = true;
  GradientMode gradient = GradientMode::Analytic;
  StartMode start = StartMode::Sequential;
  // Throw ConvergenceError when maxiter is exhausted; otherwise flag it.
  bool require_convergence = true;
  bool covariance = true;
};

struct BoundaryWarning {
  ParamIndex slot;
  double value = 0.0;
  double bound = 0.0;
};

struct FitResult {
  RVineSpec spec;  // fitted parameters
  FitMethod method = FitMethod::ML;
  double loglik = 0.0;
  std::vector<ParamIndex> slots;
  Eigen::VectorXd estimate;
  Eigen::MatrixXd covariance;  // NaN when the information could not be inverted
  Eigen::VectorXd se;
  // d x d layout: first parameters at (k, i), degrees of freedom mirrored to (i, k); NaN elsewhere.
  TriMatrix<double> se_matrix;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  // Full-data log-likelihood passes: value only, and value with gradient.
  long value_evaluations = 0;
  long gradient_evaluations = 0;
  std::vector<BoundaryWarning> warnings;
};

FitResult fit_mle(const RVineSpec& spec0, const CopulaDataset& data, const FitOptions& opts = {});
FitResult fit_sequential(const RVineSpec& spec0, const CopulaDataset& data, const FitOptions& opts = {});

TriMatrix<double> se_layout(const RVineSpec& spec, const std::vector<ParamIndex>& slots, const Eigen::VectorXd& se);

// Symmetric inverse; SingularityError unless positive definite.
Eigen::MatrixXd inverse_pd(const Eigen::MatrixXd& m, const std::string& what);

// Expectations under the copula are integrated over the unit cube of
// independent uniforms w, mapped through the inverse Rosenblatt transform.
// Deterministic mode substitutes w = 1 / (1 + exp(-s)) on a truncated box and
// refines a globally adaptive cubature until the summed error estimate of
// every entry (a,b) is below tol * sqrt(|m_aa m_bb|).
struct IntegrationOptions {
  double tol = 1e-4;
  long max_points = 3'000'000;  // integrand evaluations
  bool monte_carlo = false;  // forced for d > 4
  long mc_samples = 200'000;
  std::uint64_t seed = 1;
};

struct IntegrationReport {
  bool monte_carlo = false;
  int regions = 0;
  long points = 0;
  double error = 0.0;  // largest scaled error estimate, or scaled MC standard error
};

// Expected information per observation, -E[Hessian], in slot order.
Eigen::MatrixXd fisher_information(const RVineSpec& spec, const IntegrationOptions& opts = {},
                                   IntegrationReport* report = nullptr);

struct AsymptoticSE {
  std::vector<ParamIndex> slots;
  Eigen::VectorXd se;
  TriMatrix<double> matrix;
};
// Square roots of the diagonal of the inverse expected information (n = 1).
AsymptoticSE asymptotic_se_mle(const RVineSpec& spec, const IntegrationOptions& opts = {},
                               IntegrationReport* report = nullptr);

// Sandwich pieces of the tree-by-tree estimator, per observation. K is block
// diagonal by tree, J block lower triangular.
struct SeqCovariance {
  Eigen::MatrixXd K;
  Eigen::MatrixXd J;
  Eigen::MatrixXd V;  // J^-1 K J^-T
};
SeqCovariance sequential_covariance(const RVineSpec& spec, const IntegrationOptions& opts = {},
                                    IntegrationReport* report = nullptr);
// Plug-in sample averages at the given parameters.
SeqCovariance sequential_covariance(const RVineSpec& spec, const CopulaDataset& data);
AsymptoticSE asymptotic_se_sequential(const RVineSpec& spec, const IntegrationOptions& opts = {},
                                      IntegrationReport* report = nullptr);

// Information and the sequential pieces from a single integration.
struct ExpectedMoments {
  Eigen::MatrixXd information;
  SeqCovariance sequential;
  AsymptoticSE se_mle;
  AsymptoticSE se_sequential;
};
ExpectedMoments expected_moments(const RVineSpec& spec, const IntegrationOptions& opts = {},
                                 IntegrationReport* report = nullptr);

// Closed-form K and J of the 3-dim Gaussian vine, parameters ordered
// (rho12, rho23, rho13|2).
struct GaussianKJ {
  Eigen::Matrix3d K;
  Eigen::Matrix3d J;
};
GaussianKJ gaussian_analytic_KJ(double rho12, double rho23, double rho13_2);

}  // namespace rvine
