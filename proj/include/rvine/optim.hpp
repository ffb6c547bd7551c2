#pragma once

#include <Eigen/Core>
#include <functional>

namespace rvine {

// Objective for minimize_box. value() may return +inf for infeasible points.
// value_grad() fills g and returns the value.
struct Objective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)> value_grad;
  // Evaluate trial points with value_grad (gradient is cheap relative to value).
  bool combined = true;
};

struct MinimizeOptions {
  int maxiter = 1000;
  double gtol = 1e-6;  // infinity norm of the projected gradient
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  double pg_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  long value_calls = 0;
  long grad_calls = 0;
};

// Quasi-Newton (BFGS on the free variables) with projection onto the box
// [lo, hi] and backtracking Armijo steps. x0 is projected first.
MinimizeResult minimize_box(const Objective& obj, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi, const MinimizeOptions& opts = {});

}  // namespace rvine
