#include "rvine/optim.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace rvine {

namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// Variables held at a bound because the gradient pushes them outward.
std::vector<char> held(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                       const Eigen::VectorXd& hi) {
  std::vector<char> out(x.size(), 0);
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = (x(i) <= lo(i) && g(i) > 0.0) || (x(i) >= hi(i) && g(i) < 0.0);
  return out;
}

}  // namespace

MinimizeResult minimize_box(const Objective& obj, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi, const MinimizeOptions& opts) {
  const Eigen::Index n = x0.size();
  MinimizeResult r;
  r.x = project(x0, lo, hi);
  r.grad = Eigen::VectorXd::Zero(n);
  r.f = obj.value_grad(r.x, r.grad);
  ++r.grad_calls;
  if (n == 0) {
    r.converged = true;
    return r;
  }
  if (!std::isfinite(r.f)) return r;

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;
  Eigen::VectorXd gt(n);
  std::vector<char> was_fixed;
  for (;;) {
    const auto fixed = held(r.x, r.grad, lo, hi);
    // The curvature model only covers the free variables; start over when that set changes.
    if (fixed != was_fixed) fresh = true;
    was_fixed = fixed;
    Eigen::VectorXd pg = r.grad;
    for (Eigen::Index i = 0; i < n; ++i)
      if (fixed[i]) pg(i) = 0.0;
    r.pg_norm = pg.lpNorm<Eigen::Infinity>();
    if (r.pg_norm < opts.gtol) {
      r.converged = true;
      return r;
    }
    if (r.iterations >= opts.maxiter) return r;
    ++r.iterations;

    if (fresh) H = Eigen::MatrixXd::Identity(n, n) / std::max(1.0, r.pg_norm);
    Eigen::VectorXd d = -(H * pg);
    for (Eigen::Index i = 0; i < n; ++i)
      if (fixed[i]) d(i) = 0.0;
    if (!(d.dot(pg) < 0.0)) {
      H = Eigen::MatrixXd::Identity(n, n) / std::max(1.0, r.pg_norm);
      d = -(H * pg);
      fresh = true;
    }

    // Backtracking along the projected path.
    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd xt;
    double ft = 0.0;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      xt = project(r.x + alpha * d, lo, hi);
      if ((xt - r.x).lpNorm<Eigen::Infinity>() == 0.0) break;
      if (obj.combined) {
        ft = obj.value_grad(xt, gt);
        ++r.grad_calls;
      } else {
        ft = obj.value(xt);
        ++r.value_calls;
      }
      if (std::isfinite(ft) && ft <= r.f + 1e-4 * r.grad.dot(xt - r.x)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (fresh) return r;  // no descent even along the steepest direction
      fresh = true;
      continue;
    }
    if (!obj.combined) {
      ft = obj.value_grad(xt, gt);
      ++r.grad_calls;
    }
    Eigen::VectorXd s = xt - r.x;
    Eigen::VectorXd y = gt - r.grad;
    for (Eigen::Index i = 0; i < n; ++i)
      if (fixed[i]) s(i) = y(i) = 0.0;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (fresh) H = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      H += (rho * rho * y.dot(Hy) + rho) * s * s.transpose() - rho * (Hy * s.transpose() + s * Hy.transpose());
      fresh = false;
    }
    r.x = xt;
    r.f = ft;
    r.grad = gt;
  }
}

}  // namespace rvine
