#include "rvine/inference.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "rvine/errors.hpp"
#include "rvine/optim.hpp"
#include "rvine/stats.hpp"

namespace rvine {

namespace {

constexpr double kRhoMax = 0.99999;
constexpr double kNuMin = 2.0001;
constexpr double kNuMax = 100.0;
constexpr double kArchMax = 50.0;  // Gumbel, Joe
constexpr double kFrankMax = 35.0;
constexpr double kLogFloor = -18.42;  // log(1e-8): internal lower end for theta - 1
constexpr double kBoundaryTol = 1e-4;
constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Coord { Fisher, LogShift, Identity };

Coord coord_of(const FamilyTag& tag, int slot, double& shift) {
  shift = 0.0;
  if (slot == 2) {
    shift = 2.0;
    return Coord::LogShift;
  }
  switch (tag.code) {
    case Family::Gaussian:
    case Family::StudentT:
      return Coord::Fisher;
    case Family::Gumbel:
    case Family::Joe:
      shift = 1.0;
      return Coord::LogShift;
    default:
      return Coord::Identity;
  }
}

// Frank is undefined on a tiny hole around 0.
double frank_nudge(const FamilyTag& tag, int slot, double v) {
  if (tag.code == Family::Frank && slot == 1 && std::fabs(v) < kFrankMinAbsTheta) return v < 0.0 ? -kFrankMinAbsTheta : kFrankMinAbsTheta;
  return v;
}

// Slot-level view of the optimization coordinates.
struct Coordinates {
  std::vector<ParamIndex> slots;
  std::vector<FamilyTag> tags;
  bool transform = true;
  Eigen::VectorXd lo, hi;  // in optimization coordinates

  Coordinates(const RVineSpec& spec, std::vector<ParamIndex> s, bool tr) : slots(std::move(s)), transform(tr) {
    const auto p = static_cast<Eigen::Index>(slots.size());
    lo.resize(p);
    hi.resize(p);
    for (Eigen::Index a = 0; a < p; ++a) {
      tags.push_back(spec.families(slots[a].row, slots[a].col));
      const ParamBounds b = parameter_bounds(tags[a], slots[a].slot);
      double shift = 0.0;
      if (transform && coord_of(tags[a], slots[a].slot, shift) == Coord::LogShift && b.lo <= shift) {
        lo(a) = kLogFloor;
      } else {
        lo(a) = transform ? to_internal(tags[a], slots[a].slot, b.lo) : b.lo;
      }
      hi(a) = transform ? to_internal(tags[a], slots[a].slot, b.hi) : b.hi;
    }
  }

  Eigen::VectorXd to_coord(const Eigen::VectorXd& v) const {
    Eigen::VectorXd x(v.size());
    for (Eigen::Index a = 0; a < v.size(); ++a) {
      const double c = std::clamp(v(a), parameter_bounds(tags[a], slots[a].slot).lo, parameter_bounds(tags[a], slots[a].slot).hi);
      x(a) = transform ? to_internal(tags[a], slots[a].slot, c) : c;
    }
    return x.cwiseMax(lo).cwiseMin(hi);
  }
  Eigen::VectorXd to_value(const Eigen::VectorXd& x) const {
    Eigen::VectorXd v(x.size());
    for (Eigen::Index a = 0; a < x.size(); ++a)
      v(a) = frank_nudge(tags[a], slots[a].slot, transform ? from_internal(tags[a], slots[a].slot, x(a)) : x(a));
    return v;
  }
  Eigen::VectorXd jacobian(const Eigen::VectorXd& x) const {
    Eigen::VectorXd j = Eigen::VectorXd::Ones(x.size());
    if (transform)
      for (Eigen::Index a = 0; a < x.size(); ++a) j(a) = internal_jacobian(tags[a], slots[a].slot, x(a));
    return j;
  }
};

std::vector<BoundaryWarning> boundary_warnings(const Coordinates& c, const Eigen::VectorXd& v) {
  std::vector<BoundaryWarning> out;
  for (Eigen::Index a = 0; a < v.size(); ++a) {
    const ParamBounds b = parameter_bounds(c.tags[a], c.slots[a].slot);
    if (v(a) - b.lo < kBoundaryTol) out.push_back({c.slots[a], v(a), b.lo});
    else if (b.hi - v(a) < kBoundaryTol) out.push_back({c.slots[a], v(a), b.hi});
  }
  return out;
}

// Central differences in optimization coordinates, one-sided at the box.
double fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, Eigen::VectorXd& g) {
  const double f0 = f(x);
  g.resize(x.size());
  for (Eigen::Index a = 0; a < x.size(); ++a) {
    const double h = 6e-6 * std::max(1.0, std::fabs(x(a)));
    Eigen::VectorXd xp = x, xm = x;
    if (x(a) + h > hi(a)) {
      xm(a) -= h;
      g(a) = (f0 - f(xm)) / h;
    } else if (x(a) - h < lo(a)) {
      xp(a) += h;
      g(a) = (f(xp) - f0) / h;
    } else {
      xp(a) += h;
      xm(a) -= h;
      g(a) = (f(xp) - f(xm)) / (2.0 * h);
    }
  }
  return f0;
}

void fill_covariance(FitResult& r, const Eigen::MatrixXd& cov) {
  r.covariance = cov;
  r.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  r.se_matrix = se_layout(r.spec, r.slots, r.se);
}

void no_covariance(FitResult& r) {
  const auto p = static_cast<Eigen::Index>(r.slots.size());
  fill_covariance(r, Eigen::MatrixXd::Constant(p, p, std::nan("")));
}

RVineSpec with_parameters(const RVineSpec& spec0, const std::vector<ParamIndex>& slots, const Eigen::VectorXd& v) {
  RVineSpec out = spec0;
  set_parameters(out, slots, v);
  return out;
}

// Pair-copula arguments of one tree for every observation, computed with the
// lower trees only.
struct TreeArgs {
  std::vector<std::vector<double>> z1, z2;  // index col - 1
};

TreeArgs tree_arguments(const VineModel& model, const CopulaDataset& data, int tree) {
  const int d = model.dim();
  const int k = d - tree + 1;
  TreeArgs out;
  out.z1.assign(k - 1, std::vector<double>(data.n()));
  out.z2.assign(k - 1, std::vector<double>(data.n()));
  EvalWorkspace ws(d);
  std::vector<double> u(d);
  for (int r = 0; r < data.n(); ++r) {
    model.to_variables(data.row(r), u);
    for (int i = 1; i <= d; ++i) ws.vdirect(d, i) = u[d - i];
    for (int i = d - 1; i >= 1; --i)
      for (int row = d; row >= std::max(k, i) + 1; --row) {
        const int c = model.arg_col(row, i);
        const double z2 = model.arg_direct(row, i) ? ws.vdirect(row, c) : ws.vindirect(row, c);
        const PairValues pv = evaluate_pair(model.family(row, i), model.params(row, i), ws.vdirect(row, i), z2);
        ws.vdirect(row - 1, i) = pv.h;
        ws.vindirect(row - 1, i) = pv.h_reverse;
      }
    for (int i = 1; i < k; ++i) {
      const int c = model.arg_col(k, i);
      out.z1[i - 1][r] = ws.vdirect(k, i);
      out.z2[i - 1][r] = model.arg_direct(k, i) ? ws.vdirect(k, c) : ws.vindirect(k, c);
    }
  }
  return out;
}

struct PairFit {
  BicopParams params;
  int iterations = 0;
  bool converged = false;
};

PairFit fit_pair(const FamilyTag& tag, const std::vector<double>& z1, const std::vector<double>& z2,
                 const BicopParams& start, const FitOptions& opts) {
  RVineSpec one = RVineSpec::independence(RVineMatrix::from_rows({{2}, {1, 1}}));
  one.families(2, 1) = tag;
  one.params(2, 1) = start;
  std::vector<ParamIndex> slots{{2, 1, 1}};
  if (parameter_count(tag) == 2) slots.push_back({2, 1, 2});
  const Coordinates c(one, slots, opts.transform);
  const double n = static_cast<double>(z1.size());
  const auto params_of = [&](const Eigen::VectorXd& x, BicopParams& bp) {
    const Eigen::VectorXd v = c.to_value(x);
    bp.theta = v(0);
    if (v.size() > 1) bp.nu = v(1);
    return in_domain(tag, bp);
  };
  Objective obj;
  obj.value = [&](const Eigen::VectorXd& x) {
    BicopParams bp;
    if (!params_of(x, bp)) return kInf;
    double s = 0.0;
    for (std::size_t r = 0; r < z1.size(); ++r) s += evaluate_pair(tag, bp, z1[r], z2[r]).log_pdf;
    return std::isfinite(s) ? -s / n : kInf;
  };
  obj.value_grad = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = Eigen::VectorXd::Zero(x.size());
    BicopParams bp;
    if (!params_of(x, bp)) return kInf;
    double s = 0.0;
    for (std::size_t r = 0; r < z1.size(); ++r) {
      const DerivBundle b = deriv_bundle_first(tag, bp, z1[r], z2[r]);
      s += b.log_pdf.value;
      g(0) -= b.log_pdf.d(kTheta);
      if (x.size() > 1) g(1) -= b.log_pdf.d(kNu);
    }
    g = g.cwiseProduct(c.jacobian(x)) / n;
    return std::isfinite(s) && g.allFinite() ? -s / n : kInf;
  };
  Eigen::VectorXd v0(static_cast<Eigen::Index>(slots.size()));
  v0(0) = start.theta;
  if (v0.size() > 1) v0(1) = start.nu;
  const MinimizeResult m = minimize_box(obj, c.to_coord(v0), c.lo, c.hi, {opts.maxiter, opts.gtol});
  PairFit out;
  params_of(m.x, out.params);
  out.iterations = m.iterations;
  out.converged = m.converged;
  return out;
}

}  // namespace

ParamBounds parameter_bounds(const FamilyTag& tag, int slot) {
  if (slot == 2) return {kNuMin, kNuMax};
  switch (tag.code) {
    case Family::Gaussian:
    case Family::StudentT:
      return {-kRhoMax, kRhoMax};
    case Family::Frank:
      return {-kFrankMax, kFrankMax};
    case Family::Gumbel:
    case Family::Joe:
      return {1.0, kArchMax};
    default:
      return {0.0, 0.0};
  }
}

double to_internal(const FamilyTag& tag, int slot, double value) {
  double shift = 0.0;
  switch (coord_of(tag, slot, shift)) {
    case Coord::Fisher:
      return std::atanh(value);
    case Coord::LogShift:
      return std::log(value - shift);
    default:
      return value;
  }
}

double from_internal(const FamilyTag& tag, int slot, double x) {
  double shift = 0.0;
  switch (coord_of(tag, slot, shift)) {
    case Coord::Fisher:
      return std::tanh(x);
    case Coord::LogShift:
      return shift + std::exp(x);
    default:
      return x;
  }
}

double internal_jacobian(const FamilyTag& tag, int slot, double x) {
  double shift = 0.0;
  switch (coord_of(tag, slot, shift)) {
    case Coord::Fisher: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Coord::LogShift:
      return std::exp(x);
    default:
      return 1.0;
  }
}

TriMatrix<double> se_layout(const RVineSpec& spec, const std::vector<ParamIndex>& slots, const Eigen::VectorXd& se) {
  TriMatrix<double> out(spec.dim(), std::nan(""));
  for (std::size_t a = 0; a < slots.size(); ++a) {
    const ParamIndex& s = slots[a];
    if (s.slot == 1) out(s.row, s.col) = se(a);
    else out(s.col, s.row) = se(a);
  }
  return out;
}

Eigen::MatrixXd inverse_pd(const Eigen::MatrixXd& m, const std::string& what) {
  if (m.size() == 0) return m;
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw SingularityError(what + ": eigen decomposition failed");
  const Eigen::VectorXd ev = es.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300)))
    throw SingularityError(what + " is not positive definite (smallest eigenvalue " + std::to_string(ev.minCoeff()) + ")");
  return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

FitResult fit_sequential(const RVineSpec& spec0, const CopulaDataset& data, const FitOptions& opts) {
  VineModel model(spec0);
  if (data.n() > 0 && data.d() != model.dim()) throw DimensionError("data and spec dimensions differ");
  const int d = model.dim();
  FitResult r;
  r.method = FitMethod::Sequential;
  r.slots = parameter_slots(model.spec());
  r.converged = true;
  for (int t = 1; t < d; ++t) {
    const int k = d - t + 1;
    bool any = false;
    for (int i = 1; i < k; ++i) any = any || parameter_count(model.family(k, i)) > 0;
    if (!any) continue;
    const TreeArgs args = tree_arguments(model, data, t);
    ++r.value_evaluations;
    for (int i = 1; i < k; ++i) {
      const FamilyTag& tag = model.family(k, i);
      if (parameter_count(tag) == 0) continue;
      const double tau = sample_kendall_tau(args.z1[i - 1], args.z2[i - 1]);
      const PairFit pf = fit_pair(tag, args.z1[i - 1], args.z2[i - 1], start_from_tau(tag, tau), opts);
      r.iterations += pf.iterations;
      r.converged = r.converged && pf.converged;
      model.set_params(k, i, pf.params);
    }
  }
  if (!r.converged && opts.require_convergence) throw ConvergenceError("sequential fit: a pair fit did not converge");
  r.estimate = get_parameters(model.spec(), r.slots);
  r.spec = with_parameters(spec0, r.slots, r.estimate);
  r.loglik = loglik_dataset(model, data);
  const Coordinates c(model.spec(), r.slots, opts.transform);
  r.warnings = boundary_warnings(c, r.estimate);
  if (opts.covariance && !r.slots.empty() && data.n() > 0) {
    try {
      const SeqCovariance sc = sequential_covariance(model.spec(), data);
      fill_covariance(r, sc.V / static_cast<double>(data.n()));
    } catch (const SingularityError&) {
      no_covariance(r);
    }
  } else {
    no_covariance(r);
  }
  return r;
}

FitResult fit_mle(const RVineSpec& spec0, const CopulaDataset& data, const FitOptions& opts) {
  VineModel model(spec0);
  if (data.n() > 0 && data.d() != model.dim()) throw DimensionError("data and spec dimensions differ");
  if (data.n() == 0) throw DomainError("no observations to fit");
  FitResult r;
  r.method = FitMethod::ML;
  r.slots = parameter_slots(model.spec());
  const DerivPlan plan(model);
  const Coordinates c(model.spec(), r.slots, opts.transform);

  Eigen::VectorXd v0;
  if (opts.start == StartMode::Sequential && !r.slots.empty()) {
    FitOptions so = opts;
    so.covariance = false;
    so.require_convergence = false;
    const FitResult seq = fit_sequential(spec0, data, so);
    v0 = seq.estimate;
    r.value_evaluations += seq.value_evaluations;
  } else {
    v0 = get_parameters(model.spec(), r.slots);
  }

  const double n = static_cast<double>(data.n());
  const auto set = [&](const Eigen::VectorXd& x) {
    try {
      set_parameters(model, r.slots, c.to_value(x));
      return true;
    } catch (const DomainError&) {
      return false;
    }
  };
  const auto value = [&](const Eigen::VectorXd& x) {
    ++r.value_evaluations;
    if (!set(x)) return kInf;
    try {
      const double ll = loglik_dataset(model, data);
      return std::isfinite(ll) ? -ll / n : kInf;
    } catch (const EvalError&) {
      return kInf;
    }
  };
  Objective obj;
  obj.value = value;
  if (opts.gradient == GradientMode::Analytic) {
    obj.value_grad = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
      ++r.gradient_evaluations;
      g = Eigen::VectorXd::Zero(x.size());
      if (!set(x)) return kInf;
      try {
        const LoglikDerivs ld = loglik_derivatives(model, plan, data, 1);
        g = -ld.gradient.cwiseProduct(c.jacobian(x)) / n;
        return std::isfinite(ld.loglik) && g.allFinite() ? -ld.loglik / n : kInf;
      } catch (const EvalError&) {
        return kInf;
      }
    };
    obj.combined = true;
  } else {
    obj.value_grad = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) { return fd_gradient(value, x, c.lo, c.hi, g); };
    obj.combined = false;
  }

  const MinimizeResult m = minimize_box(obj, c.to_coord(v0), c.lo, c.hi, {opts.maxiter, opts.gtol});
  r.iterations = m.iterations;
  r.converged = m.converged;
  r.gradient_norm = m.pg_norm;
  if (!m.converged && opts.require_convergence)
    throw ConvergenceError("ML fit stopped after " + std::to_string(m.iterations) + " iterations, projected gradient " +
                           std::to_string(m.pg_norm));
  r.estimate = c.to_value(m.x);
  set_parameters(model, r.slots, r.estimate);
  r.spec = with_parameters(spec0, r.slots, r.estimate);
  r.loglik = loglik_dataset(model, data);
  r.warnings = boundary_warnings(c, r.estimate);
  if (opts.covariance && !r.slots.empty()) {
    try {
      fill_covariance(r, inverse_pd(observed_information(model, data), "observed information"));
    } catch (const SingularityError&) {
      no_covariance(r);
    }
  } else {
    no_covariance(r);
  }
  return r;
}

}  // namespace rvine
