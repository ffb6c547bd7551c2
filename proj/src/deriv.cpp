#include "rvine/deriv.hpp"

#include <cmath>
#include <iostream>

#include "rvine/errors.hpp"

namespace rvine {

std::vector<ParamIndex> parameter_slots(const RVineSpec& spec) {
  const int d = spec.dim();
  std::vector<ParamIndex> first, second;
  for (int i = d - 1; i >= 1; --i)
    for (int k = d; k >= i + 1; --k) {
      const int np = parameter_count(spec.families(k, i));
      if (np >= 1) first.push_back({k, i, 1});
      if (np >= 2) second.push_back({k, i, 2});
    }
  first.insert(first.end(), second.begin(), second.end());
  return first;
}

double get_parameter(const RVineSpec& spec, const ParamIndex& p) {
  const BicopParams& bp = spec.params(p.row, p.col);
  return p.slot == 1 ? bp.theta : bp.nu;
}

void set_parameter(RVineSpec& spec, const ParamIndex& p, double value) {
  BicopParams& bp = spec.params(p.row, p.col);
  (p.slot == 1 ? bp.theta : bp.nu) = value;
}

Eigen::VectorXd get_parameters(const RVineSpec& spec, const std::vector<ParamIndex>& slots) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(slots.size()));
  for (std::size_t a = 0; a < slots.size(); ++a) x(a) = get_parameter(spec, slots[a]);
  return x;
}

void set_parameters(RVineSpec& spec, const std::vector<ParamIndex>& slots, const Eigen::VectorXd& x) {
  if (x.size() != static_cast<Eigen::Index>(slots.size())) throw DimensionError("parameter vector has the wrong length");
  RVineSpec next = spec;
  for (std::size_t a = 0; a < slots.size(); ++a) set_parameter(next, slots[a], x(a));
  for (const auto& s : slots) check_domain(next.families(s.row, s.col), next.params(s.row, s.col));
  spec = std::move(next);
}

void set_parameters(VineModel& model, const std::vector<ParamIndex>& slots, const Eigen::VectorXd& x) {
  if (x.size() != static_cast<Eigen::Index>(slots.size())) throw DimensionError("parameter vector has the wrong length");
  // check everything before touching the model
  for (std::size_t a = 0; a < slots.size(); ++a) {
    BicopParams bp = model.params(slots[a].row, slots[a].col);
    for (std::size_t b = 0; b < slots.size(); ++b)
      if (slots[b].row == slots[a].row && slots[b].col == slots[a].col) (slots[b].slot == 1 ? bp.theta : bp.nu) = x(b);
    check_domain(model.family(slots[a].row, slots[a].col), bp);
  }
  for (std::size_t a = 0; a < slots.size(); ++a) {
    BicopParams bp = model.params(slots[a].row, slots[a].col);
    (slots[a].slot == 1 ? bp.theta : bp.nu) = x(a);
    model.set_params(slots[a].row, slots[a].col, bp);
  }
}

DerivPlan::DerivPlan(const VineModel& model) : dim_(model.dim()), slots_(parameter_slots(model.spec())) {
  const int d = dim_;
  for (const auto& s : slots_) {
    dep_.push_back(dependence_matrix(model.spec().structure, s.row, s.col));
    const auto& c = dep_.back();
    std::vector<std::pair<int, int>> f;
    for (int i = s.col; i >= 1; --i)
      for (int k = d; k >= i + 1; --k)
        if (c(k, i)) f.emplace_back(k, i);
    flagged_.push_back(std::move(f));
  }
}

int DerivPlan::index_of(const ParamIndex& p) const {
  for (int a = 0; a < size(); ++a)
    if (slots_[a] == p) return a;
  throw IndexError("no parameter slot at (" + std::to_string(p.row) + "," + std::to_string(p.col) + ") slot " +
                   std::to_string(p.slot));
}

void compute_pair_derivs(const VineModel& model, const EvalWorkspace& ws, int order, PairDerivCache& cache) {
  const int d = model.dim();
  if (cache.at.dim() != d) cache.at = TriMatrix<DerivBundle>(d);
  cache.order = order;
  for (int i = d - 1; i >= 1; --i)
    for (int k = d; k >= i + 1; --k) {
      const FamilyTag& tag = model.family(k, i);
      if (tag.code == Family::Independence) continue;
      const int c = model.arg_col(k, i);
      const double z1 = ws.vdirect(k, i);
      const double z2 = model.arg_direct(k, i) ? ws.vdirect(k, c) : ws.vindirect(k, c);
      cache.at(k, i) = order >= 2 ? deriv_bundle_second(tag, model.params(k, i), z1, z2)
                                  : deriv_bundle_first(tag, model.params(k, i), z1, z2);
    }
}

namespace {

int own_var(int slot) { return slot == 1 ? kTheta : kNu; }

// Partials of the independence copula: log c = 0, h = u1, h_reverse = u2.
const DerivBundle& independence_bundle() {
  static const DerivBundle b = [] {
    DerivBundle x;
    x.order = 2;
    x.h.grad[kU1] = 1.0;
    x.h_reverse.grad[kU2] = 1.0;
    x.pdf.value = 1.0;
    return x;
  }();
  return b;
}

const DerivBundle& bundle_at(const VineModel& model, const PairDerivCache& cache, int k, int i) {
  return model.family(k, i).code == Family::Independence ? independence_bundle() : cache.at(k, i);
}

double first(const Partials& f, double z1, double z2, int own) {
  double v = f.d(kU1) * z1 + f.d(kU2) * z2;
  if (own >= 0) v += f.d(own);
  return v;
}

double second(const Partials& f, double z1a, double z2a, double z1b, double z2b, double z1ab, double z2ab, int own_a,
              int own_b) {
  double v = f.dd(kU1, kU1) * z1a * z1b + f.dd(kU1, kU2) * (z1a * z2b + z2a * z1b) + f.dd(kU2, kU2) * z2a * z2b +
             f.d(kU1) * z1ab + f.d(kU2) * z2ab;
  if (own_a >= 0) v += f.dd(own_a, kU1) * z1b + f.dd(own_a, kU2) * z2b;
  if (own_b >= 0) v += f.dd(own_b, kU1) * z1a + f.dd(own_b, kU2) * z2a;
  if (own_a >= 0 && own_b >= 0) v += f.dd(own_a, own_b);
  return v;
}

}  // namespace

double score_coord(const VineModel& model, const DerivPlan& plan, const PairDerivCache& cache, int a,
                   ScoreWorkspace& sws) {
  const int d = model.dim();
  if (sws.s1values.dim() != d) sws = ScoreWorkspace(d);
  sws.s1direct.fill(0.0);
  sws.s1indirect.fill(0.0);
  sws.s1values.fill(0.0);
  const ParamIndex& p = plan.slot(a);
  const DependenceMatrix& c = plan.dependence(a);
  double total = 0.0;
  for (const auto& [k, i] : plan.flagged(a)) {
    const int col = model.arg_col(k, i);
    // Derivatives of the arguments are only non-zero when the position that
    // produced them depends on the parameter; row d + 1 does not exist.
    const bool dep1 = k < d && c(k + 1, i);
    const bool dep2 = k < d && c(k + 1, col);
    const double z1 = dep1 ? sws.s1direct(k, i) : 0.0;
    const double z2 = dep2 ? (model.arg_direct(k, i) ? sws.s1direct(k, col) : sws.s1indirect(k, col)) : 0.0;
    const int own = (k == p.row && i == p.col) ? own_var(p.slot) : -1;
    const DerivBundle& b = bundle_at(model, cache, k, i);
    const double v = first(b.log_pdf, z1, z2, own);
    sws.s1values(k, i) = v;
    total += v;
    sws.s1direct(k - 1, i) = first(b.h, z1, z2, own);
    sws.s1indirect(k - 1, i) = first(b.h_reverse, z1, z2, own);
  }
  return total;
}

double score_coord(const VineModel& model, std::span<const double> data_row, const ParamIndex& p,
                   ScoreWorkspace* sws) {
  EvalWorkspace ws(model.dim());
  loglik_obs(model, data_row, ws);
  PairDerivCache cache;
  compute_pair_derivs(model, ws, 1, cache);
  const DerivPlan plan(model);
  ScoreWorkspace local;
  return score_coord(model, plan, cache, plan.index_of(p), sws ? *sws : local);
}

double hessian_coord(const VineModel& model, const DerivPlan& plan, const PairDerivCache& cache,
                     const ScoreWorkspace& sa, const ScoreWorkspace& sb, int a, int b, HessWorkspace& hws) {
  if (cache.order < 2) throw EvalError("hessian_coord needs second-order pair partials");
  const int d = model.dim();
  if (hws.s2values.dim() != d) hws = HessWorkspace(d);
  hws.s2direct.fill(0.0);
  hws.s2indirect.fill(0.0);
  hws.s2values.fill(0.0);
  const ParamIndex& pa = plan.slot(a);
  const ParamIndex& pb = plan.slot(b);
  const DependenceMatrix& ca = plan.dependence(a);
  const DependenceMatrix& cb = plan.dependence(b);
  // Walk the flagged positions of the parameter in the lower column (or lower
  // tree); a position needs both flags.
  const auto& walk = plan.flagged(a).size() <= plan.flagged(b).size() ? plan.flagged(a) : plan.flagged(b);
  double total = 0.0;
  for (const auto& [k, i] : walk) {
    if (!ca(k, i) || !cb(k, i)) continue;
    const int col = model.arg_col(k, i);
    const bool direct = model.arg_direct(k, i);
    const auto arg2 = [&](const TriMatrix<double>& dir, const TriMatrix<double>& ind) {
      return direct ? dir(k, col) : ind(k, col);
    };
    const bool in1a = k < d && ca(k + 1, i), in1b = k < d && cb(k + 1, i);
    const bool in2a = k < d && ca(k + 1, col), in2b = k < d && cb(k + 1, col);
    const double z1a = in1a ? sa.s1direct(k, i) : 0.0;
    const double z1b = in1b ? sb.s1direct(k, i) : 0.0;
    const double z2a = in2a ? arg2(sa.s1direct, sa.s1indirect) : 0.0;
    const double z2b = in2b ? arg2(sb.s1direct, sb.s1indirect) : 0.0;
    const double z1ab = in1a && in1b ? hws.s2direct(k, i) : 0.0;
    const double z2ab = in2a && in2b ? arg2(hws.s2direct, hws.s2indirect) : 0.0;
    const int own_a = (k == pa.row && i == pa.col) ? own_var(pa.slot) : -1;
    const int own_b = (k == pb.row && i == pb.col) ? own_var(pb.slot) : -1;
    const DerivBundle& bd = bundle_at(model, cache, k, i);
    const double v = second(bd.log_pdf, z1a, z2a, z1b, z2b, z1ab, z2ab, own_a, own_b);
    hws.s2values(k, i) = v;
    total += v;
    hws.s2direct(k - 1, i) = second(bd.h, z1a, z2a, z1b, z2b, z1ab, z2ab, own_a, own_b);
    hws.s2indirect(k - 1, i) = second(bd.h_reverse, z1a, z2a, z1b, z2b, z1ab, z2ab, own_a, own_b);
  }
  return total;
}

std::vector<double> sum_by_tree(const TriMatrix<double>& values) {
  const int d = values.dim();
  std::vector<double> out(std::max(d - 1, 0), 0.0);
  for (int i = 1; i < d; ++i)
    for (int k = i + 1; k <= d; ++k) out[tree_of_row(d, k) - 1] += values(k, i);
  return out;
}

namespace {

struct ObsDerivs {
  EvalWorkspace ws;
  PairDerivCache cache;
  std::vector<ScoreWorkspace> sws;
  HessWorkspace hws;
};

}  // namespace

LoglikDerivs loglik_derivatives(const VineModel& model, const DerivPlan& plan, const CopulaDataset& data, int order) {
  const int d = model.dim();
  const int p = plan.size();
  LoglikDerivs out;
  out.gradient = Eigen::VectorXd::Zero(p);
  if (order >= 2) out.hessian = Eigen::MatrixXd::Zero(p, p);
  ObsDerivs o{EvalWorkspace(d), {}, std::vector<ScoreWorkspace>(p, ScoreWorkspace(d)), HessWorkspace(d)};
  for (int r = 0; r < data.n(); ++r) {
    try {
      out.loglik += loglik_obs(model, data.row(r), o.ws);
      if (p == 0) continue;
      compute_pair_derivs(model, o.ws, order, o.cache);
      for (int a = 0; a < p; ++a) out.gradient(a) += score_coord(model, plan, o.cache, a, o.sws[a]);
      if (order >= 2)
        for (int a = 0; a < p; ++a)
          for (int b = a; b < p; ++b) out.hessian(a, b) += hessian_coord(model, plan, o.cache, o.sws[a], o.sws[b], a, b, o.hws);
    } catch (const EvalError& e) {
      throw EvalError("row " + std::to_string(r + 1) + ": " + e.what());
    }
  }
  if (order >= 2) out.hessian.triangularView<Eigen::StrictlyLower>() = out.hessian.transpose().triangularView<Eigen::StrictlyLower>();
  return out;
}

Eigen::VectorXd score(const VineModel& model, const CopulaDataset& data) {
  const DerivPlan plan(model);
  return loglik_derivatives(model, plan, data, 1).gradient;
}

Eigen::VectorXd score(const RVineSpec& spec, const CopulaDataset& data) { return score(VineModel(spec), data); }

Eigen::MatrixXd score_contributions(const VineModel& model, const CopulaDataset& data) {
  const DerivPlan plan(model);
  const int d = model.dim(), p = plan.size();
  Eigen::MatrixXd out(data.n(), p);
  EvalWorkspace ws(d);
  PairDerivCache cache;
  ScoreWorkspace sws(d);
  for (int r = 0; r < data.n(); ++r) {
    loglik_obs(model, data.row(r), ws);
    compute_pair_derivs(model, ws, 1, cache);
    for (int a = 0; a < p; ++a) out(r, a) = score_coord(model, plan, cache, a, sws);
  }
  return out;
}

Eigen::MatrixXd observed_information(const VineModel& model, const CopulaDataset& data, double* max_asymmetry) {
  const DerivPlan plan(model);
  const int d = model.dim(), p = plan.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
  ObsDerivs o{EvalWorkspace(d), {}, std::vector<ScoreWorkspace>(p, ScoreWorkspace(d)), HessWorkspace(d)};
  for (int r = 0; r < data.n(); ++r) {
    loglik_obs(model, data.row(r), o.ws);
    compute_pair_derivs(model, o.ws, 2, o.cache);
    for (int a = 0; a < p; ++a) score_coord(model, plan, o.cache, a, o.sws[a]);
    // both orders, so the asymmetry of the recursion itself can be reported
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) h(a, b) += hessian_coord(model, plan, o.cache, o.sws[a], o.sws[b], a, b, o.hws);
  }
  double asym = 0.0;
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b) {
      const double scale = std::max({std::abs(h(a, b)), std::abs(h(b, a)), 1e-300});
      asym = std::max(asym, std::abs(h(a, b) - h(b, a)) / scale);
    }
  if (asym > 1e-6) {
    std::cerr << "warning: observed information asymmetric before averaging (relative " << asym << ")\n";
    for (int a = 0; a < p; ++a)
      for (int b = a + 1; b < p; ++b)
        if (std::abs(h(a, b) - h(b, a)) > 1e-6 * std::max(std::abs(h(a, b)), std::abs(h(b, a))))
          std::cerr << "  slots " << a << "," << b << ": " << h(a, b) << " vs " << h(b, a) << '\n';
  }
  if (max_asymmetry) *max_asymmetry = asym;
  return -0.5 * (h + h.transpose());
}

Eigen::MatrixXd observed_information(const RVineSpec& spec, const CopulaDataset& data, double* max_asymmetry) {
  return observed_information(VineModel(spec), data, max_asymmetry);
}

}  // namespace rvine
