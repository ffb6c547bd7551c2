#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rvine/errors.hpp"
#include "rvine/inference.hpp"

namespace rvine {

namespace {

// Per-observation quantities: negative Hessian, outer products of the tree
// scores (same tree only), and the tree-restricted negative Hessian.
class PointMoments {
 public:
  PointMoments(const VineModel& model, bool sequential)
      : model_(model), plan_(model), seq_(sequential), d_(model.dim()), p_(plan_.size()),
        ws_(d_), sws_(p_, ScoreWorkspace(d_)), hws_(d_), row_(d_) {}

  int p() const { return p_; }
  int size() const { return (seq_ ? 3 : 1) * p_ * p_; }

  void from_w(std::span<const double> w, double* out) {
    inverse_rosenblatt(model_, w, row_, ws_);
    accumulate(out);
  }
  void from_row(std::span<const double> row, double* out) {
    loglik_obs(model_, row, ws_);
    accumulate(out);
  }

 private:
  void accumulate(double* out) {
    const int p = p_;
    compute_pair_derivs(model_, ws_, 2, cache_);
    for (int a = 0; a < p; ++a) score_coord(model_, plan_, cache_, a, sws_[a]);
    std::fill(out, out + size(), 0.0);
    double* info = out;
    double* K = out + p * p;
    double* J = out + 2 * p * p;
    for (int a = 0; a < p; ++a)
      for (int b = a; b < p; ++b) {
        const double h = hessian_coord(model_, plan_, cache_, sws_[a], sws_[b], a, b, hws_);
        info[a * p + b] = info[b * p + a] = -h;
        if (!seq_) continue;
        const int ta = plan_.tree(a), tb = plan_.tree(b);
        const std::vector<double> by_tree = sum_by_tree(hws_.s2values);
        if (ta >= tb) J[a * p + b] = -by_tree[ta - 1];
        if (tb >= ta) J[b * p + a] = -by_tree[tb - 1];
      }
    if (!seq_) return;
    // The tree score of a slot only involves its own position.
    std::vector<double> psi(p);
    for (int a = 0; a < p; ++a) psi[a] = sws_[a].s1values(plan_.slot(a).row, plan_.slot(a).col);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b)
        if (plan_.tree(a) == plan_.tree(b)) K[a * p + b] = psi[a] * psi[b];
  }

  const VineModel& model_;
  DerivPlan plan_;
  bool seq_;
  int d_, p_;
  EvalWorkspace ws_;
  PairDerivCache cache_;
  std::vector<ScoreWorkspace> sws_;
  HessWorkspace hws_;
  std::vector<double> row_;
};

Eigen::MatrixXd block(const Eigen::VectorXd& v, int p, int which) {
  Eigen::MatrixXd m(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) m(a, b) = v(which * p * p + a * p + b);
  return m;
}

// Largest change of a block entry relative to sqrt(|m_aa m_bb|).
double scaled_change(const Eigen::VectorXd& now, const Eigen::VectorXd& before, int p, int blocks) {
  double worst = 0.0;
  for (int q = 0; q < blocks; ++q) {
    const Eigen::MatrixXd m = block(now, p, q);
    const Eigen::MatrixXd o = block(before, p, q);
    const double fallback = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) {
        double s = std::sqrt(std::fabs(m(a, a) * m(b, b)));
        if (!(s > 0.0)) s = fallback;
        worst = std::max(worst, std::fabs(m(a, b) - o(a, b)) / s);
      }
  }
  return worst;
}

struct Region {
  std::vector<double> center, half;
  Eigen::VectorXd value, error;
  int split_axis = 0;
  double key = 0.0;
};

// Degree 7 rule with an embedded degree 5 rule for the error estimate.
class GenzMalik {
 public:
  explicit GenzMalik(int d) : d_(d) {
    const double l2 = std::sqrt(9.0 / 70.0), l3 = std::sqrt(9.0 / 10.0), l4 = l3, l5 = std::sqrt(9.0 / 19.0);
    const double dd = d;
    add({}, (12824.0 - 9120.0 * dd + 400.0 * dd * dd) / 19683.0, (729.0 - 950.0 * dd + 50.0 * dd * dd) / 729.0);
    for (int i = 0; i < d; ++i)
      for (const double sg : {-1.0, 1.0}) {
        add({{i, sg * l2}}, 980.0 / 6561.0, 245.0 / 486.0);
        add({{i, sg * l3}}, (1820.0 - 400.0 * dd) / 19683.0, (265.0 - 100.0 * dd) / 1458.0);
      }
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (const double si : {-1.0, 1.0})
          for (const double sj : {-1.0, 1.0}) add({{i, si * l4}, {j, sj * l4}}, 200.0 / 19683.0, 25.0 / 729.0);
    const double w5 = 6859.0 / 19683.0 / std::ldexp(1.0, d);
    for (int mask = 0; mask < (1 << d); ++mask) {
      std::vector<std::pair<int, double>> off;
      for (int i = 0; i < d; ++i) off.push_back({i, (mask >> i) & 1 ? l5 : -l5});
      add(off, w5, 0.0);
    }
  }

  int points() const { return static_cast<int>(offsets_.size()); }

  // f(s, out) writes the integrand at s. inv_scale weights the entries when
  // choosing the split axis.
  template <class F>
  void apply(Region& r, F&& f, int size, const Eigen::VectorXd& inv_scale) const {
    double vol = 1.0;
    for (int j = 0; j < d_; ++j) vol *= 2.0 * r.half[j];
    Eigen::VectorXd hi = Eigen::VectorXd::Zero(size), lo = Eigen::VectorXd::Zero(size), fx(size);
    std::vector<Eigen::VectorXd> axis(offsets_.size());
    std::vector<double> s(d_);
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
      s = r.center;
      for (const auto& [j, t] : offsets_[k]) s[j] += t * r.half[j];
      f(s, fx.data());
      hi += w7_[k] * fx;
      lo += w5_[k] * fx;
      if (offsets_[k].size() <= 1) axis[k] = fx;
    }
    r.value = vol * hi;
    r.error = vol * (hi - lo).cwiseAbs();
    // Fourth differences along each axis: points 1 + 4j .. 4 + 4j are
    // -l2, -l3, +l2, +l3 on axis j.
    double worst = -1.0;
    for (int j = 0; j < d_; ++j) {
      const Eigen::VectorXd& c = axis[0];
      const Eigen::VectorXd diff = (axis[1 + 4 * j] + axis[3 + 4 * j] - 2.0 * c) -
                                   (axis[2 + 4 * j] + axis[4 + 4 * j] - 2.0 * c) / 7.0;
      const double rough = diff.cwiseAbs().cwiseProduct(inv_scale).sum();
      if (rough > worst) {
        worst = rough;
        r.split_axis = j;
      }
    }
  }

 private:
  void add(std::vector<std::pair<int, double>> off, double w7, double w5) {
    offsets_.push_back(std::move(off));
    w7_.push_back(w7);
    w5_.push_back(w5);
  }

  int d_;
  std::vector<std::vector<std::pair<int, double>>> offsets_;
  std::vector<double> w7_, w5_;
};

Eigen::VectorXd integrate(const RVineSpec& spec, bool sequential, const IntegrationOptions& opts,
                          IntegrationReport* report) {
  const VineModel model(spec);
  const int d = model.dim();
  PointMoments pm(model, sequential);
  const int p = pm.p();
  const int blocks = sequential ? 3 : 1;
  IntegrationReport rep;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(pm.size());
  if (p == 0) {
    if (report) *report = rep;
    return total;
  }
  Eigen::VectorXd point(pm.size());
  std::vector<double> w(d);

  if (opts.monte_carlo || d > 4) {
    rep.monte_carlo = true;
    std::mt19937_64 rng(opts.seed);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(pm.size());
    for (long s = 0; s < opts.mc_samples; ++s) {
      for (int j = 0; j < d; ++j) w[j] = uniform_from_bits(rng());
      pm.from_w(w, point.data());
      total += point;
      sq += point.cwiseProduct(point);
    }
    const double n = static_cast<double>(opts.mc_samples);
    total /= n;
    const Eigen::VectorXd se = ((sq / n - total.cwiseProduct(total)).cwiseMax(0.0) / n).cwiseSqrt();
    rep.points = opts.mc_samples;
    rep.error = scaled_change(total + se, total, p, blocks);
    if (report) *report = rep;
    return total;
  }

  // Adaptive Genz-Malik cubature in logistic coordinates w = 1 / (1 + exp(-s))
  // on the box [-kHalfWidth, kHalfWidth]^d. The region with the largest
  // scaled error estimate is bisected along its roughest axis.
  const GenzMalik rule(d);
  const int size = pm.size();
  std::vector<Region> regions;
  Eigen::VectorXd inv_scale = Eigen::VectorXd::Ones(size);
  Eigen::VectorXd estimate = Eigen::VectorXd::Zero(size), error = Eigen::VectorXd::Zero(size);
  auto evaluate = [&](Region& r) {
    rule.apply(r, [&](const std::vector<double>& s, double* out) {
      double weight = 1.0;
      for (int j = 0; j < d; ++j) {
        const double e = std::exp(-std::fabs(s[j]));
        const double small = e / (1.0 + e);
        w[j] = s[j] < 0.0 ? small : 1.0 / (1.0 + e);
        weight *= small * (1.0 - small);
      }
      pm.from_w(w, out);
      for (int q = 0; q < size; ++q) out[q] *= weight;
    }, size, inv_scale);
    rep.points += rule.points();
    estimate += r.value;
    error += r.error;
  };
  // Start from a coarse split so that the first estimates see the bulk.
  constexpr double kHalfWidth = 20.0;
  constexpr int kStart = 4;
  const double side = 2.0 * kHalfWidth / kStart;
  std::vector<int> idx(d, 0);
  for (;;) {
    Region r;
    r.center.resize(d);
    r.half.assign(d, side / 2.0);
    for (int j = 0; j < d; ++j) r.center[j] = -kHalfWidth + side * (idx[j] + 0.5);
    evaluate(r);
    regions.push_back(std::move(r));
    int j = 0;
    while (j < d && ++idx[j] == kStart) idx[j++] = 0;
    if (j == d) break;
  }
  Eigen::VectorXd scale(size);
  auto rescale = [&] {
    for (int q = 0; q < blocks; ++q) {
      const double fallback = std::max(block(estimate, p, q).cwiseAbs().maxCoeff(), 1e-300);
      for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
          double s = std::sqrt(std::fabs(estimate(q * p * p + a * p + a) * estimate(q * p * p + b * p + b)));
          scale(q * p * p + a * p + b) = s > 0.0 ? s : fallback;
        }
    }
    inv_scale = scale.cwiseInverse();
  };
  auto key = [&](const Region& r) { return r.error.cwiseQuotient(scale).maxCoeff(); };
  auto order = [&](std::size_t a, std::size_t b) { return regions[a].key < regions[b].key; };
  std::vector<std::size_t> heap;
  auto rebuild = [&] {
    rescale();
    heap.clear();
    for (std::size_t i = 0; i < regions.size(); ++i) {
      regions[i].key = key(regions[i]);
      heap.push_back(i);
    }
    std::make_heap(heap.begin(), heap.end(), order);
  };
  rebuild();
  long next_rebuild = 2 * rep.points;
  for (;;) {
    rep.error = error.cwiseQuotient(scale).maxCoeff();
    if (rep.error <= opts.tol) {
      rep.regions = static_cast<int>(regions.size());
      if (report) *report = rep;
      return estimate;
    }
    if (rep.points + 2 * rule.points() > opts.max_points) break;
    std::pop_heap(heap.begin(), heap.end(), order);
    const std::size_t i = heap.back();
    heap.pop_back();
    Region lower = std::move(regions[i]);
    estimate -= lower.value;
    error -= lower.error;
    const int axis = lower.split_axis;
    lower.half[axis] /= 2.0;
    Region upper = lower;
    lower.center[axis] -= lower.half[axis];
    upper.center[axis] += upper.half[axis];
    evaluate(lower);
    evaluate(upper);
    lower.key = key(lower);
    upper.key = key(upper);
    regions[i] = std::move(lower);
    heap.push_back(i);
    std::push_heap(heap.begin(), heap.end(), order);
    regions.push_back(std::move(upper));
    heap.push_back(regions.size() - 1);
    std::push_heap(heap.begin(), heap.end(), order);
    if (rep.points >= next_rebuild) {
      rebuild();
      next_rebuild = 2 * rep.points;
    }
  }
  rep.regions = static_cast<int>(regions.size());
  if (report) *report = rep;
  std::ostringstream msg;
  msg << "expected information did not reach relative tolerance " << opts.tol << " within " << opts.max_points
      << " points (estimated error " << rep.error << ")";
  throw IntegrationError(msg.str());
}

SeqCovariance assemble(const Eigen::VectorXd& v, int p) {
  SeqCovariance out;
  out.K = block(v, p, 1);
  out.K = 0.5 * (out.K + out.K.transpose());
  out.J = block(v, p, 2);
  if (p == 0) {
    out.V = out.K;
    return out;
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(out.J);
  if (!lu.isInvertible()) throw SingularityError("sequential J matrix is singular");
  const Eigen::MatrixXd Ji = lu.inverse();
  out.V = Ji * out.K * Ji.transpose();
  out.V = 0.5 * (out.V + out.V.transpose());
  return out;
}

AsymptoticSE se_from(const RVineSpec& spec, const Eigen::MatrixXd& cov) {
  AsymptoticSE out;
  out.slots = parameter_slots(spec);
  out.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  out.matrix = se_layout(spec, out.slots, out.se);
  return out;
}

}  // namespace

Eigen::MatrixXd fisher_information(const RVineSpec& spec, const IntegrationOptions& opts, IntegrationReport* report) {
  const int p = static_cast<int>(parameter_slots(spec).size());
  const Eigen::MatrixXd I = block(integrate(spec, false, opts, report), p, 0);
  return 0.5 * (I + I.transpose());
}

AsymptoticSE asymptotic_se_mle(const RVineSpec& spec, const IntegrationOptions& opts, IntegrationReport* report) {
  return se_from(spec, inverse_pd(fisher_information(spec, opts, report), "expected information"));
}

SeqCovariance sequential_covariance(const RVineSpec& spec, const IntegrationOptions& opts, IntegrationReport* report) {
  const int p = static_cast<int>(parameter_slots(spec).size());
  return assemble(integrate(spec, true, opts, report), p);
}

SeqCovariance sequential_covariance(const RVineSpec& spec, const CopulaDataset& data) {
  const VineModel model(spec);
  if (data.n() > 0 && data.d() != model.dim()) throw DimensionError("data and spec dimensions differ");
  if (data.n() == 0) throw DomainError("no observations");
  PointMoments pm(model, true);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(pm.size()), point(pm.size());
  for (int r = 0; r < data.n(); ++r) {
    pm.from_row(data.row(r), point.data());
    sum += point;
  }
  return assemble(sum / static_cast<double>(data.n()), pm.p());
}

AsymptoticSE asymptotic_se_sequential(const RVineSpec& spec, const IntegrationOptions& opts, IntegrationReport* report) {
  return se_from(spec, sequential_covariance(spec, opts, report).V);
}

ExpectedMoments expected_moments(const RVineSpec& spec, const IntegrationOptions& opts, IntegrationReport* report) {
  const int p = static_cast<int>(parameter_slots(spec).size());
  const Eigen::VectorXd v = integrate(spec, true, opts, report);
  ExpectedMoments out;
  const Eigen::MatrixXd I = block(v, p, 0);
  out.information = 0.5 * (I + I.transpose());
  out.sequential = assemble(v, p);
  out.se_mle = se_from(spec, inverse_pd(out.information, "expected information"));
  out.se_sequential = se_from(spec, out.sequential.V);
  return out;
}

GaussianKJ gaussian_analytic_KJ(double r12, double r23, double r13_2) {
  for (const double r : {r12, r23, r13_2})
    if (!(std::fabs(r) < 1.0)) throw DomainError("correlations must lie in (-1, 1)");
  const double a2 = 1.0 - r12 * r12, b2 = 1.0 - r23 * r23, c2 = 1.0 - r13_2 * r13_2;
  const double r13 = r13_2 * std::sqrt(a2 * b2) + r12 * r23;
  if (!(std::fabs(r13) < 1.0)) throw DomainError("reconstructed rho13 outside (-1, 1)");
  const double e = r13 - r12 * r23;
  const double k12 = e * (1.0 + 2.0 * r12 * r23 * e / (a2 * b2));
  GaussianKJ out;
  out.K.setZero();
  out.J.setZero();
  out.K(0, 0) = out.J(0, 0) = (1.0 + r12 * r12) / (a2 * a2);
  out.K(1, 1) = out.J(1, 1) = (1.0 + r23 * r23) / (b2 * b2);
  out.K(2, 2) = out.J(2, 2) = (1.0 + r13_2 * r13_2) / (c2 * c2);
  out.K(0, 1) = out.K(1, 0) = k12 / (a2 * b2);
  out.J(2, 0) = r13_2 * r12 / (a2 * c2);
  out.J(2, 1) = r13_2 * r23 / (b2 * c2);
  return out;
}

}  // namespace rvine
