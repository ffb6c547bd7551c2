#pragma once

#include <Eigen/Core>
#include <vector>

#include "rvine/evaluate.hpp"
#include "rvine/structure.hpp"

namespace rvine {

// One scalar parameter: position (row, col) of the parameter matrix and slot
// (1 = theta, 2 = Student-t degrees of freedom).
struct ParamIndex {
  int row = 0;
  int col = 0;
  int slot = 1;
  bool operator==(const ParamIndex&) const = default;
};

// Parametric positions ordered by column from the lower right to the upper
// left (columns d-1..1, rows d..col+1 within a column); all first slots, then
// all second slots in the same order.
std::vector<ParamIndex> parameter_slots(const RVineSpec& spec);

double get_parameter(const RVineSpec& spec, const ParamIndex& p);
// No domain check; callers validate.
void set_parameter(RVineSpec& spec, const ParamIndex& p, double value);
Eigen::VectorXd get_parameters(const RVineSpec& spec, const std::vector<ParamIndex>& slots);
// Throws DomainError if any resulting pair copula is outside its domain.
void set_parameters(RVineSpec& spec, const std::vector<ParamIndex>& slots, const Eigen::VectorXd& x);
void set_parameters(VineModel& model, const std::vector<ParamIndex>& slots, const Eigen::VectorXd& x);

// Dependence structure of every slot, precomputed once per model.
class DerivPlan {
 public:
  explicit DerivPlan(const VineModel& model);

  int size() const { return static_cast<int>(slots_.size()); }
  const std::vector<ParamIndex>& slots() const { return slots_; }
  const ParamIndex& slot(int a) const { return slots_[a]; }
  int tree(int a) const { return tree_of_row(dim_, slots_[a].row); }
  // Dependence matrix of the slot's position.
  const DependenceMatrix& dependence(int a) const { return dep_[a]; }
  // Flagged positions in evaluation order (columns descending, rows descending).
  const std::vector<std::pair<int, int>>& flagged(int a) const { return flagged_[a]; }
  int index_of(const ParamIndex& p) const;

 private:
  int dim_ = 0;
  std::vector<ParamIndex> slots_;
  std::vector<DependenceMatrix> dep_;
  std::vector<std::vector<std::pair<int, int>>> flagged_;
};

// Pair-copula partials at every edge for one observation.
struct PairDerivCache {
  int order = 0;
  TriMatrix<DerivBundle> at;
};
void compute_pair_derivs(const VineModel& model, const EvalWorkspace& ws, int order, PairDerivCache& cache);

// First derivatives of the V-matrices with respect to one slot.
struct ScoreWorkspace {
  TriMatrix<double> s1direct;
  TriMatrix<double> s1indirect;
  TriMatrix<double> s1values;

  ScoreWorkspace() = default;
  explicit ScoreWorkspace(int d) : s1direct(d, 0.0), s1indirect(d, 0.0), s1values(d, 0.0) {}
};

// Second derivatives with respect to a pair of slots.
struct HessWorkspace {
  TriMatrix<double> s2direct;
  TriMatrix<double> s2indirect;
  TriMatrix<double> s2values;

  HessWorkspace() = default;
  explicit HessWorkspace(int d) : s2direct(d, 0.0), s2indirect(d, 0.0), s2values(d, 0.0) {}
};

// d/d(slot a) of the observation's log-likelihood. cache must hold at least
// first-order partials for the same observation.
double score_coord(const VineModel& model, const DerivPlan& plan, const PairDerivCache& cache, int a,
                   ScoreWorkspace& sws);
// Convenience form: evaluates everything for one observation.
double score_coord(const VineModel& model, std::span<const double> data_row, const ParamIndex& p,
                   ScoreWorkspace* sws = nullptr);

// d^2/(d slot a d slot b); sa and sb are the score workspaces of a and b on the
// same observation and cache holds second-order partials.
double hessian_coord(const VineModel& model, const DerivPlan& plan, const PairDerivCache& cache,
                     const ScoreWorkspace& sa, const ScoreWorkspace& sb, int a, int b, HessWorkspace& hws);

// Sum of the entries of a values matrix by tree (index t - 1).
std::vector<double> sum_by_tree(const TriMatrix<double>& values);

Eigen::VectorXd score(const VineModel& model, const CopulaDataset& data);
Eigen::VectorXd score(const RVineSpec& spec, const CopulaDataset& data);

// Per-observation scores, n x p.
Eigen::MatrixXd score_contributions(const VineModel& model, const CopulaDataset& data);

// Log-likelihood with its gradient and (order 2) Hessian, one pass over the data.
struct LoglikDerivs {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;  // empty unless order 2
  double max_asymmetry = 0.0;  // relative, before symmetrization
};
LoglikDerivs loglik_derivatives(const VineModel& model, const DerivPlan& plan, const CopulaDataset& data, int order);

// -sum of Hessians, symmetrized. max_asymmetry receives the largest relative
// difference between (a,b) and (b,a) before averaging.
Eigen::MatrixXd observed_information(const VineModel& model, const CopulaDataset& data,
                                     double* max_asymmetry = nullptr);
Eigen::MatrixXd observed_information(const RVineSpec& spec, const CopulaDataset& data,
                                     double* max_asymmetry = nullptr);

}  // namespace rvine
