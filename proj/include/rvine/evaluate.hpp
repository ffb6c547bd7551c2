#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rvine/structure.hpp"

namespace rvine {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Copula-scale observations, one row per observation, columns in data order.
struct CopulaDataset {
  std::vector<std::string> labels;
  RowMatrix u;
  std::vector<std::string> row_labels;  // optional, one per row

  int n() const { return static_cast<int>(u.rows()); }
  int d() const { return static_cast<int>(u.cols()); }
  std::span<const double> row(int r) const { return {u.data() + static_cast<std::ptrdiff_t>(r) * u.cols(), static_cast<std::size_t>(u.cols())}; }
  // Rows [first, first + count).
  CopulaDataset slice(int first, int count) const;
};

// Per-observation matrices of the likelihood recursion. vvalues holds log pair densities.
struct EvalWorkspace {
  TriMatrix<double> vdirect;
  TriMatrix<double> vindirect;
  TriMatrix<double> vvalues;

  EvalWorkspace() = default;
  explicit EvalWorkspace(int d) : vdirect(d), vindirect(d), vvalues(d) {}
};

// A validated, normalized spec with the argument routing of the recursion
// precomputed. Parameters can be changed in place; structure cannot.
class VineModel {
 public:
  explicit VineModel(const RVineSpec& spec);

  const RVineSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim(); }
  const MaxMatrix& mtil() const { return mtil_; }
  const FamilyTag& family(int k, int i) const { return spec_.families(k, i); }
  const BicopParams& params(int k, int i) const { return spec_.params(k, i); }
  void set_params(int k, int i, const BicopParams& p);

  // Column holding the second argument of the term at (k, i), and whether it is
  // read from vdirect (otherwise vindirect). The row is always k.
  int arg_col(int k, int i) const { return arg_col_(k, i); }
  bool arg_direct(int k, int i) const { return arg_direct_(k, i) != 0; }

  // Observation in data order -> u in normalized variable order (index v - 1).
  void to_variables(std::span<const double> data_row, std::span<double> u) const;

 private:
  RVineSpec spec_;
  MaxMatrix mtil_;
  TriMatrix<int> arg_col_;
  TriMatrix<unsigned char> arg_direct_;
};

// Log-likelihood of one observation (data order); fills ws.
double loglik_obs(const VineModel& model, std::span<const double> data_row, EvalWorkspace& ws);
double loglik_obs(const RVineSpec& spec, std::span<const double> data_row);

double loglik_dataset(const VineModel& model, const CopulaDataset& data);
double loglik_dataset(const RVineSpec& spec, const CopulaDataset& data);

// Inverse Rosenblatt transform: independent uniforms w to an observation in
// data order. w[v - 1] drives normalized variable v.
void inverse_rosenblatt(const VineModel& model, std::span<const double> w, std::span<double> data_row,
                        EvalWorkspace& ws);

// Uniform on (0,1) from a 64-bit draw; never returns 0.
inline double uniform_from_bits(std::uint64_t x) { return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53; }

CopulaDataset simulate(const RVineSpec& spec, int n, std::uint64_t seed);

}  // namespace rvine
