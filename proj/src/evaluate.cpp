#include "rvine/evaluate.hpp"

#include <random>

#include "rvine/errors.hpp"

namespace rvine {

CopulaDataset CopulaDataset::slice(int first, int count) const {
  CopulaDataset out;
  out.labels = labels;
  out.u = u.middleRows(first, count);
  if (static_cast<int>(row_labels.size()) == n())
    out.row_labels.assign(row_labels.begin() + first, row_labels.begin() + first + count);
  return out;
}

VineModel::VineModel(const RVineSpec& spec) : spec_(normalize(spec)) {
  validate_spec(spec_);
  const int d = dim();
  mtil_ = max_matrix(spec_.structure);
  arg_col_ = TriMatrix<int>(d, 0);
  arg_direct_ = TriMatrix<unsigned char>(d, 0);
  for (int i = 1; i < d; ++i)
    for (int k = i + 1; k <= d; ++k) {
      arg_col_(k, i) = d - mtil_(k, i) + 1;
      arg_direct_(k, i) = mtil_(k, i) == spec_.structure(k, i) ? 1 : 0;
    }
}

void VineModel::set_params(int k, int i, const BicopParams& p) {
  check_domain(spec_.families(k, i), p);
  spec_.params(k, i) = p;
}

void VineModel::to_variables(std::span<const double> data_row, std::span<double> u) const {
  const int d = dim();
  if (static_cast<int>(data_row.size()) != d) throw DimensionError("observation has the wrong number of columns");
  for (int v = 1; v <= d; ++v) u[v - 1] = clamp_unit(data_row[spec_.variable_column[v - 1]]);
}

double loglik_obs(const VineModel& model, std::span<const double> data_row, EvalWorkspace& ws) {
  const int d = model.dim();
  if (ws.vdirect.dim() != d) ws = EvalWorkspace(d);
  double u[64];
  std::vector<double> big;
  double* up = u;
  if (d > 64) {
    big.resize(d);
    up = big.data();
  }
  model.to_variables(data_row, {up, static_cast<std::size_t>(d)});
  // Row d holds (u_d, ..., u_1).
  for (int i = 1; i <= d; ++i) ws.vdirect(d, i) = up[d - i];
  double ll = 0.0;
  for (int i = d - 1; i >= 1; --i) {
    for (int k = d; k >= i + 1; --k) {
      const double z1 = ws.vdirect(k, i);
      const int c = model.arg_col(k, i);
      const double z2 = model.arg_direct(k, i) ? ws.vdirect(k, c) : ws.vindirect(k, c);
      const PairValues pv = evaluate_pair(model.family(k, i), model.params(k, i), z1, z2);
      ws.vvalues(k, i) = pv.log_pdf;
      ll += pv.log_pdf;
      ws.vdirect(k - 1, i) = pv.h;
      ws.vindirect(k - 1, i) = pv.h_reverse;
    }
  }
  return ll;
}

double loglik_obs(const RVineSpec& spec, std::span<const double> data_row) {
  const VineModel model(spec);
  EvalWorkspace ws(model.dim());
  return loglik_obs(model, data_row, ws);
}

double loglik_dataset(const VineModel& model, const CopulaDataset& data) {
  if (data.n() > 0 && data.d() != model.dim()) throw DimensionError("data and spec dimensions differ");
  EvalWorkspace ws(model.dim());
  double total = 0.0;
  for (int r = 0; r < data.n(); ++r) {
    try {
      total += loglik_obs(model, data.row(r), ws);
    } catch (const EvalError& e) {
      throw EvalError("row " + std::to_string(r + 1) + ": " + e.what());
    }
  }
  return total;
}

double loglik_dataset(const RVineSpec& spec, const CopulaDataset& data) {
  return loglik_dataset(VineModel(spec), data);
}

void inverse_rosenblatt(const VineModel& model, std::span<const double> w, std::span<double> data_row,
                        EvalWorkspace& ws) {
  const int d = model.dim();
  if (ws.vdirect.dim() != d) ws = EvalWorkspace(d);
  // Column i generates variable m(i,i) = d - i + 1 from w[d - i], conditional on
  // the variables of columns i+1..d, whose workspace columns are complete.
  for (int i = d; i >= 1; --i) {
    ws.vdirect(i, i) = w[d - i];
    for (int k = i + 1; k <= d; ++k) {
      const int c = model.arg_col(k, i);
      const double z2 = model.arg_direct(k, i) ? ws.vdirect(k, c) : ws.vindirect(k, c);
      ws.vdirect(k, i) = h_inverse(model.family(k, i), model.params(k, i), ws.vdirect(k - 1, i), z2);
    }
    for (int k = d; k >= i + 1; --k) {
      const int c = model.arg_col(k, i);
      const double z2 = model.arg_direct(k, i) ? ws.vdirect(k, c) : ws.vindirect(k, c);
      const PairValues pv = evaluate_pair(model.family(k, i), model.params(k, i), ws.vdirect(k, i), z2);
      ws.vvalues(k, i) = pv.log_pdf;
      ws.vindirect(k - 1, i) = pv.h_reverse;
    }
  }
  const auto& col = model.spec().variable_column;
  for (int i = 1; i <= d; ++i) data_row[col[d - i]] = ws.vdirect(d, i);
}

CopulaDataset simulate(const RVineSpec& spec, int n, std::uint64_t seed) {
  const VineModel model(spec);
  const int d = model.dim();
  CopulaDataset out;
  out.labels = spec.labels;
  out.u.resize(n, d);
  std::mt19937_64 rng(seed);
  EvalWorkspace ws(d);
  std::vector<double> w(d);
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < d; ++j) w[j] = uniform_from_bits(rng());
    inverse_rosenblatt(model, w, {out.u.data() + static_cast<std::ptrdiff_t>(r) * d, static_cast<std::size_t>(d)},
                       ws);
  }
  return out;
}

}  // namespace rvine
