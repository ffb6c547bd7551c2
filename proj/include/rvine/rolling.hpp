#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "rvine/inference.hpp"

namespace rvine {

struct RollingConfig {
  int window = 0;
  int step = 1;
  double band_multiplier = 2.0;
  // Start each window from the previous window's estimates; otherwise from the
  // full-sample sequential estimates.
  bool warm_start = true;
  // Cold-started windows are independent and can be fitted on several threads.
  // Ignored with warm starts. Results do not depend on it.
  int threads = 1;
  FitOptions fit;
};

struct WindowFit {
  int end_index = 0;  // 1-based row of the last observation in the window
  std::string end_label;
  Eigen::VectorXd estimate;
  Eigen::VectorXd se;  // NaN when the observed information is singular or the fit failed
  double loglik = 0.0;
  bool converged = false;
  bool boundary_warning = false;
  std::string error;  // non-empty when the window could not be fitted at all
};

struct RollingResult {
  RVineSpec spec;
  std::vector<ParamIndex> slots;
  Eigen::VectorXd full_sample;  // ML estimate on all rows
  std::vector<WindowFit> windows;
};

// floor((n - window) / step) + 1
int window_count(int n, int window, int step);

RollingResult rolling_fit(const RVineSpec& spec, const CopulaDataset& data, const RollingConfig& cfg);

struct BandRow {
  int end_index = 0;
  std::string end_label;
  int tree = 0;
  std::string edge;
  std::string family;
  ParamIndex slot;
  double estimate = 0.0, se = 0.0, lower = 0.0, upper = 0.0, full_sample_mle = 0.0;
  bool converged = false;
  bool boundary_warning = false;
};

// One row per (window, slot): estimate -/+ band_multiplier * se.
std::vector<BandRow> band_table(const RollingResult& result, double band_multiplier);

// Comma separated, with header; numbers to 17 significant digits.
void write_band_table(std::ostream& out, const std::vector<BandRow>& rows);

}  // namespace rvine
