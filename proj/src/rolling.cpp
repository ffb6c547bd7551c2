#include "rvine/rolling.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <tuple>
#include <ostream>

#include "rvine/errors.hpp"
#include "rvine/io.hpp"

namespace rvine {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

int window_count(int n, int window, int step) {
  if (window < 1 || step < 1) throw DomainError("window and step must be positive");
  if (window > n) throw DomainError("window " + std::to_string(window) + " exceeds the " + std::to_string(n) + " observations");
  return (n - window) / step + 1;
}

RollingResult rolling_fit(const RVineSpec& spec, const CopulaDataset& data, const RollingConfig& cfg) {
  const int count = window_count(data.n(), cfg.window, cfg.step);
  RollingResult out;
  out.spec = spec;
  out.slots = parameter_slots(spec);

  FitOptions quiet = cfg.fit;
  quiet.covariance = false;
  quiet.require_convergence = false;
  const FitResult seq = fit_sequential(spec, data, quiet);
  quiet.start = StartMode::Spec;
  out.full_sample = fit_mle(seq.spec, data, quiet).estimate;

  FitOptions wo = cfg.fit;
  wo.start = StartMode::Spec;
  wo.require_convergence = false;
  wo.covariance = true;
  const auto fit_window = [&](int w, const RVineSpec& from) {
    const int first = w * cfg.step;
    WindowFit wf;
    wf.end_index = first + cfg.window;
    if (static_cast<int>(data.row_labels.size()) == data.n()) wf.end_label = data.row_labels[wf.end_index - 1];
    try {
      const FitResult r = fit_mle(from, data.slice(first, cfg.window), wo);
      wf.estimate = r.estimate;
      wf.se = r.se;
      wf.loglik = r.loglik;
      wf.converged = r.converged;
      wf.boundary_warning = !r.warnings.empty();
      return std::pair{wf, r.spec};
    } catch (const Error& e) {
      wf.error = e.what();
      wf.estimate = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(out.slots.size()), std::nan(""));
      wf.se = wf.estimate;
      wf.loglik = std::nan("");
      return std::pair{wf, from};
    }
  };

  out.windows.resize(count);
  if (cfg.warm_start) {
    RVineSpec start = seq.spec;
    for (int w = 0; w < count; ++w) std::tie(out.windows[w], start) = fit_window(w, start);
  } else {
    // Threads take interleaved windows; each writes only its own slots.
    const int nt = std::clamp(cfg.threads, 1, count);
    const auto run = [&](int t) {
      for (int w = t; w < count; w += nt) out.windows[w] = fit_window(w, seq.spec).first;
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(run, t);
    run(0);
    for (std::thread& th : pool) th.join();
  }
  int failures = 0;
  for (const WindowFit& w : out.windows) failures += !w.error.empty();
  if (failures == count) throw ConvergenceError("rolling fit: no window could be fitted (" + out.windows.front().error + ")");
  return out;
}

std::vector<BandRow> band_table(const RollingResult& result, double band_multiplier) {
  std::vector<BandRow> rows;
  const int d = result.spec.dim();
  for (const WindowFit& w : result.windows)
    for (std::size_t a = 0; a < result.slots.size(); ++a) {
      const ParamIndex& s = result.slots[a];
      BandRow b;
      b.end_index = w.end_index;
      b.end_label = w.end_label;
      b.tree = tree_of_row(d, s.row);
      b.edge = edge_label(result.spec, s.row, s.col);
      b.family = family_name(result.spec.families(s.row, s.col));
      b.slot = s;
      b.estimate = w.estimate(a);
      b.se = w.se(a);
      b.lower = b.estimate - band_multiplier * b.se;
      b.upper = b.estimate + band_multiplier * b.se;
      if (band_multiplier == 0.0) b.lower = b.upper = b.estimate;
      b.full_sample_mle = result.full_sample(a);
      b.converged = w.converged;
      b.boundary_warning = w.boundary_warning;
      rows.push_back(std::move(b));
    }
  return rows;
}

void write_band_table(std::ostream& out, const std::vector<BandRow>& rows) {
  out << "end_index,end_label,tree,edge,family,slot,estimate,se,lower,upper,full_sample_mle,converged,boundary_warning\n";
  for (const BandRow& b : rows)
    out << b.end_index << ',' << csv_field(b.end_label) << ',' << b.tree << ',' << csv_field(b.edge) << ',' << csv_field(b.family)
        << ',' << b.slot.slot << ',' << fmt17(b.estimate) << ',' << fmt17(b.se) << ',' << fmt17(b.lower) << ','
        << fmt17(b.upper) << ',' << fmt17(b.full_sample_mle) << ',' << (b.converged ? 1 : 0) << ','
        << (b.boundary_warning ? 1 : 0) << '\n';
}

}  // namespace rvine
