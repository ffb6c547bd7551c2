#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "rvine/deriv.hpp"
#include "rvine/errors.hpp"
#include "rvine/inference.hpp"
#include "rvine/io.hpp"
#include "rvine/report.hpp"
#include "rvine/rolling.hpp"

using namespace rvine;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kParse = 2, kConvergence = 3, kDomain = 4, kIntegration = 5 };

struct DataFlags {
  bool rank = false;
  bool row_labels = false;
};

void add_data_flags(CLI::App* app, DataFlags& f) {
  app->add_flag("--rank", f.rank, "Rank-transform each column to (0,1) (average ranks for ties)");
  app->add_flag("--row-labels", f.row_labels, "First column holds row labels (e.g. dates)");
}

CopulaDataset load_data(const std::string& path, const DataFlags& f) {
  IngestOptions o;
  o.mode = f.rank ? IngestMode::RankTransform : IngestMode::AlreadyUniform;
  o.row_labels = f.row_labels;
  IngestReport rep;
  CopulaDataset d = read_data_file(path, o, &rep);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  return d;
}

// Writes to the file, or to stdout when the path is empty.
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  write(out);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << fmt17(m(i, j));
    out << '\n';
  }
}

void write_tri(std::ostream& out, const TriMatrix<double>& m, int d, bool human) {
  for (int i = 1; i <= d; ++i) {
    for (int j = 1; j <= d; ++j) {
      const double x = m(i, j);
      out << (j > 1 ? " " : "") << (std::isnan(x) ? std::string("NA") : human ? fmt4(x) : fmt17(x));
    }
    out << '\n';
  }
}

// Analytic derivatives against central differences, per observation.
struct CheckLine {
  std::string what;
  double max_rel = 0.0;
};

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-3); }

double value_at(const RVineSpec& spec, const ParamIndex& s) {
  const BicopParams& p = spec.params(s.row, s.col);
  return s.slot == 1 ? p.theta : p.nu;
}

VineModel shifted(const VineModel& m, const ParamIndex& s, double t) {
  VineModel out = m;
  BicopParams p = out.params(s.row, s.col);
  (s.slot == 1 ? p.theta : p.nu) += t;
  out.set_params(s.row, s.col, p);
  return out;
}

Eigen::VectorXd obs_score(const VineModel& m, const DerivPlan& plan, std::span<const double> row) {
  EvalWorkspace ws(m.dim());
  loglik_obs(m, row, ws);
  PairDerivCache cache;
  compute_pair_derivs(m, ws, 1, cache);
  ScoreWorkspace sws(m.dim());
  Eigen::VectorXd g(plan.size());
  for (int a = 0; a < plan.size(); ++a) g(a) = score_coord(m, plan, cache, a, sws);
  return g;
}

Eigen::MatrixXd obs_hessian(const VineModel& m, const DerivPlan& plan, std::span<const double> row) {
  const int d = m.dim(), p = plan.size();
  EvalWorkspace ws(d);
  loglik_obs(m, row, ws);
  PairDerivCache cache;
  compute_pair_derivs(m, ws, 2, cache);
  std::vector<ScoreWorkspace> sws(p, ScoreWorkspace(d));
  for (int a = 0; a < p; ++a) score_coord(m, plan, cache, a, sws[a]);
  HessWorkspace hws(d);
  Eigen::MatrixXd h(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) h(a, b) = hessian_coord(m, plan, cache, sws[a], sws[b], a, b, hws);
  return h;
}

std::string slot_name(const RVineSpec& spec, const ParamIndex& s) {
  return edge_label(spec, s.row, s.col) + (s.slot == 2 ? " df" : " par");
}

int run_check(const std::string& spec_path, const std::string& data_path, const DataFlags& df, const std::string& what,
              int rows) {
  const RVineSpec spec = read_spec_file(spec_path);
  const CopulaDataset data = load_data(data_path, df);
  const VineModel model(spec);
  if (data.d() != model.dim()) throw DimensionError("data has " + std::to_string(data.d()) + " columns, spec " + std::to_string(model.dim()));
  const DerivPlan plan(model);
  const auto slots = parameter_slots(model.spec());
  const int p = plan.size();
  const int n = std::min(rows, data.n());
  const bool hessian = what == "hessian";
  const double tol = hessian ? 1e-4 : 1e-5;
  std::vector<CheckLine> lines;
  double asym = 0.0;
  if (!hessian) {
    for (int a = 0; a < p; ++a) {
      const double h = 1e-6 * std::max(1.0, std::fabs(value_at(model.spec(), slots[a])));
      const VineModel up = shifted(model, slots[a], h), down = shifted(model, slots[a], -h);
      EvalWorkspace ws(model.dim());
      CheckLine line{slot_name(model.spec(), slots[a])};
      for (int r = 0; r < n; ++r) {
        const double fd = (loglik_obs(up, data.row(r), ws) - loglik_obs(down, data.row(r), ws)) / (2 * h);
        line.max_rel = std::max(line.max_rel, rel(obs_score(model, plan, data.row(r))(a), fd));
      }
      lines.push_back(line);
    }
  } else {
    std::vector<Eigen::MatrixXd> fd(n, Eigen::MatrixXd(p, p)), an(n);
    for (int r = 0; r < n; ++r) an[r] = obs_hessian(model, plan, data.row(r));
    for (int b = 0; b < p; ++b) {
      const double h = 2e-6 * std::max(1.0, std::fabs(value_at(model.spec(), slots[b])));
      const VineModel up = shifted(model, slots[b], h), down = shifted(model, slots[b], -h);
      for (int r = 0; r < n; ++r) fd[r].col(b) = (obs_score(up, plan, data.row(r)) - obs_score(down, plan, data.row(r))) / (2 * h);
    }
    for (int a = 0; a < p; ++a)
      for (int b = 0; b <= a; ++b) {
        CheckLine line{slot_name(model.spec(), slots[a]) + " / " + slot_name(model.spec(), slots[b])};
        for (int r = 0; r < n; ++r) {
          line.max_rel = std::max({line.max_rel, rel(an[r](a, b), fd[r](a, b)), rel(an[r](b, a), fd[r](b, a))});
          asym = std::max(asym, std::fabs(an[r](a, b) - an[r](b, a)) / std::max(1.0, std::fabs(an[r](a, b))));
        }
        lines.push_back(line);
      }
  }
  bool ok = true;
  for (const CheckLine& l : lines) {
    std::cout << l.what << "  max rel error " << fmt4(l.max_rel) << '\n';
    ok = ok && l.max_rel <= tol;
  }
  if (hessian) {
    std::cout << "max asymmetry " << fmt4(asym) << '\n';
    ok = ok && asym <= 1e-10;
  }
  std::cout << (ok ? "PASS" : "FAIL") << ' ' << what << " check, " << p << " slots, " << n << " rows, tolerance " << fmt4(tol)
            << '\n';
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regular vine copulas: fitting, standard errors, expected information, rolling windows"};
  app.require_subcommand(1);

  std::string spec_path, data_path, out_path, method = "ml", what = "gradient";
  DataFlags df;
  FitOptions fo;
  bool fd_gradient = false;
  IntegrationOptions io;
  bool sequential_se = true;
  RollingConfig rc;
  bool cold = false;
  int n_sim = 1000, check_rows = 20;
  std::uint64_t seed = 1;

  auto* fit = app.add_subcommand("fit", "Fit the parameters of a spec to data");
  fit->add_option("spec", spec_path, "Spec file")->required();
  fit->add_option("data", data_path, "Data file")->required();
  fit->add_option("--method", method, "ml or seq")->check(CLI::IsMember({"ml", "seq"}));
  fit->add_option("--out", out_path, "Result file (default: stdout)");
  fit->add_option("--maxiter", fo.maxiter);
  fit->add_option("--gtol", fo.gtol);
  fit->add_flag("--fd-gradient", fd_gradient, "Finite-difference gradients instead of the analytic score");
  add_data_flags(fit, df);

  auto* check = app.add_subcommand("check", "Compare analytic derivatives with finite differences");
  check->add_option("spec", spec_path)->required();
  check->add_option("data", data_path)->required();
  check->add_option("--what", what)->check(CLI::IsMember({"gradient", "hessian"}));
  check->add_option("--rows", check_rows, "Observations to check");
  add_data_flags(check, df);

  auto* fisher = app.add_subcommand("fisher", "Expected information and asymptotic standard errors");
  fisher->add_option("spec", spec_path)->required();
  fisher->add_option("--tol", io.tol);
  fisher->add_option("--max-points", io.max_points);
  fisher->add_flag("--monte-carlo", io.monte_carlo);
  fisher->add_option("--samples", io.mc_samples);
  fisher->add_option("--seed", io.seed);
  fisher->add_flag("!--no-seq", sequential_se, "Skip the sequential-estimator standard errors");
  fisher->add_option("--out", out_path);

  auto* rolling = app.add_subcommand("rolling", "Rolling-window ML fits with standard-error bands");
  rolling->add_option("spec", spec_path)->required();
  rolling->add_option("data", data_path)->required();
  rolling->add_option("--window", rc.window)->required()->check(CLI::PositiveNumber);
  rolling->add_option("--step", rc.step)->check(CLI::PositiveNumber);
  rolling->add_option("--band", rc.band_multiplier, "Band half-width in standard errors");
  rolling->add_flag("--cold", cold, "Start every window from the full-sample sequential estimates");
  rolling->add_option("--threads", rc.threads, "Threads for --cold")->check(CLI::PositiveNumber);
  rolling->add_option("--out", out_path);
  add_data_flags(rolling, df);

  auto* sim = app.add_subcommand("simulate", "Draw copula data from a spec");
  sim->add_option("spec", spec_path)->required();
  sim->add_option("--n", n_sim)->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed);
  sim->add_option("--out", out_path);

  auto* ing = app.add_subcommand("ingest", "Read a data table and write it on the copula scale");
  ing->add_option("data", data_path)->required();
  ing->add_option("--out", out_path);
  add_data_flags(ing, df);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (fit->parsed()) {
      const RVineSpec spec = read_spec_file(spec_path);
      const CopulaDataset data = load_data(data_path, df);
      fo.gradient = fd_gradient ? GradientMode::FiniteDifference : GradientMode::Analytic;
      const FitResult r = method == "ml" ? fit_mle(spec, data, fo) : fit_sequential(spec, data, fo);
      if (!out_path.empty()) print_fit_summary(std::cout, r);
      emit(out_path, [&](std::ostream& o) { write_fit_result(o, r, data.n()); });
      for (const BoundaryWarning& w : r.warnings)
        std::cerr << "warning: " << slot_name(r.spec, w.slot) << " at bound " << fmt4(w.bound) << '\n';
      return kOk;
    }
    if (check->parsed()) return run_check(spec_path, data_path, df, what, check_rows);
    if (fisher->parsed()) {
      const RVineSpec spec = read_spec_file(spec_path);
      const int d = spec.dim();
      if (d > 4 && !io.monte_carlo) throw DomainError("deterministic integration supports d <= 4; pass --monte-carlo (and --seed)");
      IntegrationReport rep;
      Eigen::MatrixXd I;
      AsymptoticSE ml;
      std::optional<AsymptoticSE> seq;
      if (sequential_se) {
        const ExpectedMoments em = expected_moments(spec, io, &rep);
        I = em.information;
        ml = em.se_mle;
        seq = em.se_sequential;
      } else {
        I = fisher_information(spec, io, &rep);
        ml.slots = parameter_slots(spec);
        ml.se = inverse_pd(I, "expected information").diagonal().cwiseSqrt();
        ml.matrix = se_layout(spec, ml.slots, ml.se);
      }
      std::cout << (rep.monte_carlo ? "Monte Carlo" : "adaptive cubature") << ", " << rep.points
                << " points, scaled error " << fmt4(rep.error) << '\n';
      std::cout << "information\n";
      for (Eigen::Index i = 0; i < I.rows(); ++i) {
        for (Eigen::Index j = 0; j < I.cols(); ++j) std::cout << (j ? " " : "") << fmt4(I(i, j));
        std::cout << '\n';
      }
      std::cout << "ASE ML\n";
      write_tri(std::cout, ml.matrix, d, true);
      if (seq) {
        std::cout << "ASE sequential\n";
        write_tri(std::cout, seq->matrix, d, true);
      }
      if (!out_path.empty())
        emit(out_path, [&](std::ostream& o) {
          o << "INFORMATION\n";
          write_matrix(o, I);
          o << "ASE_ML\n";
          write_tri(o, ml.matrix, d, false);
          if (seq) {
            o << "ASE_SEQ\n";
            write_tri(o, seq->matrix, d, false);
          }
        });
      return kOk;
    }
    if (rolling->parsed()) {
      const RVineSpec spec = read_spec_file(spec_path);
      const CopulaDataset data = load_data(data_path, df);
      rc.warm_start = !cold;
      const RollingResult r = rolling_fit(spec, data, rc);
      int flagged = 0;
      for (const WindowFit& w : r.windows) flagged += !w.converged || !w.error.empty();
      std::cerr << r.windows.size() << " windows, " << flagged << " not converged\n";
      emit(out_path, [&](std::ostream& o) { write_band_table(o, band_table(r, rc.band_multiplier)); });
      return kOk;
    }
    if (sim->parsed()) {
      const CopulaDataset data = simulate(read_spec_file(spec_path), n_sim, seed);
      emit(out_path, [&](std::ostream& o) { write_data(o, data); });
      return kOk;
    }
    if (ing->parsed()) {
      const CopulaDataset data = load_data(data_path, df);
      emit(out_path, [&](std::ostream& o) { write_data(o, data); });
      return kOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConvergence;
  } catch (const IntegrationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIntegration;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomain;
  }
  return kOk;
}
