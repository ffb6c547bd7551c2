#include "rvine/report.hpp"

#include <cmath>
#include <ostream>

#include "rvine/io.hpp"

namespace rvine {

namespace {

const char* method_name(FitMethod m) { return m == FitMethod::ML ? "ml" : "seq"; }

std::string na17(double x) { return std::isnan(x) ? std::string("NA") : fmt17(x); }

bool warned(const FitResult& r, const ParamIndex& s) {
  for (const BoundaryWarning& w : r.warnings)
    if (w.slot == s) return true;
  return false;
}

}  // namespace

void write_fit_result(std::ostream& out, const FitResult& r, int n) {
  write_spec(out, r.spec);
  out << "RESULT\n";
  out << "method " << method_name(r.method) << '\n';
  out << "n " << n << '\n';
  out << "loglik " << fmt17(r.loglik) << '\n';
  out << "converged " << (r.converged ? 1 : 0) << '\n';
  out << "iterations " << r.iterations << '\n';
  out << "gradient_norm " << fmt17(r.gradient_norm) << '\n';
  out << "boundary_warnings " << r.warnings.size() << '\n';
  out << "ESTIMATES\n";
  out << "row,col,slot,tree,edge,family,estimate,se,boundary_warning\n";
  const int d = r.spec.dim();
  for (std::size_t a = 0; a < r.slots.size(); ++a) {
    const ParamIndex& s = r.slots[a];
    // Edge labels contain commas; keep them as one field.
    out << s.row << ',' << s.col << ',' << s.slot << ',' << tree_of_row(d, s.row) << ",\"" << edge_label(r.spec, s.row, s.col)
        << "\"," << family_name(r.spec.families(s.row, s.col)) << ',' << fmt17(r.estimate(a)) << ',' << na17(r.se(a)) << ','
        << (warned(r, s) ? 1 : 0) << '\n';
  }
  out << "SE\n";
  for (int i = 1; i <= d; ++i) {
    for (int j = 1; j <= d; ++j) out << (j > 1 ? " " : "") << na17(r.se_matrix(i, j));
    out << '\n';
  }
}

void print_fit_summary(std::ostream& out, const FitResult& r) {
  out << "method " << method_name(r.method) << "  loglik " << fmt4(r.loglik) << "  iterations " << r.iterations
      << (r.converged ? "  converged" : "  NOT converged") << '\n';
  const int d = r.spec.dim();
  for (std::size_t a = 0; a < r.slots.size(); ++a) {
    const ParamIndex& s = r.slots[a];
    out << "  tree " << tree_of_row(d, s.row) << "  " << edge_label(r.spec, s.row, s.col) << "  "
        << family_name(r.spec.families(s.row, s.col)) << (s.slot == 2 ? " df" : " par") << "  " << fmt4(r.estimate(a))
        << "  (se " << fmt4(r.se(a)) << ")" << (warned(r, s) ? "  at bound" : "") << '\n';
  }
}

}  // namespace rvine
