#pragma once

#include <iosfwd>

#include "rvine/inference.hpp"

namespace rvine {

// Fitted spec in spec-file format, followed by RESULT (key value lines),
// ESTIMATES (comma separated, one row per slot) and SE (d x d, NA where
// empty). read_spec_file() reads the fitted spec back; read_square_section()
// reads SE.
void write_fit_result(std::ostream& out, const FitResult& r, int n);

// Four significant digits, for terminals.
void print_fit_summary(std::ostream& out, const FitResult& r);

}  // namespace rvine
