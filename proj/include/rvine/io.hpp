#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rvine/evaluate.hpp"
#include "rvine/structure.hpp"

namespace rvine {

// Spec file grammar (whitespace separated, '#' starts a comment):
//
//   LABELS name_1 ... name_d          (optional)
//   STRUCTURE                         d rows, row r has r integers
//   FAMILY                            d rows of family codes (0..5, suffix r = reflected)
//   PAR                               d rows of first parameters
//   PAR2                              d rows of second parameters (Student-t df)
//
// Only entries strictly below the diagonal of FAMILY/PAR/PAR2 are used.
// PAR and PAR2 may be omitted when no position needs them.
RVineSpec parse_spec(std::istream& in, const std::string& source = "<input>");
RVineSpec read_spec_file(const std::string& path);
// Writes structure entries as data-column numbers, so the file reads back to an
// equivalent spec with an identity column map.
void write_spec(std::ostream& out, const RVineSpec& spec);

// A full d x d matrix section (e.g. "SE"), NA for missing entries (stored as NaN).
TriMatrix<double> read_square_section(std::istream& in, const std::string& section, int d,
                                      const std::string& source = "<input>");

enum class IngestMode { AlreadyUniform, RankTransform };

struct IngestOptions {
  IngestMode mode = IngestMode::AlreadyUniform;
  double clamp_eps = 1e-10;
  bool row_labels = false;  // first column holds row labels such as dates
};

struct IngestReport {
  std::size_t clamped = 0;
  std::vector<std::string> warnings;
};

// Delimited text (comma, tab, semicolon or spaces) with a header row of labels.
CopulaDataset ingest(std::istream& in, const IngestOptions& opts = {}, IngestReport* report = nullptr,
                     const std::string& source = "<input>");
CopulaDataset read_data_file(const std::string& path, const IngestOptions& opts = {},
                             IngestReport* report = nullptr);
// Header plus rows, 17 significant digits, comma separated. Row labels, when
// present for every row, go first under the header "label".
void write_data(std::ostream& out, const CopulaDataset& data);

// Average ranks (ties share the mean rank) divided by n + 1.
std::vector<double> rank_transform(std::span<const double> column);

// printf-style "%.17g" / "%.4g".
std::string fmt17(double x);
std::string fmt4(double x);

}  // namespace rvine
