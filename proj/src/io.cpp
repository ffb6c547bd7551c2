#include "rvine/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "rvine/errors.hpp"

namespace rvine {

namespace {

std::string strip_comment(const std::string& line) {
  const auto p = line.find('#');
  return p == std::string::npos ? line : line.substr(0, p);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
};

// RESULT, ESTIMATES and SE are written by fit reports and skipped here.
const std::vector<std::string> kSections = {"LABELS", "STRUCTURE", "FAMILY", "PAR", "PAR2", "RESULT", "ESTIMATES", "SE"};

bool is_section(const std::string& t) {
  return std::find(kSections.begin(), kSections.end(), t) != kSections.end();
}

}  // namespace

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt4(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

RVineSpec parse_spec(std::istream& in, const std::string& source) {
  std::map<std::string, std::vector<Line>> sections;
  std::vector<std::string> labels;
  std::string current;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto tokens = split_ws(strip_comment(raw));
    if (tokens.empty()) continue;
    if (tokens[0] == "LABELS") {
      labels.assign(tokens.begin() + 1, tokens.end());
      current.clear();
      continue;
    }
    if (is_section(tokens[0])) {
      if (tokens.size() != 1) throw ParseError(source + ":" + std::to_string(lineno) + ": section keyword " + tokens[0] + " must be alone on its line");
      current = tokens[0];
      if (sections.count(current)) throw ParseError(source + ":" + std::to_string(lineno) + ": section " + current + " repeated");
      sections[current];
      continue;
    }
    if (current.empty()) throw ParseError(source + ":" + std::to_string(lineno) + ": data outside any section");
    sections[current].push_back({lineno, std::move(tokens)});
  }

  if (!sections.count("STRUCTURE")) throw ParseError(source + ": missing section STRUCTURE");
  const auto& srows = sections["STRUCTURE"];
  const int d = static_cast<int>(srows.size());
  if (d < 2) throw ParseError(source + ": section STRUCTURE needs at least 2 rows");

  const auto check_shape = [&](const std::string& name) {
    const auto& rows = sections[name];
    if (static_cast<int>(rows.size()) != d)
      throw ParseError(source + ": section " + name + " has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(d));
    for (int r = 1; r <= d; ++r)
      if (static_cast<int>(rows[r - 1].tokens.size()) != r)
        throw ParseError(source + ":" + std::to_string(rows[r - 1].number) + ": section " + name + " row " + std::to_string(r) +
                         " has " + std::to_string(rows[r - 1].tokens.size()) + " entries, expected " + std::to_string(r));
  };
  check_shape("STRUCTURE");

  TriMatrix<int> m(d, 0);
  for (int r = 1; r <= d; ++r)
    for (int c = 1; c <= r; ++c) {
      const std::string& t = srows[r - 1].tokens[c - 1];
      int v = 0;
      const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ParseError(source + ":" + std::to_string(srows[r - 1].number) + ": section STRUCTURE entry '" + t + "' is not an integer");
      m(r, c) = v;
    }
  RVineSpec spec = RVineSpec::independence(RVineMatrix(m));
  try {
    validate(spec.structure);
  } catch (const StructureError& e) {
    throw ParseError(source + ": section STRUCTURE: " + e.what());
  }

  if (!sections.count("FAMILY")) throw ParseError(source + ": missing section FAMILY");
  check_shape("FAMILY");
  bool need_par = false, need_par2 = false;
  for (int r = 2; r <= d; ++r)
    for (int c = 1; c < r; ++c) {
      const auto& line = sections["FAMILY"][r - 1];
      try {
        spec.families(r, c) = parse_family_code(line.tokens[c - 1]);
      } catch (const ParseError& e) {
        throw ParseError(source + ":" + std::to_string(line.number) + ": section FAMILY: " + e.what());
      }
      need_par |= parameter_count(spec.families(r, c)) >= 1;
      need_par2 |= parameter_count(spec.families(r, c)) >= 2;
    }

  const auto read_values = [&](const std::string& name, bool needed, auto&& assign) {
    if (!sections.count(name)) {
      if (needed) throw ParseError(source + ": missing section " + name);
      return;
    }
    check_shape(name);
    for (int r = 2; r <= d; ++r)
      for (int c = 1; c < r; ++c) {
        const auto& line = sections[name][r - 1];
        double v = 0.0;
        if (!parse_double(line.tokens[c - 1], v))
          throw ParseError(source + ":" + std::to_string(line.number) + ": section " + name + " entry '" + line.tokens[c - 1] + "' is not numeric");
        assign(r, c, v);
      }
  };
  read_values("PAR", need_par, [&](int r, int c, double v) {
    if (parameter_count(spec.families(r, c)) >= 1) spec.params(r, c).theta = v;
  });
  read_values("PAR2", need_par2, [&](int r, int c, double v) {
    if (parameter_count(spec.families(r, c)) >= 2) spec.params(r, c).nu = v;
  });

  if (!labels.empty()) {
    if (static_cast<int>(labels.size()) != d) throw ParseError(source + ": LABELS has " + std::to_string(labels.size()) + " names, expected " + std::to_string(d));
    spec.labels = labels;
  }
  validate_spec(spec);
  return spec;
}

RVineSpec read_spec_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open spec file " + path);
  return parse_spec(f, path);
}

void write_spec(std::ostream& out, const RVineSpec& spec) {
  const int d = spec.dim();
  if (!spec.labels.empty()) {
    out << "LABELS";
    for (const auto& l : spec.labels) out << ' ' << l;
    out << '\n';
  }
  out << "STRUCTURE\n";
  for (int r = 1; r <= d; ++r) {
    for (int c = 1; c <= r; ++c) out << (c > 1 ? " " : "") << spec.variable_column[spec.structure(r, c) - 1] + 1;
    out << '\n';
  }
  const auto section = [&](const char* name, auto&& cell) {
    out << name << '\n';
    for (int r = 1; r <= d; ++r) {
      for (int c = 1; c <= r; ++c) out << (c > 1 ? " " : "") << (c == r ? std::string("0") : cell(r, c));
      out << '\n';
    }
  };
  section("FAMILY", [&](int r, int c) { return family_code(spec.families(r, c)); });
  section("PAR", [&](int r, int c) { return parameter_count(spec.families(r, c)) >= 1 ? fmt17(spec.params(r, c).theta) : std::string("0"); });
  section("PAR2", [&](int r, int c) { return parameter_count(spec.families(r, c)) >= 2 ? fmt17(spec.params(r, c).nu) : std::string("0"); });
}

TriMatrix<double> read_square_section(std::istream& in, const std::string& section, int d, const std::string& source) {
  TriMatrix<double> out(d, std::nan(""));
  std::string raw;
  std::size_t lineno = 0;
  bool inside = false;
  int row = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto tokens = split_ws(strip_comment(raw));
    if (tokens.empty()) continue;
    if (!inside) {
      inside = tokens.size() == 1 && tokens[0] == section;
      continue;
    }
    if (row == d) break;
    ++row;
    if (static_cast<int>(tokens.size()) != d)
      throw ParseError(source + ":" + std::to_string(lineno) + ": section " + section + " row " + std::to_string(row) + " needs " + std::to_string(d) + " entries");
    for (int c = 1; c <= d; ++c) {
      if (tokens[c - 1] == "NA") continue;
      double v = 0.0;
      if (!parse_double(tokens[c - 1], v))
        throw ParseError(source + ":" + std::to_string(lineno) + ": section " + section + " entry '" + tokens[c - 1] + "' is not numeric");
      out(row, c) = v;
    }
  }
  if (!inside) throw ParseError(source + ": missing section " + section);
  if (row != d) throw ParseError(source + ": section " + section + " has " + std::to_string(row) + " rows, expected " + std::to_string(d));
  return out;
}

std::vector<double> rank_transform(std::span<const double> column) {
  const std::size_t n = column.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::vector<double> out(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && column[order[j + 1]] == column[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // ranks i+1..j+1
    for (std::size_t t = i; t <= j; ++t) out[order[t]] = avg / static_cast<double>(n + 1);
    i = j + 1;
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char& delim) {
  if (delim == 0) {
    for (char c : {',', '\t', ';'})
      if (line.find(c) != std::string::npos) {
        delim = c;
        break;
      }
    if (delim == 0) delim = ' ';
  }
  if (delim == ' ') return split_ws(line);
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, delim)) {
    const auto b = cur.find_first_not_of(" \t\r");
    const auto e = cur.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

}  // namespace

CopulaDataset ingest(std::istream& in, const IngestOptions& opts, IngestReport* report, const std::string& source) {
  CopulaDataset data;
  std::string raw;
  std::size_t lineno = 0;
  char delim = 0;
  std::vector<std::vector<double>> rows;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.find_first_not_of(" \t") == std::string::npos || raw[raw.find_first_not_of(" \t")] == '#') continue;
    auto fields = split_fields(raw, delim);
    if (opts.row_labels && !fields.empty()) {
      if (have_header) data.row_labels.push_back(fields.front());
      fields.erase(fields.begin());
    }
    if (!have_header) {
      data.labels = fields;
      have_header = true;
      continue;
    }
    if (fields.size() != data.labels.size())
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(data.labels.size()) + " fields, found " + std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_double(fields[c], row[c]) || !std::isfinite(row[c]))
        throw NonNumericError(source + ":" + std::to_string(lineno) + ": column " + std::to_string(c + 1) + " ('" + data.labels[c] + "'): '" + fields[c] + "' is not numeric",
                              lineno, c + 1);
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(source + ": no header row");
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(data.labels.size());
  data.u.resize(n, d);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) data.u(r, c) = rows[r][c];

  if (opts.mode == IngestMode::RankTransform) {
    for (int c = 0; c < d; ++c) {
      std::vector<double> col(n);
      for (int r = 0; r < n; ++r) col[r] = data.u(r, c);
      if (n > 0 && std::all_of(col.begin(), col.end(), [&](double x) { return x == col[0]; }))
        throw ConstantColumnError(source + ": column " + std::to_string(c + 1) + " ('" + data.labels[c] + "') is constant");
      const auto ranks = rank_transform(col);
      for (int r = 0; r < n; ++r) data.u(r, c) = ranks[r];
    }
    return data;
  }

  std::size_t clamped = 0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) {
      double& x = data.u(r, c);
      if (x < 0.0 || x > 1.0)
        throw ParseError(source + ": row " + std::to_string(r + 1) + ", column " + std::to_string(c + 1) + ": value " + fmt17(x) + " outside [0, 1]");
      if (x < opts.clamp_eps) {
        x = opts.clamp_eps;
        ++clamped;
      } else if (x > 1.0 - opts.clamp_eps) {
        x = 1.0 - opts.clamp_eps;
        ++clamped;
      }
    }
  if (report) {
    report->clamped = clamped;
    if (clamped > 0) report->warnings.push_back(std::to_string(clamped) + " value(s) clamped into [" + fmt4(opts.clamp_eps) + ", 1 - " + fmt4(opts.clamp_eps) + "]");
  }
  return data;
}

CopulaDataset read_data_file(const std::string& path, const IngestOptions& opts, IngestReport* report) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open data file " + path);
  return ingest(f, opts, report, path);
}

void write_data(std::ostream& out, const CopulaDataset& data) {
  const int d = data.d();
  const bool dated = static_cast<int>(data.row_labels.size()) == data.n() && data.n() > 0;
  if (dated) out << "label,";
  for (int c = 0; c < d; ++c) {
    if (c) out << ',';
    out << (c < static_cast<int>(data.labels.size()) ? data.labels[c] : "V" + std::to_string(c + 1));
  }
  out << '\n';
  for (int r = 0; r < data.n(); ++r) {
    if (dated) out << data.row_labels[r] << ',';
    for (int c = 0; c < d; ++c) {
      if (c) out << ',';
      out << fmt17(data.u(r, c));
    }
    out << '\n';
  }
}

}  // namespace rvine
