#pragma once

#include <string>
#include <vector>

#include "rvine/bicop.hpp"
#include "rvine/tri_matrix.hpp"

namespace rvine {

// Lower-triangular R-vine matrix, 1-based. Column i encodes the edges whose
// conditioned set contains the diagonal entry m(i,i).
class RVineMatrix {
 public:
  RVineMatrix() = default;
  explicit RVineMatrix(TriMatrix<int> m) : m_(std::move(m)) {}
  // Row r (1-based) lists the r entries m(r,1..r).
  static RVineMatrix from_rows(const std::vector<std::vector<int>>& rows);

  int dim() const { return m_.dim(); }
  int operator()(int k, int i) const { return m_(k, i); }
  int& operator()(int k, int i) { return m_(k, i); }
  const TriMatrix<int>& entries() const { return m_; }

  bool operator==(const RVineMatrix&) const = default;

 private:
  TriMatrix<int> m_;
};

struct Edge {
  int row = 0;  // matrix position (row, col), row > col
  int col = 0;
  int tree = 0;
  int first = 0;   // m(col, col)
  int second = 0;  // m(row, col)
  std::vector<int> conditioning;  // sorted ascending
};

// trees[t - 1] holds the edges of tree t.
using TreeSequence = std::vector<std::vector<Edge>>;

// Decodes the tree sequence and checks the R-vine conditions directly
// (spanning trees, proximity). Throws StructureError on the first violation.
TreeSequence validate(const RVineMatrix& m);

bool is_normalized(const RVineMatrix& m);

// Tree containing the edge stored at row k.
inline int tree_of_row(int d, int k) { return d - k + 1; }

using MaxMatrix = TriMatrix<int>;
MaxMatrix max_matrix(const RVineMatrix& m);

// 1 where the copula term at that position depends on the parameter at (k, i).
using DependenceMatrix = TriMatrix<unsigned char>;
DependenceMatrix dependence_matrix(const RVineMatrix& m, int k, int i);

struct RVineSpec {
  RVineMatrix structure;
  TriMatrix<FamilyTag> families;
  TriMatrix<BicopParams> params;
  std::vector<std::string> labels;   // data column names, in data order
  std::vector<int> variable_column;  // variable v (1-based) is data column variable_column[v - 1]

  int dim() const { return structure.dim(); }

  // All pair copulas set to independence, identity variable mapping.
  static RVineSpec independence(const RVineMatrix& m);
};

// Structure validity plus every family parameter in its domain.
void validate_spec(const RVineSpec& spec);

// Relabels variables so the diagonal reads d, d-1, ..., 1. Families and
// parameters stay at their positions; the variable-to-column map is updated.
RVineSpec normalize(const RVineSpec& spec);

// "a,b|c,d" for the edge at (k, i), using labels when available.
std::string edge_label(const RVineSpec& spec, int k, int i);

}  // namespace rvine
