#include "rvine/structure.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "rvine/errors.hpp"

namespace rvine {

namespace {

std::string pos(int k, int i) { return "(" + std::to_string(k) + "," + std::to_string(i) + ")"; }

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

std::vector<int> sorted_union(const Edge& e) {
  std::vector<int> u = e.conditioning;
  u.push_back(e.first);
  u.push_back(e.second);
  std::sort(u.begin(), u.end());
  return u;
}

}  // namespace

RVineMatrix RVineMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
  const int d = static_cast<int>(rows.size());
  TriMatrix<int> m(d, 0);
  for (int r = 1; r <= d; ++r) {
    if (static_cast<int>(rows[r - 1].size()) != r)
      throw StructureError("row " + std::to_string(r) + " must have " + std::to_string(r) + " entries");
    for (int c = 1; c <= r; ++c) m(r, c) = rows[r - 1][c - 1];
  }
  return RVineMatrix(std::move(m));
}

TreeSequence validate(const RVineMatrix& m) {
  const int d = m.dim();
  if (d < 2) throw StructureError("dimension must be at least 2");

  // Entry range and per-column distinctness.
  for (int i = 1; i <= d; ++i) {
    std::vector<char> seen(d + 1, 0);
    for (int k = i; k <= d; ++k) {
      const int v = m(k, i);
      if (v < 1 || v > d) throw StructureError("entry out of range 1.." + std::to_string(d) + " at " + pos(k, i));
      if (seen[v]) throw StructureError("duplicated entry " + std::to_string(v) + " in column " + std::to_string(i) + " at " + pos(k, i));
      seen[v] = 1;
    }
  }
  // Diagonal is a permutation and column i only uses the diagonal entries m(i..d).
  {
    std::vector<char> diag(d + 1, 0);
    for (int i = d; i >= 1; --i) {
      if (diag[m(i, i)]) throw StructureError("diagonal entry repeated at " + pos(i, i));
      diag[m(i, i)] = 1;
      for (int k = i + 1; k <= d; ++k)
        if (!diag[m(k, i)])
          throw StructureError("entry " + std::to_string(m(k, i)) + " at " + pos(k, i) +
                               " is not a diagonal entry of a later column");
    }
  }

  TreeSequence trees(d - 1);
  for (int t = 1; t <= d - 1; ++t) {
    const int k = d - t + 1;
    for (int i = 1; i <= k - 1; ++i) {
      Edge e;
      e.row = k;
      e.col = i;
      e.tree = t;
      e.first = m(i, i);
      e.second = m(k, i);
      for (int r = k + 1; r <= d; ++r) e.conditioning.push_back(m(r, i));
      std::sort(e.conditioning.begin(), e.conditioning.end());
      trees[t - 1].push_back(std::move(e));
    }
  }

  // Tree 1: spanning tree on the variables.
  {
    UnionFind uf(d + 1);
    for (const Edge& e : trees[0])
      if (!uf.unite(e.first, e.second))
        throw StructureError("tree 1 contains a cycle at edge " + pos(e.row, e.col));
  }

  // Trees 2..d-1: every edge joins two edges of the previous tree whose
  // complete unions are {a} u D and {b} u D, those two share a node (proximity),
  // and the edges form a spanning tree on the previous tree's edges.
  std::vector<std::vector<int>> prev_ends;  // endpoints of each previous-tree edge (node ids in its own tree)
  for (const Edge& e : trees[0]) prev_ends.push_back({e.first, e.second});
  for (int t = 2; t <= d - 1; ++t) {
    const auto& prev = trees[t - 2];
    std::map<std::vector<int>, int> by_union;
    for (int j = 0; j < static_cast<int>(prev.size()); ++j) {
      if (!by_union.emplace(sorted_union(prev[j]), j).second)
        throw StructureError("tree " + std::to_string(t - 1) + " has two edges with the same complete union at " +
                             pos(prev[j].row, prev[j].col));
    }
    UnionFind uf(static_cast<int>(prev.size()));
    std::vector<std::vector<int>> ends;
    for (const Edge& e : trees[t - 1]) {
      std::vector<int> ua = e.conditioning, ub = e.conditioning;
      ua.push_back(e.first);
      ub.push_back(e.second);
      std::sort(ua.begin(), ua.end());
      std::sort(ub.begin(), ub.end());
      const auto ia = by_union.find(ua), ib = by_union.find(ub);
      if (ia == by_union.end() || ib == by_union.end())
        throw StructureError("edge at " + pos(e.row, e.col) + " in tree " + std::to_string(t) +
                             " does not join two edges of tree " + std::to_string(t - 1));
      const auto& ea = prev_ends[ia->second];
      const auto& eb = prev_ends[ib->second];
      const bool share = std::find(ea.begin(), ea.end(), eb[0]) != ea.end() ||
                         std::find(ea.begin(), ea.end(), eb[1]) != ea.end();
      if (!share)
        throw StructureError("proximity condition violated by edge at " + pos(e.row, e.col) + " in tree " +
                             std::to_string(t));
      if (!uf.unite(ia->second, ib->second))
        throw StructureError("tree " + std::to_string(t) + " contains a cycle at edge " + pos(e.row, e.col));
      ends.push_back({ia->second, ib->second});
    }
    prev_ends = std::move(ends);
  }
  return trees;
}

bool is_normalized(const RVineMatrix& m) {
  for (int i = 1; i <= m.dim(); ++i)
    if (m(i, i) != m.dim() - i + 1) return false;
  return true;
}

MaxMatrix max_matrix(const RVineMatrix& m) {
  const int d = m.dim();
  MaxMatrix out(d, 0);
  for (int i = 1; i <= d; ++i) {
    out(d, i) = m(d, i);
    for (int k = d - 1; k >= i; --k) out(k, i) = std::max(m(k, i), out(k + 1, i));
  }
  return out;
}

DependenceMatrix dependence_matrix(const RVineMatrix& m, int kt, int it) {
  const int d = m.dim();
  if (it < 1 || it >= d || kt <= it || kt > d)
    throw IndexError("invalid parameter position " + pos(kt, it));
  DependenceMatrix c(d, 0);
  std::vector<char> g(d + 1, 0);
  int gsize = 0;
  g[m(it, it)] = 1;
  for (int r = kt; r <= d; ++r) g[m(r, it)] = 1;
  for (int v = 1; v <= d; ++v) gsize += g[v];
  c(kt, it) = 1;
  for (int a = it; a >= 1; --a) {
    for (int b = kt; b >= a + 1; --b) {
      int hits = g[m(a, a)];
      for (int r = b; r <= d; ++r) hits += g[m(r, a)];
      if (hits == gsize) c(b, a) = 1;
    }
  }
  return c;
}

RVineSpec RVineSpec::independence(const RVineMatrix& m) {
  RVineSpec s;
  s.structure = m;
  s.families = TriMatrix<FamilyTag>(m.dim());
  s.params = TriMatrix<BicopParams>(m.dim());
  s.variable_column.resize(m.dim());
  std::iota(s.variable_column.begin(), s.variable_column.end(), 0);
  return s;
}

void validate_spec(const RVineSpec& spec) {
  validate(spec.structure);
  const int d = spec.dim();
  if (spec.families.dim() != d || spec.params.dim() != d)
    throw StructureError("family/parameter matrices do not match the structure dimension");
  if (static_cast<int>(spec.variable_column.size()) != d)
    throw StructureError("variable-to-column map has the wrong size");
  for (int i = 1; i < d; ++i)
    for (int k = i + 1; k <= d; ++k) {
      if (!in_domain(spec.families(k, i), spec.params(k, i)))
        throw DomainError("parameters at " + pos(k, i) + " outside the domain of " +
                          family_name(spec.families(k, i)));
    }
}

RVineSpec normalize(const RVineSpec& spec) {
  validate(spec.structure);
  const int d = spec.dim();
  std::vector<int> relabel(d + 1, 0);
  for (int i = 1; i <= d; ++i) relabel[spec.structure(i, i)] = d - i + 1;
  RVineSpec out = spec;
  for (int i = 1; i <= d; ++i)
    for (int k = i; k <= d; ++k) out.structure(k, i) = relabel[spec.structure(k, i)];
  for (int v = 1; v <= d; ++v) out.variable_column[relabel[v] - 1] = spec.variable_column[v - 1];
  return out;
}

std::string edge_label(const RVineSpec& spec, int k, int i) {
  const int d = spec.dim();
  const auto name = [&](int v) {
    const int col = spec.variable_column.empty() ? v - 1 : spec.variable_column[v - 1];
    if (col >= 0 && col < static_cast<int>(spec.labels.size())) return spec.labels[col];
    return std::to_string(col + 1);
  };
  std::string s = name(spec.structure(i, i)) + "," + name(spec.structure(k, i));
  if (k < d) {
    s += "|";
    for (int r = k + 1; r <= d; ++r) {
      if (r > k + 1) s += ",";
      s += name(spec.structure(r, i));
    }
  }
  return s;
}

}  // namespace rvine
