#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

#include "rvine/errors.hpp"
#include "rvine/evaluate.hpp"
#include "rvine/structure.hpp"
#include "support/random_vine.hpp"

using namespace rvine;

namespace {

RVineMatrix eight_dim() {
  return RVineMatrix::from_rows({{8},
                                 {7, 7},
                                 {2, 2, 6},
                                 {3, 3, 2, 5},
                                 {6, 4, 3, 2, 4},
                                 {4, 1, 4, 3, 2, 3},
                                 {1, 5, 1, 4, 3, 2, 2},
                                 {5, 6, 5, 1, 1, 1, 1, 1}});
}

RVineMatrix m3() { return RVineMatrix::from_rows({{3}, {1, 2}, {2, 1, 1}}); }

std::set<std::pair<int, int>> pairs_of(const std::vector<Edge>& tree) {
  std::set<std::pair<int, int>> out;
  for (const auto& e : tree) out.insert({std::min(e.first, e.second), std::max(e.first, e.second)});
  return out;
}

}  // namespace

TEST_CASE("eight-dimensional matrix decodes to a valid vine") {
  const TreeSequence trees = validate(eight_dim());
  REQUIRE(trees.size() == 7);
  for (int t = 1; t <= 7; ++t) CHECK(trees[t - 1].size() == static_cast<std::size_t>(8 - t));
  const std::set<std::pair<int, int>> t1 = {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {5, 6}, {6, 7}, {5, 8}};
  CHECK(pairs_of(trees[0]) == t1);

  // Column 2 holds 7,4|1,5,6; column 3 holds 2,6|1,3,4,5 in tree 5.
  bool found74 = false, found26 = false;
  for (const auto& tree : trees)
    for (const auto& e : tree) {
      if (e.first == 7 && e.second == 4 && e.conditioning == std::vector<int>{1, 5, 6}) found74 = true;
      if (e.first == 6 && e.second == 2 && e.conditioning == std::vector<int>{1, 3, 4, 5}) {
        found26 = true;
        CHECK(e.tree == 5);
      }
    }
  CHECK(found74);
  CHECK(found26);
  CHECK(is_normalized(eight_dim()));
}

TEST_CASE("three-dimensional matrix") {
  const TreeSequence trees = validate(m3());
  REQUIRE(trees.size() == 2);
  CHECK(pairs_of(trees[0]) == std::set<std::pair<int, int>>{{2, 3}, {1, 2}});
  REQUIRE(trees[1].size() == 1);
  CHECK(trees[1][0].first == 3);
  CHECK(trees[1][0].second == 1);
  CHECK(trees[1][0].conditioning == std::vector<int>{2});
}

TEST_CASE("invalid matrices are rejected") {
  CHECK_THROWS_AS(validate(RVineMatrix::from_rows({{3}, {2, 2}, {2, 1, 1}})), StructureError);  // duplicate in column
  CHECK_THROWS_AS(validate(RVineMatrix::from_rows({{3}, {1, 2}, {4, 1, 1}})), StructureError);  // out of range
  // Tree-2 edge 4,2|3 needs tree-1 edges {4,3} and {2,3}; the tree-1 edges are {4,3}, {3,1}, {2,1}.
  CHECK_THROWS_AS(validate(RVineMatrix::from_rows({{4}, {1, 3}, {2, 2, 2}, {3, 1, 1, 1}})), StructureError);
  try {
    validate(RVineMatrix::from_rows({{3}, {2, 2}, {2, 1, 1}}));
  } catch (const StructureError& e) {
    CHECK(std::string(e.what()).find("(") != std::string::npos);
  }
}

TEST_CASE("two-dimensional vine") {
  const RVineMatrix m = RVineMatrix::from_rows({{2}, {1, 1}});
  const TreeSequence trees = validate(m);
  REQUIRE(trees.size() == 1);
  CHECK(trees[0].size() == 1);
  const DependenceMatrix c = dependence_matrix(m, 2, 1);
  CHECK(c(2, 1) == 1);
}

TEST_CASE("max matrix") {
  const MaxMatrix mt = max_matrix(eight_dim());
  const std::vector<int> expected = {7, 6, 6, 6, 5, 5, 5};
  for (int k = 2; k <= 8; ++k) CHECK(mt(k, 1) == expected[k - 2]);
  for (int i = 1; i <= 8; ++i) CHECK(mt(8, i) == eight_dim()(8, i));
  // Constant column (non-decreasing suffix) leaves entries unchanged.
  const MaxMatrix m3t = max_matrix(m3());
  CHECK(m3t(3, 2) == 1);
  CHECK(m3t(2, 1) == 2);
}

TEST_CASE("normalization") {
  RVineSpec spec = RVineSpec::independence(eight_dim());
  const RVineSpec n1 = normalize(spec);
  CHECK(n1.structure == spec.structure);
  CHECK(n1.variable_column == spec.variable_column);

  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const int d = 3 + rep % 5;
    RVineSpec s = testsupport::random_spec(d, rng);
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), rng);
    const RVineSpec shuffled = testsupport::relabel(s, perm);
    validate(shuffled.structure);
    const RVineSpec n = normalize(shuffled);
    CHECK(is_normalized(n.structure));
    validate(n.structure);
    const RVineSpec nn = normalize(n);
    CHECK(nn.structure == n.structure);
    CHECK(nn.variable_column == n.variable_column);
    CHECK(n.structure == s.structure);  // relabeling a normalized matrix and normalizing restores it
  }
}

TEST_CASE("random matrices decode to d-1 trees with d-t edges") {
  std::mt19937_64 rng(99);
  for (int d = 2; d <= 9; ++d)
    for (int rep = 0; rep < 20; ++rep) {
      const TreeSequence trees = validate(testsupport::random_rvine_matrix(d, rng));
      REQUIRE(trees.size() == static_cast<std::size_t>(d - 1));
      for (int t = 1; t < d; ++t) CHECK(trees[t - 1].size() == static_cast<std::size_t>(d - t));
    }
}

TEST_CASE("dependence matrix examples") {
  // Parameter of the pair 2,1 at (3,2): the tree-2 term at (2,1) consumes it.
  const DependenceMatrix c = dependence_matrix(m3(), 3, 2);
  CHECK(c(3, 2) == 1);
  CHECK(c(2, 1) == 1);
  CHECK(c(3, 1) == 0);
  // Top edge: only itself.
  const DependenceMatrix top = dependence_matrix(eight_dim(), 2, 1);
  int flagged = 0;
  for (int i = 1; i <= 8; ++i)
    for (int k = i + 1; k <= 8; ++k) flagged += top(k, i);
  CHECK(flagged == 1);
  CHECK_THROWS_AS(dependence_matrix(m3(), 2, 2), IndexError);
  CHECK_THROWS_AS(dependence_matrix(m3(), 4, 1), IndexError);
}

TEST_CASE("dependence matrix equals the perturbation oracle") {
  std::mt19937_64 rng(314);
  // Moderate dependence and an observation drawn from the model itself keep every
  // h-value away from the clamping bounds, where a perturbation could be absorbed.
  for (int rep = 0; rep < 10; ++rep) {
    const RVineSpec spec = testsupport::random_spec(6, rng, 0.0, 0.5);
    const VineModel base(spec);
    const CopulaDataset one = simulate(spec, 1, 1000 + rep);
    const std::vector<double> u(one.row(0).begin(), one.row(0).end());
    EvalWorkspace w0(6);
    loglik_obs(base, u, w0);
    for (int i = 1; i < 6; ++i)
      for (int k = i + 1; k <= 6; ++k) {
        VineModel pert = base;
        BicopParams p = base.params(k, i);
        p.theta += p.theta > 0.5 ? -1e-3 : 1e-3;
        if (base.family(k, i).code == Family::Gumbel || base.family(k, i).code == Family::Joe) p.theta = base.params(k, i).theta + 1e-3;
        pert.set_params(k, i, p);
        EvalWorkspace w1(6);
        loglik_obs(pert, u, w1);
        const DependenceMatrix c = dependence_matrix(base.spec().structure, k, i);
        for (int a = 1; a < 6; ++a)
          for (int b = a + 1; b <= 6; ++b) {
            INFO("param (", k, ",", i, ") term (", b, ",", a, ")");
            CHECK((w1.vvalues(b, a) != w0.vvalues(b, a)) == (c(b, a) == 1));
          }
      }
  }
}
