#include "rvine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rvine/errors.hpp"

namespace rvine {

namespace {

// Number of tied pairs within runs of equal values in a sorted sequence.
template <class Eq>
double tied_pairs(std::size_t n, Eq&& equal) {
  double t = 0.0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      t += 0.5 * static_cast<double>(run) * static_cast<double>(run - 1);
      run = 1;
    }
  }
  return t;
}

// Sorts v and returns the number of inversions.
double merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0.0;
  const std::size_t mid = lo + (hi - lo) / 2;
  double swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t a = lo, b = mid, o = lo;
  while (a < mid && b < hi) {
    if (v[b] < v[a]) {
      swaps += static_cast<double>(mid - a);
      buf[o++] = v[b++];
    } else {
      buf[o++] = v[a++];
    }
  }
  while (a < mid) buf[o++] = v[a++];
  while (b < hi) buf[o++] = v[b++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return swaps;
}

}  // namespace

double sample_kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("kendall tau: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]); });

  const double n0 = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double n1 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return x[idx[a]] == x[idx[b]]; });
  const double n3 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return x[idx[a]] == x[idx[b]] && y[idx[a]] == y[idx[b]]; });

  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  const double swaps = merge_count(ys, buf, 0, n);
  const double n2 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

  const double denom = std::sqrt((n0 - n1) * (n0 - n2));
  if (denom == 0.0) return 0.0;
  return (n0 - n1 - n2 + n3 - 2.0 * swaps) / denom;
}

}  // namespace rvine
