#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace testsupport {

// One-sample Kolmogorov-Smirnov test against U(0,1); returns the asymptotic p-value
// with Stephens' small-sample correction.
inline double ks_uniform_pvalue(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double dmax = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dmax = std::max(dmax, static_cast<double>(i + 1) / n - x[i]);
    dmax = std::max(dmax, x[i] - static_cast<double>(i) / n);
  }
  const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * dmax;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
  return std::clamp(p, 0.0, 1.0);
}

// O(n^2) tau-b.
inline double brute_kendall(const std::vector<double>& x, const std::vector<double>& y) {
  double c = 0, dsc = 0, tx = 0, ty = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double a = (x[i] > x[j]) - (x[i] < x[j]);
      const double b = (y[i] > y[j]) - (y[i] < y[j]);
      if (a == 0 && b == 0) continue;
      if (a == 0) { ++tx; continue; }
      if (b == 0) { ++ty; continue; }
      (a * b > 0 ? c : dsc) += 1;
    }
  const double den = std::sqrt((c + dsc + tx) * (c + dsc + ty));
  return den == 0 ? 0.0 : (c - dsc) / den;
}

}  // namespace testsupport
