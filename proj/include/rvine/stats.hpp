#pragma once

#include <span>

namespace rvine {

// Sample Kendall's tau-b, O(n log n) (Knight's merge-sort count).
double sample_kendall_tau(std::span<const double> x, std::span<const double> y);

}  // namespace rvine
