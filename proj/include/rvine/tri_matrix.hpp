#pragma once

#include <algorithm>
#include <cassert>
#include <vector>

namespace rvine {

// Square d x d matrix addressed with 1-based (row, column) indices, as in the
// vine matrix notation. Only the lower triangle is meaningful for most uses,
// but the full square is stored so that upper-triangle layouts (degrees of
// freedom, their standard errors) fit in the same type.
template <class T>
class TriMatrix {
 public:
  TriMatrix() = default;
  explicit TriMatrix(int d, const T& fill = T{}) : d_(d), data_(static_cast<std::size_t>(d) * d, fill) {}

  int dim() const { return d_; }

  T& operator()(int k, int i) {
    assert(k >= 1 && k <= d_ && i >= 1 && i <= d_);
    return data_[static_cast<std::size_t>(k - 1) * d_ + (i - 1)];
  }
  const T& operator()(int k, int i) const {
    assert(k >= 1 && k <= d_ && i >= 1 && i <= d_);
    return data_[static_cast<std::size_t>(k - 1) * d_ + (i - 1)];
  }

  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const TriMatrix&) const = default;

 private:
  int d_ = 0;
  std::vector<T> data_;
};

}  // namespace rvine
