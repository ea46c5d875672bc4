#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "ppgf/common.hpp"

namespace ppgf {

// Dense row-major tensor. Scalar type is a template parameter: float for
// training, double for gradient checks.
template <typename T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> data;

  TensorT() = default;
  explicit TensorT(std::vector<int> s) : shape(std::move(s)), data(numel_of(shape), T(0)) {}
  TensorT(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != numel_of(shape))
      fail(Errc::ShapeMismatch, "tensor data length does not match shape");
  }

  static int64_t numel_of(const std::vector<int>& s) {
    int64_t n = 1;
    for (int e : s) {
      if (e <= 0) fail(Errc::ShapeMismatch, "non-positive extent " + str(e));
      n *= e;
    }
    return n;
  }

  static TensorT zeros(std::vector<int> s) { return TensorT(std::move(s)); }

  static TensorT full(std::vector<int> s, T v) {
    TensorT t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }

  static TensorT scalar(T v) { return TensorT({1}, {v}); }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }

  T item() const {
    if (numel() != 1) fail(Errc::ShapeMismatch, "item() on non-scalar tensor");
    return data[0];
  }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }
};

template <typename T>
void ensure_finite(const TensorT<T>& t, const char* op) {
  if (!t.all_finite()) fail(Errc::NonFiniteTensor, std::string("non-finite output of ") + op);
}

template <typename T>
std::string shape_str(const TensorT<T>& t) {
  std::string s = "(";
  for (size_t i = 0; i < t.shape.size(); ++i) {
    if (i) s += ",";
    s += str(t.shape[i]);
  }
  return s + ")";
}

using Tensor32 = TensorT<float>;
using Tensor64 = TensorT<double>;

}  // namespace ppgf
