#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace cspan {

// Dense row-major tensor of rank 0 (scalar), 1, or 2. Canonical storage is
// 32-bit float; the double instantiation backs gradient verification.
template <typename T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> data;

  TensorT() = default;

  static TensorT zeros(std::vector<int> s) {
    TensorT t;
    std::size_t n = 1;
    for (int d : s) {
      if (d <= 0) throw DataError("tensor dimension must be positive");
      n *= static_cast<std::size_t>(d);
    }
    t.shape = std::move(s);
    t.data.assign(n, T(0));
    return t;
  }

  static TensorT scalar(T v) {
    TensorT t;
    t.data.assign(1, v);
    return t;
  }

  static TensorT vec(std::vector<T> v) {
    TensorT t;
    t.shape = {static_cast<int>(v.size())};
    t.data = std::move(v);
    return t;
  }

  static TensorT matrix(int r, int c, std::vector<T> v) {
    if (static_cast<std::size_t>(r) * c != v.size())
      throw DataError("matrix data length does not match shape");
    TensorT t;
    t.shape = {r, c};
    t.data = std::move(v);
    return t;
  }

  int rank() const { return static_cast<int>(shape.size()); }
  std::size_t size() const { return data.size(); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
  int rows() const { return shape[0]; }
  int cols() const { return shape[1]; }

  T& at(int i) { return data[static_cast<std::size_t>(i)]; }
  T at(int i) const { return data[static_cast<std::size_t>(i)]; }
  T& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols() + c]; }
  T at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols() + c]; }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) os << 'x';
      os << shape[i];
    }
    os << ')';
    return os.str();
  }

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out;
    out.shape = shape;
    out.data.reserve(data.size());
    for (T v : data) out.data.push_back(static_cast<U>(v));
    return out;
  }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

}  // namespace cspan
