#pragma once

// Dense row-major tensors over float or double, plus the handful of kernels
// the network needs. Element access via at() is always bounds-checked; the
// kernels validate shapes once up front and then run over raw storage.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seatrack/error.hpp"
#include "seatrack/rng.hpp"

namespace seatrack {

using Shape = std::vector<std::size_t>;

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out + "]";
}

template <class T>
class TensorT {
public:
  TensorT() = default;

  explicit TensorT(Shape shape) : shape_(std::move(shape)) {
    data_.assign(count(shape_), T(0));
  }

  TensorT(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (count(shape_) != data_.size()) {
      throw DimensionError("tensor: " + std::to_string(data_.size()) +
                           " values do not fill shape " + shape_str(shape_));
    }
  }

  static TensorT full(Shape shape, T v) {
    TensorT t(std::move(shape));
    for (T& x : t.data_) x = v;
    return t;
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  std::size_t dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
      throw std::out_of_range("tensor: axis " + std::to_string(axis) + " out of range for " +
                              shape_str(shape_));
    }
    return shape_[axis];
  }

  T& at(std::size_t i) { return data_[index1(i)]; }
  const T& at(std::size_t i) const { return data_[index1(i)]; }
  T& at(std::size_t i, std::size_t j) { return data_[index2(i, j)]; }
  const T& at(std::size_t i, std::size_t j) const { return data_[index2(i, j)]; }
  T& at(std::size_t i, std::size_t j, std::size_t k) { return data_[index3(i, j, k)]; }
  const T& at(std::size_t i, std::size_t j, std::size_t k) const { return data_[index3(i, j, k)]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> flat() { return {data_.data(), data_.size()}; }
  std::span<const T> flat() const { return {data_.data(), data_.size()}; }

  bool same_shape(const TensorT& o) const { return shape_ == o.shape_; }

  TensorT reshaped(Shape s) const {
    if (count(s) != data_.size()) {
      throw DimensionError("tensor: cannot reshape " + shape_str(shape_) + " into " +
                           shape_str(s));
    }
    return TensorT(std::move(s), data_);
  }

  template <class U>
  TensorT<U> cast() const {
    std::vector<U> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return TensorT<U>(shape_, std::move(out));
  }

private:
  static std::size_t count(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return s.empty() ? 0 : n;
  }

  std::size_t index1(std::size_t i) const {
    if (shape_.size() != 1) rank_fail(1);
    if (i >= shape_[0]) bounds_fail();
    return i;
  }
  std::size_t index2(std::size_t i, std::size_t j) const {
    if (shape_.size() != 2) rank_fail(2);
    if (i >= shape_[0] || j >= shape_[1]) bounds_fail();
    return i * shape_[1] + j;
  }
  std::size_t index3(std::size_t i, std::size_t j, std::size_t k) const {
    if (shape_.size() != 3) rank_fail(3);
    if (i >= shape_[0] || j >= shape_[1] || k >= shape_[2]) bounds_fail();
    return (i * shape_[1] + j) * shape_[2] + k;
  }

  [[noreturn]] void rank_fail(std::size_t want) const {
    throw std::out_of_range("tensor: " + std::to_string(want) + "-index access into rank-" +
                            std::to_string(shape_.size()) + " tensor " + shape_str(shape_));
  }
  [[noreturn]] void bounds_fail() const {
    throw std::out_of_range("tensor: index out of range for " + shape_str(shape_));
  }

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

namespace detail {

template <class T>
void require_rank(const TensorT<T>& t, std::size_t r, const char* op) {
  if (t.rank() != r) {
    throw DimensionError(std::string(op) + ": expected rank-" + std::to_string(r) +
                         " tensor, got " + shape_str(t.shape()));
  }
}

template <class T>
void require_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " do not match");
  }
}

}  // namespace detail

// c[i,j] = sum_t a[i,t] * b[t,j]
template <class T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_rank(a, 2, "matmul");
  detail::require_rank(b, 2, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: inner dimensions do not match " + shape_str(a.shape()) +
                         " x " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  TensorT<T> c({m, n});
  const T* pa = a.data();
  const T* pb = b.data();
  T* pc = c.data();
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = pc + i * n;
    for (std::size_t t = 0; t < k; ++t) {
      const T av = pa[i * k + t];
      const T* brow = pb + t * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

// c = a^T b for a:[k,m], b:[k,n]; avoids materialising the transpose.
template <class T>
TensorT<T> matmul_tn(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_rank(a, 2, "matmul_tn");
  detail::require_rank(b, 2, "matmul_tn");
  if (a.dim(0) != b.dim(0)) {
    throw DimensionError("matmul_tn: leading dimensions do not match " + shape_str(a.shape()) +
                         " x " + shape_str(b.shape()));
  }
  const std::size_t k = a.dim(0), m = a.dim(1), n = b.dim(1);
  TensorT<T> c({m, n});
  const T* pa = a.data();
  const T* pb = b.data();
  T* pc = c.data();
  for (std::size_t t = 0; t < k; ++t) {
    const T* arow = pa + t * m;
    const T* brow = pb + t * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T av = arow[i];
      T* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

// c = a b^T for a:[m,k], b:[n,k].
template <class T>
TensorT<T> matmul_nt(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_rank(a, 2, "matmul_nt");
  detail::require_rank(b, 2, "matmul_nt");
  if (a.dim(1) != b.dim(1)) {
    throw DimensionError("matmul_nt: trailing dimensions do not match " + shape_str(a.shape()) +
                         " x " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  TensorT<T> c({m, n});
  const T* pa = a.data();
  const T* pb = b.data();
  T* pc = c.data();
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = pa + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const T* brow = pb + j * k;
      T acc = 0;
      for (std::size_t t = 0; t < k; ++t) acc += arow[t] * brow[t];
      pc[i * n + j] = acc;
    }
  }
  return c;
}

template <class T, class F>
TensorT<T> map(const TensorT<T>& a, F f) {
  TensorT<T> out(a.shape());
  const T* pa = a.data();
  T* po = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) po[i] = f(pa[i]);
  return out;
}

template <class T, class F>
TensorT<T> zip(const TensorT<T>& a, const TensorT<T>& b, F f, const char* op) {
  detail::require_same_shape(a, b, op);
  TensorT<T> out(a.shape());
  const T* pa = a.data();
  const T* pb = b.data();
  T* po = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) po[i] = f(pa[i], pb[i]);
  return out;
}

template <class T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  return zip(a, b, [](T x, T y) { return x + y; }, "add");
}

template <class T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
  return zip(a, b, [](T x, T y) { return x - y; }, "sub");
}

template <class T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
  return zip(a, b, [](T x, T y) { return x * y; }, "mul");
}

template <class T>
void add_inplace(TensorT<T>& a, const TensorT<T>& b) {
  detail::require_same_shape(a, b, "add");
  T* pa = a.data();
  const T* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] += pb[i];
}

template <class T>
T sigmoid_s(T x) {
  // Split on sign so exp() never overflows.
  if (x >= T(0)) {
    const T e = std::exp(-x);
    return T(1) / (T(1) + e);
  }
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <class T>
TensorT<T> sigmoid(const TensorT<T>& a) {
  return map(a, [](T x) { return sigmoid_s(x); });
}

template <class T>
TensorT<T> tanh_t(const TensorT<T>& a) {
  return map(a, [](T x) { return std::tanh(x); });
}

template <class T>
TensorT<T> relu(const TensorT<T>& a) {
  return map(a, [](T x) { return x > T(0) ? x : T(0); });
}

// m[b,:] += row for m:[B,N], row:[N].
template <class T>
void add_row_inplace(TensorT<T>& m, const TensorT<T>& row) {
  detail::require_rank(m, 2, "add_row");
  detail::require_rank(row, 1, "add_row");
  if (m.dim(1) != row.dim(0)) {
    throw DimensionError("add_row: " + shape_str(m.shape()) + " vs " + shape_str(row.shape()));
  }
  const std::size_t b = m.dim(0), n = m.dim(1);
  T* pm = m.data();
  const T* pr = row.data();
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < n; ++j) pm[i * n + j] += pr[j];
  }
}

// Column sums: [B,N] -> [N].
template <class T>
TensorT<T> col_sum(const TensorT<T>& m) {
  detail::require_rank(m, 2, "col_sum");
  const std::size_t b = m.dim(0), n = m.dim(1);
  TensorT<T> out({n});
  const T* pm = m.data();
  T* po = out.data();
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < n; ++j) po[j] += pm[i * n + j];
  }
  return out;
}

// x[:,t,:] for x:[B,T,C] -> [B,C].
template <class T>
TensorT<T> time_slice(const TensorT<T>& x, std::size_t t) {
  detail::require_rank(x, 3, "time_slice");
  const std::size_t b = x.dim(0), steps = x.dim(1), c = x.dim(2);
  if (t >= steps) throw std::out_of_range("time_slice: step out of range");
  TensorT<T> out({b, c});
  for (std::size_t i = 0; i < b; ++i) {
    const T* src = x.data() + (i * steps + t) * c;
    T* dst = out.data() + i * c;
    for (std::size_t j = 0; j < c; ++j) dst[j] = src[j];
  }
  return out;
}

template <class T>
void set_time_slice(TensorT<T>& x, std::size_t t, const TensorT<T>& v) {
  detail::require_rank(x, 3, "set_time_slice");
  detail::require_rank(v, 2, "set_time_slice");
  const std::size_t b = x.dim(0), steps = x.dim(1), c = x.dim(2);
  if (t >= steps) throw std::out_of_range("set_time_slice: step out of range");
  if (v.dim(0) != b || v.dim(1) != c) {
    throw DimensionError("set_time_slice: " + shape_str(v.shape()) + " into " +
                         shape_str(x.shape()));
  }
  for (std::size_t i = 0; i < b; ++i) {
    T* dst = x.data() + (i * steps + t) * c;
    const T* src = v.data() + i * c;
    for (std::size_t j = 0; j < c; ++j) dst[j] = src[j];
  }
}

// Column-wise concatenation of rank-2 tensors with equal row counts.
template <class T>
TensorT<T> hconcat(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_rank(a, 2, "hconcat");
  detail::require_rank(b, 2, "hconcat");
  if (a.dim(0) != b.dim(0)) {
    throw DimensionError("hconcat: row counts differ " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  const std::size_t rows = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  TensorT<T> out({rows, ca + cb});
  for (std::size_t i = 0; i < rows; ++i) {
    T* dst = out.data() + i * (ca + cb);
    const T* pa = a.data() + i * ca;
    const T* pb = b.data() + i * cb;
    for (std::size_t j = 0; j < ca; ++j) dst[j] = pa[j];
    for (std::size_t j = 0; j < cb; ++j) dst[ca + j] = pb[j];
  }
  return out;
}

// Columns [lo, hi) of a rank-2 tensor.
template <class T>
TensorT<T> col_slice(const TensorT<T>& m, std::size_t lo, std::size_t hi) {
  detail::require_rank(m, 2, "col_slice");
  const std::size_t rows = m.dim(0), cols = m.dim(1);
  if (lo > hi || hi > cols) throw std::out_of_range("col_slice: bad column range");
  TensorT<T> out({rows, hi - lo});
  for (std::size_t i = 0; i < rows; ++i) {
    const T* src = m.data() + i * cols + lo;
    T* dst = out.data() + i * (hi - lo);
    for (std::size_t j = 0; j < hi - lo; ++j) dst[j] = src[j];
  }
  return out;
}

// Numerically stable row-wise softmax for [B,N].
template <class T>
TensorT<T> softmax_rows(const TensorT<T>& m) {
  detail::require_rank(m, 2, "softmax");
  const std::size_t b = m.dim(0), n = m.dim(1);
  if (n == 0) throw DimensionError("softmax: zero-width rows");
  TensorT<T> out(m.shape());
  for (std::size_t i = 0; i < b; ++i) {
    const T* src = m.data() + i * n;
    T* dst = out.data() + i * n;
    T mx = src[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, src[j]);
    T sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
      dst[j] = std::exp(src[j] - mx);
      sum += dst[j];
    }
    for (std::size_t j = 0; j < n; ++j) dst[j] /= sum;
  }
  return out;
}

// Index of the row maximum; ties resolve to the lowest index.
template <class T>
std::size_t argmax_row(const TensorT<T>& m, std::size_t row) {
  detail::require_rank(m, 2, "argmax");
  const std::size_t n = m.dim(1);
  if (row >= m.dim(0) || n == 0) throw std::out_of_range("argmax: bad row");
  const T* src = m.data() + row * n;
  std::size_t best = 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (src[j] > src[best]) best = j;
  }
  return best;
}

// Tensor filled with independent uniform draws in [lo, hi); requires lo < hi.
template <class T>
TensorT<T> rng_uniform(Rng& rng, Shape shape, double lo, double hi) {
  if (!(lo < hi)) throw ArgumentError("rng_uniform: bounds require lo < hi");
  TensorT<T> out(std::move(shape));
  T* p = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) p[i] = static_cast<T>(rng.uniform(lo, hi));
  return out;
}

template <class T>
TensorT<T> rng_normal(Rng& rng, Shape shape) {
  TensorT<T> out(std::move(shape));
  T* p = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) p[i] = static_cast<T>(rng.normal());
  return out;
}

template <class T>
bool all_finite(const TensorT<T>& t) {
  for (T v : t.flat()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace seatrack
