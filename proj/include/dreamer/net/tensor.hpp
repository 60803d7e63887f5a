#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <new>
#include <string>
#include <vector>

namespace dreamer::net {

// Fixed 64-byte alignment for all tensor storage. Vectorized kernels peel
// differently depending on the buffer address, so reproducibility requires
// every buffer to start on the same boundary regardless of heap state.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t kAlign = 64;

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    if (n == 0) return nullptr;
    void* p = ::operator new(n * sizeof(T), std::align_val_t(kAlign));
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept {
    ::operator delete(p, std::align_val_t(kAlign));
  }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
  template <typename U>
  bool operator!=(const AlignedAllocator<U>&) const {
    return false;
  }
};

using FloatVec = std::vector<float, AlignedAllocator<float>>;

using MatMap = Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ArrMap = Eigen::Map<Eigen::ArrayXf>;
using ConstArrMap = Eigen::Map<const Eigen::ArrayXf>;

// Dense float32 tensor. The leading dimension is treated as the batch/row
// axis; everything else is flattened into columns for matrix views.
struct Tensor {
  std::vector<int> shape;
  FloatVec data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, float fill = 0.0f) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(numel()), fill);
  }
  static Tensor scalar(float v) {
    Tensor t({1});
    t.data[0] = v;
    return t;
  }
  static Tensor from(std::vector<int> s, const std::vector<float>& values) {
    Tensor t;
    t.shape = std::move(s);
    t.data.assign(values.begin(), values.end());
    return t;
  }

  int64_t numel() const {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }
  int rows() const { return shape.empty() ? 1 : shape[0]; }
  int cols() const {
    int64_t c = 1;
    for (size_t i = 1; i < shape.size(); ++i) c *= shape[i];
    return static_cast<int>(c);
  }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  float& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  float operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  MatMap mat() { return MatMap(data.data(), rows(), cols()); }
  ConstMatMap mat() const { return ConstMatMap(data.data(), rows(), cols()); }
  ArrMap arr() { return ArrMap(data.data(), static_cast<Eigen::Index>(data.size())); }
  ConstArrMap arr() const {
    return ConstArrMap(data.data(), static_cast<Eigen::Index>(data.size()));
  }

  bool finite() const {
    for (float v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i)
      s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
  }
};

}  // namespace dreamer::net
