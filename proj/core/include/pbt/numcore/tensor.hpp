#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pbt/common.hpp"

namespace pbt::nn {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using RowVectorMap = Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>;
template <typename T>
using ConstRowVectorMap = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;

/// Dense row-major tensor. The product of the shape always equals the number
/// of stored elements.
template <typename T>
class Tensor {
 public:
  using value_type = T;
  /// Over-aligned so Eigen's vectorized loops split the same way on every run.
  using Storage = std::vector<T, Eigen::aligned_allocator<T>>;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0});
  Tensor(Shape shape, std::vector<T> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T* raw() noexcept { return data_.data(); }
  const T* raw() const noexcept { return data_.data(); }
  const Storage& values() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  template <typename... Index>
  T& operator()(Index... idx) {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }
  template <typename... Index>
  const T& operator()(Index... idx) const {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  /// Reinterprets the data with a new shape of identical element count.
  void reshape(Shape shape);
  Tensor reshaped(Shape shape) const;

  void fill(T value);
  void set_zero() { fill(T{0}); }

  /// Views the data as a rows x cols row-major matrix (rows*cols == size()).
  MatrixMap<T> matrix(std::size_t rows, std::size_t cols);
  ConstMatrixMap<T> matrix(std::size_t rows, std::size_t cols) const;

  /// Views all elements as one row vector.
  RowVectorMap<T> as_row() { return RowVectorMap<T>(data_.data(), static_cast<Eigen::Index>(data_.size())); }
  ConstRowVectorMap<T> as_row() const {
    return ConstRowVectorMap<T>(data_.data(), static_cast<Eigen::Index>(data_.size()));
  }

  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::size_t offset(std::initializer_list<std::size_t> idx) const;

  Shape shape_;
  Storage data_;
};

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
  std::vector<To> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<To>(t[i]);
  return Tensor<To>(t.shape(), std::move(out));
}

/// Stacks the selected slices along the leading axis.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& t, std::span<const std::size_t> rows) {
  require(t.rank() >= 1, "gather_rows: scalar tensor");
  const std::size_t stride = t.dim(0) ? t.size() / t.dim(0) : 0;
  Shape shape = t.shape();
  shape[0] = rows.size();
  std::vector<T> out(rows.size() * stride);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < t.dim(0), "gather_rows: row index out of range");
    std::copy_n(t.raw() + rows[i] * stride, stride, out.data() + i * stride);
  }
  return Tensor<T>(std::move(shape), std::move(out));
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace pbt::nn
