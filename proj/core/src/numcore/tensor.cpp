#include "pbt/numcore/tensor.hpp"

#include <cmath>
#include <sstream>

namespace pbt::nn {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
  for (auto d : shape_) require(d > 0, "tensor dimensions must be positive, got " + to_string(shape_));
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  for (auto d : shape_) require(d > 0, "tensor dimensions must be positive, got " + to_string(shape_));
  require(shape_size(shape_) == data_.size(),
          "tensor shape " + to_string(shape_) + " does not match " + std::to_string(data_.size()) + " values");
}

template <typename T>
void Tensor<T>::reshape(Shape shape) {
  require(shape_size(shape) == data_.size(),
          "cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  shape_ = std::move(shape);
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  Tensor out = *this;
  out.reshape(std::move(shape));
  return out;
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
MatrixMap<T> Tensor<T>::matrix(std::size_t rows, std::size_t cols) {
  require(rows * cols == data_.size(), "matrix view " + std::to_string(rows) + "x" + std::to_string(cols) +
                                           " does not fit tensor " + to_string(shape_));
  return MatrixMap<T>(data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename T>
ConstMatrixMap<T> Tensor<T>::matrix(std::size_t rows, std::size_t cols) const {
  require(rows * cols == data_.size(), "matrix view " + std::to_string(rows) + "x" + std::to_string(cols) +
                                           " does not fit tensor " + to_string(shape_));
  return ConstMatrixMap<T>(data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename T>
bool Tensor<T>::all_finite() const {
  for (T v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

template <typename T>
std::size_t Tensor<T>::offset(std::initializer_list<std::size_t> idx) const {
  require(idx.size() == shape_.size(), "index rank does not match tensor rank " + to_string(shape_));
  std::size_t off = 0;
  std::size_t axis = 0;
  for (auto i : idx) {
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace pbt::nn
