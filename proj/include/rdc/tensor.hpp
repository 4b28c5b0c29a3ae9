// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RDC_TENSOR_HPP_
#define RDC_TENSOR_HPP_

#include <Eigen/Core>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "rdc/common.hpp"

namespace rdc {

// Dense n-d array over a flat Eigen column array. Rank is small (<= 4); the
// conv/image code interprets rank-3 tensors as (channels, height, width) in
// row-major order, i.e. flat index (c * H + h) * W + w.
template <typename Scalar>
class Tensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.setZero(numel_of(shape_));
  }
  Tensor(std::vector<int> shape, Array data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check(data_.size() == numel_of(shape_), ErrorKind::kContract,
          "tensor data size does not match shape");
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, Scalar v) {
    Tensor t(std::move(shape));
    t.data_.setConstant(v);
    return t;
  }
  static Tensor scalar(Scalar v) { return full({1}, v); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  Eigen::Index numel() const { return data_.size(); }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  Array& array() { return data_; }
  const Array& array() const { return data_; }
  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Scalar& operator[](Eigen::Index i) { return data_[i]; }
  Scalar operator[](Eigen::Index i) const { return data_[i]; }

  // Rank-3 (C,H,W) accessors.
  Scalar& at(int c, int h, int w) { return data_[offset(c, h, w)]; }
  Scalar at(int c, int h, int w) const { return data_[offset(c, h, w)]; }

  bool all_finite() const { return data_.isFinite().all(); }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(shape_, data_.template cast<Other>().eval());
  }

  static Eigen::Index numel_of(const std::vector<int>& shape) {
    Eigen::Index n = 1;
    for (int d : shape) {
      check(d > 0, ErrorKind::kParameter, "tensor dims must be positive");
      n *= d;
    }
    return n;
  }

 private:
  Eigen::Index offset(int c, int h, int w) const {
    return (static_cast<Eigen::Index>(c) * shape_[1] + h) * shape_[2] + w;
  }

  std::vector<int> shape_;
  Array data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace rdc

#endif  // RDC_TENSOR_HPP_
