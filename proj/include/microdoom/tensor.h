// Copyright 2026 The Microdoom Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MICRODOOM_TENSOR_H_
#define MICRODOOM_TENSOR_H_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "microdoom/error.h"

namespace microdoom::nn {

template <typename T>
using MatrixT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using VectorT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
using Matrix = MatrixT<float>;

// Dense row-major tensor of rank 1 or 2. Storage is an Eigen matrix; rank-1
// tensors are held as a single row so mat() is always usable.
template <typename T>
class TensorT {
 public:
  TensorT() = default;
  explicit TensorT(std::vector<int> shape, T fill = T(0)) : shape_(std::move(shape)) {
    if (shape_.empty() || shape_.size() > 2) {
      Fail(ErrorKind::kShapeMismatch, "tensor rank must be 1 or 2");
    }
    const int rows = shape_.size() == 1 ? 1 : shape_[0];
    const int cols = shape_.back();
    m_.setConstant(rows, cols, fill);
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t size() const { return m_.size(); }
  T* data() { return m_.data(); }
  const T* data() const { return m_.data(); }
  std::span<T> values() { return {m_.data(), static_cast<size_t>(m_.size())}; }
  std::span<const T> values() const { return {m_.data(), static_cast<size_t>(m_.size())}; }
  T& operator[](int64_t i) { return m_.data()[i]; }
  T operator[](int64_t i) const { return m_.data()[i]; }

  MatrixT<T>& mat() { return m_; }
  const MatrixT<T>& mat() const { return m_; }

  bool SameShape(const TensorT& other) const { return shape_ == other.shape_; }
  void SetZero() { m_.setZero(); }
  bool AllFinite() const { return m_.allFinite(); }

  template <typename U>
  TensorT<U> Cast() const {
    TensorT<U> out(shape_);
    out.mat() = m_.template cast<U>();
    return out;
  }

  std::string ShapeString() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

 private:
  std::vector<int> shape_;
  MatrixT<T> m_;
};

using Tensor = TensorT<float>;

}  // namespace microdoom::nn

#endif  // MICRODOOM_TENSOR_H_
