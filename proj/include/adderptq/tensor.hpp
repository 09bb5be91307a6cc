/**
 * Copyright 2026 The adderptq Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef ADDERPTQ_TENSOR_HPP_
#define ADDERPTQ_TENSOR_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "adderptq/errors.hpp"

namespace adderptq {

using Index = Eigen::Index;

template <typename Scalar>
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using ArrayF = Array<double>;
using ArrayI = Array<std::int32_t>;

/// Dense row-major extents. Activations are (H, W, c_in); weights are
/// (d, d, c_in, c_out) with the kernel dims leading, so the flat offset of a
/// weight element is ((i*d + j)*c_in + k)*c_out + c.
class Shape {
 public:
  Shape() = default;

  Shape(std::initializer_list<Index> dims) : Shape(std::vector<Index>(dims)) {}

  explicit Shape(std::vector<Index> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw ShapeError("shape must have at least one dim");
    for (Index d : dims_) {
      if (d < 1) throw ShapeError("all dims must be >= 1, got " + std::to_string(d));
    }
  }

  Index rank() const { return static_cast<Index>(dims_.size()); }
  Index dim(Index i) const { return dims_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& dims() const { return dims_; }

  Index numel() const {
    return std::accumulate(dims_.begin(), dims_.end(), Index{1},
                           [](Index a, Index b) { return a * b; });
  }

  bool operator==(const Shape& other) const { return dims_ == other.dims_; }
  bool operator!=(const Shape& other) const { return !(*this == other); }

  std::string to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (i) os << ',';
      os << dims_[i];
    }
    os << ')';
    return os.str();
  }

 private:
  std::vector<Index> dims_;
};

/// Row-major flat offset of a fully specified multi-index; bounds-checked.
inline Index flat_index(const Shape& shape, std::span<const Index> idx) {
  if (static_cast<Index>(idx.size()) != shape.rank()) {
    throw IndexError("index rank " + std::to_string(idx.size()) + " does not match shape " +
                     shape.to_string());
  }
  Index flat = 0;
  for (Index axis = 0; axis < shape.rank(); ++axis) {
    const Index i = idx[static_cast<std::size_t>(axis)];
    if (i < 0 || i >= shape.dim(axis)) {
      throw IndexError("index " + std::to_string(i) + " out of bounds for axis " +
                       std::to_string(axis) + " of shape " + shape.to_string());
    }
    flat = flat * shape.dim(axis) + i;
  }
  return flat;
}

/// Immutable dense tensor over one scalar mode (double for the reference
/// path, int32 for quantized codes). Storage is a flat Eigen array in
/// row-major order of the declared layout; construction fixes the contents,
/// so tensors can be shared across workers without synchronization.
template <typename Scalar>
class Tensor {
 public:
  Tensor() : shape_({1}), elems_(ArrayF::Zero(1).cast<Scalar>()) {}

  template <typename Derived>
  Tensor(Shape shape, const Eigen::ArrayBase<Derived>& values)
      : shape_(std::move(shape)), elems_(values) {
    if (elems_.size() != shape_.numel()) {
      throw ShapeError("have " + std::to_string(elems_.size()) + " elements for shape " +
                       shape_.to_string());
    }
  }

  Tensor(Shape shape, std::initializer_list<Scalar> values)
      : Tensor(std::move(shape),
               Eigen::Map<const Array<Scalar>>(values.begin(),
                                               static_cast<Index>(values.size()))) {}

  static Tensor zeros(Shape shape) {
    const Index n = shape.numel();
    return Tensor(std::move(shape), Array<Scalar>::Zero(n));
  }

  static Tensor constant(Shape shape, Scalar v) {
    const Index n = shape.numel();
    return Tensor(std::move(shape), Array<Scalar>::Constant(n, v));
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return shape_.rank(); }
  Index size() const { return elems_.size(); }

  /// Flat element access (row-major), bounds-checked.
  Scalar operator[](Index flat) const {
    if (flat < 0 || flat >= elems_.size()) {
      throw IndexError("flat index " + std::to_string(flat) + " out of range [0, " +
                       std::to_string(elems_.size()) + ")");
    }
    return elems_[flat];
  }

  Scalar at(std::span<const Index> idx) const { return elems_[flat_index(shape_, idx)]; }

  Scalar at(std::initializer_list<Index> idx) const {
    return at(std::span<const Index>(idx.begin(), idx.size()));
  }

  const Array<Scalar>& array() const { return elems_; }

  const Scalar* data() const { return elems_.data(); }

 private:
  Shape shape_;
  Array<Scalar> elems_;
};

using TensorF = Tensor<double>;
using TensorI = Tensor<std::int32_t>;

inline void require_weight_shape(const Shape& w) {
  if (w.rank() != 4) throw ShapeError("weights must be rank-4, got " + w.to_string());
  if (w.dim(0) != w.dim(1)) throw ShapeError("kernel must be square, got " + w.to_string());
}

inline void require_activation_shape(const Shape& x) {
  if (x.rank() != 3) throw ShapeError("activations must be rank-3, got " + x.to_string());
}

/// One output channel of a rank-4 weight tensor: W[:,:,:,c] as (d, d, c_in).
template <typename Scalar>
Tensor<Scalar> channel_slice(const Tensor<Scalar>& w, Index c) {
  require_weight_shape(w.shape());
  const Index c_out = w.shape().dim(3);
  if (c < 0 || c >= c_out) {
    throw IndexError("channel " + std::to_string(c) + " out of range [0, " +
                     std::to_string(c_out) + ")");
  }
  const Index n = w.size() / c_out;
  Eigen::Map<const Array<Scalar>, 0, Eigen::InnerStride<>> view(
      w.data() + c, n, Eigen::InnerStride<>(c_out));
  return Tensor<Scalar>(Shape({w.shape().dim(0), w.shape().dim(1), w.shape().dim(2)}), view);
}

/// Stacks equal-shape slices along a new trailing channel axis:
/// n tensors of shape (a,...,z) become one of shape (a,...,z,n).
template <typename Scalar>
Tensor<Scalar> stack_channels(std::span<const Tensor<Scalar>> slices) {
  if (slices.empty()) throw ShapeError("cannot stack zero slices");
  const Shape& s0 = slices.front().shape();
  for (const auto& t : slices) {
    if (t.shape() != s0) throw ShapeError("stack_channels requires equal shapes");
  }
  const Index per = s0.numel();
  const Index n = static_cast<Index>(slices.size());
  Array<Scalar> out(per * n);
  for (Index c = 0; c < n; ++c) {
    Eigen::Map<Array<Scalar>, 0, Eigen::InnerStride<>>(out.data() + c, per,
                                                       Eigen::InnerStride<>(n)) =
        slices[static_cast<std::size_t>(c)].array();
  }
  std::vector<Index> dims = s0.dims();
  dims.push_back(n);
  return Tensor<Scalar>(Shape(dims), out);
}

/// Concatenates tensors along the existing trailing axis; all leading dims
/// must agree.
template <typename Scalar>
Tensor<Scalar> concat_last_dim(std::span<const Tensor<Scalar>> parts) {
  if (parts.empty()) throw ShapeError("cannot concatenate zero tensors");
  const Shape& s0 = parts.front().shape();
  Index total_last = 0;
  for (const auto& t : parts) {
    if (t.rank() != s0.rank()) throw ShapeError("concat rank mismatch");
    for (Index a = 0; a + 1 < s0.rank(); ++a) {
      if (t.shape().dim(a) != s0.dim(a)) throw ShapeError("concat leading-dim mismatch");
    }
    total_last += t.shape().dim(t.rank() - 1);
  }
  const Index rows = s0.numel() / s0.dim(s0.rank() - 1);
  Array<Scalar> out(rows * total_last);
  Index offset = 0;
  for (const auto& t : parts) {
    const Index last = t.shape().dim(t.rank() - 1);
    for (Index r = 0; r < rows; ++r) {
      out.segment(r * total_last + offset, last) = t.array().segment(r * last, last);
    }
    offset += last;
  }
  std::vector<Index> dims = s0.dims();
  dims.back() = total_last;
  return Tensor<Scalar>(Shape(dims), out);
}

/// Reorders the trailing axis so that out[..., perm[p]] = in[..., p].
/// This is the restore step of grouped inference: position p of the grouped
/// concat belongs to original channel perm[p].
template <typename Scalar>
Tensor<Scalar> scatter_last_dim(const Tensor<Scalar>& t, std::span<const Index> perm) {
  const Index last = t.shape().dim(t.rank() - 1);
  if (static_cast<Index>(perm.size()) != last) {
    throw ShapeError("permutation length does not match trailing dim");
  }
  std::vector<bool> seen(static_cast<std::size_t>(last), false);
  for (Index p : perm) {
    if (p < 0 || p >= last || seen[static_cast<std::size_t>(p)]) {
      throw ShapeError("restore map is not a bijection on [0, " + std::to_string(last) + ")");
    }
    seen[static_cast<std::size_t>(p)] = true;
  }
  const Index rows = t.size() / last;
  Array<Scalar> out(t.size());
  for (Index r = 0; r < rows; ++r) {
    for (Index p = 0; p < last; ++p) {
      out[r * last + perm[static_cast<std::size_t>(p)]] = t.array()[r * last + p];
    }
  }
  return Tensor<Scalar>(t.shape(), out);
}

/// Gathers trailing-axis entries: out[..., p] = in[..., idx[p]]. Used to
/// permute weight output channels in tests and to collect group members.
template <typename Scalar>
Tensor<Scalar> gather_last_dim(const Tensor<Scalar>& t, std::span<const Index> idx) {
  const Index last = t.shape().dim(t.rank() - 1);
  for (Index i : idx) {
    if (i < 0 || i >= last) throw IndexError("gather index out of range");
  }
  const Index rows = t.size() / last;
  const Index n = static_cast<Index>(idx.size());
  Array<Scalar> out(rows * n);
  for (Index r = 0; r < rows; ++r) {
    for (Index p = 0; p < n; ++p) {
      out[r * n + p] = t.array()[r * last + idx[static_cast<std::size_t>(p)]];
    }
  }
  std::vector<Index> dims = t.shape().dims();
  dims.back() = n;
  return Tensor<Scalar>(Shape(dims), out);
}

}  // namespace adderptq

#endif  // ADDERPTQ_TENSOR_HPP_
