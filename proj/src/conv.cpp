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
#include "adderptq/conv.hpp"

#include <cstdint>
#include <limits>

#include "adderptq/parallel.hpp"

namespace adderptq {
namespace {

// Copies x into a zero border of `pad` pixels on every spatial side, which
// lets the sliding-window loops below stay branch-free. Padded positions are
// genuine zero activations: the additive kernel charges them -|W|.
template <typename Scalar>
Tensor<Scalar> pad_spatial(const Tensor<Scalar>& x, Index pad) {
  if (pad == 0) return x;
  const Index h = x.shape().dim(0);
  const Index w = x.shape().dim(1);
  const Index c = x.shape().dim(2);
  const Index wp = w + 2 * pad;
  Array<Scalar> out = Array<Scalar>::Zero((h + 2 * pad) * wp * c);
  for (Index m = 0; m < h; ++m) {
    out.segment(((m + pad) * wp + pad) * c, w * c) = x.array().segment(m * w * c, w * c);
  }
  return Tensor<Scalar>(Shape({h + 2 * pad, wp, c}), out);
}

// Shared sliding-window driver. The layouts put (column, channel) adjacent
// in memory, so one kernel row against one window row is an elementwise op
// over two contiguous spans of length d*c_in; `row_term(xrow, wrow)` reduces
// that pair. Workers split output rows, each writing a disjoint range.
template <typename Scalar, typename Acc, typename RowTerm>
Array<Acc> slide(const Tensor<Scalar>& x, const Tensor<Scalar>& w, const ConvConfig& cfg,
                 const Shape& out_shape, RowTerm row_term) {
  const Tensor<Scalar> xp = pad_spatial(x, cfg.pad);
  const Index wx = xp.shape().dim(1);
  const Index c_in = xp.shape().dim(2);
  const Index d = w.shape().dim(0);
  const Index c_out = w.shape().dim(3);
  const Index h_out = out_shape.dim(0);
  const Index w_out = out_shape.dim(1);
  const Index row_len = d * c_in;

  std::vector<Tensor<Scalar>> kernels;
  kernels.reserve(static_cast<std::size_t>(c_out));
  for (Index c = 0; c < c_out; ++c) kernels.push_back(channel_slice(w, c));

  Array<Acc> out(out_shape.numel());
  parallel_for(h_out, [&](Index m0, Index m1) {
    for (Index m = m0; m < m1; ++m) {
      for (Index n = 0; n < w_out; ++n) {
        for (Index c = 0; c < c_out; ++c) {
          Acc acc{};
          for (Index i = 0; i < d; ++i) {
            const auto xrow = xp.array().segment(
                ((m * cfg.stride + i) * wx + n * cfg.stride) * c_in, row_len);
            const auto wrow =
                kernels[static_cast<std::size_t>(c)].array().segment(i * row_len, row_len);
            acc += row_term(xrow, wrow);
          }
          out[(m * w_out + n) * c_out + c] = acc;
        }
      }
    }
  });
  return out;
}

}  // namespace

void validate_conv_config(const ConvConfig& cfg) {
  if (cfg.stride < 1) throw ConfigError("stride must be >= 1, got " + std::to_string(cfg.stride));
  if (cfg.pad < 0) throw ConfigError("pad must be >= 0, got " + std::to_string(cfg.pad));
}

Shape conv_output_shape(const Shape& x, const Shape& w, const ConvConfig& cfg) {
  validate_conv_config(cfg);
  require_activation_shape(x);
  require_weight_shape(w);
  if (x.dim(2) != w.dim(2)) {
    throw ShapeError("input channels " + std::to_string(x.dim(2)) + " do not match kernel " +
                     w.to_string());
  }
  const Index d = w.dim(0);
  std::vector<Index> dims(3);
  for (int axis = 0; axis < 2; ++axis) {
    const Index span = x.dim(axis) + 2 * cfg.pad - d;
    if (span < 0) {
      throw ShapeError("kernel " + w.to_string() + " exceeds padded input " + x.to_string());
    }
    dims[static_cast<std::size_t>(axis)] = span / cfg.stride + 1;
  }
  dims[2] = w.dim(3);
  return Shape(dims);
}

TensorF vanilla_conv(const TensorF& x, const TensorF& w, const ConvConfig& cfg) {
  const Shape out_shape = conv_output_shape(x.shape(), w.shape(), cfg);
  auto out = slide<double, double>(x, w, cfg, out_shape,
                                   [](const auto& xr, const auto& wr) -> double {
                                     return (xr * wr).sum();
                                   });
  return TensorF(out_shape, out);
}

TensorF adder_conv(const TensorF& x, const TensorF& w, const ConvConfig& cfg) {
  const Shape out_shape = conv_output_shape(x.shape(), w.shape(), cfg);
  auto out = slide<double, double>(x, w, cfg, out_shape,
                                   [](const auto& xr, const auto& wr) -> double {
                                     return -(xr - wr).abs().sum();
                                   });
  return TensorF(out_shape, out);
}

TensorI quantized_adder_conv(const TensorI& x, const TensorI& w, const ConvConfig& cfg) {
  const Shape out_shape = conv_output_shape(x.shape(), w.shape(), cfg);
  auto wide = slide<std::int32_t, std::int64_t>(
      x, w, cfg, out_shape, [](const auto& xr, const auto& wr) -> std::int64_t {
        return -(xr.template cast<std::int64_t>() - wr.template cast<std::int64_t>())
                    .abs()
                    .sum();
      });
  constexpr auto kLo = static_cast<std::int64_t>(std::numeric_limits<std::int32_t>::min());
  constexpr auto kHi = static_cast<std::int64_t>(std::numeric_limits<std::int32_t>::max());
  if ((wide < kLo).any() || (wide > kHi).any()) {
    throw ArithmeticError("accumulated response does not fit int32");
  }
  return TensorI(out_shape, wide.cast<std::int32_t>());
}

}  // namespace adderptq
