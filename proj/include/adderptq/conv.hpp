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
#ifndef ADDERPTQ_CONV_HPP_
#define ADDERPTQ_CONV_HPP_

#include "adderptq/tensor.hpp"

namespace adderptq {

struct ConvConfig {
  Index stride = 1;
  Index pad = 0;
};

void validate_conv_config(const ConvConfig& cfg);

/// Output extents for an (H, W, c_in) input under a (d, d, c_in, c_out)
/// kernel: each spatial dim maps to (n - d + 2*pad) / stride + 1.
Shape conv_output_shape(const Shape& x, const Shape& w, const ConvConfig& cfg);

/// Multiplicative cross-correlation, the reference filter response:
///   Y(m,n,c) = sum_{i,j,k} X(m*s+i-p, n*s+j-p, k) * W(i,j,k,c)
/// with zero padding outside the input.
TensorF vanilla_conv(const TensorF& x, const TensorF& w, const ConvConfig& cfg);

/// Additive filter response, the negated L1 distance between the window and
/// the kernel:
///   Y(m,n,c) = -sum_{i,j,k} |X(m*s+i-p, n*s+j-p, k) - W(i,j,k,c)|
/// with zero padding, so padded positions contribute -|W(i,j,k,c)|.
TensorF adder_conv(const TensorF& x, const TensorF& w, const ConvConfig& cfg);

/// adder_conv over integer codes. Accumulation is 64-bit; the result is
/// narrowed to int32 and any element outside int32 raises ArithmeticError.
TensorI quantized_adder_conv(const TensorI& x, const TensorI& w, const ConvConfig& cfg);

}  // namespace adderptq

#endif  // ADDERPTQ_CONV_HPP_
