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
#ifndef ADDERPTQ_QUANTIZE_HPP_
#define ADDERPTQ_QUANTIZE_HPP_

#include <cstdint>

#include "adderptq/tensor.hpp"

namespace adderptq {

/// Step size substituted when a range is exactly zero (dead channels,
/// all-zero calibration); keeps quantization well-defined with every code 0.
inline constexpr double kScaleFloor = 1e-12;

inline constexpr int kMinBits = 2;
inline constexpr int kMaxBits = 16;

/// Uniform symmetric quantizer: codes live in [-2^(b-1), 2^(b-1)-1] and one
/// step spans `scale` real units.
struct QuantSpec {
  int bits = 8;
  double scale = 1.0;

  std::int32_t qn() const { return -(std::int32_t{1} << (bits - 1)); }
  std::int32_t qp() const { return (std::int32_t{1} << (bits - 1)) - 1; }

  /// Spec whose 2^b - 1 steps cover [-max_abs, max_abs].
  static QuantSpec from_range(int bits, double max_abs);
};

void validate_quant_spec(const QuantSpec& spec);

/// scale = 2 * max_abs / (2^bits - 1), or kScaleFloor when max_abs is zero.
/// Note the code for +max_abs is 2^(b-1) - 0.5 exactly, which rounds up and
/// then clamps to qp, so the top of the range always saturates by half a
/// step.
double scale_from_range(int bits, double max_abs);

/// clamp(round(v / scale), qn, qp) with ties rounded away from zero.
std::int32_t quantize_value(double v, const QuantSpec& spec);

double dequantize_value(std::int32_t code, const QuantSpec& spec);

TensorI quantize(const TensorF& x, const QuantSpec& spec);

TensorF dequantize(const TensorI& codes, const QuantSpec& spec);

/// Elementwise |dequantize(quantize(v)) - v|.
TensorF quant_loss(const TensorF& x, const QuantSpec& spec);

}  // namespace adderptq

#endif  // ADDERPTQ_QUANTIZE_HPP_
