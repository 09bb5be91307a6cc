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
#include "adderptq/quantize.hpp"

#include <cmath>
#include <string>

namespace adderptq {
namespace {

void require_bits(int bits) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw ConfigError("bits must be in [" + std::to_string(kMinBits) + ", " +
                      std::to_string(kMaxBits) + "], got " + std::to_string(bits));
  }
}

void require_finite(const TensorF& x, const char* who) {
  if (!x.array().isFinite().all()) {
    throw ArithmeticError(std::string(who) + " received a non-finite value");
  }
}

}  // namespace

void validate_quant_spec(const QuantSpec& spec) {
  require_bits(spec.bits);
  if (!std::isfinite(spec.scale) || spec.scale <= 0.0) {
    throw ConfigError("scale must be positive and finite, got " + std::to_string(spec.scale));
  }
}

double scale_from_range(int bits, double max_abs) {
  require_bits(bits);
  if (!std::isfinite(max_abs) || max_abs < 0.0) {
    throw CalibrationError("range must be finite and >= 0, got " + std::to_string(max_abs));
  }
  if (max_abs == 0.0) return kScaleFloor;
  const double levels = static_cast<double>((std::int64_t{1} << bits) - 1);
  return 2.0 * max_abs / levels;
}

QuantSpec QuantSpec::from_range(int bits, double max_abs) {
  return QuantSpec{bits, scale_from_range(bits, max_abs)};
}

std::int32_t quantize_value(double v, const QuantSpec& spec) {
  validate_quant_spec(spec);
  if (!std::isfinite(v)) throw ArithmeticError("quantize_value received a non-finite value");
  const double r = std::round(v / spec.scale);
  const double lo = static_cast<double>(spec.qn());
  const double hi = static_cast<double>(spec.qp());
  return static_cast<std::int32_t>(std::min(std::max(r, lo), hi));
}

double dequantize_value(std::int32_t code, const QuantSpec& spec) {
  validate_quant_spec(spec);
  return static_cast<double>(code) * spec.scale;
}

TensorI quantize(const TensorF& x, const QuantSpec& spec) {
  validate_quant_spec(spec);
  require_finite(x, "quantize");
  const double lo = static_cast<double>(spec.qn());
  const double hi = static_cast<double>(spec.qp());
  // Eigen's round is the half-away-from-zero std::round applied elementwise.
  return TensorI(x.shape(),
                 (x.array() / spec.scale).round().max(lo).min(hi).cast<std::int32_t>());
}

TensorF dequantize(const TensorI& codes, const QuantSpec& spec) {
  validate_quant_spec(spec);
  return TensorF(codes.shape(), codes.array().cast<double>() * spec.scale);
}

TensorF quant_loss(const TensorF& x, const QuantSpec& spec) {
  const TensorF back = dequantize(quantize(x, spec), spec);
  return TensorF(x.shape(), (back.array() - x.array()).abs());
}

}  // namespace adderptq
