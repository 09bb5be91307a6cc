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
#include "adderptq/clamp.hpp"

#include <algorithm>
#include <cmath>

namespace adderptq {
namespace {

void require_range(double r_x) {
  // r_x == 0 is the all-zero-calibration degenerate case and stays legal;
  // the quantizer's scale floor keeps that path finite.
  if (!std::isfinite(r_x) || r_x < 0.0) {
    throw CalibrationError("activation range must be finite and >= 0, got " +
                           std::to_string(r_x));
  }
}

}  // namespace

std::pair<TensorF, double> clamp_weights(const TensorF& w_c, double r_x) {
  require_range(r_x);
  TensorF clamped(w_c.shape(), w_c.array().max(-r_x).min(r_x));
  const double bias = -(w_c.array().abs() - r_x).max(0.0).sum();
  return {std::move(clamped), bias};
}

ClampedLayer clamp_layer(const TensorF& w, double r_x) {
  require_weight_shape(w.shape());
  require_range(r_x);
  const Index c_out = w.shape().dim(3);
  ClampedLayer out;
  out.r_x = r_x;
  out.w_clamped = TensorF(w.shape(), w.array().max(-r_x).min(r_x));
  out.bias_fold.resize(static_cast<std::size_t>(c_out));
  for (Index c = 0; c < c_out; ++c) {
    out.bias_fold[static_cast<std::size_t>(c)] =
        -(channel_slice(w, c).array().abs() - r_x).max(0.0).sum();
  }
  return out;
}

ActRange activation_range(std::vector<double> abs_values, double alpha, RangeRule rule) {
  if (abs_values.empty()) throw CalibrationError("calibration set is empty");
  if (!std::isfinite(alpha) || alpha <= 0.0 || alpha > 1.0) {
    throw ConfigError("alpha must be in (0, 1], got " + std::to_string(alpha));
  }
  for (double v : abs_values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw CalibrationError("calibration magnitudes must be finite and >= 0");
    }
  }
  std::sort(abs_values.begin(), abs_values.end());
  const Index n = static_cast<Index>(abs_values.size());
  ActRange range;
  range.alpha = alpha;
  range.n = n;
  if (rule == RangeRule::kScaledMax) {
    range.r_x = abs_values.back() * alpha;
  } else {
    const auto pick = static_cast<Index>(std::round(alpha * static_cast<double>(n - 1)));
    range.r_x = abs_values[static_cast<std::size_t>(std::min(pick, n - 1))];
  }
  return range;
}

TensorF clamp_activations(const TensorF& x, double r_x) {
  require_range(r_x);
  return TensorF(x.shape(), x.array().max(-r_x).min(r_x));
}

void CalibReservoir::add(const TensorF& x) {
  if (!x.array().isFinite().all()) {
    throw CalibrationError("calibration tensor contains a non-finite value");
  }
  abs_values_.reserve(abs_values_.size() + static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i) abs_values_.push_back(std::abs(x.array()[i]));
}

void CalibReservoir::merge(const CalibReservoir& other) {
  abs_values_.insert(abs_values_.end(), other.abs_values_.begin(), other.abs_values_.end());
}

ActRange CalibReservoir::range(double alpha, RangeRule rule) const {
  return activation_range(abs_values_, alpha, rule);
}

}  // namespace adderptq
