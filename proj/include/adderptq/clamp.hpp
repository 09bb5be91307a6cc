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
#ifndef ADDERPTQ_CLAMP_HPP_
#define ADDERPTQ_CLAMP_HPP_

#include <utility>
#include <vector>

#include "adderptq/tensor.hpp"

namespace adderptq {

/// A layer's weights after the range clamp, plus the per-channel bias that
/// makes the clamp exact: for any input with |x| <= r_x,
///   adder response of original weights
///     == adder response of clamped weights + bias_fold[channel].
struct ClampedLayer {
  TensorF w_clamped;
  std::vector<double> bias_fold;
  double r_x = 0.0;
};

/// Activation range picked from calibration data.
struct ActRange {
  double r_x = 0.0;
  double alpha = 1.0;
  Index n = 0;  // calibration values the choice was based on
};

/// How r_x is derived from the sorted absolute calibration values: the
/// default keeps the alpha-quantile (alpha = 1 keeps the max); ScaledMax is
/// the alternative max * alpha form, kept only for diagnostics comparisons.
enum class RangeRule { kQuantile, kScaledMax };

/// Clamps one output channel's weights (rank-3) into [-r_x, r_x] and returns
/// the compensating bias b = -sum(max(|w| - r_x, 0)). Exact for any input
/// with every |x| <= r_x: each clipped weight sits beyond the whole input
/// range, so clipping shortens every |x - w| distance by the same clipped
/// amount, and b restores the total.
std::pair<TensorF, double> clamp_weights(const TensorF& w_c, double r_x);

/// clamp_weights over all output channels of a rank-4 weight tensor.
ClampedLayer clamp_layer(const TensorF& w, double r_x);

/// Picks r_x from a layer's calibration magnitudes: sort ascending, take the
/// element at round(alpha * (n - 1)) with ties rounded away from zero.
ActRange activation_range(std::vector<double> abs_values, double alpha,
                          RangeRule rule = RangeRule::kQuantile);

/// Elementwise clamp of runtime activations into [-r_x, r_x]; applied ahead
/// of quantized inference so the weight clamp's precondition holds on data
/// the calibration set never saw.
TensorF clamp_activations(const TensorF& x, double r_x);

/// Per-layer calibration accumulator. Batches can be absorbed on different
/// workers and merged; merging is plain concatenation, so the range read off
/// a merge equals the range of the values seen in one pass.
class CalibReservoir {
 public:
  void add(const TensorF& x);
  void merge(const CalibReservoir& other);
  Index count() const { return static_cast<Index>(abs_values_.size()); }
  ActRange range(double alpha, RangeRule rule = RangeRule::kQuantile) const;

 private:
  std::vector<double> abs_values_;
};

}  // namespace adderptq

#endif  // ADDERPTQ_CLAMP_HPP_
