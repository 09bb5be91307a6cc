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
#ifndef ADDERPTQ_PIPELINE_HPP_
#define ADDERPTQ_PIPELINE_HPP_

#include <variant>
#include <vector>

#include "adderptq/clamp.hpp"
#include "adderptq/conv.hpp"
#include "adderptq/grouping.hpp"
#include "adderptq/quantize.hpp"
#include "adderptq/tensor.hpp"

namespace adderptq {

/// Adder layers get quantized; vanilla layers (typically the first and last
/// of a network) run in full precision end to end.
enum class LayerKind { kVanilla, kAdder };

const char* layer_kind_name(LayerKind kind);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerDef {
  LayerKind kind = LayerKind::kAdder;
  TensorF weights;  // (d, d, c_in, c_out)
  ConvConfig conv;
  std::vector<double> bias;  // empty or one value per output channel
};

struct FpModel {
  std::vector<LayerDef> layers;
};

/// Checks weight ranks, bias lengths, conv configs, and that each layer's
/// output channels feed the next layer's input channels.
void validate_model(const FpModel& model);

/// Everything needed to run one adder layer in integers: the channel
/// partition, one QuantSpec per group, quantized weights stored per group in
/// concat order, and the float-side constants (total bias, activation
/// range).
struct QuantizedLayer {
  GroupPlan plan;
  std::vector<QuantSpec> specs;
  std::vector<TensorI> w_bar;      // group j: (d, d, c_in, |I_j|)
  std::vector<double> bias_total;  // original bias + bias_fold, channel order
  std::vector<double> bias_fold;   // the clamp compensation alone, for reports
  ActRange act_range;
  ConvConfig conv;
  Shape weight_shape;  // original (d, d, c_in, c_out)
};

struct QuantizedModel {
  std::vector<std::variant<LayerDef, QuantizedLayer>> layers;
  int bits = 8;
  GroupingConfig grouping;
  double alpha = 1.0;
};

/// Enforces every structural invariant a well-formed quantized model must
/// satisfy (valid plans, specs per group, codes within [qn, qp], bias
/// lengths, consistent channel chain). Called after quantization and again
/// after deserialization.
void validate_quantized_model(const QuantizedModel& qm);

Index model_input_channels(const QuantizedModel& qm);

/// Full-precision forward pass, the comparison oracle for everything else.
TensorF forward_reference(const FpModel& model, const TensorF& x);

/// forward_reference that also returns every layer's output, index-aligned
/// with model.layers. Used by calibration and per-layer diagnostics.
std::vector<TensorF> forward_reference_taps(const FpModel& model, const TensorF& x);

/// Runs the full-precision network over the calibration inputs and selects
/// each layer's activation range from the magnitudes feeding that layer.
/// Ranges are reported for every layer (pass-through layers simply never
/// consume theirs).
std::vector<ActRange> calibrate(const FpModel& model, const std::vector<TensorF>& inputs,
                                double alpha, RangeRule rule = RangeRule::kQuantile);

struct QuantizeOptions {
  /// Applies the lossless range clamp to groups whose weight range exceeds
  /// r_x. Off is only useful for measuring what the clamp buys; scales are
  /// chosen the same way either way.
  bool weight_clamp = true;
};

/// Per adder layer: cluster channels, clamp the groups that overshoot the
/// layer's activation range (folding the cut mass into the bias), pick
/// per-group scales, and quantize the weights group by group.
QuantizedModel quantize_model(const FpModel& model, const std::vector<ActRange>& ranges,
                              int bits, const GroupingConfig& grouping,
                              const QuantizeOptions& opts = {});

/// Integer forward pass: per quantized layer, clamp activations to r_x,
/// then for each group quantize the input with the group's scale, run the
/// integer adder convolution, and scale back; group outputs are concatenated,
/// restored to original channel order, and offset by bias_total.
TensorF forward_quantized(const QuantizedModel& qm, const TensorF& x);

std::vector<TensorF> forward_quantized_taps(const QuantizedModel& qm, const TensorF& x);

/// Single-layer building blocks of the two forwards, exposed for reports.
TensorF layer_forward_reference(const LayerDef& layer, const TensorF& x);
TensorF layer_forward_quantized(const QuantizedLayer& layer, const TensorF& x);

}  // namespace adderptq

#endif  // ADDERPTQ_PIPELINE_HPP_
