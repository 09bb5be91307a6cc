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
#ifndef ADDERPTQ_DIAGNOSTICS_HPP_
#define ADDERPTQ_DIAGNOSTICS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adderptq/baseline.hpp"
#include "adderptq/pipeline.hpp"

namespace adderptq {

/// Where a layer's quantization hurts. over_clamp_fraction is the share of
/// pre-clamp weight code mass cut off by the [qn, qp] clamp (sum over
/// elements of the magnitude beyond 2^(b-1), over the total magnitude);
/// bits_waste_fraction is the share of positive code levels the activations
/// never reach, (qp - max used code) / qp. Both are 0 when quantization is
/// comfortable and approach 1 in the mismatched-range regimes the shared
/// scale forces.
struct LayerReport {
  double over_clamp_fraction = 0.0;
  double bits_waste_fraction = 0.0;
  double weight_quant_loss = 0.0;  // mean |dequantized - original| of weights
  double act_quant_loss = 0.0;     // same for the layer's input activations
  double output_l1_error = 0.0;    // mean |FP output - quantized output|
};

/// Cost of grouped inference in FLOPs, counting one quantize or dequantize
/// as one op per element: the integer convolution itself, weight
/// quantization, g activation-quantization passes, and the output
/// dequantize.
struct FlopsReport {
  std::int64_t flops_all = 0;   // at the requested group count
  std::int64_t flops_base = 0;  // same layer at g = 1
  double relative_flops = 1.0;  // flops_all / flops_base
  /// Closed-form overhead (g-1)k^2 c / (18k^2 c^2 + k^2 c + 9c^2 + 3k^2 c),
  /// defined only for d=3, c_in=c_out, h=w, pad=stride=1.
  std::optional<double> closed_form_r;
};

/// Quantizes weights and activations with ONE shared scale drawn from the
/// chosen side and measures the damage: the clamped-mass and wasted-bits
/// fractions, both quantization losses, and the output error of the
/// shared-scale forward against the float adder response (stride 1, no
/// padding).
LayerReport prop1_analysis(const TensorF& w, const TensorF& x, int bits, ScaleSource source);

/// Analytical cost of one grouped adder layer against its g=1 version.
FlopsReport flops_overhead(Index h, Index w, Index d, Index c_in, Index c_out, Index g,
                           Index pad, Index stride);

/// Fills output_l1_error from the two outputs and carries the other four
/// fields through from `costs`, range-checking everything.
LayerReport layer_report(const TensorF& fp_out, const TensorF& q_out, const LayerReport& costs);

/// One analyzed layer of a quantized model next to its float original.
struct LayerRow {
  Index index = 0;
  LayerKind kind = LayerKind::kAdder;
  Index groups = 0;  // 0 for pass-through layers
  double r_x = 0.0;
  LayerReport report;    // grouped pipeline numbers
  LayerReport baseline;  // shared scale from activations, for comparison
  FlopsReport flops;
};

/// Runs the float and quantized forwards over the inputs and reports every
/// layer: grouped-pipeline losses and errors, the shared-scale baseline's
/// clamp and bits-waste fractions on the same data, and the FLOPs overhead
/// of the layer's group count. Quantities are averaged over the inputs.
std::vector<LayerRow> analyze_model(const FpModel& model, const QuantizedModel& qm,
                                    const std::vector<TensorF>& inputs);

/// Fixed-schema renderings of the analysis (documented in docs/report-formats.md).
std::string report_text(const std::vector<LayerRow>& rows);
std::string report_csv(const std::vector<LayerRow>& rows);

}  // namespace adderptq

#endif  // ADDERPTQ_DIAGNOSTICS_HPP_
