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
#ifndef ADDERPTQ_BASELINE_HPP_
#define ADDERPTQ_BASELINE_HPP_

#include <vector>

#include "adderptq/conv.hpp"
#include "adderptq/tensor.hpp"

namespace adderptq {

/// Which tensor's magnitude range provides the single shared scale of the
/// baseline quantizer. The additive kernel mixes weights and activations
/// inside |x - w|, so both must share one scale; picking it from one side
/// clamps or starves the other, which is exactly the failure mode the
/// grouped pipeline exists to fix.
enum class ScaleSource { kWeights, kActivations };

const char* scale_source_name(ScaleSource source);

/// One shared-scale quantized layer pass:
///   s from max|w| or max|x| per `source`,
///   x_bar = quantize(x, s), w_bar = quantize(w, s),
///   y = s * quantized_adder_conv(x_bar, w_bar) + bias.
/// This path is written directly against scalar loops, on purpose: it is the
/// reference the grouped pipeline must collapse to bit-for-bit when grouping
/// and clamping are turned off, so it shares no composition code with it.
/// `bias` may be empty (treated as zeros) or one value per output channel.
TensorF baseline_forward(const TensorF& x, const TensorF& w, const std::vector<double>& bias,
                         const ConvConfig& cfg, int bits, ScaleSource source);

/// The shared scale the baseline would use, exposed for diagnostics.
double baseline_scale(const TensorF& x, const TensorF& w, int bits, ScaleSource source);

}  // namespace adderptq

#endif  // ADDERPTQ_BASELINE_HPP_
