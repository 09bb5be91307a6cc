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
#ifndef ADDERPTQ_TOY_MODEL_HPP_
#define ADDERPTQ_TOY_MODEL_HPP_

#include <cstdint>

#include "adderptq/pipeline.hpp"

namespace adderptq {

/// Seeded generator of small full-precision adder networks. Real pretrained
/// checkpoints are not part of the toolkit, so these reproducible fixtures
/// anchor tests, demos, and CI. The first layer is a vanilla convolution
/// (networks keep their stem in full precision); the rest are adder layers.
///
/// Weight magnitudes are drawn per output channel as factor * (that layer's
/// input activation range), with the input range measured by probing the
/// partially built network. Factors above 1 put the channel in the
/// weight-clamp regime the method is built around; the bimodal switch mixes
/// in channels at roughly a tenth of the range, which makes grouped scales
/// visibly better than a single shared one.
struct ToyModelConfig {
  std::uint64_t seed = 0;
  Index layers = 3;
  Index height = 8;  // spatial extent the probe inputs use
  Index width = 8;
  Index input_channels = 3;
  Index channels = 8;  // output channels of every layer
  Index kernel = 3;
  Index pad = 1;
  Index stride = 1;
  double factor_lo = 1.1;
  double factor_hi = 1.8;
  bool bimodal = false;
};

FpModel make_toy_model(const ToyModelConfig& cfg = {});

/// Deterministic inputs matching the generator's nominal range: `count`
/// tensors of shape (h, w, channels) with elements uniform in
/// [-amplitude, amplitude].
std::vector<TensorF> make_toy_inputs(std::uint64_t seed, Index count, Index h, Index w,
                                     Index channels, double amplitude = 1.0);

}  // namespace adderptq

#endif  // ADDERPTQ_TOY_MODEL_HPP_
