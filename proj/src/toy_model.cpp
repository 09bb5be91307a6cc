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
#include "adderptq/toy_model.hpp"

#include <cmath>

#include "adderptq/rng.hpp"

namespace adderptq {
namespace {

TensorF random_tensor(Rng& rng, const Shape& shape, double amplitude) {
  ArrayF values(shape.numel());
  for (Index i = 0; i < values.size(); ++i) values[i] = rng.uniform(-amplitude, amplitude);
  return TensorF(shape, values);
}

void validate_toy_config(const ToyModelConfig& cfg) {
  if (cfg.layers < 1 || cfg.height < 1 || cfg.width < 1 || cfg.input_channels < 1 ||
      cfg.channels < 1 || cfg.kernel < 1 || cfg.stride < 1 || cfg.pad < 0) {
    throw ConfigError("toy model dims must be positive (pad >= 0)");
  }
  if (!(cfg.factor_lo > 0.0) || !(cfg.factor_hi >= cfg.factor_lo)) {
    throw ConfigError("toy model weight factors must satisfy 0 < lo <= hi");
  }
}

}  // namespace

FpModel make_toy_model(const ToyModelConfig& cfg) {
  validate_toy_config(cfg);
  Rng rng(cfg.seed);

  // The probes track the activation range layer by layer, so each new
  // layer's weights can be sized relative to what actually feeds it.
  std::vector<TensorF> probes;
  for (Index p = 0; p < 4; ++p) {
    probes.push_back(
        random_tensor(rng, Shape({cfg.height, cfg.width, cfg.input_channels}), 1.0));
  }
  double input_range = 1.0;

  FpModel model;
  for (Index i = 0; i < cfg.layers; ++i) {
    LayerDef layer;
    layer.kind = (i == 0) ? LayerKind::kVanilla : LayerKind::kAdder;
    layer.conv = ConvConfig{cfg.stride, cfg.pad};
    const Index c_in = (i == 0) ? cfg.input_channels : cfg.channels;
    const Shape w_shape({cfg.kernel, cfg.kernel, c_in, cfg.channels});

    ArrayF weights(w_shape.numel());
    const Index per_channel = w_shape.numel() / cfg.channels;
    for (Index c = 0; c < cfg.channels; ++c) {
      double factor = rng.uniform(cfg.factor_lo, cfg.factor_hi);
      if (cfg.bimodal && rng.uniform() < 0.5) factor = rng.uniform(0.08, 0.12);
      const double amplitude = factor * input_range;
      for (Index e = 0; e < per_channel; ++e) {
        weights[e * cfg.channels + c] = rng.uniform(-amplitude, amplitude);
      }
    }
    layer.weights = TensorF(w_shape, weights);

    layer.bias.resize(static_cast<std::size_t>(cfg.channels));
    for (double& b : layer.bias) b = rng.uniform(-0.5, 0.5);

    model.layers.push_back(layer);
    for (TensorF& probe : probes) {
      probe = layer_forward_reference(layer, probe);
    }
    input_range = 0.0;
    for (const TensorF& probe : probes) {
      input_range = std::max(input_range, probe.array().abs().maxCoeff());
    }
    if (input_range == 0.0) input_range = 1.0;
  }
  validate_model(model);
  return model;
}

std::vector<TensorF> make_toy_inputs(std::uint64_t seed, Index count, Index h, Index w,
                                     Index channels, double amplitude) {
  if (count < 1 || h < 1 || w < 1 || channels < 1) {
    throw ConfigError("toy inputs need positive count and dims");
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw ConfigError("toy input amplitude must be positive and finite");
  }
  Rng rng(seed);
  std::vector<TensorF> inputs;
  inputs.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    inputs.push_back(random_tensor(rng, Shape({h, w, channels}), amplitude));
  }
  return inputs;
}

}  // namespace adderptq
