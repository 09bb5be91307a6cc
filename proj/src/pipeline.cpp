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
#include "adderptq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace adderptq {
namespace {

TensorF add_channel_bias(const TensorF& y, const std::vector<double>& bias) {
  if (bias.empty()) return y;
  const Index c_out = y.shape().dim(y.rank() - 1);
  if (static_cast<Index>(bias.size()) != c_out) {
    throw ShapeError("bias length does not match output channels");
  }
  ArrayF out = y.array();
  const Index rows = y.size() / c_out;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < c_out; ++c) out[r * c_out + c] += bias[static_cast<std::size_t>(c)];
  }
  return TensorF(y.shape(), out);
}

void validate_layer(const LayerDef& layer, std::size_t index) {
  const std::string where = "layer " + std::to_string(index) + ": ";
  require_weight_shape(layer.weights.shape());
  validate_conv_config(layer.conv);
  if (!layer.weights.array().isFinite().all()) {
    throw ShapeError(where + "weights contain a non-finite value");
  }
  const Index c_out = layer.weights.shape().dim(3);
  if (!layer.bias.empty() && static_cast<Index>(layer.bias.size()) != c_out) {
    throw ShapeError(where + "bias length " + std::to_string(layer.bias.size()) +
                     " does not match " + std::to_string(c_out) + " output channels");
  }
  for (double b : layer.bias) {
    if (!std::isfinite(b)) throw ShapeError(where + "bias contains a non-finite value");
  }
}

Index layer_in_channels(const std::variant<LayerDef, QuantizedLayer>& layer) {
  if (const auto* fp = std::get_if<LayerDef>(&layer)) return fp->weights.shape().dim(2);
  return std::get<QuantizedLayer>(layer).weight_shape.dim(2);
}

Index layer_out_channels(const std::variant<LayerDef, QuantizedLayer>& layer) {
  if (const auto* fp = std::get_if<LayerDef>(&layer)) return fp->weights.shape().dim(3);
  return std::get<QuantizedLayer>(layer).weight_shape.dim(3);
}

void validate_quantized_layer(const QuantizedLayer& layer, std::size_t index) {
  const std::string where = "layer " + std::to_string(index) + ": ";
  require_weight_shape(layer.weight_shape);
  validate_conv_config(layer.conv);
  const Index c_out = layer.weight_shape.dim(3);
  validate_group_plan(layer.plan, c_out);
  const Index g = layer.plan.num_groups();
  if (static_cast<Index>(layer.specs.size()) != g ||
      static_cast<Index>(layer.w_bar.size()) != g) {
    throw ShapeError(where + "specs/weights do not match the group count");
  }
  if (static_cast<Index>(layer.bias_total.size()) != c_out ||
      static_cast<Index>(layer.bias_fold.size()) != c_out) {
    throw ShapeError(where + "bias length does not match output channels");
  }
  for (double b : layer.bias_total) {
    if (!std::isfinite(b)) throw ShapeError(where + "bias contains a non-finite value");
  }
  if (!std::isfinite(layer.act_range.r_x) || layer.act_range.r_x < 0.0) {
    throw ShapeError(where + "activation range must be finite and >= 0");
  }
  for (Index j = 0; j < g; ++j) {
    const auto& spec = layer.specs[static_cast<std::size_t>(j)];
    validate_quant_spec(spec);
    const auto& wb = layer.w_bar[static_cast<std::size_t>(j)];
    const Shape expect({layer.weight_shape.dim(0), layer.weight_shape.dim(1),
                        layer.weight_shape.dim(2),
                        static_cast<Index>(layer.plan.groups[static_cast<std::size_t>(j)].size())});
    if (wb.shape() != expect) {
      throw ShapeError(where + "group " + std::to_string(j) + " weight shape " +
                       wb.shape().to_string() + " does not match plan " + expect.to_string());
    }
    if ((wb.array() < spec.qn()).any() || (wb.array() > spec.qp()).any()) {
      throw ShapeError(where + "group " + std::to_string(j) + " has codes outside [qn, qp]");
    }
  }
}

}  // namespace

const char* layer_kind_name(LayerKind kind) {
  return kind == LayerKind::kVanilla ? "vanilla" : "adder";
}

LayerKind layer_kind_from_name(const std::string& name) {
  if (name == "vanilla") return LayerKind::kVanilla;
  if (name == "adder") return LayerKind::kAdder;
  throw ParseError("unknown layer kind '" + name + "' (expected vanilla|adder)");
}

void validate_model(const FpModel& model) {
  if (model.layers.empty()) throw ShapeError("model has no layers");
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    validate_layer(model.layers[i], i);
    if (i > 0) {
      const Index prev_out = model.layers[i - 1].weights.shape().dim(3);
      const Index cur_in = model.layers[i].weights.shape().dim(2);
      if (prev_out != cur_in) {
        throw ShapeError("layer " + std::to_string(i) + " expects " + std::to_string(cur_in) +
                         " input channels but layer " + std::to_string(i - 1) + " produces " +
                         std::to_string(prev_out));
      }
    }
  }
}

void validate_quantized_model(const QuantizedModel& qm) {
  if (qm.layers.empty()) throw ShapeError("model has no layers");
  if (qm.bits < kMinBits || qm.bits > kMaxBits) {
    throw ConfigError("bits must be in [2, 16], got " + std::to_string(qm.bits));
  }
  if (!std::isfinite(qm.alpha) || qm.alpha <= 0.0 || qm.alpha > 1.0) {
    throw ConfigError("alpha must be in (0, 1], got " + std::to_string(qm.alpha));
  }
  for (std::size_t i = 0; i < qm.layers.size(); ++i) {
    if (const auto* fp = std::get_if<LayerDef>(&qm.layers[i])) {
      validate_layer(*fp, i);
    } else {
      validate_quantized_layer(std::get<QuantizedLayer>(qm.layers[i]), i);
    }
    if (i > 0 && layer_out_channels(qm.layers[i - 1]) != layer_in_channels(qm.layers[i])) {
      throw ShapeError("layer " + std::to_string(i) + " channel chain is inconsistent");
    }
  }
}

Index model_input_channels(const QuantizedModel& qm) {
  if (qm.layers.empty()) throw ShapeError("model has no layers");
  return layer_in_channels(qm.layers.front());
}

TensorF layer_forward_reference(const LayerDef& layer, const TensorF& x) {
  const TensorF y = layer.kind == LayerKind::kVanilla
                        ? vanilla_conv(x, layer.weights, layer.conv)
                        : adder_conv(x, layer.weights, layer.conv);
  return add_channel_bias(y, layer.bias);
}

std::vector<TensorF> forward_reference_taps(const FpModel& model, const TensorF& x) {
  validate_model(model);
  std::vector<TensorF> taps;
  taps.reserve(model.layers.size());
  TensorF cur = x;
  for (const LayerDef& layer : model.layers) {
    cur = layer_forward_reference(layer, cur);
    taps.push_back(cur);
  }
  return taps;
}

TensorF forward_reference(const FpModel& model, const TensorF& x) {
  return forward_reference_taps(model, x).back();
}

std::vector<ActRange> calibrate(const FpModel& model, const std::vector<TensorF>& inputs,
                                double alpha, RangeRule rule) {
  validate_model(model);
  if (inputs.empty()) throw CalibrationError("calibration set is empty");
  std::vector<CalibReservoir> feeds(model.layers.size());
  for (const TensorF& input : inputs) {
    require_activation_shape(input.shape());
    TensorF cur = input;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
      feeds[i].add(cur);
      cur = layer_forward_reference(model.layers[i], cur);
    }
  }
  std::vector<ActRange> ranges;
  ranges.reserve(feeds.size());
  for (const CalibReservoir& feed : feeds) ranges.push_back(feed.range(alpha, rule));
  return ranges;
}

QuantizedModel quantize_model(const FpModel& model, const std::vector<ActRange>& ranges,
                              int bits, const GroupingConfig& grouping,
                              const QuantizeOptions& opts) {
  validate_model(model);
  if (bits < kMinBits || bits > kMaxBits) {
    throw ConfigError("bits must be in [2, 16], got " + std::to_string(bits));
  }
  if (ranges.size() != model.layers.size()) {
    throw ConfigError("have " + std::to_string(ranges.size()) + " activation ranges for " +
                      std::to_string(model.layers.size()) + " layers");
  }

  QuantizedModel qm;
  qm.bits = bits;
  qm.grouping = grouping;
  qm.alpha = ranges.front().alpha;
  qm.layers.reserve(model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const LayerDef& layer = model.layers[i];
    if (layer.kind == LayerKind::kVanilla) {
      qm.layers.emplace_back(layer);
      continue;
    }

    QuantizedLayer ql;
    ql.conv = layer.conv;
    ql.weight_shape = layer.weights.shape();
    ql.act_range = ranges[i];
    ql.plan = make_group_plan(layer.weights, grouping);
    const double r_x = ql.act_range.r_x;
    ql.specs = group_scales(ql.plan, r_x, bits);

    const Index c_out = layer.weights.shape().dim(3);
    ql.bias_fold.assign(static_cast<std::size_t>(c_out), 0.0);
    ql.w_bar.reserve(ql.plan.groups.size());
    for (std::size_t j = 0; j < ql.plan.groups.size(); ++j) {
      const auto& members = ql.plan.groups[j];
      TensorF wg = gather_last_dim(layer.weights, members);
      if (opts.weight_clamp && ql.plan.group_max[j] > r_x) {
        ClampedLayer cl = clamp_layer(wg, r_x);
        wg = cl.w_clamped;
        for (std::size_t p = 0; p < members.size(); ++p) {
          ql.bias_fold[static_cast<std::size_t>(members[p])] = cl.bias_fold[p];
        }
      }
      ql.w_bar.push_back(quantize(wg, ql.specs[j]));
    }

    ql.bias_total.resize(static_cast<std::size_t>(c_out));
    for (Index c = 0; c < c_out; ++c) {
      const double orig = layer.bias.empty() ? 0.0 : layer.bias[static_cast<std::size_t>(c)];
      ql.bias_total[static_cast<std::size_t>(c)] =
          orig + ql.bias_fold[static_cast<std::size_t>(c)];
    }
    qm.layers.emplace_back(std::move(ql));
  }
  validate_quantized_model(qm);
  return qm;
}

TensorF layer_forward_quantized(const QuantizedLayer& layer, const TensorF& x) {
  const TensorF xc = clamp_activations(x, layer.act_range.r_x);
  std::vector<TensorF> parts;
  parts.reserve(layer.w_bar.size());
  for (std::size_t j = 0; j < layer.w_bar.size(); ++j) {
    const QuantSpec& spec = layer.specs[j];
    const TensorI x_bar = quantize(xc, spec);
    const TensorI y_bar = quantized_adder_conv(x_bar, layer.w_bar[j], layer.conv);
    parts.push_back(dequantize(y_bar, spec));
  }
  const TensorF merged = scatter_last_dim(concat_last_dim(std::span<const TensorF>(parts)),
                                          layer.plan.restore);
  return add_channel_bias(merged, layer.bias_total);
}

std::vector<TensorF> forward_quantized_taps(const QuantizedModel& qm, const TensorF& x) {
  validate_quantized_model(qm);
  require_activation_shape(x.shape());
  std::vector<TensorF> taps;
  taps.reserve(qm.layers.size());
  TensorF cur = x;
  for (const auto& layer : qm.layers) {
    if (const auto* fp = std::get_if<LayerDef>(&layer)) {
      cur = layer_forward_reference(*fp, cur);
    } else {
      cur = layer_forward_quantized(std::get<QuantizedLayer>(layer), cur);
    }
    taps.push_back(cur);
  }
  return taps;
}

TensorF forward_quantized(const QuantizedModel& qm, const TensorF& x) {
  return forward_quantized_taps(qm, x).back();
}

}  // namespace adderptq
