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
#include "adderptq/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace adderptq {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void check_fraction(double f, const char* name) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw ArithmeticError(std::string(name) + " out of [0, 1]: " + fmt(f));
  }
}

// Share of pre-clamp code mass beyond the representable magnitude 2^(b-1).
// Codes are kept as doubles; extreme value/scale ratios would overflow any
// integer code type but stay exact here (counts are integers below 2^53).
double over_clamp_mass(const TensorF& v, const QuantSpec& spec) {
  const ArrayF codes = (v.array() / spec.scale).round().abs();
  const double total = codes.sum();
  if (total == 0.0) return 0.0;
  const double bound = std::ldexp(1.0, spec.bits - 1);
  return (codes - bound).max(0.0).sum() / total;
}

// Positive code levels never reached by the quantized activations. A code
// saturated at qn counts as full usage of the magnitude axis.
double bits_waste(const TensorI& codes, const QuantSpec& spec) {
  const double qp = static_cast<double>(spec.qp());
  const double used =
      std::min(static_cast<double>(codes.array().abs().maxCoeff()), qp);
  return (qp - used) / qp;
}

struct Accumulator {
  double sum = 0.0;
  Index n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
};

}  // namespace

LayerReport prop1_analysis(const TensorF& w, const TensorF& x, int bits, ScaleSource source) {
  require_weight_shape(w.shape());
  require_activation_shape(x.shape());
  const ConvConfig cfg;  // stride 1, no padding
  const Shape out_shape = conv_output_shape(x.shape(), w.shape(), cfg);
  (void)out_shape;

  const double s = baseline_scale(x, w, bits, source);
  const QuantSpec spec{bits, s};

  LayerReport report;
  report.over_clamp_fraction = over_clamp_mass(w, spec);
  report.bits_waste_fraction = bits_waste(quantize(x, spec), spec);
  report.weight_quant_loss = quant_loss(w, spec).array().mean();
  report.act_quant_loss = quant_loss(x, spec).array().mean();

  const TensorF fp = adder_conv(x, w, cfg);
  const TensorF q = baseline_forward(x, w, {}, cfg, bits, source);
  report.output_l1_error = (fp.array() - q.array()).abs().mean();
  check_fraction(report.over_clamp_fraction, "over_clamp_fraction");
  check_fraction(report.bits_waste_fraction, "bits_waste_fraction");
  return report;
}

FlopsReport flops_overhead(Index h, Index w, Index d, Index c_in, Index c_out, Index g,
                           Index pad, Index stride) {
  if (h < 1 || w < 1 || d < 1 || c_in < 1 || c_out < 1 || g < 1 || stride < 1 || pad < 0) {
    throw ConfigError("flops_overhead requires positive dims, g >= 1, stride >= 1, pad >= 0");
  }
  const Index h_out = (h - d + 2 * pad) / stride + 1;
  const Index w_out = (w - d + 2 * pad) / stride + 1;
  if (h - d + 2 * pad < 0 || w - d + 2 * pad < 0) {
    throw ConfigError("kernel exceeds the padded input extent");
  }

  // One grouped layer costs: the integer adder convolution, quantizing the
  // weights once, quantizing the activations once per group, and
  // dequantizing the output; quantize/dequantize count one op per element.
  const auto flops = [&](Index groups) -> std::int64_t {
    const auto conv = std::int64_t{2} * h * w * (c_in * d * d + 1) * c_out;
    const auto w_quant = static_cast<std::int64_t>(c_in) * d * d * c_out;
    const auto x_quant = static_cast<std::int64_t>(groups) * h * w * c_in;
    const auto dequant = static_cast<std::int64_t>(h_out) * w_out * c_out;
    return conv + w_quant + x_quant + dequant;
  };

  FlopsReport report;
  report.flops_all = flops(g);
  report.flops_base = flops(1);
  report.relative_flops =
      static_cast<double>(report.flops_all) / static_cast<double>(report.flops_base);
  if (d == 3 && c_in == c_out && h == w && pad == 1 && stride == 1) {
    const double k2 = static_cast<double>(h) * static_cast<double>(h);
    const double c = static_cast<double>(c_in);
    report.closed_form_r = (static_cast<double>(g - 1) * k2 * c) /
                           (18.0 * k2 * c * c + k2 * c + 9.0 * c * c + 3.0 * k2 * c);
  }
  return report;
}

LayerReport layer_report(const TensorF& fp_out, const TensorF& q_out, const LayerReport& costs) {
  if (fp_out.shape() != q_out.shape()) {
    throw ShapeError("cannot compare outputs of shapes " + fp_out.shape().to_string() +
                     " and " + q_out.shape().to_string());
  }
  check_fraction(costs.over_clamp_fraction, "over_clamp_fraction");
  check_fraction(costs.bits_waste_fraction, "bits_waste_fraction");
  LayerReport report = costs;
  report.output_l1_error = (fp_out.array() - q_out.array()).abs().mean();
  return report;
}

std::vector<LayerRow> analyze_model(const FpModel& model, const QuantizedModel& qm,
                                    const std::vector<TensorF>& inputs) {
  validate_model(model);
  validate_quantized_model(qm);
  if (inputs.empty()) throw ConfigError("analysis needs at least one input");
  if (model.layers.size() != qm.layers.size()) {
    throw ShapeError("float and quantized models have different layer counts");
  }
  for (const TensorF& x : inputs) {
    if (x.shape() != inputs.front().shape()) {
      throw ShapeError("analysis inputs must share one shape");
    }
  }

  const std::size_t n_layers = model.layers.size();
  std::vector<Accumulator> act_loss(n_layers), waste(n_layers), out_err(n_layers);
  std::vector<Accumulator> base_clamp(n_layers), base_waste(n_layers);
  std::vector<Shape> in_shapes(n_layers);

  for (const TensorF& x : inputs) {
    const std::vector<TensorF> fp_taps = forward_reference_taps(model, x);
    const std::vector<TensorF> q_taps = forward_quantized_taps(qm, x);
    for (std::size_t i = 0; i < n_layers; ++i) {
      const TensorF& fp_in = (i == 0) ? x : fp_taps[i - 1];
      const TensorF& q_in = (i == 0) ? x : q_taps[i - 1];
      in_shapes[i] = fp_in.shape();
      out_err[i].add((fp_taps[i].array() - q_taps[i].array()).abs().mean());

      const auto* ql = std::get_if<QuantizedLayer>(&qm.layers[i]);
      if (ql == nullptr) continue;

      const TensorF xc = clamp_activations(q_in, ql->act_range.r_x);
      for (const QuantSpec& spec : ql->specs) {
        act_loss[i].add(quant_loss(xc, spec).array().mean());
        waste[i].add(bits_waste(quantize(xc, spec), spec));
      }

      const LayerReport base =
          prop1_analysis(model.layers[i].weights, fp_in, qm.bits, ScaleSource::kActivations);
      base_clamp[i].add(base.over_clamp_fraction);
      base_waste[i].add(base.bits_waste_fraction);
    }
  }

  std::vector<LayerRow> rows;
  rows.reserve(n_layers);
  for (std::size_t i = 0; i < n_layers; ++i) {
    LayerRow row;
    row.index = static_cast<Index>(i);
    row.kind = model.layers[i].kind;
    row.report.output_l1_error = out_err[i].mean();

    const Shape& ws = model.layers[i].weights.shape();
    const ConvConfig& cc = model.layers[i].conv;
    Index row_groups = 1;

    if (const auto* ql = std::get_if<QuantizedLayer>(&qm.layers[i])) {
      row.groups = ql->plan.num_groups();
      row_groups = row.groups;
      row.r_x = ql->act_range.r_x;
      row.report.act_quant_loss = act_loss[i].mean();
      row.report.bits_waste_fraction = waste[i].mean();
      row.baseline.over_clamp_fraction = base_clamp[i].mean();
      row.baseline.bits_waste_fraction = base_waste[i].mean();

      // Weight-side quantities do not depend on the inputs: reconstruct the
      // per-group float weights exactly as quantization saw them (clamped
      // iff the group overshot r_x and the clamp actually folded a bias).
      double loss_sum = 0.0;
      double over_mass = 0.0;
      double total_mass = 0.0;
      Index n_elems = 0;
      const double bound = std::ldexp(1.0, qm.bits - 1);
      for (std::size_t j = 0; j < ql->plan.groups.size(); ++j) {
        const auto& members = ql->plan.groups[j];
        TensorF wg = gather_last_dim(model.layers[i].weights, members);
        bool folded = false;
        for (Index c : members) {
          folded = folded || ql->bias_fold[static_cast<std::size_t>(c)] != 0.0;
        }
        if (folded) wg = clamp_activations(wg, ql->act_range.r_x);
        const QuantSpec& spec = ql->specs[j];
        loss_sum += quant_loss(wg, spec).array().sum();
        n_elems += wg.size();
        const ArrayF codes = (wg.array() / spec.scale).round().abs();
        over_mass += (codes - bound).max(0.0).sum();
        total_mass += codes.sum();
      }
      row.report.weight_quant_loss = loss_sum / static_cast<double>(n_elems);
      row.report.over_clamp_fraction = total_mass > 0.0 ? over_mass / total_mass : 0.0;
      check_fraction(row.report.over_clamp_fraction, "over_clamp_fraction");
      check_fraction(row.report.bits_waste_fraction, "bits_waste_fraction");
    }

    row.flops = flops_overhead(in_shapes[i].dim(0), in_shapes[i].dim(1), ws.dim(0), ws.dim(2),
                               ws.dim(3), row_groups, cc.pad, cc.stride);
    rows.push_back(row);
  }
  return rows;
}

std::string report_text(const std::vector<LayerRow>& rows) {
  std::ostringstream os;
  for (const LayerRow& row : rows) {
    os << "layer " << row.index << " (" << layer_kind_name(row.kind) << ")";
    if (row.groups > 0) {
      os << " groups=" << row.groups << " r_x=" << fmt(row.r_x);
    }
    os << "\n";
    os << "  over_clamp=" << fmt(row.report.over_clamp_fraction)
       << " bits_waste=" << fmt(row.report.bits_waste_fraction)
       << " weight_loss=" << fmt(row.report.weight_quant_loss)
       << " act_loss=" << fmt(row.report.act_quant_loss)
       << " output_l1=" << fmt(row.report.output_l1_error) << "\n";
    os << "  shared-scale baseline: over_clamp=" << fmt(row.baseline.over_clamp_fraction)
       << " bits_waste=" << fmt(row.baseline.bits_waste_fraction) << "\n";
    os << "  flops: total=" << row.flops.flops_all << " relative=" << fmt(row.flops.relative_flops);
    if (row.flops.closed_form_r) {
      os << " closed_form_r=" << fmt(*row.flops.closed_form_r);
    }
    os << "\n";
  }
  return os.str();
}

std::string report_csv(const std::vector<LayerRow>& rows) {
  std::ostringstream os;
  os << "layer,kind,groups,r_x,over_clamp_fraction,bits_waste_fraction,weight_quant_loss,"
        "act_quant_loss,output_l1_error,baseline_over_clamp_fraction,"
        "baseline_bits_waste_fraction,relative_flops\n";
  for (const LayerRow& row : rows) {
    os << row.index << ',' << layer_kind_name(row.kind) << ',' << row.groups << ','
       << fmt(row.r_x) << ',' << fmt(row.report.over_clamp_fraction) << ','
       << fmt(row.report.bits_waste_fraction) << ',' << fmt(row.report.weight_quant_loss) << ','
       << fmt(row.report.act_quant_loss) << ',' << fmt(row.report.output_l1_error) << ','
       << fmt(row.baseline.over_clamp_fraction) << ',' << fmt(row.baseline.bits_waste_fraction)
       << ',' << fmt(row.flops.relative_flops) << "\n";
  }
  return os.str();
}

}  // namespace adderptq
