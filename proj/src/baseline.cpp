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
#include "adderptq/baseline.hpp"

#include <cmath>
#include <cstdint>

#include "adderptq/quantize.hpp"

namespace adderptq {
namespace {

constexpr double kDegenerateScale = 1e-12;

double max_abs(const TensorF& t) {
  double m = 0.0;
  for (Index i = 0; i < t.size(); ++i) m = std::max(m, std::abs(t.array()[i]));
  return m;
}

double shared_scale(double range, int bits) {
  if (range == 0.0) return kDegenerateScale;
  const double levels = static_cast<double>((std::int64_t{1} << bits) - 1);
  return 2.0 * range / levels;
}

std::int64_t code_of(double v, double s, double lo, double hi) {
  const double r = std::round(v / s);
  return static_cast<std::int64_t>(std::min(std::max(r, lo), hi));
}

}  // namespace

const char* scale_source_name(ScaleSource source) {
  return source == ScaleSource::kWeights ? "weights" : "activations";
}

double baseline_scale(const TensorF& x, const TensorF& w, int bits, ScaleSource source) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw ConfigError("bits must be in [2, 16], got " + std::to_string(bits));
  }
  return shared_scale(source == ScaleSource::kWeights ? max_abs(w) : max_abs(x), bits);
}

TensorF baseline_forward(const TensorF& x, const TensorF& w, const std::vector<double>& bias,
                         const ConvConfig& cfg, int bits, ScaleSource source) {
  const Shape out_shape = conv_output_shape(x.shape(), w.shape(), cfg);
  const Index c_out = w.shape().dim(3);
  if (!bias.empty() && static_cast<Index>(bias.size()) != c_out) {
    throw ShapeError("bias length does not match output channels");
  }

  const double s = baseline_scale(x, w, bits, source);
  const double lo = -std::ldexp(1.0, bits - 1);
  const double hi = std::ldexp(1.0, bits - 1) - 1.0;

  const Index h = x.shape().dim(0);
  const Index wx = x.shape().dim(1);
  const Index c_in = x.shape().dim(2);
  const Index d = w.shape().dim(0);
  const Index h_out = out_shape.dim(0);
  const Index w_out = out_shape.dim(1);

  std::vector<std::int64_t> x_bar(static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i) x_bar[static_cast<std::size_t>(i)] = code_of(x.array()[i], s, lo, hi);
  std::vector<std::int64_t> w_bar(static_cast<std::size_t>(w.size()));
  for (Index i = 0; i < w.size(); ++i) w_bar[static_cast<std::size_t>(i)] = code_of(w.array()[i], s, lo, hi);

  ArrayF out(out_shape.numel());
  for (Index m = 0; m < h_out; ++m) {
    for (Index n = 0; n < w_out; ++n) {
      for (Index c = 0; c < c_out; ++c) {
        std::int64_t acc = 0;
        for (Index i = 0; i < d; ++i) {
          for (Index j = 0; j < d; ++j) {
            const Index mi = m * cfg.stride + i - cfg.pad;
            const Index nj = n * cfg.stride + j - cfg.pad;
            const bool inside = mi >= 0 && mi < h && nj >= 0 && nj < wx;
            for (Index k = 0; k < c_in; ++k) {
              const std::int64_t xv =
                  inside ? x_bar[static_cast<std::size_t>((mi * wx + nj) * c_in + k)] : 0;
              const std::int64_t wv =
                  w_bar[static_cast<std::size_t>(((i * d + j) * c_in + k) * c_out + c)];
              acc -= std::abs(xv - wv);
            }
          }
        }
        const double b = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(c)];
        out[(m * w_out + n) * c_out + c] = static_cast<double>(acc) * s + b;
      }
    }
  }
  return TensorF(out_shape, out);
}

}  // namespace adderptq
