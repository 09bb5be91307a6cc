/**
 * Copyright 2026 The adderptq Authors.
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

#include "adderptq/selfcheck.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <system_error>

#include "adderptq/clamp.hpp"
#include "adderptq/conv.hpp"
#include "adderptq/errors.hpp"
#include "adderptq/grouping.hpp"
#include "adderptq/model_store.hpp"
#include "adderptq/pipeline.hpp"
#include "adderptq/rng.hpp"
#include "adderptq/tensor.hpp"
#include "adderptq/toy_model.hpp"

namespace adderptq {
namespace {

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

TensorF random_tensor(Rng& rng, const Shape& shape, double lo, double hi) {
  ArrayF values(shape.numel());
  for (Index i = 0; i < values.size(); ++i) values[i] = rng.uniform(lo, hi);
  return TensorF(shape, values);
}

TensorI random_int_tensor(Rng& rng, const Shape& shape, std::int64_t lo, std::int64_t hi) {
  ArrayI values(shape.numel());
  for (Index i = 0; i < values.size(); ++i) {
    values[i] = static_cast<std::int32_t>(rng.uniform_int(lo, hi));
  }
  return TensorI(shape, values);
}

/// The clamp identity: with every input magnitude inside r_x, clamping the
/// weights and adding back the cut mass reproduces the exact adder response.
SelfCheckResult run_theorem1(std::uint64_t seed) {
  constexpr double kTol = 1e-9;
  Rng rng(seed ^ 0x7468656f72656d31ULL);
  double worst = 0.0;
  int trials = 0;

  for (Index d : {Index{1}, Index{3}}) {
    for (Index c_in : {Index{1}, Index{4}, Index{16}}) {
      for (Index pad : {Index{0}, Index{1}}) {
        for (int t = 0; t < 8; ++t) {
          const double r_x = rng.uniform(0.3, 2.0);
          const TensorF x = random_tensor(rng, Shape({6, 5, c_in}), -r_x, r_x);
          const TensorF w =
              random_tensor(rng, Shape({d, d, c_in, 2}), -3.0 * r_x, 3.0 * r_x);
          const ConvConfig cfg{1, pad};

          const TensorF lhs = adder_conv(x, w, cfg);
          const ClampedLayer cl = clamp_layer(w, r_x);
          const TensorF rhs = adder_conv(x, cl.w_clamped, cfg);

          const Index c_out = lhs.shape().dim(lhs.rank() - 1);
          for (Index i = 0; i < lhs.shape().numel(); ++i) {
            const double with_bias = rhs[i] + cl.bias_fold[i % c_out];
            worst = std::max(worst, std::abs(lhs[i] - with_bias));
          }
          ++trials;
        }
      }
    }
  }

  SelfCheckResult res{"theorem1", worst <= kTol, ""};
  res.detail = std::to_string(trials) + " random layer/range pairs, max gap " + fmt_g(worst) +
               (res.passed ? "" : " exceeds " + fmt_g(kTol));
  return res;
}

/// Brute-force oracle for the exact 1-D clustering: every partition of the
/// sorted features into g contiguous nonempty blocks, costed by direct
/// summation in ascending order (the same convention the optimizer uses, so
/// agreement is exact rather than approximate).
double enumerate_best_objective(std::vector<double> features, Index g) {
  std::sort(features.begin(), features.end());
  const Index n = static_cast<Index>(features.size());

  const auto block_cost = [&](Index lo, Index hi) {  // half-open [lo, hi)
    double sum = 0.0;
    for (Index i = lo; i < hi; ++i) sum += features[i];
    const double mean = sum / static_cast<double>(hi - lo);
    double sse = 0.0;
    for (Index i = lo; i < hi; ++i) {
      const double dev = features[i] - mean;
      sse += dev * dev;
    }
    return sse;
  };

  double best = std::numeric_limits<double>::infinity();
  std::vector<Index> splits(g - 1);  // block j is [splits[j-1], splits[j])

  const auto recurse = [&](auto&& self, Index next, Index lo) -> void {
    if (next == g - 1) {
      double total = 0.0;
      Index start = 0;
      for (Index s : splits) {
        total += block_cost(start, s);
        start = s;
      }
      total += block_cost(start, n);
      best = std::min(best, total);
      return;
    }
    for (Index s = lo + 1; s + (g - 2 - next) < n; ++s) {
      splits[next] = s;
      self(self, next + 1, s);
    }
  };

  if (g == 1) return block_cost(0, n);
  recurse(recurse, 0, 0);
  return best;
}

SelfCheckResult run_dp(std::uint64_t seed) {
  Rng rng(seed ^ 0x6470206f7261636cULL);
  int trials = 0;

  for (int t = 0; t < 60; ++t) {
    const Index n = rng.uniform_int(2, 14);
    const Index g = rng.uniform_int(1, std::min<Index>(4, n));
    std::vector<double> features(n);
    for (double& f : features) f = rng.uniform(0.0, 10.0);

    const GroupPlan plan = cluster_1d(features, g);
    const double oracle = enumerate_best_objective(features, g);
    if (plan.objective != oracle) {
      return {"dp", false,
              "objective " + fmt_g(plan.objective) + " differs from enumerated optimum " +
                  fmt_g(oracle) + " at n=" + std::to_string(n) + " g=" + std::to_string(g)};
    }
    ++trials;
  }
  return {"dp", true,
          std::to_string(trials) + " random instances match brute-force enumeration exactly"};
}

/// The integer kernel against the float kernel on integral data; both are
/// exact up to 2^53, so the outputs must agree to the bit.
SelfCheckResult run_int_float(std::uint64_t seed) {
  Rng rng(seed ^ 0x696e74666c6f6174ULL);
  int trials = 0;

  for (Index d : {Index{1}, Index{3}}) {
    for (Index pad : {Index{0}, Index{1}}) {
      for (int t = 0; t < 6; ++t) {
        const TensorI x = random_int_tensor(rng, Shape({7, 6, 3}), -8, 7);
        const TensorI w = random_int_tensor(rng, Shape({d, d, 3, 4}), -8, 7);
        const ConvConfig cfg{1, pad};

        const TensorI yi = quantized_adder_conv(x, w, cfg);
        const TensorF yf = adder_conv(TensorF(x.shape(), x.array().cast<double>()),
                                      TensorF(w.shape(), w.array().cast<double>()), cfg);

        for (Index i = 0; i < yi.shape().numel(); ++i) {
          if (static_cast<double>(yi[i]) != yf[i]) {
            return {"int_float", false,
                    "integer kernel gives " + std::to_string(yi[i]) + " but float kernel " +
                        fmt_g(yf[i]) + " at flat index " + std::to_string(i)};
          }
        }
        ++trials;
      }
    }
  }
  return {"int_float", true,
          std::to_string(trials) + " random integral layers agree bit for bit"};
}

std::filesystem::path scratch_file(std::uint64_t seed, const char* tag) {
  return std::filesystem::temp_directory_path() /
         ("adderptq_selfcheck_" + std::to_string(::getpid()) + "_" + std::to_string(seed) +
          "_" + tag + ".adpq");
}

/// Save/load fidelity for both container kinds plus a tensor set; loaded
/// models must match field by field at the bit level and reproduce the same
/// forward outputs. inject_fault corrupts one group scale after loading to
/// demonstrate the comparison has teeth.
SelfCheckResult run_roundtrip(std::uint64_t seed, bool inject_fault) {
  ToyModelConfig cfg;
  cfg.seed = seed ^ 0x726f756e64747269ULL;
  const FpModel fp = make_toy_model(cfg);
  const std::vector<TensorF> inputs =
      make_toy_inputs(cfg.seed + 1, 6, cfg.height, cfg.width, cfg.input_channels);

  const std::filesystem::path fp_path = scratch_file(seed, "fp");
  const std::filesystem::path q_path = scratch_file(seed, "q");
  const std::filesystem::path t_path = scratch_file(seed, "t");
  const auto cleanup = [&] {
    std::error_code ec;
    std::filesystem::remove(fp_path, ec);
    std::filesystem::remove(q_path, ec);
    std::filesystem::remove(t_path, ec);
  };

  SelfCheckResult res{"roundtrip", false, ""};
  try {
    save_model(fp, fp_path.string());
    const AnyModel fp_loaded = load_model(fp_path.string());
    if (!std::holds_alternative<FpModel>(fp_loaded) ||
        !bitwise_equal(std::get<FpModel>(fp_loaded), fp)) {
      res.detail = "full-precision container did not round-trip bit-exactly";
      cleanup();
      return res;
    }

    const std::vector<ActRange> ranges = calibrate(fp, inputs, 0.999);
    const QuantizedModel qm = quantize_model(fp, ranges, 8, GroupingConfig{4});
    save_model(qm, q_path.string());
    const AnyModel q_loaded = load_model(q_path.string());
    if (!std::holds_alternative<QuantizedModel>(q_loaded)) {
      res.detail = "quantized container loaded back as the wrong kind";
      cleanup();
      return res;
    }
    QuantizedModel q_copy = std::get<QuantizedModel>(q_loaded);

    if (inject_fault) {
      for (auto& layer : q_copy.layers) {
        if (auto* ql = std::get_if<QuantizedLayer>(&layer)) {
          ql->specs.front().scale *= 1.0 + 1e-9;
          break;
        }
      }
    }

    if (!bitwise_equal(q_copy, qm)) {
      res.detail = inject_fault ? "corrupted group scale detected after round trip"
                                : "quantized container did not round-trip bit-exactly";
      cleanup();
      return res;
    }

    const TensorF before = forward_quantized(qm, inputs.front());
    const TensorF after = forward_quantized(q_copy, inputs.front());
    for (Index i = 0; i < before.shape().numel(); ++i) {
      if (before[i] != after[i]) {
        res.detail = "loaded model diverges from the original at output " + std::to_string(i);
        cleanup();
        return res;
      }
    }

    const std::vector<NamedTensor> tensors = {{"x0", inputs[0]}, {"x1", inputs[1]}};
    save_tensors(tensors, t_path.string());
    const std::vector<NamedTensor> tensors_back = load_tensors(t_path.string());
    if (tensors_back.size() != tensors.size()) {
      res.detail = "tensor set changed cardinality across a round trip";
      cleanup();
      return res;
    }
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if (tensors_back[i].first != tensors[i].first ||
          tensors_back[i].second.shape() != tensors[i].second.shape() ||
          !(tensors_back[i].second.array() == tensors[i].second.array()).all()) {
        res.detail = "tensor set did not round-trip bit-exactly";
        cleanup();
        return res;
      }
    }
  } catch (...) {
    cleanup();
    throw;
  }

  cleanup();
  res.passed = true;
  res.detail = "2 model containers and 1 tensor set round-tripped bit-exactly";
  return res;
}

}  // namespace

std::vector<SelfCheckResult> run_selfchecks(const SelfCheckOptions& opts) {
  static constexpr std::array<const char*, 4> kSuites = {"theorem1", "dp", "int_float",
                                                         "roundtrip"};
  if (!opts.filter.empty() &&
      std::find(kSuites.begin(), kSuites.end(), opts.filter) == kSuites.end()) {
    std::string known;
    for (const char* s : kSuites) known += std::string(known.empty() ? "" : ", ") + s;
    throw ConfigError("unknown verification suite '" + opts.filter + "' (known: " + known + ")");
  }

  const auto wants = [&](const char* name) {
    return opts.filter.empty() || opts.filter == name;
  };

  std::vector<SelfCheckResult> results;
  const auto guard = [&](const char* name, auto&& fn) {
    if (!wants(name)) return;
    try {
      results.push_back(fn());
    } catch (const std::exception& e) {
      results.push_back({name, false, std::string("raised: ") + e.what()});
    }
  };

  guard("theorem1", [&] { return run_theorem1(opts.seed); });
  guard("dp", [&] { return run_dp(opts.seed); });
  guard("int_float", [&] { return run_int_float(opts.seed); });
  guard("roundtrip", [&] { return run_roundtrip(opts.seed, opts.inject_fault); });
  return results;
}

bool all_passed(const std::vector<SelfCheckResult>& results) {
  if (results.empty()) return false;
  return std::all_of(results.begin(), results.end(),
                     [](const SelfCheckResult& r) { return r.passed; });
}

}  // namespace adderptq
