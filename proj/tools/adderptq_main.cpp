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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "adderptq/diagnostics.hpp"
#include "adderptq/errors.hpp"
#include "adderptq/grouping.hpp"
#include "adderptq/model_store.hpp"
#include "adderptq/parallel.hpp"
#include "adderptq/pipeline.hpp"
#include "adderptq/selfcheck.hpp"
#include "adderptq/tensor.hpp"
#include "adderptq/toy_model.hpp"

namespace {

using namespace adderptq;

/// One bag of settings for all subcommands; each command reads the subset
/// it registered flags for.
struct RunConfig {
  int bits = 8;
  Index groups = 4;
  double alpha = 0.999;
  std::string feature = "max";
  std::string report = "text";
  std::uint64_t seed = 0;
  int threads = 0;  // 0 keeps the library default (available parallelism)
  bool fp = false;

  std::string model;
  std::string calib;
  std::string input;
  std::string out;

  // Fixture generation knobs.
  Index gen_layers = 3;
  Index gen_channels = 8;
  Index gen_size = 8;
  Index gen_count = 8;
  bool gen_bimodal = false;

  // Verification knobs.
  std::string filter;
  bool inject_fault = false;
};

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void apply_threads(const RunConfig& cfg) {
  if (cfg.threads < 0) throw ConfigError("--threads must be positive");
  if (cfg.threads > 0) set_max_threads(cfg.threads);
}

FpModel load_fp_model(const std::string& path) {
  AnyModel any = load_model(path);
  if (!std::holds_alternative<FpModel>(any)) {
    throw ConfigError("'" + path + "' holds a quantized model where a full-precision one "
                      "is needed");
  }
  return std::get<FpModel>(std::move(any));
}

std::vector<TensorF> load_plain_tensors(const std::string& path) {
  std::vector<TensorF> out;
  for (NamedTensor& named : load_tensors_any(path)) out.push_back(std::move(named.second));
  return out;
}

int cmd_gen(const RunConfig& cfg) {
  ToyModelConfig toy;
  toy.seed = cfg.seed;
  toy.layers = cfg.gen_layers;
  toy.height = cfg.gen_size;
  toy.width = cfg.gen_size;
  toy.channels = cfg.gen_channels;
  toy.bimodal = cfg.gen_bimodal;

  const FpModel model = make_toy_model(toy);
  save_model(model, cfg.out);
  std::cout << "wrote " << model.layers.size() << "-layer model to " << cfg.out << "\n";

  if (!cfg.calib.empty()) {
    const std::vector<TensorF> inputs = make_toy_inputs(
        cfg.seed + 1, cfg.gen_count, toy.height, toy.width, toy.input_channels);
    std::vector<NamedTensor> named;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      named.emplace_back("x" + std::to_string(i), inputs[i]);
    }
    save_tensors(named, cfg.calib);
    std::cout << "wrote " << named.size() << " calibration tensors to " << cfg.calib << "\n";
  }
  return 0;
}

int cmd_quantize(const RunConfig& cfg) {
  const FpModel model = load_fp_model(cfg.model);
  const std::vector<TensorF> inputs = load_plain_tensors(cfg.calib);

  const std::vector<ActRange> ranges = calibrate(model, inputs, cfg.alpha);
  const GroupingConfig grouping{cfg.groups, group_feature_from_name(cfg.feature)};
  const QuantizedModel qm = quantize_model(model, ranges, cfg.bits, grouping);
  save_model(qm, cfg.out);

  for (std::size_t i = 0; i < qm.layers.size(); ++i) {
    std::cout << "layer " << i << ": ";
    if (const auto* ql = std::get_if<QuantizedLayer>(&qm.layers[i])) {
      if (ql->plan.clamped) {
        std::cerr << "warning: layer " << i << " group count clamped to its "
                  << ql->plan.num_channels() << " channels\n";
      }
      double fold_l1 = 0.0;
      for (double b : ql->bias_fold) fold_l1 += std::abs(b);
      std::cout << "adder, groups=" << ql->plan.num_groups() << ", r_x="
                << fmt_g(ql->act_range.r_x) << ", |bias_fold|_1=" << fmt_g(fold_l1)
                << ", scales=[";
      for (std::size_t j = 0; j < ql->specs.size(); ++j) {
        std::cout << (j ? ", " : "") << fmt_g(ql->specs[j].scale);
      }
      std::cout << "]\n";
    } else {
      const auto& def = std::get<LayerDef>(qm.layers[i]);
      std::cout << layer_kind_name(def.kind) << ", pass-through\n";
    }
  }
  std::cout << "wrote quantized model to " << cfg.out << "\n";
  return 0;
}

int cmd_infer(const RunConfig& cfg) {
  AnyModel any = load_model(cfg.model);
  std::vector<NamedTensor> tensors = load_tensors_any(cfg.input);

  std::vector<NamedTensor> outputs;
  if (cfg.fp) {
    if (!std::holds_alternative<FpModel>(any)) {
      throw ConfigError("--fp needs a full-precision container, but '" + cfg.model +
                        "' holds a quantized model");
    }
    const FpModel& model = std::get<FpModel>(any);
    for (const NamedTensor& t : tensors) {
      outputs.emplace_back(t.first, forward_reference(model, t.second));
    }
  } else {
    if (!std::holds_alternative<QuantizedModel>(any)) {
      throw ConfigError("'" + cfg.model + "' holds a full-precision model; quantize it "
                        "first or pass --fp");
    }
    const QuantizedModel& qm = std::get<QuantizedModel>(any);
    for (const NamedTensor& t : tensors) {
      outputs.emplace_back(t.first, forward_quantized(qm, t.second));
    }
  }

  save_tensors(outputs, cfg.out);
  std::cout << "wrote " << outputs.size() << " output tensors to " << cfg.out << "\n";
  return 0;
}

int cmd_analyze(const RunConfig& cfg) {
  if (cfg.report != "text" && cfg.report != "csv") {
    throw ConfigError("--report must be 'text' or 'csv', got '" + cfg.report + "'");
  }
  const FpModel model = load_fp_model(cfg.model);
  const std::vector<TensorF> inputs = load_plain_tensors(cfg.calib);

  const std::vector<ActRange> ranges = calibrate(model, inputs, cfg.alpha);
  const GroupingConfig grouping{cfg.groups, group_feature_from_name(cfg.feature)};
  const QuantizedModel qm = quantize_model(model, ranges, cfg.bits, grouping);

  const std::vector<LayerRow> rows = analyze_model(model, qm, inputs);
  const std::string rendered = cfg.report == "csv" ? report_csv(rows) : report_text(rows);

  if (cfg.out.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream ofs(cfg.out, std::ios::binary);
    if (!ofs) throw IoError("cannot open '" + cfg.out + "' for writing");
    ofs << rendered;
    if (!ofs) throw IoError("failed writing report to '" + cfg.out + "'");
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  SelfCheckOptions opts;
  opts.seed = cfg.seed;
  opts.filter = cfg.filter;
  opts.inject_fault = cfg.inject_fault;

  const std::vector<SelfCheckResult> results = run_selfchecks(opts);
  for (const SelfCheckResult& r : results) {
    std::cout << "suite " << r.name << ": " << (r.passed ? "PASS" : "FAIL") << " ("
              << r.detail << ")\n";
  }
  if (!all_passed(results)) {
    std::cout << "verification failed\n";
    return 1;
  }
  std::cout << "all suites passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Post-training quantization toolkit for adder networks"};
  app.require_subcommand(1);

  const auto add_quant_flags = [&](CLI::App* sub) {
    sub->add_option("--bits", cfg.bits, "Quantization bit width (2..16)");
    sub->add_option("--groups", cfg.groups, "Scale-sharing groups per layer");
    sub->add_option("--alpha", cfg.alpha, "Activation range quantile in (0, 1]");
    sub->add_option("--feature", cfg.feature,
                    "Channel grouping feature: max, mean, all, uniform");
  };
  const auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", cfg.threads, "Worker thread cap (default: all cores)");
  };

  CLI::App* gen = app.add_subcommand("gen", "Generate a seeded toy model and fixtures");
  gen->add_option("--out", cfg.out, "Model container to write")->required();
  gen->add_option("--calib", cfg.calib, "Optional calibration tensor set to write");
  gen->add_option("--seed", cfg.seed, "Fixture RNG seed");
  gen->add_option("--layers", cfg.gen_layers, "Layer count");
  gen->add_option("--channels", cfg.gen_channels, "Output channels per layer");
  gen->add_option("--size", cfg.gen_size, "Spatial height and width");
  gen->add_option("--count", cfg.gen_count, "Calibration tensors to write");
  gen->add_flag("--bimodal", cfg.gen_bimodal, "Mix in small-range channels");
  add_threads(gen);

  CLI::App* quantize = app.add_subcommand("quantize", "Calibrate and quantize a model");
  quantize->add_option("--model", cfg.model, "Full-precision model container")->required();
  quantize->add_option("--calib", cfg.calib, "Calibration tensors (container or directory)")
      ->required();
  quantize->add_option("--out", cfg.out, "Quantized container to write")->required();
  add_quant_flags(quantize);
  quantize->add_option("--seed", cfg.seed, "Accepted for uniform invocation; unused");
  add_threads(quantize);

  CLI::App* infer = app.add_subcommand("infer", "Run a model over a tensor set");
  infer->add_option("--model", cfg.model, "Model container (quantized unless --fp)")
      ->required();
  infer->add_option("--input", cfg.input, "Input tensors (container or directory)")
      ->required();
  infer->add_option("--out", cfg.out, "Output tensor set to write")->required();
  infer->add_flag("--fp", cfg.fp, "Run the full-precision reference forward");
  add_threads(infer);

  CLI::App* analyze = app.add_subcommand("analyze", "Quantize in memory and report layers");
  analyze->add_option("--model", cfg.model, "Full-precision model container")->required();
  analyze->add_option("--calib", cfg.calib, "Calibration tensors (container or directory)")
      ->required();
  analyze->add_option("--out", cfg.out, "Report file (default: stdout)");
  analyze->add_option("--report", cfg.report, "Report format: text or csv");
  add_quant_flags(analyze);
  add_threads(analyze);

  CLI::App* verify = app.add_subcommand("verify", "Run the built-in property suites");
  verify->add_option("--seed", cfg.seed, "Suite RNG seed");
  verify->add_option("--filter", cfg.filter,
                     "Run one suite: theorem1, dp, int_float, roundtrip");
  verify->add_flag("--inject-fault", cfg.inject_fault,
                   "Corrupt a scale after round-trip (harness self-test)");
  add_threads(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    apply_threads(cfg);
    if (gen->parsed()) return cmd_gen(cfg);
    if (quantize->parsed()) return cmd_quantize(cfg);
    if (infer->parsed()) return cmd_infer(cfg);
    if (analyze->parsed()) return cmd_analyze(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    std::cerr << "error[usage]: no subcommand given\n";
    return 2;
  } catch (const Error& e) {
    // what() already leads with "<class> error:"; keep the message part only.
    std::string msg = e.what();
    const std::string lead = std::string(error_class_name(e.error_class())) + " error: ";
    if (msg.rfind(lead, 0) == 0) msg = msg.substr(lead.size());
    std::cerr << "error[" << error_class_name(e.error_class()) << "]: " << msg << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 2;
  }
}
