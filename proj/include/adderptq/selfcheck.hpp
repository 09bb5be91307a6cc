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

#ifndef ADDERPTQ_SELFCHECK_HPP_
#define ADDERPTQ_SELFCHECK_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace adderptq {

/// Options for the built-in verification suites.
///
/// `filter` selects a single suite by name ("theorem1", "dp", "int_float",
/// "roundtrip"); an empty filter runs all of them. `inject_fault` corrupts
/// one quantizer scale after a round-trip and is only there to prove the
/// harness can fail; production runs leave it off.
struct SelfCheckOptions {
  std::uint64_t seed = 0;
  std::string filter;
  bool inject_fault = false;
};

/// Outcome of a single suite. `detail` holds either a short summary of the
/// evidence checked or, on failure, the first observed discrepancy.
struct SelfCheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the seeded verification suites and reports one result per suite.
///
/// The suites re-derive their expectations independently of the library code
/// under test: the clamp identity is checked against an exact bias-corrected
/// forward pass, the grouping optimizer against brute-force partition
/// enumeration, the integer kernel against the float kernel on integral
/// inputs, and the container store against bitwise round-trip equality.
///
/// Throws ConfigError if `filter` names no known suite.
std::vector<SelfCheckResult> run_selfchecks(const SelfCheckOptions& opts);

/// True when every suite in `results` passed. Empty results count as failure
/// so a bad filter can never masquerade as a clean run.
bool all_passed(const std::vector<SelfCheckResult>& results);

}  // namespace adderptq

#endif  // ADDERPTQ_SELFCHECK_HPP_
