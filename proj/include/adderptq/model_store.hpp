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
#ifndef ADDERPTQ_MODEL_STORE_HPP_
#define ADDERPTQ_MODEL_STORE_HPP_

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "adderptq/pipeline.hpp"

namespace adderptq {

/// Serialized artifacts live in one file: an 8-byte magic, a JSON manifest
/// (structure only, never floating-point values), and a region of 16-byte
/// aligned little-endian blobs holding every tensor and float constant, so a
/// load reproduces the saved object bit for bit. The byte layout is
/// documented in docs/container-format.md.
enum class ContainerKind { kFpModel, kQuantizedModel, kTensorSet };

const char* container_kind_name(ContainerKind kind);

/// Reads just enough of the file to report what it holds.
ContainerKind peek_kind(const std::string& path);

void save_model(const FpModel& model, const std::string& path);
void save_model(const QuantizedModel& model, const std::string& path);

using AnyModel = std::variant<FpModel, QuantizedModel>;

/// Loads either model kind and revalidates every structural invariant;
/// malformed input of any sort surfaces as ParseError (or IoError when the
/// file cannot be read at all), never as a crash.
AnyModel load_model(const std::string& path);

using NamedTensor = std::pair<std::string, TensorF>;

void save_tensors(const std::vector<NamedTensor>& tensors, const std::string& path);
std::vector<NamedTensor> load_tensors(const std::string& path);

/// Import path for external stacks: a directory with manifest.json listing
/// {name, file, shape} entries and one raw little-endian float64 file per
/// tensor.
std::vector<NamedTensor> import_tensor_dir(const std::string& dir);

/// Loads a tensor set from either a container file or an import directory.
std::vector<NamedTensor> load_tensors_any(const std::string& path);

/// Field-by-field equality with floats compared by bit pattern, the
/// round-trip contract of this store.
bool bitwise_equal(const FpModel& a, const FpModel& b);
bool bitwise_equal(const QuantizedModel& a, const QuantizedModel& b);

}  // namespace adderptq

#endif  // ADDERPTQ_MODEL_STORE_HPP_
