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
#ifndef ADDERPTQ_ERRORS_HPP_
#define ADDERPTQ_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace adderptq {

/// Error taxonomy shared by the whole toolkit. The CLI maps each class to a
/// machine-parseable "error[<class>]:" prefix and an exit code.
enum class ErrorClass {
  kIndex,        // out-of-bounds tensor access
  kShape,        // incompatible tensor shapes
  kConfig,       // invalid parameter (bits, alpha, groups, dims, ...)
  kArithmetic,   // integer overflow in a quantized kernel
  kCalibration,  // unusable calibration data
  kParse,        // malformed or corrupted container
  kIo,           // filesystem failure
};

inline const char* error_class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::kIndex: return "index";
    case ErrorClass::kShape: return "shape";
    case ErrorClass::kConfig: return "config";
    case ErrorClass::kArithmetic: return "arithmetic";
    case ErrorClass::kCalibration: return "calibration";
    case ErrorClass::kParse: return "parse";
    case ErrorClass::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& msg)
      : std::runtime_error(std::string(error_class_name(cls)) + " error: " + msg),
        cls_(cls) {}

  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

struct IndexError : Error {
  explicit IndexError(const std::string& msg) : Error(ErrorClass::kIndex, msg) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(ErrorClass::kShape, msg) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(ErrorClass::kConfig, msg) {}
};
struct ArithmeticError : Error {
  explicit ArithmeticError(const std::string& msg) : Error(ErrorClass::kArithmetic, msg) {}
};
struct CalibrationError : Error {
  explicit CalibrationError(const std::string& msg) : Error(ErrorClass::kCalibration, msg) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error(ErrorClass::kParse, msg) {}
};
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(ErrorClass::kIo, msg) {}
};

}  // namespace adderptq

#endif  // ADDERPTQ_ERRORS_HPP_
