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
#ifndef ADDERPTQ_PARALLEL_HPP_
#define ADDERPTQ_PARALLEL_HPP_

#include <cstdint>
#include <functional>

namespace adderptq {

/// Process-wide worker cap for parallel loops. Defaults to 1 (sequential);
/// the CLI raises it from --threads. Values < 1 mean "hardware concurrency".
void set_max_threads(int n);
int max_threads();

/// Splits [0, n) into contiguous chunks and runs `body(begin, end)` on up to
/// max_threads() workers. Chunks are disjoint, so bodies that write disjoint
/// output ranges need no synchronization and results are deterministic.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body);

}  // namespace adderptq

#endif  // ADDERPTQ_PARALLEL_HPP_
