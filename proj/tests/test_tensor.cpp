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

#include <array>
#include <vector>

#include "adderptq/tensor.hpp"
#include "doctest.h"

using namespace adderptq;

TEST_CASE("shape basics") {
  const Shape s({2, 3, 4});
  CHECK(s.rank() == 3);
  CHECK(s.numel() == 24);
  CHECK(s.dim(1) == 3);
  CHECK(s.to_string() == "(2,3,4)");
  CHECK(s == Shape({2, 3, 4}));
  CHECK(s != Shape({2, 3, 5}));

  CHECK_THROWS_AS(Shape(std::vector<Index>{}), ShapeError);
  CHECK_THROWS_AS(Shape({2, 0, 4}), ShapeError);
  CHECK_THROWS_AS(Shape({-1}), ShapeError);
}

TEST_CASE("flat_index is row-major and bounds-checked") {
  const Shape s({2, 3, 4});
  const std::array<Index, 3> idx = {1, 2, 3};
  CHECK(flat_index(s, idx) == 1 * 12 + 2 * 4 + 3);

  const std::array<Index, 3> oob = {1, 3, 0};
  CHECK_THROWS_AS(flat_index(s, oob), IndexError);
  const std::array<Index, 2> short_idx = {1, 1};
  CHECK_THROWS_AS(flat_index(s, short_idx), IndexError);
}

TEST_CASE("tensor construction and element access") {
  const TensorF t(Shape({2, 3}), {0.0, 1.0, 2.0, 3.0, 4.0, 5.0});
  CHECK(t.size() == 6);
  CHECK(t[4] == 4.0);
  CHECK(t.at({1, 1}) == 4.0);
  CHECK_THROWS_AS(t[6], IndexError);
  CHECK_THROWS_AS(t[-1], IndexError);
  CHECK_THROWS_AS(t.at({2, 0}), IndexError);

  CHECK_THROWS_AS(TensorF(Shape({2, 3}), {1.0, 2.0}), ShapeError);

  const TensorF z = TensorF::zeros(Shape({3}));
  CHECK((z.array() == 0.0).all());
  const TensorI c = TensorI::constant(Shape({4}), 7);
  CHECK((c.array() == 7).all());
}

TEST_CASE("weight and activation shape checks") {
  CHECK_NOTHROW(require_weight_shape(Shape({3, 3, 2, 5})));
  CHECK_THROWS_AS(require_weight_shape(Shape({3, 3, 2})), ShapeError);
  CHECK_THROWS_AS(require_weight_shape(Shape({3, 2, 2, 5})), ShapeError);
  CHECK_NOTHROW(require_activation_shape(Shape({4, 4, 2})));
  CHECK_THROWS_AS(require_activation_shape(Shape({4, 4})), ShapeError);
}

TEST_CASE("channel_slice extracts one output channel") {
  // (1,1,3,2) weights: channels interleave along the last axis.
  const TensorF w(Shape({1, 1, 3, 2}), {10.0, 20.0, 11.0, 21.0, 12.0, 22.0});
  const TensorF c0 = channel_slice(w, 0);
  const TensorF c1 = channel_slice(w, 1);
  CHECK(c0.shape() == Shape({1, 1, 3}));
  CHECK(c0[0] == 10.0);
  CHECK(c0[1] == 11.0);
  CHECK(c0[2] == 12.0);
  CHECK(c1[0] == 20.0);
  CHECK(c1[2] == 22.0);
  CHECK_THROWS_AS(channel_slice(w, 2), IndexError);
  CHECK_THROWS_AS(channel_slice(w, -1), IndexError);
}

TEST_CASE("stack_channels inverts channel_slice") {
  const TensorF w(Shape({2, 2, 1, 3}),
                  {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  const std::vector<TensorF> slices = {channel_slice(w, 0), channel_slice(w, 1),
                                       channel_slice(w, 2)};
  const TensorF back = stack_channels<double>(slices);
  CHECK(back.shape() == w.shape());
  CHECK((back.array() == w.array()).all());

  const std::vector<TensorF> mismatched = {TensorF::zeros(Shape({2})),
                                           TensorF::zeros(Shape({3}))};
  CHECK_THROWS_AS(stack_channels<double>(mismatched), ShapeError);
}

TEST_CASE("concat_last_dim lays parts side by side") {
  const TensorF a(Shape({2, 2}), {1, 2, 3, 4});
  const TensorF b(Shape({2, 3}), {5, 6, 7, 8, 9, 10});
  const std::vector<TensorF> parts = {a, b};
  const TensorF cat = concat_last_dim<double>(parts);
  CHECK(cat.shape() == Shape({2, 5}));
  CHECK(cat.at({0, 0}) == 1.0);
  CHECK(cat.at({0, 2}) == 5.0);
  CHECK(cat.at({1, 1}) == 4.0);
  CHECK(cat.at({1, 4}) == 10.0);

  const std::vector<TensorF> bad = {a, TensorF::zeros(Shape({3, 2}))};
  CHECK_THROWS_AS(concat_last_dim<double>(bad), ShapeError);
}

TEST_CASE("scatter_last_dim restores original channel order") {
  // Grouped position p carries original channel perm[p].
  const TensorF grouped(Shape({1, 3}), {10.0, 20.0, 30.0});
  const std::vector<Index> perm = {2, 0, 1};
  const TensorF restored = scatter_last_dim(grouped, perm);
  CHECK(restored[0] == 20.0);  // original channel 0 sat at position 1
  CHECK(restored[1] == 30.0);
  CHECK(restored[2] == 10.0);

  const std::vector<Index> dup = {0, 0, 1};
  CHECK_THROWS_AS(scatter_last_dim(grouped, dup), ShapeError);
  const std::vector<Index> oob = {0, 1, 3};
  CHECK_THROWS_AS(scatter_last_dim(grouped, oob), ShapeError);
  const std::vector<Index> short_perm = {0, 1};
  CHECK_THROWS_AS(scatter_last_dim(grouped, short_perm), ShapeError);
}

TEST_CASE("gather then scatter round-trips any permutation") {
  const TensorF t(Shape({2, 4}), {0, 1, 2, 3, 4, 5, 6, 7});
  const std::vector<Index> perm = {3, 1, 0, 2};
  const TensorF gathered = gather_last_dim(t, perm);
  CHECK(gathered.at({0, 0}) == 3.0);
  CHECK(gathered.at({1, 3}) == 6.0);
  const TensorF back = scatter_last_dim(gathered, perm);
  CHECK((back.array() == t.array()).all());

  const std::vector<Index> oob = {0, 4};
  CHECK_THROWS_AS(gather_last_dim(t, oob), IndexError);
}
