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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "adderptq/clamp.hpp"
#include "adderptq/conv.hpp"
#include "adderptq/rng.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace adderptq;
using testsupport::rand_tensor;

TEST_CASE("clamp_weights on the worked channel") {
  const TensorF w_c(Shape({1, 1, 3}), {1.5, -0.3, 2.0});
  const auto [clamped, b] = clamp_weights(w_c, 1.0);
  CHECK(clamped[0] == 1.0);
  CHECK(clamped[1] == -0.3);
  CHECK(clamped[2] == 1.0);
  CHECK(b == -1.5);  // -(0.5 + 1.0)

  // Identity case: nothing exceeds the range.
  const auto [same, zero] = clamp_weights(w_c, 2.5);
  CHECK((same.array() == w_c.array()).all());
  CHECK(zero == 0.0);
}

TEST_CASE("scalar hand case of the clamp identity") {
  // LHS -|0.5 - 1.5| = -1; RHS -|0.5 - 1.0| + (-0.5) = -1.
  const TensorF x(Shape({1, 1, 1}), {0.5});
  const TensorF w(Shape({1, 1, 1, 1}), {1.5});
  const ClampedLayer cl = clamp_layer(w, 1.0);
  const double lhs = adder_conv(x, w, ConvConfig{})[0];
  const double rhs = adder_conv(x, cl.w_clamped, ConvConfig{})[0] + cl.bias_fold[0];
  CHECK(lhs == -1.0);
  CHECK(rhs == -1.0);
}

TEST_CASE("clamp identity holds exactly whenever inputs stay in range") {
  Rng rng(21);
  for (Index d : {Index{1}, Index{3}}) {
    for (Index c_in : {Index{1}, Index{4}, Index{16}}) {
      for (int t = 0; t < 10; ++t) {
        const double r_x = rng.uniform(0.2, 2.5);
        const TensorF x = rand_tensor(rng, Shape({5, 4, c_in}), -r_x, r_x);
        const TensorF w = rand_tensor(rng, Shape({d, d, c_in, 3}), -3.0 * r_x, 3.0 * r_x);
        const ConvConfig cfg{1, 1};

        const TensorF lhs = adder_conv(x, w, cfg);
        const ClampedLayer cl = clamp_layer(w, r_x);
        const TensorF rhs = adder_conv(x, cl.w_clamped, cfg);
        for (Index i = 0; i < lhs.size(); ++i) {
          CHECK(std::abs(lhs[i] - (rhs[i] + cl.bias_fold[static_cast<std::size_t>(i % 3)])) <=
                1e-9);
        }
      }
    }
  }
}

TEST_CASE("the identity needs the input range precondition") {
  // With |x| > r_x the compensation overshoots, which is exactly why runtime
  // activations are clamped first.
  const TensorF x(Shape({1, 1, 1}), {2.0});
  const TensorF w(Shape({1, 1, 1, 1}), {1.5});
  const ClampedLayer cl = clamp_layer(w, 1.0);
  const double lhs = adder_conv(x, w, ConvConfig{})[0];
  const double rhs = adder_conv(x, cl.w_clamped, ConvConfig{})[0] + cl.bias_fold[0];
  CHECK(lhs == -0.5);
  CHECK(rhs == -1.5);
}

TEST_CASE("clamp_layer invariants") {
  Rng rng(22);
  const TensorF w = rand_tensor(rng, Shape({3, 3, 2, 5}), -2.0, 2.0);
  const double r_x = 0.75;
  const ClampedLayer cl = clamp_layer(w, r_x);
  CHECK(cl.r_x == r_x);
  CHECK(cl.w_clamped.array().abs().maxCoeff() <= r_x);
  REQUIRE(cl.bias_fold.size() == 5);
  for (Index c = 0; c < 5; ++c) {
    const double fold = cl.bias_fold[static_cast<std::size_t>(c)];
    CHECK(fold <= 0.0);
    const double excess = (channel_slice(w, c).array().abs() - r_x).max(0.0).sum();
    CHECK(fold == -excess);
    CHECK((fold == 0.0) == (channel_slice(w, c).array().abs().maxCoeff() <= r_x));
  }
}

TEST_CASE("activation_range picks the alpha quantile") {
  // Sorted magnitudes 0.1..1.0 plus one outlier at 100.
  std::vector<double> values = {100.0, 0.5, 0.1, 0.9, 0.3, 0.7, 0.2, 1.0, 0.4, 0.8, 0.6};
  const ActRange full = activation_range(values, 1.0);
  CHECK(full.r_x == 100.0);
  CHECK(full.n == 11);
  CHECK(full.alpha == 1.0);

  const ActRange trimmed = activation_range(values, 0.9);
  CHECK(trimmed.r_x == 1.0);  // index round(0.9 * 10) = 9 discards the outlier

  const ActRange single = activation_range({0.42}, 0.1);
  CHECK(single.r_x == 0.42);

  CHECK_THROWS_AS(activation_range({}, 0.5), CalibrationError);
  CHECK_THROWS_AS(activation_range({1.0}, 0.0), ConfigError);
  CHECK_THROWS_AS(activation_range({1.0}, 1.5), ConfigError);
}

TEST_CASE("activation_range is monotone in alpha") {
  Rng rng(23);
  std::vector<double> values(257);
  for (double& v : values) v = std::abs(rng.uniform(-3.0, 3.0));
  double prev = 0.0;
  for (double alpha : {0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0}) {
    const double r = activation_range(values, alpha).r_x;
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("the scaled-max rule stays available for comparison") {
  const std::vector<double> values = {0.5, 2.0, 1.0};
  const ActRange r = activation_range(values, 0.9, RangeRule::kScaledMax);
  CHECK(r.r_x == 2.0 * 0.9);
}

TEST_CASE("clamp_activations clips into the range") {
  const TensorF x(Shape({4}), {150.0, -0.5, -3.0, 1.0});
  const TensorF y = clamp_activations(x, 1.0);
  CHECK(y[0] == 1.0);
  CHECK(y[1] == -0.5);
  CHECK(y[2] == -1.0);
  CHECK(y[3] == 1.0);

  Rng rng(24);
  const TensorF v = rand_tensor(rng, Shape({64}), -2.0, 2.0);
  const TensorF c = clamp_activations(v, 1.5);
  for (Index i = 0; i < v.size(); ++i) {
    CHECK(c[i] == std::min(1.5, std::max(-1.5, v[i])));
  }
  const TensorF inside = rand_tensor(rng, Shape({32}), -0.9, 0.9);
  CHECK((clamp_activations(inside, 1.0).array() == inside.array()).all());
}

TEST_CASE("calibration reservoirs merge like one concatenated batch") {
  Rng rng(25);
  const TensorF a = rand_tensor(rng, Shape({4, 4, 2}), -2.0, 2.0);
  const TensorF b = rand_tensor(rng, Shape({4, 4, 2}), -5.0, 5.0);

  CalibReservoir joint;
  joint.add(a);
  joint.add(b);

  CalibReservoir left;
  left.add(a);
  CalibReservoir right;
  right.add(b);
  left.merge(right);

  CHECK(left.count() == joint.count());
  for (double alpha : {0.5, 0.9, 1.0}) {
    CHECK(left.range(alpha).r_x == joint.range(alpha).r_x);
  }

  const TensorF bad(Shape({1}), {std::numeric_limits<double>::infinity()});
  CHECK_THROWS_AS(joint.add(bad), CalibrationError);
}
