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
#include "adderptq/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adderptq {
namespace {

// Mean and sum of squared deviations of sorted[a..b], both by direct
// two-pass summation. Every consumer of the objective (the DP, the stored
// plan, diagnostics) shares this arithmetic so their values agree exactly.
struct SegmentStats {
  double mean = 0.0;
  double cost = 0.0;
};

SegmentStats segment_stats(const std::vector<double>& sorted, Index a, Index b) {
  const auto len = static_cast<double>(b - a + 1);
  double sum = 0.0;
  for (Index i = a; i <= b; ++i) sum += sorted[static_cast<std::size_t>(i)];
  const double mean = sum / len;
  double cost = 0.0;
  for (Index i = a; i <= b; ++i) {
    const double d = sorted[static_cast<std::size_t>(i)] - mean;
    cost += d * d;
  }
  return {mean, cost};
}

}  // namespace

const char* group_feature_name(GroupFeature feature) {
  switch (feature) {
    case GroupFeature::kMax:
      return "max";
    case GroupFeature::kMean:
      return "mean";
    case GroupFeature::kAll:
      return "all";
    case GroupFeature::kUniform:
      return "uniform";
  }
  throw ConfigError("unknown group feature");
}

GroupFeature group_feature_from_name(const std::string& name) {
  if (name == "max") return GroupFeature::kMax;
  if (name == "mean") return GroupFeature::kMean;
  if (name == "all") return GroupFeature::kAll;
  if (name == "uniform") return GroupFeature::kUniform;
  throw ConfigError("unknown group feature '" + name + "' (expected max|mean|all|uniform)");
}

void validate_group_plan(const GroupPlan& plan, Index c_out) {
  const Index g = plan.num_groups();
  if (g < 1) throw ShapeError("group plan must have at least one group");
  if (static_cast<Index>(plan.group_max.size()) != g ||
      static_cast<Index>(plan.means.size()) != g) {
    throw ShapeError("group plan stats do not match group count");
  }
  if (plan.num_channels() != c_out) {
    throw ShapeError("group plan covers " + std::to_string(plan.num_channels()) +
                     " channels, layer has " + std::to_string(c_out));
  }
  std::vector<bool> seen(static_cast<std::size_t>(c_out), false);
  Index covered = 0;
  Index pos = 0;
  for (const auto& members : plan.groups) {
    if (members.empty()) throw ShapeError("group plan contains an empty group");
    for (Index c : members) {
      if (c < 0 || c >= c_out || seen[static_cast<std::size_t>(c)]) {
        throw ShapeError("group plan channels are not a disjoint cover of [0, " +
                         std::to_string(c_out) + ")");
      }
      seen[static_cast<std::size_t>(c)] = true;
      if (plan.restore[static_cast<std::size_t>(pos)] != c) {
        throw ShapeError("restore map does not match group concat order");
      }
      ++pos;
      ++covered;
    }
  }
  if (covered != c_out) throw ShapeError("group plan does not cover every channel");
  for (double m : plan.group_max) {
    if (!std::isfinite(m) || m < 0.0) throw ShapeError("group ranges must be finite and >= 0");
  }
}

std::vector<double> channel_feature(const TensorF& w, GroupFeature feature) {
  require_weight_shape(w.shape());
  const Index c_out = w.shape().dim(3);
  std::vector<double> f(static_cast<std::size_t>(c_out));
  for (Index c = 0; c < c_out; ++c) {
    const TensorF slice = channel_slice(w, c);
    switch (feature) {
      case GroupFeature::kMax:
      case GroupFeature::kAll:
        f[static_cast<std::size_t>(c)] = slice.array().abs().maxCoeff();
        break;
      case GroupFeature::kMean:
        f[static_cast<std::size_t>(c)] = slice.array().abs().mean();
        break;
      case GroupFeature::kUniform:
        f[static_cast<std::size_t>(c)] = static_cast<double>(c);
        break;
    }
  }
  return f;
}

GroupPlan cluster_1d(const std::vector<double>& features, Index g,
                     const std::vector<double>& tie) {
  const Index n = static_cast<Index>(features.size());
  if (n == 0) throw ConfigError("cannot cluster an empty feature sequence");
  if (g < 1) throw ConfigError("group count must be >= 1, got " + std::to_string(g));
  if (g > n) {
    throw ConfigError("cannot form " + std::to_string(g) + " nonempty groups from " +
                      std::to_string(n) + " channels");
  }
  if (!tie.empty() && static_cast<Index>(tie.size()) != n) {
    throw ShapeError("tie-break sequence length does not match features");
  }
  for (double f : features) {
    if (!std::isfinite(f)) throw CalibrationError("clustering feature is non-finite");
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto ia = static_cast<std::size_t>(a);
    const auto ib = static_cast<std::size_t>(b);
    if (features[ia] != features[ib]) return features[ia] < features[ib];
    if (!tie.empty() && tie[ia] != tie[ib]) return tie[ia] < tie[ib];
    return a < b;
  });
  std::vector<double> sorted(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    sorted[static_cast<std::size_t>(i)] = features[static_cast<std::size_t>(order[i])];
  }

  // cost[a*n + b] is the squared deviation of sorted[a..b]; filled once so
  // the DP below is a straight table scan.
  std::vector<double> cost(static_cast<std::size_t>(n * n), 0.0);
  for (Index a = 0; a < n; ++a) {
    for (Index b = a; b < n; ++b) {
      cost[static_cast<std::size_t>(a * n + b)] = segment_stats(sorted, a, b).cost;
    }
  }

  // best[k][b] is the optimal objective for sorted[0..b] split into k+1
  // nonempty blocks; from[k][b] is the start of the last block. Ties keep
  // the earliest start, which makes the partition deterministic.
  const auto kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(static_cast<std::size_t>(g),
                                        std::vector<double>(static_cast<std::size_t>(n), kInf));
  std::vector<std::vector<Index>> from(static_cast<std::size_t>(g),
                                       std::vector<Index>(static_cast<std::size_t>(n), 0));
  for (Index b = 0; b < n; ++b) best[0][static_cast<std::size_t>(b)] = cost[static_cast<std::size_t>(b)];
  for (Index k = 1; k < g; ++k) {
    for (Index b = k; b < n; ++b) {
      for (Index a = k; a <= b; ++a) {
        const double candidate = best[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(a - 1)] +
                                 cost[static_cast<std::size_t>(a * n + b)];
        if (candidate < best[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)]) {
          best[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)] = candidate;
          from[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)] = a;
        }
      }
    }
  }

  std::vector<Index> starts(static_cast<std::size_t>(g));
  Index b = n - 1;
  for (Index k = g - 1; k >= 0; --k) {
    const Index a = (k == 0) ? 0 : from[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)];
    starts[static_cast<std::size_t>(k)] = a;
    b = a - 1;
  }

  GroupPlan plan;
  plan.groups.resize(static_cast<std::size_t>(g));
  plan.group_max.resize(static_cast<std::size_t>(g));
  plan.means.resize(static_cast<std::size_t>(g));
  plan.restore.reserve(static_cast<std::size_t>(n));
  double objective = 0.0;
  for (Index k = 0; k < g; ++k) {
    const Index a = starts[static_cast<std::size_t>(k)];
    const Index e = (k + 1 < g) ? starts[static_cast<std::size_t>(k + 1)] - 1 : n - 1;
    const SegmentStats stats = segment_stats(sorted, a, e);
    plan.means[static_cast<std::size_t>(k)] = stats.mean;
    plan.group_max[static_cast<std::size_t>(k)] = sorted[static_cast<std::size_t>(e)];
    objective += stats.cost;
    auto& members = plan.groups[static_cast<std::size_t>(k)];
    members.reserve(static_cast<std::size_t>(e - a + 1));
    for (Index i = a; i <= e; ++i) {
      members.push_back(order[static_cast<std::size_t>(i)]);
      plan.restore.push_back(order[static_cast<std::size_t>(i)]);
    }
  }
  plan.objective = objective;
  return plan;
}

GroupPlan make_group_plan(const TensorF& w, const GroupingConfig& cfg) {
  require_weight_shape(w.shape());
  if (cfg.g < 1) throw ConfigError("group count must be >= 1, got " + std::to_string(cfg.g));
  const Index c_out = w.shape().dim(3);
  const Index g = std::min(cfg.g, c_out);

  const std::vector<double> features = channel_feature(w, cfg.feature);
  std::vector<double> tie;
  if (cfg.feature == GroupFeature::kAll) tie = channel_feature(w, GroupFeature::kMean);

  GroupPlan plan = cluster_1d(features, g, tie);
  plan.clamped = cfg.g > c_out;

  // The scale of a group has to cover the group's actual weight magnitudes,
  // not the clustering statistic (a mean or a channel index would undershoot
  // or be meaningless as a range), so group_max is recomputed from |W|.
  const std::vector<double> range = channel_feature(w, GroupFeature::kMax);
  for (std::size_t j = 0; j < plan.groups.size(); ++j) {
    double m = 0.0;
    for (Index c : plan.groups[j]) m = std::max(m, range[static_cast<std::size_t>(c)]);
    plan.group_max[j] = m;
  }
  return plan;
}

std::vector<QuantSpec> group_scales(const GroupPlan& plan, double r_x, int bits) {
  if (plan.num_groups() < 1) throw ShapeError("group plan must have at least one group");
  if (!std::isfinite(r_x) || r_x < 0.0) {
    throw CalibrationError("activation range must be finite and >= 0, got " +
                           std::to_string(r_x));
  }
  std::vector<QuantSpec> specs;
  specs.reserve(plan.groups.size());
  for (double m : plan.group_max) {
    // A group whose weights fit inside the activation range keeps its own
    // tighter scale; otherwise the scale follows r_x and the weight clamp
    // makes the weights fit it.
    specs.push_back(QuantSpec::from_range(bits, m <= r_x ? m : r_x));
  }
  return specs;
}

}  // namespace adderptq
