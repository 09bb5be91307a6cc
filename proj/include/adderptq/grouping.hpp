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
#ifndef ADDERPTQ_GROUPING_HPP_
#define ADDERPTQ_GROUPING_HPP_

#include <string>
#include <vector>

#include "adderptq/quantize.hpp"
#include "adderptq/tensor.hpp"

namespace adderptq {

/// Per-channel statistic the channels are clustered on. Max is the absolute
/// maximum of the channel's weights; Mean is the mean absolute value; All
/// orders channels by (max, mean) with max as the clustered value and mean
/// only breaking ties; Uniform is the channel index, which degenerates to
/// even contiguous blocks.
enum class GroupFeature { kMax, kMean, kAll, kUniform };

const char* group_feature_name(GroupFeature feature);
GroupFeature group_feature_from_name(const std::string& name);

struct GroupingConfig {
  Index g = 4;
  GroupFeature feature = GroupFeature::kMax;
};

/// Partition of a layer's output channels into scale-sharing groups. Groups
/// are ordered by ascending cluster mean and members within a group by
/// ascending feature, which is also the order grouped outputs are
/// concatenated in; `restore[p]` names the original channel sitting at
/// grouped position p.
struct GroupPlan {
  std::vector<std::vector<Index>> groups;
  std::vector<double> group_max;  // weight range each group is scaled for
  std::vector<double> means;      // cluster means of the clustering feature
  std::vector<Index> restore;
  double objective = 0.0;  // within-cluster sum of squared deviations
  bool clamped = false;    // requested group count exceeded the channels

  Index num_groups() const { return static_cast<Index>(groups.size()); }
  Index num_channels() const { return static_cast<Index>(restore.size()); }
};

/// Checks partition validity: groups disjointly cover [0, c_out), restore is
/// the matching bijection, and per-group stats have the right lengths.
void validate_group_plan(const GroupPlan& plan, Index c_out);

/// The clustering statistic for every output channel of a rank-4 weight
/// tensor, in channel order.
std::vector<double> channel_feature(const TensorF& w, GroupFeature feature);

/// Exact 1-D k-means: the partition of `features` into g nonempty clusters
/// minimizing the within-cluster sum of squared deviations, found by dynamic
/// programming over the sorted sequence. `tie` optionally refines the sort
/// order between equal features (channel index is always the final key).
/// group_max here is the feature maximum per cluster; make_group_plan
/// replaces it with the true weight range.
GroupPlan cluster_1d(const std::vector<double>& features, Index g,
                     const std::vector<double>& tie = {});

/// Clusters w's output channels per cfg. A group count above c_out is
/// clamped to c_out and flagged on the plan. group_max is set to the true
/// per-group weight range (max over member channels of max |W[:,:,:,c]|)
/// whatever the clustering feature, since it is the range the group's scale
/// must cover.
GroupPlan make_group_plan(const TensorF& w, const GroupingConfig& cfg);

/// One QuantSpec per group: scaled from the group's own weight range when it
/// fits inside the activation range r_x, otherwise from r_x (the weight
/// clamp then folds the excess into the bias).
std::vector<QuantSpec> group_scales(const GroupPlan& plan, double r_x, int bits);

}  // namespace adderptq

#endif  // ADDERPTQ_GROUPING_HPP_
