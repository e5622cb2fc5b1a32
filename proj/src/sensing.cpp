// Copyright 2026 The sensched Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sensched/sensing.hpp"

namespace sensched
{

std::vector<std::string> SensingTopology::channel_labels() const
{
  std::vector<std::string> labels;
  for (Index i = 0; i < channel_count(); ++i) {
    labels.push_back("y" + std::to_string(i + 1));
  }
  return labels;
}

void SensingTopology::validate(const MultiAgentConfig & agents) const
{
  require(channel_count() > 0, ErrorKind::InvalidInput, "no measurement channels");
  for (const auto & link : station_links) {
    require(
      link.station < stations.size(), ErrorKind::InvalidInput,
      "station link references unknown station " + std::to_string(link.station));
    require(
      link.agent < agents.primary_count, ErrorKind::InvalidInput,
      "station links may only track primary agents");
  }
  for (const auto & pair : relative_pairs) {
    require(
      pair.observer < agents.primary_count, ErrorKind::InvalidInput,
      "relative pair observer must be a primary agent");
    require(
      pair.target >= agents.primary_count && pair.target < agents.agents.size(),
      ErrorKind::InvalidInput, "relative pair target must be a secondary agent");
  }
}

Eigen::ArrayXXd apply_mask(const AvailabilityMask & mask, const Eigen::ArrayXXd & bounds)
{
  require(
    mask.rows() == bounds.rows() && mask.cols() == bounds.cols(), ErrorKind::InvalidInput,
    "mask and bounds dimensions differ");
  return mask.select(bounds, 0.0);
}

SensingTopology reference_topology()
{
  SensingTopology topo;
  topo.stations = {{3.0, -3.0}, {-3.0, -3.0}, {-3.0, 3.0}, {3.0, 3.0}};
  topo.station_links = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  topo.relative_pairs = {{0, 1}, {0, 2}};
  return topo;
}

}  // namespace sensched
