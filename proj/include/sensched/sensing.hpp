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

#ifndef SENSCHED_SENSING_HPP_
#define SENSCHED_SENSING_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "sensched/dynamics.hpp"
#include "sensched/error.hpp"
#include "sensched/linalg.hpp"

namespace sensched
{

struct StationLink
{
  std::size_t station = 0;
  std::size_t agent = 0;
};

struct RelativePair
{
  std::size_t observer = 0;
  std::size_t target = 0;
};

/// Range channels in fixed order: every station link in list order, then
/// every relative pair. That order is the channel order everywhere else
/// (stacked precision vectors, CSV columns, heatmap rows).
struct SensingTopology
{
  std::vector<Eigen::Vector2d> stations;
  std::vector<StationLink> station_links;
  std::vector<RelativePair> relative_pairs;

  Index channel_count() const
  {
    return static_cast<Index>(station_links.size() + relative_pairs.size());
  }

  /// "y1", "y2", ... in channel order.
  std::vector<std::string> channel_labels() const;

  /// Station links must target primary agents, relative pairs must go from a
  /// primary observer to a secondary target.
  void validate(const MultiAgentConfig & agents) const;
};

/// p x m_y availability; true means the channel may be used at that step.
using AvailabilityMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail
{

template<typename Scalar>
Scalar checked_range(Scalar dx, Scalar dz, Index channel)
{
  using std::sqrt;
  const Scalar r = sqrt(dx * dx + dz * dz);
  if (!(r > Scalar(0))) {
    fail(
      ErrorKind::Singularity,
      "zero range on channel y" + std::to_string(channel + 1));
  }
  return r;
}

}  // namespace detail

/// Noise-free ranges for every channel.
template<typename Derived>
Vector<typename Derived::Scalar> range_measurement(
  const Eigen::MatrixBase<Derived> & state,
  const SensingTopology & topology)
{
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> y(topology.channel_count());
  Index row = 0;
  for (const auto & link : topology.station_links) {
    require(
      link.station < topology.stations.size() && 2 * link.agent + 1 < std::size_t(state.rows()),
      ErrorKind::InvalidInput, "station link out of range");
    const Eigen::Vector2d & s = topology.stations[link.station];
    const Index ix = static_cast<Index>(2 * link.agent);
    y(row) = detail::checked_range<Scalar>(state(ix) - s.x(), state(ix + 1) - s.y(), row);
    ++row;
  }
  for (const auto & pair : topology.relative_pairs) {
    require(
      2 * std::max(pair.observer, pair.target) + 1 < std::size_t(state.rows()),
      ErrorKind::InvalidInput, "relative pair out of range");
    const Index io = static_cast<Index>(2 * pair.observer);
    const Index it = static_cast<Index>(2 * pair.target);
    y(row) = detail::checked_range<Scalar>(
      state(it) - state(io), state(it + 1) - state(io + 1), row);
    ++row;
  }
  return y;
}

/// Jacobian of `range_measurement` (rows are unit line-of-sight vectors).
template<typename Derived>
Matrix<typename Derived::Scalar> measurement_jacobian(
  const Eigen::MatrixBase<Derived> & state,
  const SensingTopology & topology)
{
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> jac = Matrix<Scalar>::Zero(topology.channel_count(), state.rows());
  Index row = 0;
  for (const auto & link : topology.station_links) {
    require(
      link.station < topology.stations.size() && 2 * link.agent + 1 < std::size_t(state.rows()),
      ErrorKind::InvalidInput, "station link out of range");
    const Eigen::Vector2d & s = topology.stations[link.station];
    const Index ix = static_cast<Index>(2 * link.agent);
    const Scalar dx = state(ix) - s.x();
    const Scalar dz = state(ix + 1) - s.y();
    const Scalar r = detail::checked_range<Scalar>(dx, dz, row);
    jac(row, ix) = dx / r;
    jac(row, ix + 1) = dz / r;
    ++row;
  }
  for (const auto & pair : topology.relative_pairs) {
    require(
      2 * std::max(pair.observer, pair.target) + 1 < std::size_t(state.rows()),
      ErrorKind::InvalidInput, "relative pair out of range");
    const Index io = static_cast<Index>(2 * pair.observer);
    const Index it = static_cast<Index>(2 * pair.target);
    const Scalar dx = state(it) - state(io);
    const Scalar dz = state(it + 1) - state(io + 1);
    const Scalar r = detail::checked_range<Scalar>(dx, dz, row);
    jac(row, it) = dx / r;
    jac(row, it + 1) = dz / r;
    jac(row, io) = -dx / r;
    jac(row, io + 1) = -dz / r;
    ++row;
  }
  return jac;
}

/// Upper bounds with unavailable entries forced to zero.
Eigen::ArrayXXd apply_mask(const AvailabilityMask & mask, const Eigen::ArrayXXd & bounds);

/// The tracking geometry used throughout the examples and acceptance runs:
/// four stations at (3,-3), (-3,-3), (-3,3), (3,3) ranging agent 0, then
/// agent 0 ranging agents 1 and 2.
SensingTopology reference_topology();

}  // namespace sensched

#endif  // SENSCHED_SENSING_HPP_
