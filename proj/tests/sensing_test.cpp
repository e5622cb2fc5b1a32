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


#include <gtest/gtest.h>

#include <random>

#include "sensched/error.hpp"
#include "sensched/scenario.hpp"
#include "sensched/sensing.hpp"

using namespace sensched;

namespace
{

Eigen::VectorXd reference_state()
{
  return reference_config().agents.initial_nominal;
}

Eigen::VectorXd random_state(std::mt19937_64 & rng)
{
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  Eigen::VectorXd x(6);
  for (Index i = 0; i < 6; ++i) {
    x(i) = u(rng);
  }
  return x;
}

}  // namespace

TEST(Sensing, ReferenceRanges)
{
  const Eigen::VectorXd y = range_measurement(reference_state(), reference_topology());
  const std::array<double, 6> expected{3.0, 6.708203932499369, 6.708203932499369, 3.0,
    1.3418819657481056, 4.792060852076067};
  ASSERT_EQ(y.size(), 6);
  for (Index i = 0; i < 6; ++i) {
    EXPECT_NEAR(y(i), expected[i], 1e-12) << "y" << i + 1;
  }
}

TEST(Sensing, StationRange)
{
  SensingTopology topo;
  topo.stations = {{-3.0, 3.0}};
  topo.station_links = {{0, 0}};
  Eigen::Vector2d x(3.0, 3.0);
  EXPECT_DOUBLE_EQ(range_measurement(x, topo)(0), 6.0);
  const Eigen::MatrixXd h = measurement_jacobian(x, topo);
  EXPECT_DOUBLE_EQ(h(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(h(0, 1), 0.0);
}

TEST(Sensing, ZeroRangeIsSingular)
{
  SensingTopology topo;
  topo.stations = {{3.0, 0.0}};
  topo.station_links = {{0, 0}};
  Eigen::Vector2d x(3.0, 0.0);
  try {
    measurement_jacobian(x, topo);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::Singularity);
  }
  EXPECT_THROW(range_measurement(x, topo), Error);
}

TEST(Sensing, JacobianStructure)
{
  std::mt19937_64 rng(11);
  const auto topo = reference_topology();
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = random_state(rng);
    const Eigen::MatrixXd h = measurement_jacobian(x, topo);
    ASSERT_EQ(h.rows(), 6);
    ASSERT_EQ(h.cols(), 6);
    for (Index r = 0; r < 4; ++r) {
      EXPECT_NEAR(h.row(r).norm(), 1.0, 1e-14);
      EXPECT_EQ(h.row(r).tail(4).cwiseAbs().maxCoeff(), 0.0);
    }
    for (Index r = 4; r < 6; ++r) {
      EXPECT_NEAR(h.row(r).norm(), std::sqrt(2.0), 1e-14);
      EXPECT_NEAR(h.row(r).sum(), 0.0, 1e-14);
    }
    EXPECT_EQ(h.block(4, 4, 1, 2).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(h.block(5, 2, 1, 2).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Sensing, JacobianMatchesFiniteDifferences)
{
  std::mt19937_64 rng(12);
  const auto topo = reference_topology();
  int checked = 0;
  while (checked < 100) {
    const Eigen::VectorXd x = random_state(rng);
    const Eigen::VectorXd y = range_measurement(x, topo);
    if (y.minCoeff() < 0.2) {
      continue;
    }
    const Eigen::MatrixXd h = measurement_jacobian(x, topo);
    const double eps = 1e-6;
    for (Index j = 0; j < 6; ++j) {
      Eigen::VectorXd xp = x;
      Eigen::VectorXd xm = x;
      xp(j) += eps;
      xm(j) -= eps;
      const Eigen::VectorXd fd =
        (range_measurement(xp, topo) - range_measurement(xm, topo)) / (2 * eps);
      EXPECT_LT((fd - h.col(j)).cwiseAbs().maxCoeff(), 1e-6);
    }
    ++checked;
  }
}

TEST(Sensing, SingleInstantRank)
{
  const Eigen::MatrixXd h = measurement_jacobian(reference_state(), reference_topology());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
  EXPECT_EQ(lu.rank(), 4);
}

TEST(Sensing, ApplyMask)
{
  AvailabilityMask mask = AvailabilityMask::Constant(3, 2, true);
  mask(1, 0) = false;
  mask(2, 1) = false;
  const Eigen::ArrayXXd bounds = Eigen::ArrayXXd::Constant(3, 2, 450.0);
  const Eigen::ArrayXXd masked = apply_mask(mask, bounds);
  EXPECT_EQ(masked(1, 0), 0.0);
  EXPECT_EQ(masked(2, 1), 0.0);
  EXPECT_EQ(masked(0, 0), 450.0);
  EXPECT_EQ((masked > 0).count(), 4);
  EXPECT_EQ(apply_mask(AvailabilityMask::Constant(3, 2, true), bounds).matrix(), bounds.matrix());
  EXPECT_THROW(apply_mask(AvailabilityMask::Constant(2, 2, true), bounds), Error);
}

TEST(Sensing, LabelsAndValidation)
{
  const auto topo = reference_topology();
  const auto labels = topo.channel_labels();
  ASSERT_EQ(labels.size(), 6u);
  EXPECT_EQ(labels.front(), "y1");
  EXPECT_EQ(labels.back(), "y6");

  const auto agents = reference_config().agents;
  EXPECT_NO_THROW(topo.validate(agents));
  auto bad = topo;
  bad.station_links.push_back({0, 2});
  EXPECT_THROW(bad.validate(agents), Error);
  bad = topo;
  bad.relative_pairs.push_back({1, 2});
  EXPECT_THROW(bad.validate(agents), Error);
  bad = topo;
  bad.station_links.push_back({7, 0});
  EXPECT_THROW(bad.validate(agents), Error);
  EXPECT_THROW(SensingTopology{}.validate(agents), Error);
}
