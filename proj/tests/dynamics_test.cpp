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

#include <cmath>
#include <numbers>
#include <random>

#include "sensched/dynamics.hpp"
#include "sensched/error.hpp"
#include "sensched/scenario.hpp"

using namespace sensched;

namespace
{

MultiAgentConfig single(AgentKind kind, double shape, double x, double z)
{
  MultiAgentConfig c;
  c.agents = {{kind, shape}};
  c.primary_count = 1;
  c.initial_nominal = Eigen::Vector2d(x, z);
  return c;
}

Eigen::MatrixXd fd_jacobian(const Eigen::VectorXd & x, const MultiAgentConfig & c)
{
  const Index n = x.size();
  Eigen::MatrixXd out(n, n);
  for (Index j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
    Eigen::VectorXd up = x;
    Eigen::VectorXd dn = x;
    up(j) += h;
    dn(j) -= h;
    out.col(j) = (vector_field(up, c) - vector_field(dn, c)) / (2 * h);
  }
  return out;
}

}  // namespace

TEST(Dynamics, HarmonicField)
{
  const auto c = single(AgentKind::HarmonicOscillator, 1.0, 1.0, 0.0);
  const Eigen::VectorXd f = vector_field(Eigen::Vector2d(1.0, 0.0), c);
  EXPECT_DOUBLE_EQ(f(0), 0.0);
  EXPECT_DOUBLE_EQ(f(1), -1.0);
}

TEST(Dynamics, VanDerPolFieldAtZeroPosition)
{
  const auto c = single(AgentKind::VanDerPol, 0.9, 0.0, 1.0);
  const Eigen::VectorXd f = vector_field(Eigen::Vector2d(0.0, 1.0), c);
  EXPECT_DOUBLE_EQ(f(0), 1.0);
  EXPECT_DOUBLE_EQ(f(1), 1.0);
}

TEST(Dynamics, ReferenceFieldMatchesHandEvaluation)
{
  const auto cfg = reference_config();
  const Eigen::VectorXd f = vector_field(cfg.agents.initial_nominal, cfg.agents);
  Eigen::VectorXd expected(6);
  expected << 0.0, -3.0, 0.5215, -3.440541489679012, -0.5215, 0.4785696214320989;
  EXPECT_LT((f - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dynamics, JacobianSpecialCases)
{
  const auto h = single(AgentKind::HarmonicOscillator, 1.0, 0.0, 0.0);
  Eigen::Matrix2d rot;
  rot << 0, 1, -1, 0;
  EXPECT_EQ(jacobian(Eigen::Vector2d(2.5, -0.7), h), Eigen::MatrixXd(rot));

  const auto v = single(AgentKind::VanDerPol, 0.9, 0.0, 0.0);
  const Eigen::MatrixXd j = jacobian(Eigen::Vector2d::Zero(), v);
  EXPECT_DOUBLE_EQ(j(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(j(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(j(1, 0), -1.0 / 0.9);
  EXPECT_DOUBLE_EQ(j(1, 1), 1.0);
}

TEST(Dynamics, JacobianMatchesFiniteDifferences)
{
  const auto cfg = reference_config();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(6);
    for (Index i = 0; i < 6; ++i) {
      x(i) = u(rng);
    }
    const Eigen::MatrixXd exact = jacobian(x, cfg.agents);
    const Eigen::MatrixXd fd = fd_jacobian(x, cfg.agents);
    EXPECT_LE((exact - fd).norm() / exact.norm(), 1e-6) << "trial " << trial;
    // Agents do not interact.
    for (Index a = 0; a < 3; ++a) {
      for (Index b = 0; b < 3; ++b) {
        if (a != b) {
          EXPECT_EQ(exact.block(2 * a, 2 * b, 2, 2).norm(), 0.0);
        }
      }
    }
  }
}

TEST(Dynamics, HarmonicClosedForm)
{
  const auto c = single(AgentKind::HarmonicOscillator, 1.0, 3.0, 0.0);
  const auto nom = propagate_nominal(c, 2 * std::numbers::pi, 1e-3);
  double worst = 0.0;
  double radius = 0.0;
  for (std::size_t i = 0; i < nom.size(); ++i) {
    const double t = nom.times[i];
    worst = std::max(worst, std::abs(nom.states[i](0) - 3 * std::cos(t)));
    worst = std::max(worst, std::abs(nom.states[i](1) + 3 * std::sin(t)));
    radius = std::max(radius, std::abs(nom.states[i].norm() - 3.0));
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_LT(radius, 1e-9);
}

TEST(Dynamics, ReferenceOrbitsCloseOrStayBounded)
{
  const auto cfg = reference_config();
  const auto nom = propagate_nominal(cfg.agents, 2 * std::numbers::pi, 2 * std::numbers::pi / 1000);
  const Eigen::VectorXd & start = nom.states.front();
  const Eigen::VectorXd & end = nom.states.back();
  EXPECT_LT((end.head<2>() - start.head<2>()).norm(), 1e-8);
  EXPECT_LT((end.segment<2>(2) - start.segment<2>(2)).norm(), 0.05);
  for (const auto & s : nom.states) {
    EXPECT_LT(s.cwiseAbs().maxCoeff(), 6.0);
  }
  EXPECT_EQ(nom.size(), 1001u);
  EXPECT_EQ(nom.states.front(), cfg.agents.initial_nominal);
}

TEST(Dynamics, FourthOrderConvergence)
{
  const auto cfg = reference_config();
  const double t_end = 2.0;
  const auto endpoint = [&](double h) {return propagate_nominal(cfg.agents, t_end, h).states.back();};
  const Eigen::VectorXd a = endpoint(0.04);
  const Eigen::VectorXd b = endpoint(0.02);
  const Eigen::VectorXd c = endpoint(0.01);
  const double order = std::log2((a - b).norm() / (b - c).norm());
  EXPECT_GE(order, 3.5);
  EXPECT_LE(order, 4.5);
}

TEST(Dynamics, GridIsUniformAndEndsAtTarget)
{
  const auto cfg = reference_config();
  const auto nom = propagate_nominal(cfg.agents, 1.0, 0.3);
  EXPECT_EQ(nom.size(), 5u);
  EXPECT_DOUBLE_EQ(nom.end_time(), 1.0);
  EXPECT_EQ(nom.grid_index(0.5), 2u);
  EXPECT_THROW(nom.grid_index(0.33), Error);
}

TEST(Dynamics, KindNamesRoundTrip)
{
  for (auto kind : {AgentKind::HarmonicOscillator, AgentKind::VanDerPol,
      AgentKind::VanDerPolReversed})
  {
    EXPECT_EQ(agent_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW(agent_kind_from_string("duffing"), Error);
}

TEST(Dynamics, ConfigValidation)
{
  auto cfg = reference_config().agents;
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.agents[1].shape = 0.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = cfg;
  bad.initial_nominal.resize(4);
  EXPECT_THROW(bad.validate(), Error);
  bad = cfg;
  bad.primary_count = 2;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Dynamics, DivergenceIsReported)
{
  const auto c = single(AgentKind::VanDerPol, 0.9, 40.0, 40.0);
  try {
    propagate_nominal(c, 10.0, 0.5);
    FAIL() << "expected divergence";
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::Divergence);
  }
}
