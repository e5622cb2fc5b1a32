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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "sensched/discretization.hpp"
#include "sensched/error.hpp"
#include "sensched/linalg.hpp"
#include "sensched/scenario.hpp"

using namespace sensched;

namespace
{

const double kTp = 2 * std::numbers::pi;

NominalTrajectory reference_nominal()
{
  return propagate_nominal(reference_config().agents, kTp, 0.1 * kTp / 100);
}

ContinuousNoiseSpec reference_noise(double std_dev = 0.05)
{
  ContinuousNoiseSpec noise;
  noise.density = std_dev * std_dev * Eigen::MatrixXd::Identity(3, 3);
  noise.input = Eigen::MatrixXd::Zero(6, 3);
  for (Index i = 0; i < 3; ++i) {
    noise.input(2 * i + 1, i) = 1.0;
  }
  return noise;
}

GaussianState reference_initial()
{
  GaussianState s;
  s.mean = 0.05 * reference_config().agents.initial_nominal;
  s.cov = (0.01 * s.mean.cwiseAbs()).asDiagonal();
  return s;
}

double block_trace(const NominalTrajectory & nom, std::size_t i, Index agent)
{
  return jacobian(nom.states[i], nom.config).block(2 * agent, 2 * agent, 2, 2).trace();
}

}  // namespace

TEST(Discretization, HarmonicTransitionIsRotation)
{
  const auto nom = reference_nominal();
  for (auto [i0, i1] : {std::pair{0, 1}, std::pair{100, 350}, std::pair{0, 1000}}) {
    const double t0 = nom.times[i0];
    const double t1 = nom.times[i1];
    const Eigen::MatrixXd phi = state_transition(nom, t0, t1);
    const double d = t1 - t0;
    Eigen::Matrix2d rot;
    rot << std::cos(d), std::sin(d), -std::sin(d), std::cos(d);
    EXPECT_LT((phi.topLeftCorner<2, 2>() - rot).cwiseAbs().maxCoeff(), 1e-8);
  }
  EXPECT_EQ(state_transition(nom, nom.times[5], nom.times[5]), Eigen::MatrixXd::Identity(6, 6));
}

TEST(Discretization, SemigroupProperty)
{
  const auto nom = reference_nominal();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, nom.size() - 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::array<std::size_t, 3> idx{pick(rng), pick(rng), pick(rng)};
    std::sort(idx.begin(), idx.end());
    const double t0 = nom.times[idx[0]];
    const double t1 = nom.times[idx[1]];
    const double t2 = nom.times[idx[2]];
    const Eigen::MatrixXd whole = state_transition(nom, t0, t2);
    const Eigen::MatrixXd parts = state_transition(nom, t1, t2) * state_transition(nom, t0, t1);
    EXPECT_LT(relative_frobenius_error(parts, whole), 1e-7);
  }
}

TEST(Discretization, LiouvilleDeterminant)
{
  const auto nom = reference_nominal();
  const std::size_t last = nom.size() - 1;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, last - 300);
  std::uniform_int_distribution<std::size_t> span(1, 150);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t a = pick(rng);
    const std::size_t b = a + 2 * span(rng);
    const Eigen::MatrixXd phi = state_transition(nom, nom.times[a], nom.times[b]);
    for (Index g = 0; g < 3; ++g) {
      double integral = block_trace(nom, a, g) + block_trace(nom, b, g);
      for (std::size_t i = a + 1; i < b; ++i) {
        integral += ((i - a) % 2 ? 4.0 : 2.0) * block_trace(nom, i, g);
      }
      integral *= nom.step / 3.0;
      const double det = phi.block(2 * g, 2 * g, 2, 2).determinant();
      EXPECT_NEAR(det / std::exp(integral), 1.0, 1e-4) << a << ".." << b << " agent " << g;
    }
  }
}

TEST(Discretization, MeanPropagationIsLinear)
{
  const auto nom = reference_nominal();
  auto init = reference_initial();
  const auto base = propagate_mean_cov(init, nom, reference_noise(), kTp);
  init.mean *= 2.5;
  const auto scaled = propagate_mean_cov(init, nom, reference_noise(), kTp);
  for (std::size_t i = 0; i < base.states.size(); i += 97) {
    EXPECT_LT((scaled.states[i].mean - 2.5 * base.states[i].mean).norm(),
      1e-13 * (1.0 + base.states[i].mean.norm()));
  }
}

TEST(Discretization, NoiselessHarmonicCovarianceRotates)
{
  const auto nom = reference_nominal();
  GaussianState init;
  init.mean = Eigen::VectorXd::Zero(6);
  init.cov = Eigen::MatrixXd::Identity(6, 6) * 0.01;
  init.cov(0, 0) = 0.04;
  const auto series = propagate_mean_cov(init, nom, reference_noise(0.0), kTp);
  for (std::size_t i = 0; i < series.states.size(); i += 50) {
    const Eigen::MatrixXd phi = state_transition(nom, 0.0, series.times[i]);
    const Eigen::MatrixXd expected = phi * init.cov * phi.transpose();
    EXPECT_LT(relative_frobenius_error(series.states[i].cov, expected), 1e-6);
    EXPECT_NEAR((series.states[i].cov.topLeftCorner<2, 2>().trace()), 0.05, 1e-9);
  }
}

TEST(Discretization, ZeroNoiseGivesZeroQ)
{
  const auto nom = reference_nominal();
  const auto d = discretize(nom, reference_noise(0.0), reference_initial(), 0.1 * kTp, 10);
  for (std::size_t k = 0; k < d.system.steps.size(); ++k) {
    EXPECT_LT(d.system.steps[k].noise_cov.norm(), 1e-6 * d.at_instants[k + 1].cov.norm());
  }
}

TEST(Discretization, WienerIncrement)
{
  // x' = 0 is the harmonic oscillator with no motion: use a one-state-pair
  // system whose transition is the identity by stacking the increments.
  std::vector<Eigen::MatrixXd> covs{Eigen::MatrixXd::Constant(1, 1, 0.2),
    Eigen::MatrixXd::Constant(1, 1, 0.2 + 0.3 * 0.5)};
  std::vector<Eigen::MatrixXd> trans{Eigen::MatrixXd::Identity(1, 1)};
  const auto q = discretize_process_noise(covs, trans);
  ASSERT_EQ(q.size(), 1u);
  EXPECT_NEAR(q[0](0, 0), 0.3 * 0.5, 1e-15);
}

TEST(Discretization, ProcessNoiseMatchesQuadrature)
{
  const auto nom = reference_nominal();
  const auto noise = reference_noise();
  const double dt = 0.1 * kTp;
  const auto d = discretize(nom, noise, reference_initial(), dt, 10);
  const Eigen::MatrixXd diffusion = noise.diffusion();
  const std::size_t per = 100;
  for (std::size_t k = 0; k < 10; ++k) {
    const double t_end = nom.times[(k + 1) * per];
    Eigen::MatrixXd integral = Eigen::MatrixXd::Zero(6, 6);
    for (std::size_t i = 0; i <= per; ++i) {
      const double w = (i == 0 || i == per) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const Eigen::MatrixXd phi = state_transition(nom, nom.times[k * per + i], t_end);
      integral += w * phi * diffusion * phi.transpose();
    }
    integral *= nom.step / 3.0;
    const Eigen::MatrixXd & qk = d.system.steps[k].noise_cov;
    EXPECT_LT(relative_frobenius_error(qk, integral), 1e-4) << "k = " << k;
    EXPECT_GE(min_eigenvalue(qk), -1e-12 * qk.norm()) << "k = " << k;
    EXPECT_EQ(qk, qk.transpose());
  }
}

TEST(Discretization, RecursionReproducesContinuousMoments)
{
  const auto nom = reference_nominal();
  const auto d = discretize(nom, reference_noise(), reference_initial(), 0.1 * kTp, 10);
  ASSERT_EQ(d.at_instants.size(), 11u);
  for (std::size_t k = 0; k < 10; ++k) {
    const auto & step = d.system.steps[k];
    const Eigen::MatrixXd next = step.transition * d.at_instants[k].cov *
      step.transition.transpose() + step.noise_input * step.noise_cov *
      step.noise_input.transpose();
    EXPECT_LT((next - d.at_instants[k + 1].cov).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((step.transition * d.at_instants[k].mean - d.at_instants[k + 1].mean).norm(),
      1e-10);
  }
}

TEST(Discretization, EnvelopeGrowsOverThePeriod)
{
  const auto nom = reference_nominal();
  const auto series = propagate_mean_cov(reference_initial(), nom, reference_noise(), kTp);
  EXPECT_GT(series.states.back().cov.trace(), 5.0 * series.states.front().cov.trace());
  for (const auto & state : series.states) {
    EXPECT_GE(min_eigenvalue(state.cov), -1e-12);
  }
}

TEST(Discretization, RejectsOffGridTimes)
{
  const auto nom = reference_nominal();
  EXPECT_THROW(state_transition(nom, 0.0, 0.001), Error);
  EXPECT_THROW(state_transition(nom, nom.times[10], nom.times[5]), Error);
  EXPECT_THROW(discretize(nom, reference_noise(), reference_initial(), 0.105, 10), Error);
}

TEST(Discretization, InconsistentCovariancesAreRejected)
{
  std::vector<Eigen::MatrixXd> covs{Eigen::MatrixXd::Identity(2, 2),
    0.5 * Eigen::MatrixXd::Identity(2, 2)};
  std::vector<Eigen::MatrixXd> trans{Eigen::MatrixXd::Identity(2, 2)};
  try {
    discretize_process_noise(covs, trans);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::Inconsistency);
  }
}
