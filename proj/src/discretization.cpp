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

#include "sensched/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sensched/linalg.hpp"

namespace sensched
{

namespace
{

using StageJacobians = std::array<Eigen::MatrixXd, 4>;

// One RK4 step of X' = J(t) X using precomputed stage Jacobians.
Eigen::MatrixXd linear_rk4(const StageJacobians & jac, const Eigen::MatrixXd & x, double h)
{
  const Eigen::MatrixXd k1 = jac[0] * x;
  const Eigen::MatrixXd k2 = jac[1] * (x + 0.5 * h * k1);
  const Eigen::MatrixXd k3 = jac[2] * (x + 0.5 * h * k2);
  const Eigen::MatrixXd k4 = jac[3] * (x + h * k3);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// One RK4 step of S' = J S + S J^T + D.
Eigen::MatrixXd lyapunov_rk4(
  const StageJacobians & jac, const Eigen::MatrixXd & s,
  const Eigen::MatrixXd & diffusion, double h)
{
  auto rate = [&](int i, const Eigen::MatrixXd & m) -> Eigen::MatrixXd {
      return jac[i] * m + m * jac[i].transpose() + diffusion;
    };
  const Eigen::MatrixXd k1 = rate(0, s);
  const Eigen::MatrixXd k2 = rate(1, s + 0.5 * h * k1);
  const Eigen::MatrixXd k3 = rate(2, s + 0.5 * h * k2);
  const Eigen::MatrixXd k4 = rate(3, s + h * k3);
  return symmetrize(s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

std::size_t grid_steps_per_interval(const NominalTrajectory & nominal, double dt)
{
  const double ratio = dt / nominal.step;
  const double rounded = std::round(ratio);
  require(
    rounded >= 1.0 && std::abs(ratio - rounded) <= 1e-6, ErrorKind::InvalidInput,
    "measurement interval must be a whole number of nominal grid steps");
  return static_cast<std::size_t>(rounded);
}

}  // namespace

Eigen::MatrixXd state_transition(const NominalTrajectory & nominal, double t0, double t1)
{
  require(t1 >= t0, ErrorKind::InvalidInput, "state_transition requires t1 >= t0");
  const std::size_t i0 = nominal.grid_index(t0);
  const std::size_t i1 = nominal.grid_index(t1);
  const Index n = nominal.config.state_dim();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = i0; i < i1; ++i) {
    const auto jac = rk4_stage_jacobians(nominal.states[i], nominal.step, nominal.config);
    phi = linear_rk4(jac, phi, nominal.step);
  }
  return phi;
}

CovarianceSeries propagate_mean_cov(
  const GaussianState & initial,
  const NominalTrajectory & nominal,
  const ContinuousNoiseSpec & noise,
  double t_end)
{
  const Index n = nominal.config.state_dim();
  require(
    initial.mean.size() == n && initial.cov.rows() == n && initial.cov.cols() == n,
    ErrorKind::InvalidInput, "initial moments do not match the state dimension");
  require(
    noise.input.rows() == n && noise.input.cols() == noise.density.rows() &&
    noise.density.rows() == noise.density.cols(),
    ErrorKind::InvalidInput, "noise input/density dimensions disagree");
  const std::size_t last = nominal.grid_index(t_end);
  const Eigen::MatrixXd diffusion = noise.diffusion();

  CovarianceSeries series;
  series.times.reserve(last + 1);
  series.states.reserve(last + 1);
  series.times.push_back(nominal.times.front());
  series.states.push_back({initial.mean, symmetrize(initial.cov)});

  Eigen::MatrixXd mean = initial.mean;
  Eigen::MatrixXd cov = symmetrize(initial.cov);
  for (std::size_t i = 0; i < last; ++i) {
    const auto jac = rk4_stage_jacobians(nominal.states[i], nominal.step, nominal.config);
    mean = linear_rk4(jac, mean, nominal.step);
    cov = lyapunov_rk4(jac, cov, diffusion, nominal.step);
    if (!cov.allFinite() || !mean.allFinite()) {
      fail(
        ErrorKind::Divergence,
        "covariance became non-finite at t = " + std::to_string(nominal.times[i + 1]));
    }
    series.times.push_back(nominal.times[i + 1]);
    series.states.push_back({mean.col(0), cov});
  }
  return series;
}

std::vector<Eigen::MatrixXd> discretize_process_noise(
  std::span<const Eigen::MatrixXd> covariances,
  std::span<const Eigen::MatrixXd> transitions)
{
  require(
    covariances.size() == transitions.size() + 1, ErrorKind::InvalidInput,
    "need one more covariance sample than transition matrices");
  std::vector<Eigen::MatrixXd> out;
  out.reserve(transitions.size());
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const Eigen::MatrixXd & a = transitions[k];
    const Eigen::MatrixXd q =
      symmetrize(covariances[k + 1] - a * covariances[k] * a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
    const double lowest = eig.eigenvalues().size() ? eig.eigenvalues()(0) : 0.0;
    const double scale = std::max(q.norm(), covariances[k + 1].norm());
    if (lowest < -1e-6 * scale) {
      fail(
        ErrorKind::Inconsistency,
        "Q_" + std::to_string(k) + " has eigenvalue " + std::to_string(lowest) +
        "; the covariance grid is too coarse");
    }
    if (lowest < 0.0) {
      const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
      out.push_back(eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose());
    } else {
      out.push_back(q);
    }
  }
  return out;
}

Discretization discretize(
  const NominalTrajectory & nominal,
  const ContinuousNoiseSpec & noise,
  const GaussianState & initial,
  double dt,
  std::size_t steps)
{
  require(steps > 0, ErrorKind::InvalidInput, "need at least one discrete step");
  const std::size_t per = grid_steps_per_interval(nominal, dt);
  const std::size_t last = per * steps;
  require(
    last < nominal.size(), ErrorKind::InvalidInput,
    "nominal trajectory is shorter than the discretization horizon");
  const Index n = nominal.config.state_dim();

  Discretization out;
  out.fine = propagate_mean_cov(initial, nominal, noise, nominal.times[last]);
  out.system.dt = dt;

  std::vector<Eigen::MatrixXd> transitions;
  std::vector<Eigen::MatrixXd> covariances;
  transitions.reserve(steps);
  covariances.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    out.at_instants.push_back(out.fine.states[k * per]);
    covariances.push_back(out.fine.states[k * per].cov);
  }
  for (std::size_t k = 0; k < steps; ++k) {
    Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = k * per; i < (k + 1) * per; ++i) {
      const auto jac = rk4_stage_jacobians(nominal.states[i], nominal.step, nominal.config);
      phi = linear_rk4(jac, phi, nominal.step);
    }
    transitions.push_back(std::move(phi));
  }
  const auto q = discretize_process_noise(covariances, transitions);
  for (std::size_t k = 0; k < steps; ++k) {
    out.system.steps.push_back({transitions[k], Eigen::MatrixXd::Identity(n, n), q[k]});
  }
  return out;
}

}  // namespace sensched
