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

#ifndef SENSCHED_DISCRETIZATION_HPP_
#define SENSCHED_DISCRETIZATION_HPP_

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "sensched/dynamics.hpp"
#include "sensched/gaussian.hpp"

namespace sensched
{

/// Continuous white process noise entering through `input`:
/// dx = A_c x dt + input * dw, E[dw dw^T] = density * dt.
struct ContinuousNoiseSpec
{
  Eigen::MatrixXd density;
  Eigen::MatrixXd input;

  /// input * density * input^T
  Eigen::MatrixXd diffusion() const {return input * density * input.transpose();}
};

struct DiscreteStep
{
  Eigen::MatrixXd transition;   // A_k
  Eigen::MatrixXd noise_input;  // B_k
  Eigen::MatrixXd noise_cov;    // Q_k
};

/// x_{k+1} = A_k x_k + B_k w_k, w_k ~ N(0, Q_k), for k = 0..size()-1.
struct DiscreteLtvSystem
{
  std::vector<DiscreteStep> steps;
  double dt = 0.0;

  std::size_t size() const {return steps.size();}
  Index state_dim() const {return steps.empty() ? 0 : steps.front().transition.rows();}
};

/// Mean/covariance samples on the nominal grid.
struct CovarianceSeries
{
  std::vector<double> times;
  std::vector<GaussianState> states;
};

/// Phi(t1, t0) for the linearization about `nominal`. Both times must lie on
/// the nominal grid and t1 >= t0.
Eigen::MatrixXd state_transition(const NominalTrajectory & nominal, double t0, double t1);

/// Integrates mu' = A_c mu and Sigma' = A_c Sigma + Sigma A_c^T + B_c Q B_c^T
/// from the first grid point up to `t_end` (a grid point).
CovarianceSeries propagate_mean_cov(
  const GaussianState & initial,
  const NominalTrajectory & nominal,
  const ContinuousNoiseSpec & noise,
  double t_end);

/// Q_k = Sigma(t_{k+1}) - A_k Sigma(t_k) A_k^T, symmetrized and projected onto
/// the PSD cone. `covariances` holds Sigma(t_0..t_p), `transitions` A_0..A_{p-1}.
/// Throws Error(Inconsistency) when an eigenvalue is below -1e-6 * ||Q_k||.
std::vector<Eigen::MatrixXd> discretize_process_noise(
  std::span<const Eigen::MatrixXd> covariances,
  std::span<const Eigen::MatrixXd> transitions);

/// Everything the filter and the optimizer need from the continuous model.
struct Discretization
{
  DiscreteLtvSystem system;
  std::vector<GaussianState> at_instants;  // continuous moments at t_0..t_p
  CovarianceSeries fine;                   // moments on the full nominal grid
};

/// Discretizes over `steps` intervals of length `dt` starting at t = 0; the
/// nominal must cover [0, steps * dt] with dt a whole number of grid steps.
/// B_k is the identity and the discrete noise lives in state space.
Discretization discretize(
  const NominalTrajectory & nominal,
  const ContinuousNoiseSpec & noise,
  const GaussianState & initial,
  double dt,
  std::size_t steps);

}  // namespace sensched

#endif  // SENSCHED_DISCRETIZATION_HPP_
