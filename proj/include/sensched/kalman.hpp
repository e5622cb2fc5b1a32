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

#ifndef SENSCHED_KALMAN_HPP_
#define SENSCHED_KALMAN_HPP_

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "sensched/discretization.hpp"
#include "sensched/gaussian.hpp"

namespace sensched
{

using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// mu- = A mu+, Sigma- = A Sigma+ A^T + B Q B^T.
GaussianState kf_predict(const GaussianState & state, MatrixRef a, MatrixRef b, MatrixRef q);

/// Joseph-form measurement update. `r_diag` must be strictly positive; drop
/// zero-precision channels from `c`, `r_diag` and `y` before calling.
/// An empty `c` returns the prior unchanged.
GaussianState kf_update(const GaussianState & state, MatrixRef c, VectorRef r_diag, VectorRef y);

/// Indices i with precision(i) > 0.
std::vector<Index> active_channels(VectorRef precision);

/// Horizon-stacked system for one batch update over steps kp+1..(k+1)p.
///
///   xbar = Abar x_kp + Bbar wbar,  ybar = Cbar xbar + nbar
///
/// `selector` is M = [0 ... 0 I], extracting the last step from xbar.
struct BatchSystem
{
  Index state_dim = 0;
  Index horizon = 0;
  Index channels = 0;   // per step
  Index noise_dim = 0;  // per step

  Eigen::MatrixXd abar;
  Eigen::MatrixXd bbar;
  Eigen::MatrixXd cbar;
  Eigen::MatrixXd qbar;
  Eigen::MatrixXd selector;
  Eigen::VectorXd prior_mean;
  Eigen::MatrixXd prior_cov;
  Eigen::MatrixXd prior_cov_sqrt;

  Index stacked_channels() const {return channels * horizon;}

  /// M Sigmabar- M^T, the prior covariance at the end of the horizon.
  Eigen::MatrixXd final_prior_cov() const;
};

/// Stacks steps [first_step, first_step + horizon) of `system`. `measurements`
/// holds the output matrices C_{kp+1} .. C_{(k+1)p}; `posterior` is the
/// filter state at step kp. Throws Error(NotPositiveSemidefinite) when the
/// stacked prior has an eigenvalue below -1e-8 * ||Sigmabar-||.
BatchSystem build_batch(
  const DiscreteLtvSystem & system,
  std::span<const Eigen::MatrixXd> measurements,
  const GaussianState & posterior,
  Index horizon,
  std::size_t first_step = 0);

/// Posterior at the end of the horizon for gain G = M Kbar and stacked
/// precisions s:  Sigma+ = N Sigmabar- N^T + G diag(s)^{-1} G^T, N = M - G Cbar.
/// Gain columns of zero-precision channels must vanish (Error(ContractViolation)
/// otherwise). Without `ybar` the mean is the prior mean of the last step.
GaussianState batch_posterior_stats(
  const BatchSystem & batch,
  MatrixRef gain,
  VectorRef precision,
  const std::optional<Eigen::VectorXd> & ybar = std::nullopt);

/// Optimal G = M Sigmabar- Cbar_a^T (Cbar_a Sigmabar- Cbar_a^T + R_a)^{-1} over the
/// active channels; inactive columns are zero.
Eigen::MatrixXd optimal_batch_gain(const BatchSystem & batch, VectorRef precision);

/// Runs the sequential filter over `horizon` steps (predict, then update with
/// the channels active in `precision`, laid out step-major as k * m_y + j).
/// Returns the posterior at the end of the horizon.
GaussianState sequential_filter(
  const DiscreteLtvSystem & system,
  std::span<const Eigen::MatrixXd> measurements,
  const GaussianState & posterior,
  VectorRef precision,
  Index horizon,
  std::size_t first_step = 0);

}  // namespace sensched

#endif  // SENSCHED_KALMAN_HPP_
