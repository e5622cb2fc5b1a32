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

#include "sensched/kalman.hpp"

#include <string>

#include "sensched/error.hpp"
#include "sensched/linalg.hpp"

namespace sensched
{

namespace
{

Eigen::MatrixXd rows_of(const Eigen::MatrixXd & m, const std::vector<Index> & rows)
{
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  }
  return out;
}

}  // namespace

GaussianState kf_predict(const GaussianState & state, MatrixRef a, MatrixRef b, MatrixRef q)
{
  const Index n = state.mean.size();
  require(
    a.rows() == n && a.cols() == n && state.cov.rows() == n && b.rows() == n &&
    b.cols() == q.rows() && q.rows() == q.cols(),
    ErrorKind::InvalidInput, "kf_predict: dimension mismatch");
  GaussianState out;
  out.mean = a * state.mean;
  out.cov = symmetrize(a * state.cov * a.transpose() + b * q * b.transpose());
  return out;
}

GaussianState kf_update(const GaussianState & state, MatrixRef c, VectorRef r_diag, VectorRef y)
{
  const Index n = state.mean.size();
  if (c.rows() == 0) {
    return state;
  }
  require(
    c.cols() == n && r_diag.size() == c.rows() && y.size() == c.rows(),
    ErrorKind::InvalidInput, "kf_update: dimension mismatch");
  require((r_diag.array() > 0.0).all(), ErrorKind::InvalidInput, "kf_update: R must be positive");

  const Eigen::MatrixXd pct = state.cov * c.transpose();
  Eigen::MatrixXd innovation = c * pct;
  innovation.diagonal() += r_diag;
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(innovation));
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::Numerical, "kf_update: innovation covariance is singular");
  }
  const Eigen::MatrixXd gain = llt.solve(pct.transpose()).transpose();
  const Eigen::MatrixXd factor = Eigen::MatrixXd::Identity(n, n) - gain * c;

  GaussianState out;
  out.mean = state.mean + gain * (y - c * state.mean);
  out.cov = symmetrize(
    factor * state.cov * factor.transpose() + gain * r_diag.asDiagonal() * gain.transpose());
  return out;
}

std::vector<Index> active_channels(VectorRef precision)
{
  std::vector<Index> active;
  for (Index i = 0; i < precision.size(); ++i) {
    if (precision(i) > 0.0) {
      active.push_back(i);
    }
  }
  return active;
}

Eigen::MatrixXd BatchSystem::final_prior_cov() const
{
  return selector * prior_cov * selector.transpose();
}

BatchSystem build_batch(
  const DiscreteLtvSystem & system,
  std::span<const Eigen::MatrixXd> measurements,
  const GaussianState & posterior,
  Index horizon,
  std::size_t first_step)
{
  require(horizon > 0, ErrorKind::InvalidInput, "horizon must be positive");
  const auto p = static_cast<std::size_t>(horizon);
  require(
    first_step + p <= system.size(), ErrorKind::InvalidInput,
    "system has fewer steps than the requested horizon");
  require(
    measurements.size() == p, ErrorKind::InvalidInput,
    "need one output matrix per horizon step");
  const Index n = system.state_dim();
  const Index m = system.steps[first_step].noise_input.cols();
  const Index my = measurements.front().rows();
  require(
    posterior.mean.size() == n && posterior.cov.rows() == n, ErrorKind::InvalidInput,
    "posterior does not match the state dimension");
  for (const auto & c : measurements) {
    require(
      c.rows() == my && c.cols() == n, ErrorKind::InvalidInput,
      "output matrices must all be m_y x n");
  }

  BatchSystem batch;
  batch.state_dim = n;
  batch.horizon = horizon;
  batch.channels = my;
  batch.noise_dim = m;
  batch.abar = Eigen::MatrixXd::Zero(n * horizon, n);
  batch.bbar = Eigen::MatrixXd::Zero(n * horizon, m * horizon);
  batch.cbar = Eigen::MatrixXd::Zero(my * horizon, n * horizon);
  batch.qbar = Eigen::MatrixXd::Zero(m * horizon, m * horizon);
  batch.selector = Eigen::MatrixXd::Zero(n, n * horizon);
  batch.selector.rightCols(n).setIdentity();

  Eigen::MatrixXd cumulative = Eigen::MatrixXd::Identity(n, n);
  for (Index i = 0; i < horizon; ++i) {
    const DiscreteStep & step = system.steps[first_step + static_cast<std::size_t>(i)];
    require(
      step.noise_input.cols() == m && step.noise_cov.rows() == m, ErrorKind::InvalidInput,
      "noise dimension changes within the horizon");
    cumulative = step.transition * cumulative;
    batch.abar.middleRows(i * n, n) = cumulative;
    batch.qbar.block(i * m, i * m, m, m) = step.noise_cov;
    batch.cbar.block(i * my, i * n, my, n) = measurements[static_cast<std::size_t>(i)];
    // Column block i: B_i on the diagonal, then A_{j-1}...A_{i+1} B_i below it.
    Eigen::MatrixXd carried = step.noise_input;
    batch.bbar.block(i * n, i * m, n, m) = carried;
    for (Index j = i + 1; j < horizon; ++j) {
      carried = system.steps[first_step + static_cast<std::size_t>(j)].transition * carried;
      batch.bbar.block(j * n, i * m, n, m) = carried;
    }
  }

  batch.prior_mean = batch.abar * posterior.mean;
  batch.prior_cov = symmetrize(
    batch.abar * posterior.cov * batch.abar.transpose() +
    batch.bbar * batch.qbar * batch.bbar.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(batch.prior_cov);
  const double lowest = eig.eigenvalues()(0);
  if (lowest < -1e-8 * batch.prior_cov.norm()) {
    fail(
      ErrorKind::NotPositiveSemidefinite,
      "stacked prior covariance has eigenvalue " + std::to_string(lowest));
  }
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  batch.prior_cov_sqrt =
    symmetrize(eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose());
  return batch;
}

GaussianState batch_posterior_stats(
  const BatchSystem & batch,
  MatrixRef gain,
  VectorRef precision,
  const std::optional<Eigen::VectorXd> & ybar)
{
  const Index n = batch.state_dim;
  const Index ms = batch.stacked_channels();
  require(
    gain.rows() == n && gain.cols() == ms && precision.size() == ms,
    ErrorKind::InvalidInput, "batch_posterior_stats: dimension mismatch");
  require((precision.array() >= 0.0).all(), ErrorKind::InvalidInput, "precisions must be >= 0");

  Eigen::VectorXd noise_var = Eigen::VectorXd::Zero(ms);
  for (Index j = 0; j < ms; ++j) {
    if (precision(j) > 0.0) {
      noise_var(j) = 1.0 / precision(j);
    } else if (gain.col(j).norm() > 1e-9) {
      fail(
        ErrorKind::ContractViolation,
        "gain column " + std::to_string(j) + " is nonzero on a zero-precision channel");
    }
  }

  const Eigen::MatrixXd residual_map = batch.selector - gain * batch.cbar;
  GaussianState out;
  out.cov = symmetrize(
    residual_map * batch.prior_cov * residual_map.transpose() +
    gain * noise_var.asDiagonal() * gain.transpose());
  out.mean = batch.selector * batch.prior_mean;
  if (ybar) {
    require(ybar->size() == ms, ErrorKind::InvalidInput, "ybar has the wrong length");
    out.mean += gain * (*ybar - batch.cbar * batch.prior_mean);
  }
  return out;
}

Eigen::MatrixXd optimal_batch_gain(const BatchSystem & batch, VectorRef precision)
{
  const Index ms = batch.stacked_channels();
  require(precision.size() == ms, ErrorKind::InvalidInput, "precision vector has wrong length");
  const auto active = active_channels(precision);
  Eigen::MatrixXd gain = Eigen::MatrixXd::Zero(batch.state_dim, ms);
  if (active.empty()) {
    return gain;
  }
  const Eigen::MatrixXd c = rows_of(batch.cbar, active);
  const Eigen::MatrixXd pct = batch.prior_cov * c.transpose();
  Eigen::MatrixXd innovation = c * pct;
  for (std::size_t i = 0; i < active.size(); ++i) {
    innovation(static_cast<Index>(i), static_cast<Index>(i)) += 1.0 / precision(active[i]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(innovation));
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::Numerical, "optimal_batch_gain: innovation covariance is singular");
  }
  const Eigen::MatrixXd active_gain =
    llt.solve((batch.selector * pct).transpose()).transpose();
  for (std::size_t i = 0; i < active.size(); ++i) {
    gain.col(active[i]) = active_gain.col(static_cast<Index>(i));
  }
  return gain;
}

GaussianState sequential_filter(
  const DiscreteLtvSystem & system,
  std::span<const Eigen::MatrixXd> measurements,
  const GaussianState & posterior,
  VectorRef precision,
  Index horizon,
  std::size_t first_step)
{
  const auto p = static_cast<std::size_t>(horizon);
  require(
    measurements.size() == p && first_step + p <= system.size(), ErrorKind::InvalidInput,
    "sequential_filter: horizon does not match the inputs");
  const Index my = measurements.front().rows();
  require(
    precision.size() == my * horizon, ErrorKind::InvalidInput,
    "sequential_filter: precision vector has wrong length");

  GaussianState state = posterior;
  for (std::size_t k = 0; k < p; ++k) {
    const DiscreteStep & step = system.steps[first_step + k];
    state = kf_predict(state, step.transition, step.noise_input, step.noise_cov);
    const Eigen::VectorXd s = precision.segment(static_cast<Index>(k) * my, my);
    const auto active = active_channels(s);
    if (active.empty()) {
      continue;
    }
    const Eigen::MatrixXd c = rows_of(measurements[k], active);
    Eigen::VectorXd r(static_cast<Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) {
      r(static_cast<Index>(i)) = 1.0 / s(active[i]);
    }
    const Eigen::VectorXd y = c * state.mean;
    state = kf_update(state, c, r, y);
  }
  return state;
}

}  // namespace sensched
