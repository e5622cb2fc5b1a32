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


// Sparse sensing-precision schedules from a trace-bounded batch update.
//
//   minimize    rho^T s
//   subject to  [ W   (M - G Cbar) Sbar   G       ]
//               [ *   I                   0       ]  >= 0
//               [ *   *                   diag(s) ]
//               trace(W) <= gamma,  0 <= s <= s_max
//
// with Sbar the symmetric square root of the stacked prior covariance.
// Stacked precision index: k * m_y + channel, k = 0..p-1 within the horizon.

#ifndef SENSCHED_PRECISION_OPT_HPP_
#define SENSCHED_PRECISION_OPT_HPP_

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "sensched/conic.hpp"
#include "sensched/kalman.hpp"

namespace sensched
{

struct PrecisionProblem
{
  BatchSystem batch;
  double gamma = 0.0;
  Eigen::VectorXd s_max;    // stacked, availability already applied
  Eigen::VectorXd weights;  // rho, stacked

  /// gamma > 0, s_max >= 0, rho > 0, sizes consistent. Throws Error(InvalidInput).
  void validate() const;
};

/// Builds a problem with rho = 1 from a p x m_y bound grid.
PrecisionProblem make_problem(
  const BatchSystem & batch, double gamma,
  const Eigen::ArrayXXd & s_max_grid);

/// Where each unknown lives in the assembled SDP.
///
/// The assembled program is congruence-scaled for conditioning: its variables
/// are W / gamma, G_ij / sqrt(gamma * s_max_j) and s_j / s_max_j. Channels whose
/// bound is zero carry no variables at all, so their s and gain columns are
/// exactly zero. `pack` / `unpack` translate to and from the physical values.
struct LmiLayout
{
  Index state_dim = 0;
  Index stacked_states = 0;
  Index stacked_channels = 0;
  std::vector<Index> channels;  // stacked indices that carry variables
  double gamma = 0.0;
  Eigen::VectorXd s_max;

  Index num_vars() const;
  Index lmi_dim() const;
  Index w_index(Index row, Index col) const;
  Index g_index(Index row, Index active) const;
  Index s_index(Index active) const;

  Eigen::VectorXd pack(
    const Eigen::MatrixXd & w, const Eigen::MatrixXd & g,
    const Eigen::VectorXd & s) const;
  void unpack(
    const Eigen::VectorXd & values, Eigen::MatrixXd & w, Eigen::MatrixXd & g,
    Eigen::VectorXd & s) const;
};

struct AssembledLmi
{
  conic::SdpProblem sdp;
  LmiLayout layout;
};

/// Throws Error(Assembly) on dimension mismatches.
AssembledLmi assemble_lmi(
  const BatchSystem & batch, double gamma, const Eigen::VectorXd & s_max,
  const Eigen::VectorXd & weights);

/// The block matrix in physical units for given (W, G, s).
Eigen::MatrixXd lmi_matrix(
  const BatchSystem & batch, const Eigen::MatrixXd & w, const Eigen::MatrixXd & g,
  const Eigen::VectorXd & s);

/// lambda_min(W - N Sbar^2 N^T - G_a diag(s_a)^{-1} G_a^T) over channels with s > 0.
double schur_min_eigenvalue(
  const BatchSystem & batch, const Eigen::MatrixXd & w, const Eigen::MatrixXd & g,
  const Eigen::VectorXd & s);

/// Smallest reachable trace: the filter with every channel at its bound.
double max_precision_trace(const BatchSystem & batch, const Eigen::VectorXd & s_max);

enum class ScheduleStatus
{
  Optimal,
  Infeasible,
  NumericalFailure,
};

const char * to_string(ScheduleStatus status) noexcept;

struct ReweightStep
{
  double objective = 0.0;  // rho^T s with that iteration's rho
  double l1 = 0.0;         // sum of s
  Index active = 0;
  int solver_iterations = 0;
};

struct PrecisionSchedule
{
  ScheduleStatus status = ScheduleStatus::NumericalFailure;
  Eigen::VectorXd precision;  // s*, stacked
  Eigen::MatrixXd gain;       // G = M Kbar, recomputed optimally for s*
  Eigen::MatrixXd certificate;  // W: posterior covariance reached with `gain`
  double objective = 0.0;     // rho^T s* for the weights of the final solve
  double l1 = 0.0;
  double trace = 0.0;         // trace(W)
  double reachable_trace = 0.0;  // max_precision_trace, the feasibility boundary
  Index active_count = 0;
  int iterations = 0;         // reweighting iterations
  int solver_iterations = 0;
  double lmi_min_eigenvalue = 0.0;
  double schur_min_eigenvalue = 0.0;
  // (W, G) exactly as returned by the conic solver, with their checks.
  Eigen::MatrixXd sdp_certificate;
  Eigen::MatrixXd sdp_gain;
  double sdp_trace = 0.0;
  double sdp_lmi_min_eigenvalue = 0.0;
  double sdp_schur_min_eigenvalue = 0.0;
  std::vector<ReweightStep> history;
  std::string message;
};

struct ReweightOptions
{
  double epsilon = -1.0;    // <= 0 selects 1e-3 * max(s_max)
  int max_iters = 5;
  double threshold = 1e-6;  // active when s > threshold * s_max
};

/// Single weighted-l1 solve.
PrecisionSchedule solve_precisions(
  const PrecisionProblem & problem,
  const conic::SolverOptions & options = {}, double threshold = 1e-6);

/// rho <- 1 / (s + epsilon) after every solve; stops when the active set repeats.
PrecisionSchedule reweighted_solve(
  const PrecisionProblem & problem, const ReweightOptions & reweight = {},
  const conic::SolverOptions & options = {});

/// Active entries of `precision` (> threshold * s_max).
std::vector<Index> active_set(
  const Eigen::VectorXd & precision, const Eigen::VectorXd & s_max,
  double threshold);

struct SparsityReport
{
  Eigen::MatrixXd grid;  // p x m_y, zeros where removed
  std::vector<std::vector<Index>> active_by_step;
  Index active_count = 0;
  double threshold = 0.0;  // the one finally used
  double verified_trace = 0.0;
  bool verified = false;
};

/// Thresholds the schedule and re-checks the trace it still reaches. When the
/// trace exceeds gamma * (1 + 1e-3) the threshold is divided by 10 and the
/// report rebuilt, down to 1e-14.
SparsityReport sparsity_report(
  const PrecisionProblem & problem, const PrecisionSchedule & schedule,
  double threshold = 1e-6);

}  // namespace sensched

#endif  // SENSCHED_PRECISION_OPT_HPP_
