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


#include "sensched/precision_opt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sensched/error.hpp"
#include "sensched/linalg.hpp"

namespace sensched
{

void PrecisionProblem::validate() const
{
  const Index ms = batch.stacked_channels();
  require(gamma > 0.0 && std::isfinite(gamma), ErrorKind::InvalidInput, "gamma must be > 0");
  require(
    s_max.size() == ms && weights.size() == ms, ErrorKind::InvalidInput,
    "s_max and weights must have one entry per stacked channel");
  require(
    (s_max.array() >= 0.0).all() && s_max.allFinite(), ErrorKind::InvalidInput,
    "s_max must be finite and >= 0");
  require(
    (weights.array() > 0.0).all() && weights.allFinite(), ErrorKind::InvalidInput,
    "weights must be finite and > 0");
}

PrecisionProblem make_problem(
  const BatchSystem & batch, double gamma,
  const Eigen::ArrayXXd & s_max_grid)
{
  require(
    s_max_grid.rows() == batch.horizon && s_max_grid.cols() == batch.channels,
    ErrorKind::InvalidInput, "s_max grid must be p x m_y");
  PrecisionProblem problem;
  problem.batch = batch;
  problem.gamma = gamma;
  problem.s_max.resize(batch.stacked_channels());
  for (Index k = 0; k < batch.horizon; ++k) {
    for (Index c = 0; c < batch.channels; ++c) {
      problem.s_max(k * batch.channels + c) = s_max_grid(k, c);
    }
  }
  problem.weights = Eigen::VectorXd::Ones(batch.stacked_channels());
  problem.validate();
  return problem;
}

Index LmiLayout::num_vars() const
{
  const auto na = static_cast<Index>(channels.size());
  return state_dim * (state_dim + 1) / 2 + state_dim * na + na;
}

Index LmiLayout::lmi_dim() const
{
  return state_dim + stacked_states + static_cast<Index>(channels.size());
}

Index LmiLayout::w_index(Index row, Index col) const
{
  if (row < col) {
    std::swap(row, col);
  }
  return row * (row + 1) / 2 + col;
}

Index LmiLayout::g_index(Index row, Index active) const
{
  return state_dim * (state_dim + 1) / 2 + active * state_dim + row;
}

Index LmiLayout::s_index(Index active) const
{
  return state_dim * (state_dim + 1) / 2 + state_dim * static_cast<Index>(channels.size()) +
         active;
}

Eigen::VectorXd LmiLayout::pack(
  const Eigen::MatrixXd & w, const Eigen::MatrixXd & g,
  const Eigen::VectorXd & s) const
{
  Eigen::VectorXd v(num_vars());
  for (Index r = 0; r < state_dim; ++r) {
    for (Index c = 0; c <= r; ++c) {
      v(w_index(r, c)) = w(r, c) / gamma;
    }
  }
  for (std::size_t a = 0; a < channels.size(); ++a) {
    const Index j = channels[a];
    const auto ai = static_cast<Index>(a);
    const double scale = std::sqrt(gamma * s_max(j));
    for (Index i = 0; i < state_dim; ++i) {
      v(g_index(i, ai)) = g(i, j) / scale;
    }
    v(s_index(ai)) = s(j) / s_max(j);
  }
  return v;
}

void LmiLayout::unpack(
  const Eigen::VectorXd & values, Eigen::MatrixXd & w, Eigen::MatrixXd & g,
  Eigen::VectorXd & s) const
{
  require(values.size() == num_vars(), ErrorKind::InvalidInput, "unpack: wrong length");
  w.resize(state_dim, state_dim);
  for (Index r = 0; r < state_dim; ++r) {
    for (Index c = 0; c <= r; ++c) {
      w(r, c) = w(c, r) = gamma * values(w_index(r, c));
    }
  }
  g = Eigen::MatrixXd::Zero(state_dim, stacked_channels);
  s = Eigen::VectorXd::Zero(stacked_channels);
  for (std::size_t a = 0; a < channels.size(); ++a) {
    const Index j = channels[a];
    const auto ai = static_cast<Index>(a);
    const double scale = std::sqrt(gamma * s_max(j));
    for (Index i = 0; i < state_dim; ++i) {
      g(i, j) = scale * values(g_index(i, ai));
    }
    s(j) = s_max(j) * values(s_index(ai));
  }
}

AssembledLmi assemble_lmi(
  const BatchSystem & batch, double gamma, const Eigen::VectorXd & s_max,
  const Eigen::VectorXd & weights)
{
  const Index n = batch.state_dim;
  const Index np = n * batch.horizon;
  const Index ms = batch.stacked_channels();
  require(
    batch.prior_cov_sqrt.rows() == np && batch.prior_cov_sqrt.cols() == np &&
    batch.cbar.rows() == ms && batch.cbar.cols() == np && batch.selector.rows() == n &&
    batch.selector.cols() == np,
    ErrorKind::Assembly, "assemble_lmi: batch matrices have inconsistent sizes");
  require(
    s_max.size() == ms && weights.size() == ms, ErrorKind::Assembly,
    "assemble_lmi: bounds/weights length differs from the stacked channel count");
  require(gamma > 0.0, ErrorKind::Assembly, "assemble_lmi: gamma must be > 0");

  AssembledLmi out;
  LmiLayout & layout = out.layout;
  layout.state_dim = n;
  layout.stacked_states = np;
  layout.stacked_channels = ms;
  layout.gamma = gamma;
  layout.s_max = s_max;
  for (Index j = 0; j < ms; ++j) {
    if (s_max(j) > 0.0) {
      layout.channels.push_back(j);
    }
  }
  const auto na = static_cast<Index>(layout.channels.size());

  conic::SdpProblem & sdp = out.sdp;
  sdp = conic::SdpProblem(layout.num_vars());
  const Eigen::MatrixXd ms_root = batch.selector * batch.prior_cov_sqrt;
  const Eigen::MatrixXd cs_root = batch.cbar * batch.prior_cov_sqrt;
  const double root_gamma = std::sqrt(gamma);

  conic::PsdConstraint lmi;
  lmi.dim = layout.lmi_dim();
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c <= r; ++c) {
      lmi.add(layout.w_index(r, c), r, c, 1.0);
    }
  }
  for (Index q = 0; q < np; ++q) {
    lmi.add_constant(n + q, n + q, 1.0);
    for (Index i = 0; i < n; ++i) {
      if (ms_root(i, q) != 0.0) {
        lmi.add_constant(n + q, i, ms_root(i, q) / root_gamma);
      }
    }
  }
  double norm = 0.0;
  for (Index a = 0; a < na; ++a) {
    const Index j = layout.channels[static_cast<std::size_t>(a)];
    const double root_s = std::sqrt(s_max(j));
    for (Index i = 0; i < n; ++i) {
      const Index var = layout.g_index(i, a);
      for (Index q = 0; q < np; ++q) {
        if (cs_root(j, q) != 0.0) {
          lmi.add(var, n + q, i, -root_s * cs_root(j, q));
        }
      }
      lmi.add(var, n + np + a, i, 1.0);
    }
    const Index sv = layout.s_index(a);
    lmi.add(sv, n + np + a, n + np + a, 1.0);
    sdp.lower(sv) = 0.0;
    sdp.upper(sv) = 1.0;
    sdp.objective(sv) = weights(j) * s_max(j);
    norm += weights(j) * s_max(j);
  }
  if (norm > 0.0) {
    sdp.objective /= norm;
  }
  sdp.psd.push_back(std::move(lmi));

  conic::LinearConstraint trace;
  for (Index i = 0; i < n; ++i) {
    trace.coeffs.emplace_back(layout.w_index(i, i), 1.0);
  }
  trace.relation = conic::Relation::LessEqual;
  trace.rhs = 1.0;
  sdp.linear.push_back(std::move(trace));
  return out;
}

Eigen::MatrixXd lmi_matrix(
  const BatchSystem & batch, const Eigen::MatrixXd & w, const Eigen::MatrixXd & g,
  const Eigen::VectorXd & s)
{
  const Index n = batch.state_dim;
  const Index np = n * batch.horizon;
  const Index ms = batch.stacked_channels();
  require(
    w.rows() == n && w.cols() == n && g.rows() == n && g.cols() == ms && s.size() == ms,
    ErrorKind::InvalidInput, "lmi_matrix: dimension mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + np + ms, n + np + ms);
  out.topLeftCorner(n, n) = w;
  out.block(0, n, n, np) = (batch.selector - g * batch.cbar) * batch.prior_cov_sqrt;
  out.block(0, n + np, n, ms) = g;
  out.block(n, n, np, np).setIdentity();
  out.bottomRightCorner(ms, ms) = s.asDiagonal();
  return out.selfadjointView<Eigen::Upper>();
}

double schur_min_eigenvalue(
  const BatchSystem & batch, const Eigen::MatrixXd & w, const Eigen::MatrixXd & g,
  const Eigen::VectorXd & s)
{
  const Eigen::MatrixXd residual_map = batch.selector - g * batch.cbar;
  Eigen::MatrixXd schur = w - residual_map * batch.prior_cov * residual_map.transpose();
  for (Index j = 0; j < s.size(); ++j) {
    if (s(j) > 0.0) {
      schur -= g.col(j) * g.col(j).transpose() / s(j);
    }
  }
  return min_eigenvalue(symmetrize(schur));
}

double max_precision_trace(const BatchSystem & batch, const Eigen::VectorXd & s_max)
{
  const Eigen::MatrixXd gain = optimal_batch_gain(batch, s_max);
  return batch_posterior_stats(batch, gain, s_max).cov.trace();
}

const char * to_string(ScheduleStatus status) noexcept
{
  switch (status) {
    case ScheduleStatus::Optimal: return "Optimal";
    case ScheduleStatus::Infeasible: return "Infeasible";
    case ScheduleStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

std::vector<Index> active_set(
  const Eigen::VectorXd & precision, const Eigen::VectorXd & s_max,
  double threshold)
{
  std::vector<Index> active;
  for (Index j = 0; j < precision.size(); ++j) {
    if (s_max(j) > 0.0 && precision(j) > threshold * s_max(j)) {
      active.push_back(j);
    }
  }
  return active;
}

PrecisionSchedule solve_precisions(
  const PrecisionProblem & problem,
  const conic::SolverOptions & options, double threshold)
{
  problem.validate();
  const BatchSystem & batch = problem.batch;
  PrecisionSchedule out;
  out.reachable_trace = max_precision_trace(batch, problem.s_max);

  const AssembledLmi lmi = assemble_lmi(batch, problem.gamma, problem.s_max, problem.weights);
  conic::SolverOptions opts = options;
  opts.gap_floor = std::min(options.gap_floor, 1e-4);
  const conic::ConicSolution sol = conic::solve(lmi.sdp, opts);
  out.solver_iterations = sol.iterations;
  out.iterations = 1;
  out.message = sol.message;

  Eigen::MatrixXd w;
  Eigen::MatrixXd g;
  Eigen::VectorXd s;
  lmi.layout.unpack(sol.values, w, g, s);
  s = s.cwiseMax(0.0).cwiseMin(problem.s_max);
  out.precision = s;
  out.objective = problem.weights.dot(s);
  out.l1 = s.sum();
  out.active_count = static_cast<Index>(active_set(s, problem.s_max, threshold).size());
  out.gain = g;
  out.certificate = w;
  out.trace = w.trace();

  switch (sol.status) {
    case conic::SolveStatus::Optimal:
      break;
    case conic::SolveStatus::Infeasible:
      if (out.reachable_trace <= problem.gamma * (1.0 - 1e-6)) {
        out.status = ScheduleStatus::NumericalFailure;
        out.message = "backend reported infeasible, but full precision reaches trace " +
          std::to_string(out.reachable_trace);
      } else {
        out.status = ScheduleStatus::Infeasible;
        out.message = "infeasible: full precision reaches trace " +
          std::to_string(out.reachable_trace) + " > gamma " + std::to_string(problem.gamma);
      }
      return out;
    default:
      out.status = ScheduleStatus::NumericalFailure;
      out.message = std::string("backend ") + conic::to_string(sol.status) + ": " + sol.message;
      return out;
  }

  out.sdp_certificate = w;
  out.sdp_gain = g;
  out.sdp_trace = w.trace();
  out.sdp_lmi_min_eigenvalue = min_eigenvalue(lmi_matrix(batch, w, g, s));
  out.sdp_schur_min_eigenvalue = schur_min_eigenvalue(batch, w, g, s);

  // Certificate from the optimal gain for the returned precisions.
  out.gain = optimal_batch_gain(batch, s);
  out.certificate = batch_posterior_stats(batch, out.gain, s).cov;
  out.trace = out.certificate.trace();
  out.lmi_min_eigenvalue = min_eigenvalue(lmi_matrix(batch, out.certificate, out.gain, s));
  out.schur_min_eigenvalue = schur_min_eigenvalue(batch, out.certificate, out.gain, s);
  if (out.trace > problem.gamma * (1.0 + 1e-6) || out.lmi_min_eigenvalue < -1e-6 ||
    out.schur_min_eigenvalue < -1e-6)
  {
    out.status = ScheduleStatus::NumericalFailure;
    out.message = "certificate check failed: trace " + std::to_string(out.trace) + ", gamma " +
      std::to_string(problem.gamma);
    return out;
  }
  out.status = ScheduleStatus::Optimal;
  return out;
}

PrecisionSchedule reweighted_solve(
  const PrecisionProblem & problem, const ReweightOptions & reweight,
  const conic::SolverOptions & options)
{
  problem.validate();
  require(reweight.max_iters >= 1, ErrorKind::InvalidInput, "max_iters must be >= 1");
  const double epsilon =
    reweight.epsilon > 0.0 ? reweight.epsilon : 1e-3 * problem.s_max.maxCoeff();
  require(epsilon > 0.0, ErrorKind::InvalidInput, "epsilon must be > 0");

  PrecisionProblem current = problem;
  std::vector<ReweightStep> history;
  PrecisionSchedule best;
  PrecisionSchedule last;
  std::vector<Index> previous;
  bool have_best = false;
  for (int iter = 1; iter <= reweight.max_iters; ++iter) {
    last = solve_precisions(current, options, reweight.threshold);
    history.push_back({last.objective, last.l1, last.active_count, last.solver_iterations});
    if (last.status != ScheduleStatus::Optimal) {
      last.iterations = iter;
      last.history = history;
      return last;
    }
    const auto active = active_set(last.precision, problem.s_max, reweight.threshold);
    if (!have_best || last.active_count <= best.active_count) {
      best = last;
      have_best = true;
    }
    last.iterations = iter;
    if (iter > 1 && active == previous) {
      break;
    }
    previous = active;
    current.weights = (last.precision.array() + epsilon).inverse().matrix();
  }
  PrecisionSchedule & chosen = last.active_count <= best.active_count ? last : best;
  chosen.iterations = last.iterations;
  chosen.history = history;
  return chosen;
}

SparsityReport sparsity_report(
  const PrecisionProblem & problem, const PrecisionSchedule & schedule,
  double threshold)
{
  const BatchSystem & batch = problem.batch;
  require(
    schedule.precision.size() == batch.stacked_channels(), ErrorKind::InvalidInput,
    "sparsity_report: schedule does not match the problem");
  SparsityReport report;
  double t = threshold;
  while (true) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(schedule.precision.size());
    const auto active = active_set(schedule.precision, problem.s_max, t);
    for (Index j : active) {
      s(j) = schedule.precision(j);
    }
    const Eigen::MatrixXd gain = optimal_batch_gain(batch, s);
    report.verified_trace = batch_posterior_stats(batch, gain, s).cov.trace();
    report.threshold = t;
    report.verified = report.verified_trace <= problem.gamma * (1.0 + 1e-3);
    if (report.verified || t < 1e-14) {
      report.grid = Eigen::MatrixXd::Zero(batch.horizon, batch.channels);
      report.active_by_step.assign(static_cast<std::size_t>(batch.horizon), {});
      for (Index j : active) {
        const Index k = j / batch.channels;
        const Index c = j % batch.channels;
        report.grid(k, c) = s(j);
        report.active_by_step[static_cast<std::size_t>(k)].push_back(c);
      }
      report.active_count = static_cast<Index>(active.size());
      return report;
    }
    t /= 10.0;
  }
}

}  // namespace sensched
