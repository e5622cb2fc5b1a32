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

#include <algorithm>
#include <cmath>
#include <string>

#include "sensched/conic.hpp"
#include "sensched/error.hpp"

namespace sensched::conic
{

void PsdConstraint::add(Index var, Index row, Index col, double value)
{
  if (row < col) {
    std::swap(row, col);
  }
  entries.push_back({var, row, col, value});
}

Eigen::MatrixXd PsdConstraint::evaluate(const Eigen::VectorXd & v) const
{
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto & e : entries) {
    const double coeff = e.var == kConstant ? 1.0 : v(e.var);
    f(e.row, e.col) += coeff * e.value;
    if (e.row != e.col) {
      f(e.col, e.row) += coeff * e.value;
    }
  }
  return f;
}

double LinearConstraint::evaluate(const Eigen::VectorXd & v) const
{
  double sum = 0.0;
  for (const auto & [var, coeff] : coeffs) {
    sum += coeff * v(var);
  }
  return sum;
}

SdpProblem::SdpProblem(Index vars)
: num_vars(vars),
  objective(Eigen::VectorXd::Zero(vars)),
  lower(Eigen::VectorXd::Constant(vars, -kInfinity)),
  upper(Eigen::VectorXd::Constant(vars, kInfinity))
{
}

void SdpProblem::validate() const
{
  require(
    objective.size() == num_vars && lower.size() == num_vars && upper.size() == num_vars,
    ErrorKind::Assembly, "objective/bounds length differs from the variable count");
  for (std::size_t j = 0; j < psd.size(); ++j) {
    const auto & block = psd[j];
    require(block.dim > 0, ErrorKind::Assembly, "PSD block " + std::to_string(j) + " is empty");
    for (const auto & e : block.entries) {
      require(
        e.row >= e.col && e.row < block.dim && e.col >= 0, ErrorKind::Assembly,
        "PSD block " + std::to_string(j) + " has an entry outside its lower triangle");
      require(
        e.var == kConstant || (e.var >= 0 && e.var < num_vars), ErrorKind::Assembly,
        "PSD block " + std::to_string(j) + " references an unknown variable");
      require(std::isfinite(e.value), ErrorKind::Assembly, "non-finite coefficient");
    }
  }
  for (const auto & lc : linear) {
    for (const auto & [var, coeff] : lc.coeffs) {
      require(
        var >= 0 && var < num_vars && std::isfinite(coeff), ErrorKind::Assembly,
        "linear constraint references an unknown variable");
    }
    require(std::isfinite(lc.rhs), ErrorKind::Assembly, "non-finite linear right-hand side");
  }
  for (Index i = 0; i < num_vars; ++i) {
    require(
      lower(i) <= upper(i), ErrorKind::Assembly,
      "variable " + std::to_string(i) + " has lower bound above upper bound");
  }
}

const char * to_string(SolveStatus status) noexcept
{
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

double ViolationReport::min_psd_eigenvalue() const
{
  double lowest = kInfinity;
  for (double e : psd_min_eigenvalues) {
    lowest = std::min(lowest, e);
  }
  return lowest;
}

bool ViolationReport::satisfied(double feas_tol) const
{
  return min_psd_eigenvalue() >= -feas_tol && worst_linear <= feas_tol &&
         worst_bound <= feas_tol;
}

ViolationReport verify(const SdpProblem & problem, const Eigen::VectorXd & values)
{
  require(
    values.size() == problem.num_vars, ErrorKind::InvalidInput,
    "verify: solution length differs from the variable count");
  ViolationReport report;
  for (const auto & block : problem.psd) {
    // Dense rebuild straight from the stored entries.
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(block.dim, block.dim);
    for (const auto & e : block.entries) {
      const double term = (e.var == kConstant ? 1.0 : values(e.var)) * e.value;
      f(e.row, e.col) += term;
      if (e.row != e.col) {
        f(e.col, e.row) += term;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f, Eigen::EigenvaluesOnly);
    report.psd_min_eigenvalues.push_back(eig.eigenvalues()(0));
  }
  for (const auto & lc : problem.linear) {
    double lhs = 0.0;
    for (const auto & [var, coeff] : lc.coeffs) {
      lhs += coeff * values(var);
    }
    double violation = 0.0;
    switch (lc.relation) {
      case Relation::LessEqual: violation = lhs - lc.rhs; break;
      case Relation::GreaterEqual: violation = lc.rhs - lhs; break;
      case Relation::Equal: violation = std::abs(lhs - lc.rhs); break;
    }
    report.worst_linear = std::max(report.worst_linear, violation);
  }
  for (Index i = 0; i < problem.num_vars; ++i) {
    report.worst_bound = std::max(
      {report.worst_bound, problem.lower(i) - values(i), values(i) - problem.upper(i)});
  }
  return report;
}

}  // namespace sensched::conic
