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

// Semidefinite programs in "LMI form":
//
//   minimize    c^T v
//   subject to  F_j(v) = F_j0 + sum_i v_i F_ji  >= 0   (PSD, one per block j)
//               a_l^T v  (<=, =, >=)  beta_l
//               lower <= v <= upper
//
// The solver works on the standard primal-dual pair with v as the dual
// variable (min <C,X> s.t. <A_i,X> = b_i, X >= 0 / max b^T y s.t.
// C - sum y_i A_i >= 0) and uses an infeasible primal-dual path-following
// method with the HKM search direction and Mehrotra's predictor-corrector.

#ifndef SENSCHED_CONIC_HPP_
#define SENSCHED_CONIC_HPP_

#include <Eigen/Dense>

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace sensched::conic
{

using Eigen::Index;

inline constexpr Index kConstant = -1;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One nonzero of a coefficient matrix, stored in the lower triangle
/// (row >= col); the mirrored upper entry is implied. `var == kConstant`
/// addresses F_0.
struct MatrixEntry
{
  Index var = kConstant;
  Index row = 0;
  Index col = 0;
  double value = 0.0;
};

/// Affine symmetric-matrix-valued map required to be PSD.
struct PsdConstraint
{
  Index dim = 0;
  std::vector<MatrixEntry> entries;

  /// Adds `value` at (row, col) and its mirror. Entries given in the upper
  /// triangle are flipped into the lower one. Duplicates accumulate.
  void add(Index var, Index row, Index col, double value);
  void add_constant(Index row, Index col, double value) {add(kConstant, row, col, value);}

  /// Dense F(v).
  Eigen::MatrixXd evaluate(const Eigen::VectorXd & v) const;
};

enum class Relation
{
  LessEqual,
  GreaterEqual,
  Equal,
};

struct LinearConstraint
{
  std::vector<std::pair<Index, double>> coeffs;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;

  double evaluate(const Eigen::VectorXd & v) const;
};

struct SdpProblem
{
  Index num_vars = 0;
  Eigen::VectorXd objective;
  std::vector<PsdConstraint> psd;
  std::vector<LinearConstraint> linear;
  Eigen::VectorXd lower;  // -inf for none
  Eigen::VectorXd upper;  // +inf for none

  explicit SdpProblem(Index vars = 0);

  /// Throws Error(Assembly) on out-of-range indices or size mismatches.
  void validate() const;
};

enum class SolveStatus
{
  Optimal,
  Infeasible,
  Unbounded,
  NumericalFailure,
};

const char * to_string(SolveStatus status) noexcept;

struct SolverOptions
{
  double gap_tol = 1e-7;       // relative duality gap
  /// Gap is |p - d| / (gap_floor + |p| + |d|). Lower it when the optimal
  /// objective is known to be much smaller than 1.
  double gap_floor = 1.0;
  double feas_tol = 1e-8;      // relative primal/dual residuals
  double infeas_tol = 1e-8;    // certificate residual for Infeasible/Unbounded
  int max_iters = 100;
  /// Multiplies the default starting point; anything other than 1 gives an
  /// independent path to the same optimum.
  double start_scale = 1.0;
  bool verbose = false;
};

struct ConicSolution
{
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd values;
  double objective = 0.0;   // c^T v at `values`
  double lower_bound = 0.0; // dual objective
  double gap = 0.0;         // relative gap between the two
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  std::string message;
};

/// Deterministic for identical inputs and options. Iteration limits and
/// breakdowns return NumericalFailure with the best iterate in `values`.
ConicSolution solve(const SdpProblem & problem, const SolverOptions & options = {});

/// Residuals recomputed from the problem data alone, without any of the
/// solver's internal quantities.
struct ViolationReport
{
  std::vector<double> psd_min_eigenvalues;
  double worst_linear = 0.0;  // largest violation (>= 0) over linear constraints
  double worst_bound = 0.0;   // largest violation (>= 0) over variable bounds
  double min_psd_eigenvalue() const;
  bool satisfied(double feas_tol) const;
};

ViolationReport verify(const SdpProblem & problem, const Eigen::VectorXd & values);

/// SDPA sparse format (".dat-s"). The SDPA convention is
///   min c^T x  s.t.  sum_i x_i F_i - F_0 >= 0,
/// so F_0 is written negated. Linear constraints and finite bounds become a
/// trailing diagonal (LP) block; equalities become two opposite rows.
void write_sdpa(const SdpProblem & problem, std::ostream & out);

/// Reads SDPA sparse format. Dense blocks become PSD constraints, diagonal
/// blocks become `>=` linear constraints.
SdpProblem read_sdpa(std::istream & in);

}  // namespace sensched::conic

#endif  // SENSCHED_CONIC_HPP_
