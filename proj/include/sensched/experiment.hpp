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


// Runs behind the command-line subcommands. Every run writes into its own
// output directory and is a pure function of the configuration.

#ifndef SENSCHED_EXPERIMENT_HPP_
#define SENSCHED_EXPERIMENT_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sensched/precision_opt.hpp"
#include "sensched/scenario.hpp"

namespace sensched
{

enum ExitCode : int
{
  kExitOk = 0,
  kExitInfeasible = 2,
  kExitConfig = 3,
  kExitNumerical = 4,
};

struct MonteCarloResult
{
  Index trials = 0;
  std::uint64_t seed = 0;
  double empirical_trace = 0.0;  // mean squared final-step error
  double standard_error = 0.0;
  double analytic_trace = 0.0;   // trace of the filter's posterior covariance
  double gamma = 0.0;
};

/// Draws truths and measurements from the discrete linear model of the first
/// window, R = diag(s)^{-1} on channels with s > 0, and applies the batch
/// update with the optimal gain for `precision`.
MonteCarloResult monte_carlo(
  const Scenario & scenario, const Eigen::VectorXd & precision, Index trials,
  std::uint64_t seed);

struct CaseResult
{
  double s_max = 0.0;
  std::size_t window = 0;
  PrecisionProblem problem;
  PrecisionSchedule schedule;
  std::optional<SparsityReport> sparsity;  // set when Optimal
  double rho_one_objective = 0.0;          // objective of the first (rho = 1) solve
  double seconds = 0.0;
};

/// Reweighted solve for one s_max on the first window.
CaseResult run_case(const Scenario & scenario, double s_max);

/// Receding-horizon chain: each window starts from the previous window's
/// posterior under its optimized schedule. Stops at the first window that is
/// not Optimal.
std::vector<CaseResult> run_chain(const Scenario & scenario, double s_max);

struct CommandOptions
{
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> schedule;  // validate: precision grid CSV
  unsigned workers = 0;                           // sweep: 0 = hardware concurrency
};

int cmd_simulate(const ScenarioConfig & config, const CommandOptions & options);
int cmd_optimize(const ScenarioConfig & config, const CommandOptions & options);
int cmd_validate(const ScenarioConfig & config, const CommandOptions & options);
int cmd_sweep(const ScenarioConfig & config, const CommandOptions & options);

/// "450" for 450, "0.5" for 0.5; used in output file names.
std::string smax_tag(double s_max);

}  // namespace sensched

#endif  // SENSCHED_EXPERIMENT_HPP_
