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


// Scenario files: one `key = value` per line, `#` starts a comment. Every key
// is listed in docs/config.md; unknown or repeated keys are errors.

#ifndef SENSCHED_SCENARIO_HPP_
#define SENSCHED_SCENARIO_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sensched/conic.hpp"
#include "sensched/discretization.hpp"
#include "sensched/dynamics.hpp"
#include "sensched/kalman.hpp"
#include "sensched/precision_opt.hpp"
#include "sensched/sensing.hpp"

namespace sensched
{

enum class GammaRule
{
  Fraction,  // gamma = value * trace of the prior at the horizon end
  Absolute,
};

struct ScenarioConfig
{
  MultiAgentConfig agents;
  SensingTopology topology;

  double noise_std = 0.05;           // Q = noise_std^2 I per agent input
  double initial_mean_scale = 0.05;  // mu(0) = scale * initial nominal
  double initial_cov_scale = 0.01;   // Sigma(0) = scale * diag(|mu(0)|)

  double period = 0.0;  // T_p
  double dt_fraction = 0.1;
  Index horizon = 10;
  Index horizons = 1;  // chained update windows, each `horizon` steps long
  Index rk4_substeps = 100;

  GammaRule gamma_rule = GammaRule::Fraction;
  double gamma_value = 0.1;

  std::vector<double> s_max{450.0, 750.0, 1200.0};
  std::vector<double> channel_scale;  // per channel multiplier of s_max, empty = 1
  std::vector<std::pair<Index, Index>> blocked;  // (step, channel), 0-based; 1-based in files

  ReweightOptions reweight;
  conic::SolverOptions solver;
  std::uint64_t seed = 1;
  Index trials = 2000;

  double dt() const {return dt_fraction * period;}

  /// Throws Error(Config) naming the offending key.
  void validate() const;
};

/// Parses scenario text; errors carry the line number and key.
ScenarioConfig parse_config(const std::string & text);
ScenarioConfig load_config(const std::string & path);

/// Canonical text: every key, fixed order, round-trip precision.
std::string to_text(const ScenarioConfig & config);

/// FNV-1a 64 of `to_text`, as 16 hex digits.
std::string config_hash(const ScenarioConfig & config);

/// The three-agent tracking example with its default numbers.
ScenarioConfig reference_config();

struct Scenario
{
  ScenarioConfig config;
  NominalTrajectory nominal;
  Discretization discretization;
  std::vector<Eigen::MatrixXd> measurements;  // C_1..C_{p * horizons}
  BatchSystem batch;  // first window
  double prior_trace = 0.0;
  double gamma = 0.0;
  AvailabilityMask mask;  // p x m_y

  /// Bounds for one s_max case after channel scaling and the mask.
  Eigen::ArrayXXd bounds(double s_max) const;
  PrecisionProblem problem(double s_max) const;

  /// Batch system of window `window` (0-based) starting from `posterior`.
  BatchSystem window_batch(std::size_t window, const GaussianState & posterior) const;
};

Scenario build_scenario(const ScenarioConfig & config);

}  // namespace sensched

#endif  // SENSCHED_SCENARIO_HPP_
