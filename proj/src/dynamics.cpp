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

#include "sensched/dynamics.hpp"

#include <cmath>

namespace sensched
{

const char * to_string(AgentKind kind) noexcept
{
  switch (kind) {
    case AgentKind::HarmonicOscillator: return "harmonic";
    case AgentKind::VanDerPol: return "vanderpol";
    case AgentKind::VanDerPolReversed: return "vanderpol_reversed";
  }
  return "unknown";
}

AgentKind agent_kind_from_string(const std::string & name)
{
  if (name == "harmonic") {
    return AgentKind::HarmonicOscillator;
  }
  if (name == "vanderpol") {
    return AgentKind::VanDerPol;
  }
  if (name == "vanderpol_reversed") {
    return AgentKind::VanDerPolReversed;
  }
  fail(ErrorKind::InvalidInput, "unknown agent kind '" + name + "'");
}

void MultiAgentConfig::validate() const
{
  require(!agents.empty(), ErrorKind::InvalidInput, "no agents configured");
  require(
    primary_count + secondary_count == agents.size(), ErrorKind::InvalidInput,
    "primary_count + secondary_count must equal the number of agents");
  require(
    initial_nominal.size() == state_dim(), ErrorKind::InvalidInput,
    "initial nominal state must have length 2 * agent count");
  for (const auto & agent : agents) {
    if (agent.kind != AgentKind::HarmonicOscillator) {
      require(
        agent.shape > 0.0 && std::isfinite(agent.shape), ErrorKind::InvalidInput,
        "Van der Pol shape parameter must be positive");
    }
  }
}

std::size_t NominalTrajectory::grid_index(double t) const
{
  require(!times.empty() && step > 0.0, ErrorKind::InvalidInput, "empty nominal trajectory");
  const double pos = (t - times.front()) / step;
  const double rounded = std::round(pos);
  require(
    std::abs(pos - rounded) <= 1e-6 && rounded >= 0.0 &&
    rounded <= static_cast<double>(times.size() - 1),
    ErrorKind::InvalidInput, "time " + std::to_string(t) + " is not on the nominal grid");
  return static_cast<std::size_t>(rounded);
}

NominalTrajectory propagate_nominal(const MultiAgentConfig & config, double t_end, double h)
{
  config.validate();
  require(h > 0.0 && t_end > 0.0, ErrorKind::InvalidInput, "step and horizon must be positive");
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
  const double step = t_end / static_cast<double>(steps);

  NominalTrajectory traj;
  traj.config = config;
  traj.step = step;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(config.initial_nominal);

  Eigen::VectorXd x = config.initial_nominal;
  for (std::size_t i = 1; i <= steps; ++i) {
    const Eigen::VectorXd k1 = vector_field(x, config);
    const Eigen::VectorXd k2 = vector_field((x + 0.5 * step * k1).eval(), config);
    const Eigen::VectorXd k3 = vector_field((x + 0.5 * step * k2).eval(), config);
    const Eigen::VectorXd k4 = vector_field((x + step * k3).eval(), config);
    x += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      fail(
        ErrorKind::Divergence,
        "nominal state became non-finite at t = " + std::to_string(i * step));
    }
    traj.times.push_back(i == steps ? t_end : static_cast<double>(i) * step);
    traj.states.push_back(x);
  }
  return traj;
}

std::array<Eigen::MatrixXd, 4> rk4_stage_jacobians(
  const Eigen::VectorXd & state,
  double h,
  const MultiAgentConfig & config)
{
  const Eigen::VectorXd k1 = vector_field(state, config);
  const Eigen::VectorXd x2 = state + 0.5 * h * k1;
  const Eigen::VectorXd k2 = vector_field(x2, config);
  const Eigen::VectorXd x3 = state + 0.5 * h * k2;
  const Eigen::VectorXd k3 = vector_field(x3, config);
  const Eigen::VectorXd x4 = state + h * k3;
  return {jacobian(state, config), jacobian(x2, config), jacobian(x3, config),
    jacobian(x4, config)};
}

}  // namespace sensched
