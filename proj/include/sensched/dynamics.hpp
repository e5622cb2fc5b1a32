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

#ifndef SENSCHED_DYNAMICS_HPP_
#define SENSCHED_DYNAMICS_HPP_

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

#include "sensched/error.hpp"
#include "sensched/linalg.hpp"

namespace sensched
{

enum class AgentKind
{
  HarmonicOscillator,
  VanDerPol,
  VanDerPolReversed,
};

const char * to_string(AgentKind kind) noexcept;
AgentKind agent_kind_from_string(const std::string & name);

/// Planar agent with state (x, z). `shape` is the Van der Pol parameter c and
/// is ignored by the harmonic oscillator.
struct AgentModel
{
  AgentKind kind = AgentKind::HarmonicOscillator;
  double shape = 1.0;
};

/// Agents stacked as x = [x1 z1 x2 z2 ...]. The first `primary_count` agents
/// are primary (station-trackable), the rest are secondary.
struct MultiAgentConfig
{
  std::vector<AgentModel> agents;
  std::size_t primary_count = 0;
  std::size_t secondary_count = 0;
  Eigen::VectorXd initial_nominal;

  Index state_dim() const {return static_cast<Index>(2 * agents.size());}

  /// Throws Error(InvalidInput) when counts, shapes or the initial state disagree.
  void validate() const;
};

namespace detail
{

template<typename Derived>
void check_state(const Eigen::MatrixBase<Derived> & state, const MultiAgentConfig & config)
{
  require(
    state.rows() == config.state_dim() && state.cols() == 1, ErrorKind::InvalidInput,
    "state has length " + std::to_string(state.rows()) + ", expected " +
    std::to_string(config.state_dim()));
}

}  // namespace detail

/// Noise-free right-hand side of the agent dynamics.
template<typename Derived>
Vector<typename Derived::Scalar> vector_field(
  const Eigen::MatrixBase<Derived> & state,
  const MultiAgentConfig & config)
{
  using Scalar = typename Derived::Scalar;
  detail::check_state(state, config);
  Vector<Scalar> rate(state.rows());
  for (std::size_t i = 0; i < config.agents.size(); ++i) {
    const Index ix = static_cast<Index>(2 * i);
    const Scalar x = state(ix);
    const Scalar z = state(ix + 1);
    const AgentModel & agent = config.agents[i];
    switch (agent.kind) {
      case AgentKind::HarmonicOscillator:
        rate(ix) = z;
        rate(ix + 1) = -x;
        break;
      case AgentKind::VanDerPol:
      case AgentKind::VanDerPolReversed: {
          const Scalar c(agent.shape);
          rate(ix) = agent.kind == AgentKind::VanDerPol ? z : Scalar(-z);
          rate(ix + 1) = (Scalar(1) - x * x / (c * c)) * z - x / c;
          break;
        }
    }
  }
  return rate;
}

/// Continuous-time Jacobian of `vector_field`; block diagonal with one 2x2
/// block per agent.
template<typename Derived>
Matrix<typename Derived::Scalar> jacobian(
  const Eigen::MatrixBase<Derived> & state,
  const MultiAgentConfig & config)
{
  using Scalar = typename Derived::Scalar;
  detail::check_state(state, config);
  Matrix<Scalar> jac = Matrix<Scalar>::Zero(state.rows(), state.rows());
  for (std::size_t i = 0; i < config.agents.size(); ++i) {
    const Index ix = static_cast<Index>(2 * i);
    const Scalar x = state(ix);
    const Scalar z = state(ix + 1);
    const AgentModel & agent = config.agents[i];
    switch (agent.kind) {
      case AgentKind::HarmonicOscillator:
        jac(ix, ix + 1) = Scalar(1);
        jac(ix + 1, ix) = Scalar(-1);
        break;
      case AgentKind::VanDerPol:
      case AgentKind::VanDerPolReversed: {
          const Scalar c(agent.shape);
          jac(ix, ix + 1) = agent.kind == AgentKind::VanDerPol ? Scalar(1) : Scalar(-1);
          jac(ix + 1, ix) = Scalar(-2) * x * z / (c * c) - Scalar(1) / c;
          jac(ix + 1, ix + 1) = Scalar(1) - x * x / (c * c);
          break;
        }
    }
  }
  return jac;
}

/// Nominal (noise-free) trajectory on a uniform grid. Keeps a copy of the
/// agent configuration so linearizations can be evaluated along it.
struct NominalTrajectory
{
  MultiAgentConfig config;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  double step = 0.0;

  std::size_t size() const {return times.size();}
  double end_time() const {return times.empty() ? 0.0 : times.back();}

  /// Grid index of `t`; throws Error(InvalidInput) when `t` is off the grid.
  std::size_t grid_index(double t) const;
};

/// Fixed-step RK4 from `config.initial_nominal` over [0, t_end]. The step is
/// shrunk to t_end / ceil(t_end / h) so the grid ends exactly at t_end.
NominalTrajectory propagate_nominal(const MultiAgentConfig & config, double t_end, double h);

/// Jacobians at the four RK4 stage states of one step of size h from `state`.
/// Linear companion equations (state transition, covariance) are advanced
/// with these so that they share the nominal trajectory's stages exactly.
std::array<Eigen::MatrixXd, 4> rk4_stage_jacobians(
  const Eigen::VectorXd & state,
  double h,
  const MultiAgentConfig & config);

}  // namespace sensched

#endif  // SENSCHED_DYNAMICS_HPP_
