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


#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "sensched/conic.hpp"
#include "sensched/error.hpp"

namespace sc = sensched::conic;

namespace
{

// minimize trace(W) s.t. W - diag(d) >= 0, W symmetric 2x2.
sc::SdpProblem trace_problem(double d0, double d1)
{
  sc::SdpProblem p(3);  // w00, w10, w11
  p.objective << 1.0, 0.0, 1.0;
  sc::PsdConstraint f;
  f.dim = 2;
  f.add(0, 0, 0, 1.0);
  f.add(1, 1, 0, 1.0);
  f.add(2, 1, 1, 1.0);
  f.add_constant(0, 0, -d0);
  f.add_constant(1, 1, -d1);
  p.psd.push_back(f);
  return p;
}

}  // namespace

TEST(Conic, ScalarBoundedBelowByPsd)
{
  sc::SdpProblem p(1);
  p.objective << 1.0;
  sc::PsdConstraint f;
  f.dim = 1;
  f.add(0, 0, 0, 1.0);
  p.psd.push_back(f);
  p.upper << 5.0;
  const auto sol = sc::solve(p);
  ASSERT_EQ(sol.status, sc::SolveStatus::Optimal) << sol.message;
  EXPECT_NEAR(sol.objective, 0.0, 1e-6);
  EXPECT_NEAR(sol.values(0), 0.0, 1e-6);
}

TEST(Conic, TraceOfDominatingMatrix)
{
  const auto sol = sc::solve(trace_problem(1.0, 2.0));
  ASSERT_EQ(sol.status, sc::SolveStatus::Optimal) << sol.message;
  EXPECT_NEAR(sol.objective, 3.0, 1e-6);
  EXPECT_NEAR(sol.values(1), 0.0, 1e-5);
  EXPECT_TRUE(sc::verify(trace_problem(1.0, 2.0), sol.values).satisfied(1e-7));
}

TEST(Conic, EqualityAndFixedVariables)
{
  auto p = trace_problem(1.0, 2.0);
  sc::LinearConstraint eq;
  eq.coeffs = {{0, 1.0}, {2, -1.0}};
  eq.relation = sc::Relation::Equal;
  eq.rhs = 0.0;
  p.linear.push_back(eq);
  p.lower(1) = 0.5;
  p.upper(1) = 0.5;
  const auto sol = sc::solve(p);
  ASSERT_EQ(sol.status, sc::SolveStatus::Optimal) << sol.message;
  // w00 = w11 = t, [[t,0.5],[0.5,t]] >= diag(1,2): (t-1)(t-2) >= 0.25, t >= 2
  const double t = (3.0 + std::sqrt(2.0)) / 2.0;
  EXPECT_NEAR(sol.values(0), t, 1e-5);
  EXPECT_NEAR(sol.values(2), t, 1e-5);
  EXPECT_NEAR(sol.values(1), 0.5, 1e-12);
}

TEST(Conic, DetectsInfeasibility)
{
  // x >= 0 (PSD) and x <= -1
  sc::SdpProblem p(1);
  p.objective << 1.0;
  sc::PsdConstraint f;
  f.dim = 1;
  f.add(0, 0, 0, 1.0);
  p.psd.push_back(f);
  p.upper << -1.0;
  const auto sol = sc::solve(p);
  EXPECT_EQ(sol.status, sc::SolveStatus::Infeasible) << sol.message;
}

TEST(Conic, DetectsUnboundedness)
{
  // minimize -x s.t. [[x, 0],[0, 1]] >= 0
  sc::SdpProblem p(1);
  p.objective << -1.0;
  sc::PsdConstraint f;
  f.dim = 2;
  f.add(0, 0, 0, 1.0);
  f.add_constant(1, 1, 1.0);
  p.psd.push_back(f);
  const auto sol = sc::solve(p);
  EXPECT_EQ(sol.status, sc::SolveStatus::Unbounded) << sol.message;
}

TEST(Conic, UnusedVariableWithCostIsUnbounded)
{
  auto p = trace_problem(1.0, 1.0);
  sc::SdpProblem q(4);
  q.objective << 1.0, 0.0, 1.0, 1.0;
  q.psd = p.psd;
  EXPECT_EQ(sc::solve(q).status, sc::SolveStatus::Unbounded);
}

TEST(Conic, VerifyFlagsCorruptedSolution)
{
  const auto p = trace_problem(1.0, 2.0);
  auto sol = sc::solve(p);
  ASSERT_EQ(sol.status, sc::SolveStatus::Optimal);
  EXPECT_TRUE(sc::verify(p, sol.values).satisfied(1e-7));
  sol.values(2) -= 0.1;
  const auto report = sc::verify(p, sol.values);
  EXPECT_FALSE(report.satisfied(1e-7));
  EXPECT_NEAR(report.min_psd_eigenvalue(), -0.1, 1e-5);
}

TEST(Conic, IterationLimitReturnsNumericalFailure)
{
  sc::SolverOptions opts;
  opts.max_iters = 2;
  const auto sol = sc::solve(trace_problem(1.0, 2.0), opts);
  EXPECT_EQ(sol.status, sc::SolveStatus::NumericalFailure);
  EXPECT_EQ(sol.values.size(), 3);
}

TEST(Conic, DeterministicForIdenticalInputs)
{
  const auto a = sc::solve(trace_problem(0.3, 4.0));
  const auto b = sc::solve(trace_problem(0.3, 4.0));
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.values, b.values);
}

TEST(Conic, SdpaRoundTrip)
{
  auto p = trace_problem(1.0, 2.0);
  p.lower(0) = 0.0;
  sc::LinearConstraint lc;
  lc.coeffs = {{0, 1.0}, {2, 1.0}};
  lc.relation = sc::Relation::LessEqual;
  lc.rhs = 10.0;
  p.linear.push_back(lc);
  std::stringstream buf;
  sc::write_sdpa(p, buf);
  const auto q = sc::read_sdpa(buf);
  EXPECT_EQ(q.num_vars, 3);
  ASSERT_EQ(q.psd.size(), 1u);
  EXPECT_EQ(q.linear.size(), 2u);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd v(3);
    for (int i = 0; i < 3; ++i) {
      v(i) = normal(rng);
    }
    EXPECT_LT((p.psd[0].evaluate(v) - q.psd[0].evaluate(v)).norm(), 1e-14);
  }
  const auto a = sc::solve(p);
  const auto b = sc::solve(q);
  ASSERT_EQ(a.status, sc::SolveStatus::Optimal);
  ASSERT_EQ(b.status, sc::SolveStatus::Optimal);
  EXPECT_NEAR(a.objective, b.objective, 1e-7);
}

TEST(Conic, MalformedInputRejected)
{
  sc::SdpProblem p(1);
  sc::PsdConstraint f;
  f.dim = 2;
  f.entries.push_back({0, 0, 1, 1.0});  // upper triangle
  p.psd.push_back(f);
  EXPECT_THROW(sc::solve(p), sensched::Error);
}

TEST(ConicOracle, MatchesReferenceObjectives)
{
  std::ifstream index(std::string(SENSCHED_TEST_DATA) + "/conic_objectives.txt");
  ASSERT_TRUE(index.good());
  std::string name;
  double expected = 0.0;
  int count = 0;
  while (index >> name >> expected) {
    std::ifstream file(std::string(SENSCHED_TEST_DATA) + "/" + name);
    ASSERT_TRUE(file.good()) << name;
    const auto p = sc::read_sdpa(file);
    const auto sol = sc::solve(p);
    ASSERT_EQ(sol.status, sc::SolveStatus::Optimal) << name << ": " << sol.message;
    EXPECT_NEAR(sol.objective, expected, 1e-5 * (1.0 + std::abs(expected))) << name;
    EXPECT_TRUE(sc::verify(p, sol.values).satisfied(1e-6)) << name;

    // Same optimum from a different starting point.
    sc::SolverOptions shifted;
    shifted.start_scale = 7.0;
    const auto other = sc::solve(p, shifted);
    ASSERT_EQ(other.status, sc::SolveStatus::Optimal) << name;
    EXPECT_NEAR(other.objective, expected, 1e-5 * (1.0 + std::abs(expected))) << name;
    ++count;
  }
  EXPECT_EQ(count, 8);
}
