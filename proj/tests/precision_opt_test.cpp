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

#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "sensched/error.hpp"
#include "sensched/linalg.hpp"
#include "sensched/precision_opt.hpp"
#include "sensched/scenario.hpp"

using namespace sensched;

namespace
{

Eigen::MatrixXd random_matrix(std::mt19937_64 & rng, Index r, Index c, double scale = 1.0)
{
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) {
      m(i, j) = g(rng);
    }
  }
  return m;
}

// Small random batch: n states, my channels, p steps.
BatchSystem random_batch(std::mt19937_64 & rng, Index n, Index my, Index p)
{
  DiscreteLtvSystem sys;
  std::vector<Eigen::MatrixXd> outputs;
  for (Index k = 0; k < p; ++k) {
    const Eigen::MatrixXd b = random_matrix(rng, n, n, 0.3);
    sys.steps.push_back(
      {Eigen::MatrixXd::Identity(n, n) + random_matrix(rng, n, n, 0.2),
       Eigen::MatrixXd::Identity(n, n), b * b.transpose()});
    outputs.push_back(random_matrix(rng, my, n));
  }
  const Eigen::MatrixXd l = random_matrix(rng, n, n);
  GaussianState init{Eigen::VectorXd::Zero(n), l * l.transpose() + Eigen::MatrixXd::Identity(n, n)};
  return build_batch(sys, outputs, init, p);
}

PrecisionProblem random_problem(
  std::mt19937_64 & rng, Index n, Index my, Index p, double s_max, double fraction)
{
  PrecisionProblem prob;
  prob.batch = random_batch(rng, n, my, p);
  prob.s_max = Eigen::VectorXd::Constant(my * p, s_max);
  prob.weights = Eigen::VectorXd::Ones(my * p);
  const double lo = max_precision_trace(prob.batch, prob.s_max);
  const double hi = prob.batch.final_prior_cov().trace();
  prob.gamma = lo + fraction * (hi - lo);
  return prob;
}

struct OracleCase
{
  double reachable = 0.0;
  std::string status;
  double objective = 0.0;
};

struct Oracle
{
  double prior_trace = 0.0;
  double gamma = 0.0;
  std::map<std::pair<int, int>, OracleCase> cases;
};

Oracle load_oracle()
{
  std::ifstream in(std::string(SENSCHED_TEST_DATA) + "/reference_scenario.txt");
  Oracle o;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "prior_trace") {
      ls >> o.prior_trace;
    } else if (key == "gamma") {
      ls >> o.gamma;
    } else if (key == "case") {
      int smax = 0;
      int blocked = 0;
      OracleCase c;
      ls >> smax >> blocked >> c.reachable >> c.status >> c.objective;
      o.cases[{smax, blocked}] = c;
    }
  }
  return o;
}

const Scenario & reference_scenario()
{
  static const Scenario sc = build_scenario(reference_config());
  return sc;
}

const Scenario & blocked_scenario()
{
  static const Scenario sc =
    build_scenario(load_config(std::string(SENSCHED_CONFIG_DIR) + "/reference_blocked.cfg"));
  return sc;
}

}  // namespace

TEST(PrecisionOpt, ReferenceLayoutDimensions)
{
  const auto prob = reference_scenario().problem(1200.0);
  const auto lmi = assemble_lmi(prob.batch, prob.gamma, prob.s_max, prob.weights);
  EXPECT_EQ(lmi.layout.lmi_dim(), 126);
  EXPECT_EQ(lmi.layout.num_vars(), 441);
  EXPECT_EQ(lmi.sdp.num_vars, 441);
  ASSERT_EQ(lmi.sdp.psd.size(), 1u);
  EXPECT_EQ(lmi.sdp.psd.front().dim, 126);
}

TEST(PrecisionOpt, PackUnpackRoundTrip)
{
  std::mt19937_64 rng(31);
  const auto prob = random_problem(rng, 3, 2, 3, 50.0, 0.5);
  const auto lmi = assemble_lmi(prob.batch, prob.gamma, prob.s_max, prob.weights);
  const Eigen::MatrixXd a = random_matrix(rng, 3, 3);
  const Eigen::MatrixXd w = a * a.transpose();
  const Eigen::MatrixXd g = random_matrix(rng, 3, 6);
  const Eigen::VectorXd s = random_matrix(rng, 6, 1).cwiseAbs();
  Eigen::MatrixXd w2;
  Eigen::MatrixXd g2;
  Eigen::VectorXd s2;
  lmi.layout.unpack(lmi.layout.pack(w, g, s), w2, g2, s2);
  EXPECT_LT((w2 - w).norm(), 1e-12);
  EXPECT_LT((g2 - g).norm(), 1e-12);
  EXPECT_LT((s2 - s).norm(), 1e-12);
}

TEST(PrecisionOpt, AssembledMatrixMatchesPhysicalBlocks)
{
  std::mt19937_64 rng(32);
  const auto prob = random_problem(rng, 3, 2, 3, 50.0, 0.5);
  const auto lmi = assemble_lmi(prob.batch, prob.gamma, prob.s_max, prob.weights);
  const Eigen::MatrixXd a = random_matrix(rng, 3, 3);
  const Eigen::MatrixXd w = a * a.transpose();
  const Eigen::MatrixXd g = random_matrix(rng, 3, 6);
  const Eigen::VectorXd s = random_matrix(rng, 6, 1).cwiseAbs() * 10.0;
  const Eigen::MatrixXd scaled = lmi.sdp.psd.front().evaluate(lmi.layout.pack(w, g, s));
  const Eigen::MatrixXd physical = lmi_matrix(prob.batch, w, g, s);
  // Congruence scaling preserves inertia.
  EXPECT_EQ(
    min_eigenvalue(scaled) >= 0.0, min_eigenvalue(physical) >= 0.0);
  EXPECT_EQ(scaled.rows(), physical.rows());
}

TEST(PrecisionOpt, NoUpdateIsFeasibleAtPrior)
{
  const auto & sc = reference_scenario();
  const auto & b = sc.batch;
  const Eigen::MatrixXd w = b.final_prior_cov();
  const Eigen::MatrixXd g = Eigen::MatrixXd::Zero(6, 60);
  const Eigen::VectorXd s = Eigen::VectorXd::Zero(60);
  EXPECT_GE(min_eigenvalue(lmi_matrix(b, w, g, s)), -1e-12);
  EXPECT_NEAR(schur_min_eigenvalue(b, w, g, s), 0.0, 1e-12);
  EXPECT_LT(schur_min_eigenvalue(b, w - 1e-6 * Eigen::MatrixXd::Identity(6, 6), g, s), 0.0);
}

TEST(PrecisionOpt, SchurComplementOracle)
{
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const auto b = random_batch(rng, 3, 2, 2);
    const Eigen::VectorXd s = (random_matrix(rng, 4, 1).cwiseAbs().array() + 0.5).matrix();
    const Eigen::MatrixXd g = optimal_batch_gain(b, s);
    const auto post = batch_posterior_stats(b, g, s);
    // The optimal posterior sits exactly on the Schur boundary.
    EXPECT_NEAR(schur_min_eigenvalue(b, post.cov, g, s), 0.0, 1e-10);
    const Eigen::MatrixXd n = b.selector - g * b.cbar;
    const Eigen::MatrixXd direct = post.cov - n * b.prior_cov * n.transpose() -
      g * s.cwiseInverse().asDiagonal() * g.transpose();
    EXPECT_LT(direct.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GE(min_eigenvalue(lmi_matrix(b, post.cov, g, s)), -1e-9);
  }
}

TEST(PrecisionOpt, LooseBoundNeedsNoMeasurements)
{
  std::mt19937_64 rng(34);
  auto prob = random_problem(rng, 3, 2, 3, 50.0, 0.5);
  prob.gamma = 10.0 * prob.batch.final_prior_cov().trace();
  const auto sched = solve_precisions(prob);
  ASSERT_EQ(sched.status, ScheduleStatus::Optimal) << sched.message;
  EXPECT_LT(sched.precision.maxCoeff(), 1e-6 * 50.0);
  EXPECT_EQ(sched.active_count, 0);

  const auto rw = reweighted_solve(prob);
  EXPECT_EQ(rw.status, ScheduleStatus::Optimal);
  EXPECT_EQ(rw.iterations, 2);
  EXPECT_EQ(rw.active_count, 0);
}

TEST(PrecisionOpt, BelowReachableTraceIsInfeasible)
{
  std::mt19937_64 rng(35);
  auto prob = random_problem(rng, 3, 2, 3, 50.0, 0.0);
  prob.gamma *= 0.5;
  const auto sched = solve_precisions(prob);
  EXPECT_EQ(sched.status, ScheduleStatus::Infeasible) << sched.message;
  EXPECT_NEAR(sched.reachable_trace, 2.0 * prob.gamma, 1e-12);
}

TEST(PrecisionOpt, SolutionSatisfiesCertificate)
{
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 5; ++trial) {
    const auto prob = random_problem(rng, 3, 2, 4, 80.0, 0.3);
    const auto sched = solve_precisions(prob);
    ASSERT_EQ(sched.status, ScheduleStatus::Optimal) << sched.message;
    EXPECT_LE(sched.trace, prob.gamma * (1 + 1e-6));
    EXPECT_LE(sched.sdp_trace, prob.gamma * (1 + 1e-6));
    EXPECT_GE(sched.sdp_lmi_min_eigenvalue, -1e-6);
    EXPECT_GE(sched.schur_min_eigenvalue, -1e-6);
    EXPECT_TRUE((sched.precision.array() >= 0.0).all());
    EXPECT_TRUE((sched.precision.array() <= prob.s_max.array() * (1 + 1e-9)).all());
    const auto post = batch_posterior_stats(prob.batch, sched.gain, sched.precision);
    EXPECT_NEAR(post.cov.trace(), sched.trace, 1e-10);
  }
}

TEST(PrecisionOpt, MaskedChannelsAreExactlyZero)
{
  std::mt19937_64 rng(37);
  auto prob = random_problem(rng, 3, 2, 3, 60.0, 0.3);
  prob.s_max(1) = 0.0;
  prob.s_max(4) = 0.0;
  prob.gamma = max_precision_trace(prob.batch, prob.s_max) * 1.5;
  const auto sched = solve_precisions(prob);
  ASSERT_EQ(sched.status, ScheduleStatus::Optimal) << sched.message;
  EXPECT_EQ(sched.precision(1), 0.0);
  EXPECT_EQ(sched.precision(4), 0.0);
  EXPECT_EQ(sched.gain.col(1).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(sched.gain.col(4).cwiseAbs().maxCoeff(), 0.0);
}

TEST(PrecisionOpt, DroppingInactiveChannelsKeepsTrace)
{
  std::mt19937_64 rng(38);
  for (int trial = 0; trial < 5; ++trial) {
    const auto prob = random_problem(rng, 3, 3, 3, 100.0, 0.4);
    const auto sched = reweighted_solve(prob);
    ASSERT_EQ(sched.status, ScheduleStatus::Optimal) << sched.message;
    Eigen::VectorXd kept = Eigen::VectorXd::Zero(prob.s_max.size());
    for (Index i : active_set(sched.precision, prob.s_max, 1e-6)) {
      kept(i) = sched.precision(i);
    }
    const auto post = batch_posterior_stats(prob.batch, optimal_batch_gain(prob.batch, kept), kept);
    EXPECT_LE(post.cov.trace(), prob.gamma * (1 + 1e-4));
  }
}

TEST(PrecisionOpt, LargerBoundsNeverCostMore)
{
  std::mt19937_64 rng(39);
  auto prob = random_problem(rng, 3, 2, 3, 40.0, 0.2);
  double previous = std::numeric_limits<double>::infinity();
  for (double s_max : {40.0, 80.0, 160.0}) {
    prob.s_max.setConstant(s_max);
    const auto sched = solve_precisions(prob);
    ASSERT_EQ(sched.status, ScheduleStatus::Optimal) << sched.message;
    EXPECT_LE(sched.objective, previous * (1 + 1e-6));
    previous = sched.objective;
  }
}

TEST(PrecisionOpt, ReweightingNeverGrowsActiveSet)
{
  std::mt19937_64 rng(40);
  int grew = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto prob = random_problem(rng, 2, 2, 3, 50.0, 0.3);
    const auto sched = reweighted_solve(prob);
    ASSERT_EQ(sched.status, ScheduleStatus::Optimal) << sched.message;
    ASSERT_FALSE(sched.history.empty());
    EXPECT_LE(sched.active_count, sched.history.front().active);
    EXPECT_LE(sched.iterations, 5);
    for (std::size_t i = 1; i < sched.history.size(); ++i) {
      grew += sched.history[i].active > sched.history[i - 1].active;
    }
  }
  RecordProperty("iterations_that_grew", grew);
}

TEST(PrecisionOpt, ActiveSetThreshold)
{
  Eigen::VectorXd s(4);
  s << 0.0, 1e-5, 2e-3, 500.0;
  const Eigen::VectorXd smax = Eigen::VectorXd::Constant(4, 1000.0);
  EXPECT_EQ(active_set(s, smax, 1e-6), (std::vector<Index>{2, 3}));
  EXPECT_EQ(active_set(s, smax, 1e-9), (std::vector<Index>{1, 2, 3}));
}

TEST(PrecisionOpt, SparsityReportOfEmptySchedule)
{
  std::mt19937_64 rng(41);
  auto prob = random_problem(rng, 2, 2, 3, 50.0, 0.5);
  prob.gamma = 10.0 * prob.batch.final_prior_cov().trace();
  const auto sched = solve_precisions(prob);
  const auto report = sparsity_report(prob, sched);
  EXPECT_EQ(report.active_count, 0);
  EXPECT_EQ(report.grid.rows(), 3);
  EXPECT_EQ(report.grid.cols(), 2);
  EXPECT_EQ(report.grid.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(report.verified);
  for (const auto & step : report.active_by_step) {
    EXPECT_TRUE(step.empty());
  }
}

TEST(PrecisionOpt, ValidateRejectsBadProblems)
{
  std::mt19937_64 rng(42);
  auto prob = random_problem(rng, 2, 2, 2, 50.0, 0.5);
  EXPECT_NO_THROW(prob.validate());
  auto bad = prob;
  bad.gamma = 0.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = prob;
  bad.s_max(0) = -1.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = prob;
  bad.weights(0) = 0.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = prob;
  bad.weights.resize(3);
  EXPECT_THROW(bad.validate(), Error);
}

TEST(PrecisionOptReference, PriorAndGammaMatchOracle)
{
  const auto oracle = load_oracle();
  ASSERT_GT(oracle.prior_trace, 0.0);
  EXPECT_NEAR(reference_scenario().prior_trace / oracle.prior_trace, 1.0, 1e-6);
  EXPECT_NEAR(reference_scenario().gamma / oracle.gamma, 1.0, 1e-6);
}

TEST(PrecisionOptReference, ReachableTracesMatchOracle)
{
  const auto oracle = load_oracle();
  ASSERT_EQ(oracle.cases.size(), 6u);
  for (const auto & [key, expected] : oracle.cases) {
    const auto & sc = key.second ? blocked_scenario() : reference_scenario();
    const auto prob = sc.problem(key.first);
    EXPECT_NEAR(max_precision_trace(prob.batch, prob.s_max) / expected.reachable, 1.0, 1e-6)
      << key.first << (key.second ? " blocked" : "");
  }
}

TEST(PrecisionOptReference, UnitWeightObjectivesMatchOracle)
{
  const auto oracle = load_oracle();
  for (const auto & [key, expected] : oracle.cases) {
    const auto & sc = key.second ? blocked_scenario() : reference_scenario();
    const auto sched = solve_precisions(sc.problem(key.first), sc.config.solver);
    const std::string label = std::to_string(key.first) + (key.second ? " blocked" : "");
    ASSERT_EQ(expected.status, "optimal") << label;
    ASSERT_EQ(sched.status, ScheduleStatus::Optimal) << label << ": " << sched.message;
    EXPECT_NEAR(sched.objective / expected.objective, 1.0, 1e-5) << label;
    if (key.second) {
      // Step 10 of channels y1..y3 is blocked.
      for (Index j = 0; j < 3; ++j) {
        EXPECT_EQ(sched.precision(9 * 6 + j), 0.0) << label;
      }
    }
  }
}
