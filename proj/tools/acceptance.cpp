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


// Runs the reference scenario end to end and prints one verdict line per
// acceptance criterion:
//
//   sensched_acceptance CONFIG_DIR ORACLE_FILE
//
// Exit status is 1 when any criterion FAILs. FLAGGED criteria do not fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sensched/error.hpp"
#include "sensched/experiment.hpp"
#include "sensched/linalg.hpp"
#include "sensched/report.hpp"

namespace fs = std::filesystem;
using namespace sensched;

namespace
{

enum class Verdict { Pass, Fail, Flagged };

const char * name(Verdict v)
{
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Flagged: return "FLAGGED";
  }
  return "?";
}

int failures = 0;

void verdict(int id, const char * title, Verdict v, const std::string & detail)
{
  std::printf("criterion %d %-7s %s: %s\n", id, name(v), title, detail.c_str());
  std::fflush(stdout);
  failures += v == Verdict::Fail;
}

std::string num(double v, int digits = 6)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

struct Case
{
  double s_max = 0.0;
  bool blocked = false;
  const Scenario * scenario = nullptr;
  CaseResult result;

  std::string label() const {return smax_tag(s_max) + (blocked ? "b" : "");}
};

std::map<std::pair<int, int>, double> load_oracle_objectives(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    fail(ErrorKind::Config, "cannot open oracle file '" + path + "'");
  }
  std::map<std::pair<int, int>, double> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "case") {
      int s_max = 0;
      int blocked = 0;
      double reachable = 0.0;
      std::string status;
      double objective = 0.0;
      ls >> s_max >> blocked >> reachable >> status >> objective;
      out[{s_max, blocked}] = objective;
    }
  }
  return out;
}

std::string set_string(const std::vector<Index> & channels)
{
  std::string s = "{";
  for (std::size_t i = 0; i < channels.size(); ++i) {
    s += (i ? ", y" : "y") + std::to_string(channels[i] + 1);
  }
  return s + "}";
}

Eigen::VectorXd stacked(const Eigen::MatrixXd & grid)
{
  Eigen::VectorXd v(grid.size());
  for (Index k = 0; k < grid.rows(); ++k) {
    v.segment(k * grid.cols(), grid.cols()) = grid.row(k).transpose();
  }
  return v;
}

// ---------------------------------------------------------------------------

void feasibility_matrix(const std::vector<Case> & cases)
{
  bool ok = true;
  double slowest = 0.0;
  std::string detail;
  for (const auto & c : cases) {
    const bool want_infeasible = c.blocked && c.s_max == 450.0;
    const auto status = c.result.schedule.status;
    const bool match = want_infeasible ? status == ScheduleStatus::Infeasible :
      status == ScheduleStatus::Optimal;
    ok = ok && match;
    slowest = std::max(slowest, c.result.seconds);
    detail += c.label() + "=" + to_string(status) +
      (want_infeasible ? "(want Infeasible)" : "") + " ";
  }
  const auto & worst = *std::find_if(cases.begin(), cases.end(), [](const Case & c) {
      return c.blocked && c.s_max == 450.0;
    });
  detail += "| 450b reachable trace " + num(worst.result.schedule.reachable_trace) +
    " vs gamma " + num(worst.result.problem.gamma) + " | slowest case " + num(slowest, 3) + " s";
  verdict(1, "feasibility matrix", ok && slowest < 60.0 ? Verdict::Pass : Verdict::Fail, detail);
}

void sparsity_pattern(
  const std::vector<Case> & cases, const std::map<std::pair<int, int>, double> & oracle)
{
  const auto find = [&](double s_max, bool blocked) -> const Case & {
      return *std::find_if(cases.begin(), cases.end(), [&](const Case & c) {
               return c.s_max == s_max && c.blocked == blocked;
             });
    };
  const Case & c1200 = find(1200.0, false);
  const Case & c750b = find(750.0, true);
  if (!c1200.result.sparsity || !c750b.result.sparsity) {
    verdict(2, "sparsity pattern", Verdict::Fail, "a named case is not Optimal");
    return;
  }
  const auto & sp1200 = *c1200.result.sparsity;
  const auto & sp750b = *c750b.result.sparsity;
  const std::vector<Index> want9{1, 3, 4};
  const bool step9 = sp1200.active_by_step[8] == want9;
  const auto has_y4 = [](const std::vector<Index> & s) {
      return std::find(s.begin(), s.end(), Index{3}) != s.end();
    };
  const bool y4 = has_y4(sp750b.active_by_step[8]) && has_y4(sp750b.active_by_step[9]);

  const auto late_share = [](const SparsityReport & sp) {
      double late = 0.0;
      for (std::size_t k = 7; k < sp.active_by_step.size(); ++k) {
        late += static_cast<double>(sp.active_by_step[k].size());
      }
      return sp.active_count ? late / static_cast<double>(sp.active_count) : 1.0;
    };
  const double share1200 = late_share(sp1200);
  const double share750b = late_share(sp750b);
  const bool concentrated = share1200 >= 0.6 && share750b >= 0.6;

  std::string detail = "1200 step 9 " + set_string(sp1200.active_by_step[8]) +
    " (want {y2, y4, y5}); 750b step 9 " + set_string(sp750b.active_by_step[8]) +
    ", step 10 " + set_string(sp750b.active_by_step[9]) + " (want y4 in both); share at k>=8: " +
    num(share1200, 3) + " / " + num(share750b, 3);
  if (step9 && y4 && concentrated) {
    verdict(2, "sparsity pattern", Verdict::Pass, detail);
    return;
  }
  bool objectives_agree = true;
  for (const Case * c : {&c1200, &c750b}) {
    const auto it = oracle.find({static_cast<int>(c->s_max), c->blocked ? 1 : 0});
    if (it == oracle.end()) {
      objectives_agree = false;
      continue;
    }
    const double rel = std::abs(c->result.rho_one_objective - it->second) / it->second;
    objectives_agree = objectives_agree && rel <= 1e-3;
    detail += "; " + c->label() + " rho=1 objective " + num(c->result.rho_one_objective, 9) +
      " vs reference " + num(it->second, 9) + " (rel " + num(rel, 2) + ")";
  }
  verdict(
    2, "sparsity pattern", objectives_agree ? Verdict::Flagged : Verdict::Fail,
    detail + (objectives_agree ? "; different support, objectives within 1e-3" : ""));
}

void guarantees(const std::vector<Case> & cases)
{
  bool ok = true;
  std::string detail;
  int checked = 0;
  for (const auto & c : cases) {
    const auto & s = c.result.schedule;
    if (s.status != ScheduleStatus::Optimal || !c.result.sparsity) {
      continue;
    }
    ++checked;
    const double gamma = c.result.problem.gamma;
    const auto & batch = c.result.problem.batch;
    const bool a = s.sdp_trace <= gamma * (1 + 1e-6) && s.trace <= gamma * (1 + 1e-6);
    const bool b = s.sdp_schur_min_eigenvalue >= -1e-6 && s.schur_min_eigenvalue >= -1e-6;
    const Eigen::VectorXd kept = stacked(c.result.sparsity->grid);
    const double analytic =
      batch_posterior_stats(batch, optimal_batch_gain(batch, kept), kept).cov.trace();
    const bool cc = analytic <= gamma * (1 + 1e-4);
    const auto mc = monte_carlo(*c.scenario, kept, 2000, c.scenario->config.seed);
    const bool d = mc.empirical_trace <= gamma + 3.0 * mc.standard_error;
    ok = ok && a && b && cc && d;
    detail += c.label() + "[" + (a ? "a" : "-") + (b ? "b" : "-") + (cc ? "c" : "-") +
      (d ? "d" : "-") + " tr/g " + num(s.sdp_trace / gamma, 8) + " schur " +
      num(s.sdp_schur_min_eigenvalue, 2) + " analytic/g " + num(analytic / gamma, 8) +
      " mc/g " + num(mc.empirical_trace / gamma, 4) + "+-" + num(mc.standard_error / gamma, 2) +
      "] ";
  }
  verdict(
    3, "guarantee verification", ok && checked > 0 ? Verdict::Pass : Verdict::Fail,
    std::to_string(checked) + " optimal schedules: " + detail);
}

void batch_oracle()
{
  std::mt19937_64 rng(20261019);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<Index> dim(1, 4);
  std::uniform_real_distribution<double> prec(0.5, 20.0);
  const auto rand = [&](Index r, Index c, double scale) {
      Eigen::MatrixXd m(r, c);
      for (Index i = 0; i < m.size(); ++i) {
        m(i) = scale * g(rng);
      }
      return m;
    };
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = dim(rng);
    const Index m = dim(rng);
    const Index my = dim(rng);
    const Index p = dim(rng);
    DiscreteLtvSystem sys;
    std::vector<Eigen::MatrixXd> outputs;
    for (Index k = 0; k < p; ++k) {
      const Eigen::MatrixXd q = rand(m, m, 1.0);
      sys.steps.push_back(
        {Eigen::MatrixXd::Identity(n, n) + rand(n, n, 0.3), rand(n, m, 1.0),
         q * q.transpose() + 0.05 * Eigen::MatrixXd::Identity(m, m)});
      outputs.push_back(rand(my, n, 1.0));
    }
    const Eigen::MatrixXd l = rand(n, n, 1.0);
    const GaussianState init{rand(n, 1, 1.0), l * l.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n)};
    Eigen::VectorXd s(my * p);
    for (Index i = 0; i < s.size(); ++i) {
      s(i) = prec(rng);
    }
    const auto batch = build_batch(sys, outputs, init, p);
    const auto post = batch_posterior_stats(batch, optimal_batch_gain(batch, s), s);
    const auto seq = sequential_filter(sys, outputs, init, s, p);
    worst = std::max(worst, relative_frobenius_error(post.cov, seq.cov));
  }
  verdict(
    4, "batch/sequential oracle", worst <= 1e-6 ? Verdict::Pass : Verdict::Fail,
    "50 random LTV systems, worst relative Frobenius error " + num(worst, 3));
}

void numerical_kernels(const Scenario & sc)
{
  const auto & agents = sc.config.agents;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double dyn_worst = 0.0;
  double meas_worst = 0.0;
  int meas_points = 0;
  const double eps = 1e-6;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x(6);
    for (Index j = 0; j < 6; ++j) {
      x(j) = u(rng);
    }
    const Eigen::MatrixXd jac = jacobian(x, agents);
    Eigen::MatrixXd fd(6, 6);
    for (Index j = 0; j < 6; ++j) {
      Eigen::VectorXd xp = x;
      Eigen::VectorXd xm = x;
      xp(j) += eps;
      xm(j) -= eps;
      fd.col(j) = (vector_field(xp, agents) - vector_field(xm, agents)) / (2 * eps);
    }
    dyn_worst = std::max(dyn_worst, relative_frobenius_error(fd, jac));
  }
  while (meas_points < 100) {
    Eigen::VectorXd x(6);
    for (Index j = 0; j < 6; ++j) {
      x(j) = u(rng);
    }
    if (range_measurement(x, sc.config.topology).minCoeff() < 0.2) {
      continue;
    }
    const Eigen::MatrixXd h = measurement_jacobian(x, sc.config.topology);
    Eigen::MatrixXd fd(h.rows(), 6);
    for (Index j = 0; j < 6; ++j) {
      Eigen::VectorXd xp = x;
      Eigen::VectorXd xm = x;
      xp(j) += eps;
      xm(j) -= eps;
      fd.col(j) = (range_measurement(xp, sc.config.topology) -
        range_measurement(xm, sc.config.topology)) / (2 * eps);
    }
    meas_worst = std::max(meas_worst, relative_frobenius_error(fd, h));
    ++meas_points;
  }

  const auto & nom = sc.nominal;
  double stm_worst = 0.0;
  for (std::size_t k = 1; k <= 10; ++k) {
    const double t = nom.times[k * 100];
    const Eigen::MatrixXd phi = state_transition(nom, 0.0, t);
    Eigen::Matrix2d rot;
    rot << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    stm_worst = std::max(stm_worst, (phi.topLeftCorner<2, 2>() - rot).cwiseAbs().maxCoeff());
  }

  ContinuousNoiseSpec noise;
  noise.density = sc.config.noise_std * sc.config.noise_std * Eigen::MatrixXd::Identity(3, 3);
  noise.input = Eigen::MatrixXd::Zero(6, 3);
  for (Index i = 0; i < 3; ++i) {
    noise.input(2 * i + 1, i) = 1.0;
  }
  const Eigen::MatrixXd diffusion = noise.diffusion();
  const auto per = static_cast<std::size_t>(sc.config.rk4_substeps);
  double q_worst = 0.0;
  double q_min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sc.discretization.system.size(); ++k) {
    const double t_end = nom.times[(k + 1) * per];
    Eigen::MatrixXd integral = Eigen::MatrixXd::Zero(6, 6);
    for (std::size_t i = 0; i <= per; ++i) {
      const double w = (i == 0 || i == per) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const Eigen::MatrixXd phi = state_transition(nom, nom.times[k * per + i], t_end);
      integral += w * phi * diffusion * phi.transpose();
    }
    integral *= nom.step / 3.0;
    const Eigen::MatrixXd & qk = sc.discretization.system.steps[k].noise_cov;
    q_worst = std::max(q_worst, relative_frobenius_error(qk, integral));
    q_min_eig = std::min(q_min_eig, min_eigenvalue(qk));
  }
  const bool ok = dyn_worst <= 1e-6 && meas_worst <= 1e-6 && stm_worst <= 1e-8 &&
    q_worst <= 1e-4 && q_min_eig >= 0.0;
  verdict(
    5, "numerical kernels", ok ? Verdict::Pass : Verdict::Fail,
    "dynamics FD " + num(dyn_worst, 2) + ", range FD " + num(meas_worst, 2) +
    ", harmonic STM " + num(stm_worst, 2) + ", Q_k vs quadrature " + num(q_worst, 2) +
    ", min eig(Q_k) " + num(q_min_eig, 2));
}

void monotonicity(const std::vector<Case> & cases)
{
  bool ok = true;
  std::string detail;
  for (bool blocked : {false, true}) {
    double previous = std::numeric_limits<double>::infinity();
    detail += blocked ? "blocked:" : "open:";
    for (double s_max : {450.0, 750.0, 1200.0}) {
      const auto & c = *std::find_if(cases.begin(), cases.end(), [&](const Case & x) {
          return x.s_max == s_max && x.blocked == blocked;
        });
      if (c.result.schedule.status != ScheduleStatus::Optimal) {
        detail += " " + c.label() + " n/a";
        continue;
      }
      const double obj = c.result.rho_one_objective;
      ok = ok && obj <= previous * (1 + 1e-6);
      previous = obj;
      detail += " " + num(obj, 9);
    }
    detail += "; ";
  }
  double masked = 0.0;
  for (const auto & c : cases) {
    if (!c.blocked || c.result.schedule.status != ScheduleStatus::Optimal) {
      continue;
    }
    const auto & s = c.result.schedule;
    const Index my = c.result.problem.batch.channels;
    for (Index k = 0; k < c.scenario->mask.rows(); ++k) {
      for (Index j = 0; j < my; ++j) {
        if (c.scenario->mask(k, j)) {
          continue;
        }
        const Index col = k * my + j;
        masked = std::max(
          {masked, std::abs(s.precision(col)), s.gain.col(col).cwiseAbs().maxCoeff(),
           s.sdp_gain.col(col).cwiseAbs().maxCoeff()});
      }
    }
  }
  ok = ok && masked <= 1e-9;
  verdict(
    6, "monotonicity", ok ? Verdict::Pass : Verdict::Fail,
    "rho=1 objectives " + detail + "max |masked s, gain| " + num(masked, 2));
}

bool same_csv_outputs(const fs::path & a, const fs::path & b, std::size_t & files)
{
  const auto slurp = [](const fs::path & p) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream buf;
      buf << in.rdbuf();
      return buf.str();
    };
  bool same = true;
  for (const auto & entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") {
      continue;
    }
    ++files;
    const fs::path other = b / entry.path().filename();
    same = same && fs::exists(other) && slurp(entry.path()) == slurp(other);
  }
  return same;
}

void reproducibility(const ScenarioConfig & base)
{
  const fs::path root = fs::temp_directory_path() / "sensched_acceptance_repro";
  fs::remove_all(root);
  ScenarioConfig config = base;
  config.s_max = {1200.0};
  std::size_t files = 0;
  bool same = true;
  for (const char * cmd : {"simulate", "optimize", "validate"}) {
    for (const char * run : {"a", "b"}) {
      CommandOptions opts;
      opts.out = root / run / cmd;
      if (std::string(cmd) == "simulate") {
        cmd_simulate(config, opts);
      } else if (std::string(cmd) == "optimize") {
        cmd_optimize(config, opts);
      } else {
        opts.schedule = root / run / "optimize" / "precision_smax1200.csv";
        cmd_validate(config, opts);
      }
    }
    same = same_csv_outputs(root / "a" / cmd, root / "b" / cmd, files) && same;
  }
  fs::remove_all(root);
  verdict(
    7, "reproducibility", same && files >= 4 ? Verdict::Pass : Verdict::Fail,
    std::to_string(files) + " CSV files compared across two runs (config hash " +
    config_hash(config) + ")");
}

}  // namespace

int main(int argc, char ** argv)
{
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s CONFIG_DIR ORACLE_FILE\n", argv[0]);
    return 3;
  }
  try {
    const fs::path dir = argv[1];
    const auto oracle = load_oracle_objectives(argv[2]);
    const ScenarioConfig open_cfg = load_config((dir / "reference.cfg").string());
    const ScenarioConfig blocked_cfg = load_config((dir / "reference_blocked.cfg").string());
    const Scenario open_sc = build_scenario(open_cfg);
    const Scenario blocked_sc = build_scenario(blocked_cfg);
    std::printf(
      "reference scenario: prior trace %s, gamma %s\n", num(open_sc.prior_trace, 9).c_str(),
      num(open_sc.gamma, 9).c_str());

    std::vector<Case> cases;
    for (const Scenario * sc : {&open_sc, &blocked_sc}) {
      for (double s_max : {450.0, 750.0, 1200.0}) {
        Case c;
        c.s_max = s_max;
        c.blocked = sc == &blocked_sc;
        c.scenario = sc;
        c.result = run_case(*sc, s_max);
        const auto & s = c.result.schedule;
        std::printf(
          "case %-5s %-16s active %3ld  rho=1 objective %-12s trace/gamma %-10s "
          "reachable/gamma %-8s reweight %d  %.1f s\n",
          c.label().c_str(), to_string(s.status), static_cast<long>(s.active_count),
          num(c.result.rho_one_objective, 9).c_str(), num(s.trace / c.result.problem.gamma, 8).c_str(),
          num(s.reachable_trace / c.result.problem.gamma, 4).c_str(), s.iterations,
          c.result.seconds);
        std::fflush(stdout);
        cases.push_back(std::move(c));
      }
    }

    feasibility_matrix(cases);
    sparsity_pattern(cases, oracle);
    guarantees(cases);
    batch_oracle();
    numerical_kernels(open_sc);
    monotonicity(cases);
    reproducibility(open_cfg);
  } catch (const Error & e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 4;
  }
  std::printf("%s\n", failures ? "ACCEPTANCE: FAIL" : "ACCEPTANCE: PASS");
  return failures ? 1 : 0;
}
