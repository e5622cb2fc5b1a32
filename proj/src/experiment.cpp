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


#include "sensched/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sensched/error.hpp"
#include "sensched/linalg.hpp"
#include "sensched/report.hpp"

namespace sensched
{

namespace
{

using Json = nlohmann::ordered_json;

void write_file(const std::filesystem::path & path, const std::string & content)
{
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    fail(ErrorKind::InvalidInput, "cannot write '" + path.string() + "'");
  }
  file << content;
}

std::filesystem::path prepare(const CommandOptions & options)
{
  std::filesystem::create_directories(options.out);
  return options.out;
}

Eigen::VectorXd to_stacked(const Eigen::MatrixXd & grid)
{
  Eigen::VectorXd stacked(grid.size());
  for (Index k = 0; k < grid.rows(); ++k) {
    for (Index c = 0; c < grid.cols(); ++c) {
      stacked(k * grid.cols() + c) = grid(k, c);
    }
  }
  return stacked;
}

Json case_json(const CaseResult & r, const std::vector<std::string> & labels)
{
  const PrecisionSchedule & s = r.schedule;
  Json j;
  j["s_max"] = r.s_max;
  j["window"] = r.window;
  j["status"] = to_string(s.status);
  j["message"] = s.message;
  j["gamma"] = r.problem.gamma;
  j["objective_rho_one"] = r.rho_one_objective;
  j["objective"] = s.objective;
  j["l1"] = s.l1;
  j["trace"] = s.trace;
  j["trace_over_gamma"] = s.trace / r.problem.gamma;
  j["reachable_trace"] = s.reachable_trace;
  j["active_count"] = s.active_count;
  j["reweight_iterations"] = s.iterations;
  j["lmi_min_eigenvalue"] = s.lmi_min_eigenvalue;
  j["schur_min_eigenvalue"] = s.schur_min_eigenvalue;
  Json history = Json::array();
  for (const auto & h : s.history) {
    history.push_back(
      {{"objective", h.objective}, {"l1", h.l1}, {"active", h.active},
        {"solver_iterations", h.solver_iterations}});
  }
  j["history"] = history;
  if (r.sparsity) {
    const SparsityReport & sp = *r.sparsity;
    j["threshold"] = sp.threshold;
    j["verified_trace"] = sp.verified_trace;
    j["verified"] = sp.verified;
    Json steps = Json::array();
    for (std::size_t k = 0; k < sp.active_by_step.size(); ++k) {
      Json names = Json::array();
      for (Index c : sp.active_by_step[k]) {
        names.push_back(labels[static_cast<std::size_t>(c)]);
      }
      steps.push_back(names);
    }
    j["active_by_step"] = steps;
  }
  j["seconds"] = r.seconds;
  return j;
}

Json base_json(const Scenario & sc, const char * command)
{
  Json j;
  j["command"] = command;
  j["config_hash"] = config_hash(sc.config);
  j["prior_trace"] = sc.prior_trace;
  j["gamma"] = sc.gamma;
  return j;
}

int exit_for(const std::vector<CaseResult> & results)
{
  int code = kExitOk;
  for (const auto & r : results) {
    if (r.schedule.status == ScheduleStatus::NumericalFailure) {
      return kExitNumerical;
    }
    if (r.schedule.status == ScheduleStatus::Infeasible) {
      code = kExitInfeasible;
    }
  }
  return code;
}

CaseResult solve_case(const Scenario & sc, PrecisionProblem problem, double s_max)
{
  const auto start = std::chrono::steady_clock::now();
  CaseResult r;
  r.s_max = s_max;
  r.problem = std::move(problem);
  r.schedule = reweighted_solve(r.problem, sc.config.reweight, sc.config.solver);
  if (!r.schedule.history.empty()) {
    r.rho_one_objective = r.schedule.history.front().objective;
  }
  if (r.schedule.status == ScheduleStatus::Optimal) {
    r.sparsity = sparsity_report(r.problem, r.schedule, sc.config.reweight.threshold);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

std::string smax_tag(double s_max)
{
  return report::fmt(s_max);
}

MonteCarloResult monte_carlo(
  const Scenario & scenario, const Eigen::VectorXd & precision, Index trials,
  std::uint64_t seed)
{
  const BatchSystem & batch = scenario.batch;
  require(
    precision.size() == batch.stacked_channels(), ErrorKind::InvalidInput,
    "monte_carlo: precision vector has the wrong length");
  require(trials >= 0, ErrorKind::InvalidInput, "monte_carlo: trials must be >= 0");
  MonteCarloResult out;
  out.trials = trials;
  out.seed = seed;
  out.gamma = scenario.gamma;
  const Eigen::MatrixXd gain = optimal_batch_gain(batch, precision);
  out.analytic_trace = batch_posterior_stats(batch, gain, precision).cov.trace();
  if (trials == 0) {
    return out;
  }

  const Index n = batch.state_dim;
  const Index my = batch.channels;
  const auto p = static_cast<std::size_t>(batch.horizon);
  const GaussianState & initial = scenario.discretization.at_instants.front();
  const Eigen::MatrixXd initial_root = psd_sqrt(initial.cov);
  std::vector<Eigen::MatrixXd> noise_root;
  for (std::size_t k = 0; k < p; ++k) {
    const DiscreteStep & step = scenario.discretization.system.steps[k];
    noise_root.push_back(step.noise_input * psd_sqrt(step.noise_cov));
  }
  Eigen::VectorXd meas_sd = Eigen::VectorXd::Zero(precision.size());
  for (Index j = 0; j < precision.size(); ++j) {
    if (precision(j) > 0.0) {
      meas_sd(j) = 1.0 / std::sqrt(precision(j));
    }
  }
  const Eigen::VectorXd predicted = batch.cbar * batch.prior_mean;
  const Eigen::VectorXd prior_final = batch.selector * batch.prior_mean;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto draw = [&](Index size) {
      Eigen::VectorXd v(size);
      for (Index i = 0; i < size; ++i) {
        v(i) = normal(rng);
      }
      return v;
    };

  double sum = 0.0;
  double sum_sq = 0.0;
  Eigen::VectorXd ybar(batch.stacked_channels());
  for (Index t = 0; t < trials; ++t) {
    Eigen::VectorXd x = initial.mean + initial_root * draw(n);
    for (std::size_t k = 0; k < p; ++k) {
      const DiscreteStep & step = scenario.discretization.system.steps[k];
      x = step.transition * x + noise_root[k] * draw(noise_root[k].cols());
      const auto row = static_cast<Index>(k) * my;
      ybar.segment(row, my) = scenario.measurements[k] * x +
        meas_sd.segment(row, my).cwiseProduct(draw(my));
    }
    const Eigen::VectorXd estimate = prior_final + gain * (ybar - predicted);
    const double err = (x - estimate).squaredNorm();
    sum += err;
    sum_sq += err * err;
  }
  const auto count = static_cast<double>(trials);
  out.empirical_trace = sum / count;
  if (trials > 1) {
    const double var = std::max(0.0, (sum_sq - count * out.empirical_trace * out.empirical_trace) /
      (count - 1.0));
    out.standard_error = std::sqrt(var / count);
  }
  return out;
}

CaseResult run_case(const Scenario & scenario, double s_max)
{
  return solve_case(scenario, scenario.problem(s_max), s_max);
}

std::vector<CaseResult> run_chain(const Scenario & scenario, double s_max)
{
  std::vector<CaseResult> results;
  GaussianState posterior = scenario.discretization.at_instants.front();
  const Eigen::ArrayXXd bounds = scenario.bounds(s_max);
  for (std::size_t w = 0; w < static_cast<std::size_t>(scenario.config.horizons); ++w) {
    const BatchSystem batch = w == 0 ? scenario.batch : scenario.window_batch(w, posterior);
    double gamma = scenario.config.gamma_value;
    if (scenario.config.gamma_rule == GammaRule::Fraction) {
      gamma *= batch.final_prior_cov().trace();
    }
    CaseResult r = solve_case(scenario, make_problem(batch, gamma, bounds), s_max);
    r.window = w;
    const bool ok = r.schedule.status == ScheduleStatus::Optimal;
    if (ok) {
      posterior = batch_posterior_stats(batch, r.schedule.gain, r.schedule.precision);
    }
    results.push_back(std::move(r));
    if (!ok) {
      break;
    }
  }
  return results;
}

int cmd_simulate(const ScenarioConfig & config, const CommandOptions & options)
{
  const Scenario sc = build_scenario(config);
  const auto dir = prepare(options);
  std::ostringstream traj;
  report::write_trajectory_csv(traj, sc.nominal);
  write_file(dir / "trajectory.csv", traj.str());
  std::ostringstream moments;
  report::write_moments_csv(moments, sc.discretization.fine);
  write_file(dir / "moments.csv", moments.str());
  write_file(dir / "trajectory.svg", report::trajectory_svg(sc.nominal, config.topology));
  write_file(dir / "envelope.svg", report::envelope_svg(sc.discretization.fine));

  Json j = base_json(sc, "simulate");
  j["end_time"] = sc.nominal.end_time();
  j["grid_points"] = sc.nominal.size();
  j["final_nominal"] = std::vector<double>(
    sc.nominal.states.back().data(),
    sc.nominal.states.back().data() + sc.nominal.states.back().size());
  j["final_cov_trace"] = sc.discretization.fine.states.back().cov.trace();
  j["outputs"] = {"trajectory.csv", "moments.csv", "trajectory.svg", "envelope.svg"};
  write_file(dir / "simulate.json", j.dump(2) + "\n");
  return kExitOk;
}

int cmd_optimize(const ScenarioConfig & config, const CommandOptions & options)
{
  const Scenario sc = build_scenario(config);
  const auto dir = prepare(options);
  const auto labels = config.topology.channel_labels();
  std::vector<CaseResult> all;
  Json j = base_json(sc, "optimize");
  Json cases = Json::array();
  for (double s_max : config.s_max) {
    std::vector<CaseResult> results;
    if (config.horizons > 1) {
      results = run_chain(sc, s_max);
    } else {
      results.push_back(run_case(sc, s_max));
    }
    for (auto & r : results) {
      Json cj = case_json(r, labels);
      if (r.sparsity) {
        std::string stem = "smax" + smax_tag(s_max);
        if (config.horizons > 1) {
          stem += "_w" + std::to_string(r.window + 1);
        }
        std::ostringstream csv;
        report::write_grid_csv(csv, r.sparsity->grid, labels);
        write_file(dir / ("precision_" + stem + ".csv"), csv.str());
        write_file(
          dir / ("heatmap_" + stem + ".svg"),
          report::heatmap_svg(
            r.sparsity->grid, labels, s_max,
            "sensing precision, s_max = " + smax_tag(s_max) +
            (config.horizons > 1 ? ", window " + std::to_string(r.window + 1) : "")));
        cj["grid_csv"] = "precision_" + stem + ".csv";
        cj["heatmap_svg"] = "heatmap_" + stem + ".svg";
      }
      cases.push_back(cj);
      all.push_back(std::move(r));
    }
  }
  j["cases"] = cases;
  write_file(dir / "optimize.json", j.dump(2) + "\n");
  return exit_for(all);
}

int cmd_validate(const ScenarioConfig & config, const CommandOptions & options)
{
  const Scenario sc = build_scenario(config);
  const auto dir = prepare(options);
  Json j = base_json(sc, "validate");
  Eigen::VectorXd precision;
  if (options.schedule) {
    std::ifstream file(*options.schedule);
    if (!file) {
      fail(ErrorKind::Config, "cannot open schedule '" + options.schedule->string() + "'");
    }
    const Eigen::MatrixXd grid = report::read_grid_csv(file);
    require(
      grid.rows() == sc.batch.horizon && grid.cols() == sc.batch.channels, ErrorKind::Config,
      "schedule grid must be " + std::to_string(sc.batch.horizon) + " x " +
      std::to_string(sc.batch.channels));
    require((grid.array() >= 0.0).all(), ErrorKind::Config, "schedule precisions must be >= 0");
    precision = to_stacked(grid);
    j["schedule"] = options.schedule->string();
  } else {
    const CaseResult r = run_case(sc, config.s_max.front());
    j["schedule"] = "optimized, s_max = " + smax_tag(r.s_max);
    j["schedule_status"] = to_string(r.schedule.status);
    if (r.schedule.status != ScheduleStatus::Optimal) {
      write_file(dir / "validate.json", j.dump(2) + "\n");
      return exit_for({r});
    }
    precision = r.sparsity->grid.size() ? to_stacked(r.sparsity->grid) : r.schedule.precision;
  }
  const MonteCarloResult mc = monte_carlo(sc, precision, config.trials, config.seed);
  j["trials"] = mc.trials;
  j["seed"] = mc.seed;
  j["analytic_trace"] = mc.analytic_trace;
  if (mc.trials > 0) {
    j["empirical_trace"] = mc.empirical_trace;
    j["standard_error"] = mc.standard_error;
    j["within_gamma"] = mc.empirical_trace <= mc.gamma + 3.0 * mc.standard_error;
    j["within_analytic"] = std::abs(mc.empirical_trace - mc.analytic_trace) <=
      3.0 * mc.standard_error;
  }
  std::ostringstream csv;
  csv << "trials,seed,empirical_trace,standard_error,analytic_trace,gamma\n";
  if (mc.trials > 0) {
    csv << mc.trials << "," << mc.seed << "," << report::fmt(mc.empirical_trace) << "," <<
      report::fmt(mc.standard_error) << "," << report::fmt(mc.analytic_trace) << "," <<
      report::fmt(mc.gamma) << "\n";
  }
  write_file(dir / "validate.csv", csv.str());
  write_file(dir / "validate.json", j.dump(2) + "\n");
  return kExitOk;
}

int cmd_sweep(const ScenarioConfig & config, const CommandOptions & options)
{
  if (config.s_max.size() < 2) {
    fail(ErrorKind::Config, "config: key 's_max': sweep needs at least two values");
  }
  const Scenario sc = build_scenario(config);
  const auto dir = prepare(options);
  const auto labels = config.topology.channel_labels();

  std::vector<CaseResult> results(config.s_max.size());
  std::vector<std::exception_ptr> errors(config.s_max.size());
  std::atomic<std::size_t> next{0};
  unsigned workers = options.workers ? options.workers : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(config.s_max.size()));
  auto work = [&]() {
      for (std::size_t i = next++; i < results.size(); i = next++) {
        try {
          results[i] = run_case(sc, config.s_max[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) {
    pool.emplace_back(work);
  }
  work();
  for (auto & t : pool) {
    t.join();
  }
  for (const auto & e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }

  std::ostringstream csv;
  csv << "s_max,status,feasible,active_count,objective_rho_one,objective,l1,trace\n";
  Json j = base_json(sc, "sweep");
  Json cases = Json::array();
  std::vector<std::string> bar_labels;
  std::vector<double> bar_values;
  for (const auto & r : results) {
    const bool feasible = r.schedule.status == ScheduleStatus::Optimal;
    const Index active = feasible ? r.sparsity->active_count : 0;
    csv << report::fmt(r.s_max) << "," << to_string(r.schedule.status) << "," <<
      (feasible ? "true" : "false") << "," << active << "," <<
      report::fmt(r.rho_one_objective) << "," << report::fmt(r.schedule.objective) << "," <<
      report::fmt(r.schedule.l1) << "," << report::fmt(r.schedule.trace) << "\n";
    cases.push_back(case_json(r, labels));
    bar_labels.push_back(smax_tag(r.s_max));
    bar_values.push_back(static_cast<double>(active));
  }
  j["cases"] = cases;
  write_file(dir / "sweep.csv", csv.str());
  write_file(
    dir / "sweep.svg",
    report::bar_chart_svg(bar_labels, bar_values, "active measurements per s_max", "active cells"));
  write_file(dir / "sweep.json", j.dump(2) + "\n");
  return exit_for(results);
}

}  // namespace sensched
