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


#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sensched/error.hpp"
#include "sensched/experiment.hpp"
#include "sensched/scenario.hpp"

int main(int argc, char ** argv)
{
  using namespace sensched;
  CLI::App app{"Sparse sensing-precision schedules for batch Kalman updates"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::vector<double> s_max;
  std::optional<long long> trials;
  std::optional<double> gap_tol;
  std::optional<double> feas_tol;
  std::optional<long long> horizons;
  std::string schedule;
  unsigned workers = 0;

  app.add_option("--config", config_path, "scenario file (default: built-in reference)");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "Monte-Carlo seed");
  app.add_option("--s-max", s_max, "precision bounds, comma separated")->delimiter(',');
  app.add_option("--trials", trials, "Monte-Carlo trials");
  app.add_option("--gap-tol", gap_tol, "relative duality gap tolerance");
  app.add_option("--feas-tol", feas_tol, "relative feasibility tolerance");
  app.add_option("--horizons", horizons, "chained update windows");

  auto * simulate = app.add_subcommand("simulate", "nominal trajectory and moment envelopes");
  auto * optimize = app.add_subcommand("optimize", "reweighted precision schedules per s_max");
  auto * validate = app.add_subcommand("validate", "Monte-Carlo check of a schedule");
  validate->add_option("--schedule", schedule, "precision grid CSV (default: optimize first)");
  auto * sweep = app.add_subcommand("sweep", "compare several s_max values");
  sweep->add_option("--workers", workers, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    ScenarioConfig config = config_path.empty() ? reference_config() : load_config(config_path);
    if (seed) {
      config.seed = *seed;
    }
    if (!s_max.empty()) {
      config.s_max = s_max;
    }
    if (trials) {
      config.trials = *trials;
    }
    if (gap_tol) {
      config.solver.gap_tol = *gap_tol;
    }
    if (feas_tol) {
      config.solver.feas_tol = *feas_tol;
    }
    if (horizons) {
      config.horizons = *horizons;
    }
    config.validate();

    CommandOptions options;
    options.out = out_dir;
    options.workers = workers;
    if (!schedule.empty()) {
      options.schedule = schedule;
    }
    int code = kExitOk;
    if (simulate->parsed()) {
      code = cmd_simulate(config, options);
    } else if (optimize->parsed()) {
      code = cmd_optimize(config, options);
    } else if (validate->parsed()) {
      code = cmd_validate(config, options);
    } else if (sweep->parsed()) {
      code = cmd_sweep(config, options);
    }
    if (code == kExitInfeasible) {
      std::cerr << "infeasible: no schedule within the bounds reaches gamma (see the JSON report)\n";
    } else if (code == kExitNumerical) {
      std::cerr << "numerical failure (see the JSON report)\n";
    }
    return code;
  } catch (const Error & e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return e.kind() == ErrorKind::Config || e.kind() == ErrorKind::InvalidInput ?
           kExitConfig : kExitNumerical;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
