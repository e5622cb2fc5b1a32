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


#include "sensched/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "sensched/error.hpp"

namespace sensched
{

namespace
{

[[noreturn]] void config_error(const std::string & key, const std::string & what, int line = 0)
{
  std::string msg = "config: ";
  if (line > 0) {
    msg += "line " + std::to_string(line) + ": ";
  }
  fail(ErrorKind::Config, msg + "key '" + key + "': " + what);
}

std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  while (true) {
    const auto end = s.find(sep, begin);
    parts.push_back(trim(s.substr(begin, end == std::string_view::npos ? end : end - begin)));
    if (end == std::string_view::npos) {
      return parts;
    }
    begin = end + 1;
  }
}

struct Field
{
  std::string key;
  std::string_view value;
  int line;

  double number() const
  {
    std::string_view v = value;
    double factor = 1.0;
    if (v.size() >= 2 && v.substr(v.size() - 2) == "pi") {
      factor = std::numbers::pi;
      v = trim(v.substr(0, v.size() - 2));
      if (v.empty()) {
        return factor;
      }
    }
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
      config_error(key, "expected a number, got '" + std::string(value) + "'", line);
    }
    return out * factor;
  }

  long long integer() const
  {
    long long out = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
      config_error(key, "expected an integer, got '" + std::string(value) + "'", line);
    }
    return out;
  }

  Field sub(std::string_view part) const {return {key, part, line};}

  std::vector<double> numbers() const
  {
    std::vector<double> out;
    if (value.empty()) {
      return out;
    }
    for (auto part : split(value, ',')) {
      out.push_back(sub(part).number());
    }
    return out;
  }

  // "a:b, c:d" with 1-based entries, returned 0-based.
  std::vector<std::pair<long long, long long>> pairs() const
  {
    std::vector<std::pair<long long, long long>> out;
    if (value.empty()) {
      return out;
    }
    for (auto part : split(value, ',')) {
      const auto ab = split(part, ':');
      if (ab.size() != 2) {
        config_error(key, "expected 'a:b', got '" + std::string(part) + "'", line);
      }
      const long long a = sub(ab[0]).integer();
      const long long b = sub(ab[1]).integer();
      if (a < 1 || b < 1) {
        config_error(key, "indices are 1-based", line);
      }
      out.emplace_back(a - 1, b - 1);
    }
    return out;
  }
};

std::string format_number(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_numbers(const std::vector<double> & values)
{
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += (i ? ", " : "") + format_number(values[i]);
  }
  return out;
}

template<typename Pairs>
std::string join_pairs(const Pairs & pairs)
{
  std::string out;
  bool first = true;
  for (const auto & [a, b] : pairs) {
    out += (first ? "" : ", ") + std::to_string(a + 1) + ":" + std::to_string(b + 1);
    first = false;
  }
  return out;
}

using Setter = std::function<void (ScenarioConfig &, const Field &)>;

const std::vector<std::pair<std::string, Setter>> & setters()
{
  static const std::vector<std::pair<std::string, Setter>> table = {
    {"agents", [](ScenarioConfig & c, const Field & f) {
        c.agents.agents.clear();
        for (auto part : split(f.value, ',')) {
          try {
            c.agents.agents.push_back({agent_kind_from_string(std::string(part)), 1.0});
          } catch (const Error & e) {
            config_error(f.key, e.what(), f.line);
          }
        }
      }},
    {"agent_shapes", [](ScenarioConfig & c, const Field & f) {
        const auto shapes = f.numbers();
        if (shapes.size() != c.agents.agents.size()) {
          config_error(f.key, "needs one entry per agent (declare 'agents' first)", f.line);
        }
        for (std::size_t i = 0; i < shapes.size(); ++i) {
          c.agents.agents[i].shape = shapes[i];
        }
      }},
    {"primary_count", [](ScenarioConfig & c, const Field & f) {
        const long long v = f.integer();
        if (v < 0) {
          config_error(f.key, "must be >= 0", f.line);
        }
        c.agents.primary_count = static_cast<std::size_t>(v);
      }},
    {"initial_nominal", [](ScenarioConfig & c, const Field & f) {
        const auto v = f.numbers();
        c.agents.initial_nominal = Eigen::Map<const Eigen::VectorXd>(
          v.data(), static_cast<Index>(v.size()));
      }},
    {"stations", [](ScenarioConfig & c, const Field & f) {
        c.topology.stations.clear();
        if (f.value.empty()) {
          return;
        }
        for (auto part : split(f.value, ';')) {
          std::istringstream in{std::string(part)};
          std::string a;
          std::string b;
          std::string extra;
          if (!(in >> a >> b) || (in >> extra)) {
            config_error(f.key, "expected 'x z; x z; ...'", f.line);
          }
          c.topology.stations.emplace_back(f.sub(a).number(), f.sub(b).number());
        }
      }},
    {"station_links", [](ScenarioConfig & c, const Field & f) {
        c.topology.station_links.clear();
        for (const auto & [s, a] : f.pairs()) {
          c.topology.station_links.push_back(
            {static_cast<std::size_t>(s), static_cast<std::size_t>(a)});
        }
      }},
    {"relative_pairs", [](ScenarioConfig & c, const Field & f) {
        c.topology.relative_pairs.clear();
        for (const auto & [o, t] : f.pairs()) {
          c.topology.relative_pairs.push_back(
            {static_cast<std::size_t>(o), static_cast<std::size_t>(t)});
        }
      }},
    {"noise_std", [](ScenarioConfig & c, const Field & f) {c.noise_std = f.number();}},
    {"initial_mean_scale",
      [](ScenarioConfig & c, const Field & f) {c.initial_mean_scale = f.number();}},
    {"initial_cov_scale",
      [](ScenarioConfig & c, const Field & f) {c.initial_cov_scale = f.number();}},
    {"period", [](ScenarioConfig & c, const Field & f) {c.period = f.number();}},
    {"dt_fraction", [](ScenarioConfig & c, const Field & f) {c.dt_fraction = f.number();}},
    {"horizon", [](ScenarioConfig & c, const Field & f) {c.horizon = f.integer();}},
    {"horizons", [](ScenarioConfig & c, const Field & f) {c.horizons = f.integer();}},
    {"rk4_substeps", [](ScenarioConfig & c, const Field & f) {c.rk4_substeps = f.integer();}},
    {"gamma_rule", [](ScenarioConfig & c, const Field & f) {
        if (f.value == "fraction") {
          c.gamma_rule = GammaRule::Fraction;
        } else if (f.value == "absolute") {
          c.gamma_rule = GammaRule::Absolute;
        } else {
          config_error(f.key, "expected 'fraction' or 'absolute'", f.line);
        }
      }},
    {"gamma", [](ScenarioConfig & c, const Field & f) {c.gamma_value = f.number();}},
    {"s_max", [](ScenarioConfig & c, const Field & f) {c.s_max = f.numbers();}},
    {"channel_scale", [](ScenarioConfig & c, const Field & f) {c.channel_scale = f.numbers();}},
    {"blocked", [](ScenarioConfig & c, const Field & f) {
        c.blocked.clear();
        for (const auto & [k, ch] : f.pairs()) {
          c.blocked.emplace_back(k, ch);
        }
      }},
    {"reweight_epsilon", [](ScenarioConfig & c, const Field & f) {
        c.reweight.epsilon = f.value == "auto" ? -1.0 : f.number();
        if (f.value != "auto" && c.reweight.epsilon <= 0.0) {
          config_error(f.key, "must be > 0 or 'auto'", f.line);
        }
      }},
    {"reweight_max_iters", [](ScenarioConfig & c, const Field & f) {
        c.reweight.max_iters = static_cast<int>(f.integer());
      }},
    {"active_threshold",
      [](ScenarioConfig & c, const Field & f) {c.reweight.threshold = f.number();}},
    {"gap_tol", [](ScenarioConfig & c, const Field & f) {c.solver.gap_tol = f.number();}},
    {"feas_tol", [](ScenarioConfig & c, const Field & f) {c.solver.feas_tol = f.number();}},
    {"infeas_tol", [](ScenarioConfig & c, const Field & f) {c.solver.infeas_tol = f.number();}},
    {"max_solver_iters", [](ScenarioConfig & c, const Field & f) {
        c.solver.max_iters = static_cast<int>(f.integer());
      }},
    {"seed", [](ScenarioConfig & c, const Field & f) {
        std::uint64_t v = 0;
        const auto res = std::from_chars(f.value.data(), f.value.data() + f.value.size(), v);
        if (res.ec != std::errc() || res.ptr != f.value.data() + f.value.size()) {
          config_error(f.key, "expected an unsigned 64-bit integer", f.line);
        }
        c.seed = v;
      }},
    {"trials", [](ScenarioConfig & c, const Field & f) {c.trials = f.integer();}},
  };
  return table;
}

}  // namespace

void ScenarioConfig::validate() const
{
  try {
    agents.validate();
  } catch (const Error & e) {
    config_error("agents", e.what());
  }
  try {
    topology.validate(agents);
  } catch (const Error & e) {
    const std::string what = e.what();
    config_error(
      what.find("relative pair") != std::string::npos ? "relative_pairs" : "station_links", what);
  }
  const Index my = topology.channel_count();
  if (my == 0) {
    config_error("station_links", "no measurement channels");
  }
  if (!(noise_std >= 0.0)) {
    config_error("noise_std", "must be >= 0");
  }
  if (!(initial_mean_scale >= 0.0)) {
    config_error("initial_mean_scale", "must be >= 0");
  }
  if (!(initial_cov_scale >= 0.0)) {
    config_error("initial_cov_scale", "must be >= 0");
  }
  if (!(period > 0.0)) {
    config_error("period", "must be > 0");
  }
  if (!(dt_fraction > 0.0)) {
    config_error("dt_fraction", "must be > 0");
  }
  if (horizon < 1) {
    config_error("horizon", "must be >= 1");
  }
  if (horizons < 1) {
    config_error("horizons", "must be >= 1");
  }
  if (rk4_substeps < 1) {
    config_error("rk4_substeps", "must be >= 1");
  }
  if (gamma_rule == GammaRule::Fraction && !(gamma_value > 0.0 && gamma_value < 1.0)) {
    config_error("gamma", "a fraction of the prior trace must lie in (0, 1)");
  }
  if (gamma_rule == GammaRule::Absolute && !(gamma_value > 0.0)) {
    config_error("gamma", "must be > 0");
  }
  if (s_max.empty()) {
    config_error("s_max", "needs at least one value");
  }
  for (double v : s_max) {
    if (!(v >= 0.0)) {
      config_error("s_max", "values must be >= 0");
    }
  }
  if (!channel_scale.empty()) {
    if (static_cast<Index>(channel_scale.size()) != my) {
      config_error("channel_scale", "needs one entry per channel (" + std::to_string(my) + ")");
    }
    for (double v : channel_scale) {
      if (!(v >= 0.0)) {
        config_error("channel_scale", "values must be >= 0");
      }
    }
  }
  for (const auto & [k, c] : blocked) {
    if (k < 0 || k >= horizon || c < 0 || c >= my) {
      config_error(
        "blocked", "entry " + std::to_string(k + 1) + ":" + std::to_string(c + 1) +
        " is outside the " + std::to_string(horizon) + " x " + std::to_string(my) + " grid");
    }
  }
  if (reweight.max_iters < 1) {
    config_error("reweight_max_iters", "must be >= 1");
  }
  if (!(reweight.threshold > 0.0 && reweight.threshold < 1.0)) {
    config_error("active_threshold", "must lie in (0, 1)");
  }
  if (!(solver.gap_tol > 0.0)) {
    config_error("gap_tol", "must be > 0");
  }
  if (!(solver.feas_tol > 0.0)) {
    config_error("feas_tol", "must be > 0");
  }
  if (!(solver.infeas_tol > 0.0)) {
    config_error("infeas_tol", "must be > 0");
  }
  if (solver.max_iters < 1) {
    config_error("max_solver_iters", "must be >= 1");
  }
  if (trials < 0) {
    config_error("trials", "must be >= 0");
  }
}

ScenarioConfig parse_config(const std::string & text)
{
  ScenarioConfig config = reference_config();
  std::map<std::string, const Setter *> lookup;
  for (const auto & [key, setter] : setters()) {
    lookup.emplace(key, &setter);
  }
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view view(raw);
    const auto hash = view.find('#');
    if (hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) {
      continue;
    }
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::Config, "config: line " + std::to_string(line) + ": expected 'key = value'");
    }
    const std::string key(trim(view.substr(0, eq)));
    const auto it = lookup.find(key);
    if (it == lookup.end()) {
      config_error(key, "unknown key", line);
    }
    if (!seen.insert(key).second) {
      config_error(key, "given twice", line);
    }
    (*it->second)(config, Field{key, trim(view.substr(eq + 1)), line});
  }
  config.agents.secondary_count = config.agents.agents.size() >= config.agents.primary_count ?
    config.agents.agents.size() - config.agents.primary_count : 0;
  config.validate();
  return config;
}

ScenarioConfig load_config(const std::string & path)
{
  std::ifstream file(path);
  if (!file) {
    fail(ErrorKind::Config, "config: cannot open '" + path + "'");
  }
  std::ostringstream text;
  text << file.rdbuf();
  return parse_config(text.str());
}

std::string to_text(const ScenarioConfig & c)
{
  std::ostringstream out;
  std::string names;
  std::vector<double> shapes;
  for (std::size_t i = 0; i < c.agents.agents.size(); ++i) {
    names += (i ? ", " : "") + std::string(to_string(c.agents.agents[i].kind));
    shapes.push_back(c.agents.agents[i].shape);
  }
  std::vector<double> nominal(
    c.agents.initial_nominal.data(),
    c.agents.initial_nominal.data() + c.agents.initial_nominal.size());
  std::string stations;
  for (std::size_t i = 0; i < c.topology.stations.size(); ++i) {
    stations += (i ? "; " : "") + format_number(c.topology.stations[i].x()) + " " +
      format_number(c.topology.stations[i].y());
  }
  std::vector<std::pair<std::size_t, std::size_t>> links;
  for (const auto & l : c.topology.station_links) {
    links.emplace_back(l.station, l.agent);
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto & p : c.topology.relative_pairs) {
    pairs.emplace_back(p.observer, p.target);
  }
  out << "agents = " << names << "\n";
  out << "agent_shapes = " << join_numbers(shapes) << "\n";
  out << "primary_count = " << c.agents.primary_count << "\n";
  out << "initial_nominal = " << join_numbers(nominal) << "\n";
  out << "stations = " << stations << "\n";
  out << "station_links = " << join_pairs(links) << "\n";
  out << "relative_pairs = " << join_pairs(pairs) << "\n";
  out << "noise_std = " << format_number(c.noise_std) << "\n";
  out << "initial_mean_scale = " << format_number(c.initial_mean_scale) << "\n";
  out << "initial_cov_scale = " << format_number(c.initial_cov_scale) << "\n";
  out << "period = " << format_number(c.period) << "\n";
  out << "dt_fraction = " << format_number(c.dt_fraction) << "\n";
  out << "horizon = " << c.horizon << "\n";
  out << "horizons = " << c.horizons << "\n";
  out << "rk4_substeps = " << c.rk4_substeps << "\n";
  out << "gamma_rule = " << (c.gamma_rule == GammaRule::Fraction ? "fraction" : "absolute")
      << "\n";
  out << "gamma = " << format_number(c.gamma_value) << "\n";
  out << "s_max = " << join_numbers(c.s_max) << "\n";
  out << "channel_scale = " << join_numbers(c.channel_scale) << "\n";
  out << "blocked = " << join_pairs(c.blocked) << "\n";
  out << "reweight_epsilon = "
      << (c.reweight.epsilon > 0.0 ? format_number(c.reweight.epsilon) : "auto") << "\n";
  out << "reweight_max_iters = " << c.reweight.max_iters << "\n";
  out << "active_threshold = " << format_number(c.reweight.threshold) << "\n";
  out << "gap_tol = " << format_number(c.solver.gap_tol) << "\n";
  out << "feas_tol = " << format_number(c.solver.feas_tol) << "\n";
  out << "infeas_tol = " << format_number(c.solver.infeas_tol) << "\n";
  out << "max_solver_iters = " << c.solver.max_iters << "\n";
  out << "seed = " << c.seed << "\n";
  out << "trials = " << c.trials << "\n";
  return out.str();
}

std::string config_hash(const ScenarioConfig & config)
{
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : to_text(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScenarioConfig reference_config()
{
  ScenarioConfig c;
  c.agents.agents = {
    {AgentKind::HarmonicOscillator, 1.0},
    {AgentKind::VanDerPol, 0.9},
    {AgentKind::VanDerPolReversed, 0.9},
  };
  c.agents.primary_count = 1;
  c.agents.secondary_count = 2;
  c.agents.initial_nominal.resize(6);
  c.agents.initial_nominal << 3.0, 0.0, 1.7636, 0.5215, -1.7636, 0.5215;
  c.topology = reference_topology();
  c.period = 2.0 * std::numbers::pi;
  c.seed = 20260101;
  return c;
}

Eigen::ArrayXXd Scenario::bounds(double s_max) const
{
  const Index my = config.topology.channel_count();
  Eigen::ArrayXXd grid = Eigen::ArrayXXd::Constant(config.horizon, my, s_max);
  if (!config.channel_scale.empty()) {
    for (Index c = 0; c < my; ++c) {
      grid.col(c) *= config.channel_scale[static_cast<std::size_t>(c)];
    }
  }
  return apply_mask(mask, grid);
}

PrecisionProblem Scenario::problem(double s_max) const
{
  return make_problem(batch, gamma, bounds(s_max));
}

BatchSystem Scenario::window_batch(std::size_t window, const GaussianState & posterior) const
{
  const auto p = static_cast<std::size_t>(config.horizon);
  require(
    window < static_cast<std::size_t>(config.horizons), ErrorKind::InvalidInput,
    "window index beyond the configured horizons");
  const std::span<const Eigen::MatrixXd> outputs(measurements.data() + window * p, p);
  return build_batch(discretization.system, outputs, posterior, config.horizon, window * p);
}

Scenario build_scenario(const ScenarioConfig & config)
{
  config.validate();
  Scenario sc;
  sc.config = config;
  const double dt = config.dt();
  const auto p = static_cast<std::size_t>(config.horizon);
  const std::size_t total = p * static_cast<std::size_t>(config.horizons);
  sc.nominal = propagate_nominal(
    config.agents, dt * static_cast<double>(total),
    dt / static_cast<double>(config.rk4_substeps));

  const auto agents = static_cast<Index>(config.agents.agents.size());
  ContinuousNoiseSpec noise;
  noise.density = config.noise_std * config.noise_std * Eigen::MatrixXd::Identity(agents, agents);
  noise.input = Eigen::MatrixXd::Zero(2 * agents, agents);
  for (Index i = 0; i < agents; ++i) {
    noise.input(2 * i + 1, i) = 1.0;
  }
  GaussianState initial;
  initial.mean = config.initial_mean_scale * config.agents.initial_nominal;
  initial.cov = (config.initial_cov_scale * initial.mean.cwiseAbs()).asDiagonal();

  sc.discretization = discretize(sc.nominal, noise, initial, dt, total);
  for (std::size_t k = 1; k <= total; ++k) {
    const std::size_t idx = sc.nominal.grid_index(dt * static_cast<double>(k));
    sc.measurements.push_back(measurement_jacobian(sc.nominal.states[idx], config.topology));
  }
  sc.batch = sc.window_batch(0, initial);
  sc.prior_trace = sc.batch.final_prior_cov().trace();
  sc.gamma = config.gamma_rule == GammaRule::Fraction ? config.gamma_value * sc.prior_trace :
    config.gamma_value;

  sc.mask = AvailabilityMask::Constant(config.horizon, config.topology.channel_count(), true);
  for (const auto & [k, c] : config.blocked) {
    sc.mask(k, c) = false;
  }
  return sc;
}

}  // namespace sensched
