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


#include "sensched/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include "sensched/error.hpp"

namespace sensched::report
{

namespace
{

const char * kFont = "font-family=\"sans-serif\"";

std::string escape(const std::string & s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string rgb(const std::array<int, 3> & c)
{
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

std::string header(double width, double height)
{
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out.str();
}

std::string text(
  double x, double y, const std::string & s, int size = 12,
  const char * anchor = "middle")
{
  std::ostringstream out;
  out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" " << kFont << " font-size=\""
      << size << "\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
  return out.str();
}

const std::array<std::string, 6> kPalette = {
  "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string fmt(double v)
{
  if (v == 0.0) {
    return "0";
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_trajectory_csv(std::ostream & out, const NominalTrajectory & nominal)
{
  out << "t";
  for (std::size_t a = 0; a < nominal.config.agents.size(); ++a) {
    out << ",x" << a + 1 << ",z" << a + 1;
  }
  out << "\n";
  for (std::size_t i = 0; i < nominal.size(); ++i) {
    out << fmt(nominal.times[i]);
    for (Index j = 0; j < nominal.states[i].size(); ++j) {
      out << "," << fmt(nominal.states[i](j));
    }
    out << "\n";
  }
}

void write_moments_csv(std::ostream & out, const CovarianceSeries & series)
{
  require(!series.states.empty(), ErrorKind::InvalidInput, "empty covariance series");
  const Index n = series.states.front().mean.size();
  out << "t";
  for (Index j = 0; j < n; ++j) {
    out << ",mean_" << j + 1;
  }
  for (Index j = 0; j < n; ++j) {
    out << ",sigma_" << j + 1;
  }
  out << "\n";
  for (std::size_t i = 0; i < series.states.size(); ++i) {
    out << fmt(series.times[i]);
    for (Index j = 0; j < n; ++j) {
      out << "," << fmt(series.states[i].mean(j));
    }
    for (Index j = 0; j < n; ++j) {
      out << "," << fmt(std::sqrt(std::max(0.0, series.states[i].cov(j, j))));
    }
    out << "\n";
  }
}

void write_grid_csv(
  std::ostream & out, const Eigen::MatrixXd & grid,
  const std::vector<std::string> & labels)
{
  require(
    static_cast<Index>(labels.size()) == grid.cols(), ErrorKind::InvalidInput,
    "grid columns and labels disagree");
  out << "step";
  for (const auto & l : labels) {
    out << "," << l;
  }
  out << "\n";
  for (Index k = 0; k < grid.rows(); ++k) {
    out << k + 1;
    for (Index c = 0; c < grid.cols(); ++c) {
      out << "," << fmt(grid(k, c));
    }
    out << "\n";
  }
}

namespace
{

double parse_cell(const std::string & cell, std::size_t line)
{
  const char * begin = cell.c_str();
  char * end = nullptr;
  const double v = std::strtod(begin, &end);
  require(
    end != begin && *end == '\0' && std::isfinite(v), ErrorKind::InvalidInput,
    "grid CSV: line " + std::to_string(line) + ": bad number '" + cell + "'");
  return v;
}

}  // namespace

Eigen::MatrixXd read_grid_csv(std::istream & in)
{
  std::string line;
  require(
    static_cast<bool>(std::getline(in, line)) && line.rfind("step", 0) == 0,
    ErrorKind::InvalidInput, "grid CSV: missing 'step,...' header");
  const auto cols = static_cast<Index>(std::count(line.begin(), line.end(), ','));
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> row;
    std::getline(cells, cell, ',');
    const std::size_t line_no = rows.size() + 2;
    require(
      parse_cell(cell, line_no) == static_cast<double>(rows.size() + 1), ErrorKind::InvalidInput,
      "grid CSV: steps must be 1, 2, ...");
    while (std::getline(cells, cell, ',')) {
      row.push_back(parse_cell(cell, line_no));
    }
    require(
      static_cast<Index>(row.size()) == cols, ErrorKind::InvalidInput,
      "grid CSV: ragged row");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd grid(static_cast<Index>(rows.size()), cols);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (Index c = 0; c < cols; ++c) {
      grid(static_cast<Index>(k), c) = rows[k][static_cast<std::size_t>(c)];
    }
  }
  return grid;
}

std::array<int, 3> colormap(double fraction)
{
  static const std::array<std::array<double, 3>, 5> stops = {{
    {8, 29, 88}, {34, 94, 168}, {65, 182, 196}, {199, 233, 180}, {255, 255, 217}}};
  const double f = std::clamp(std::isfinite(fraction) ? fraction : 0.0, 0.0, 1.0) * 4.0;
  const auto i = std::min<std::size_t>(3, static_cast<std::size_t>(f));
  const double t = f - static_cast<double>(i);
  std::array<int, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) {
    out[c] = static_cast<int>(std::lround(stops[i][c] + t * (stops[i + 1][c] - stops[i][c])));
  }
  return out;
}

std::string heatmap_svg(
  const Eigen::MatrixXd & grid, const std::vector<std::string> & labels,
  double s_max, const std::string & title)
{
  require(
    static_cast<Index>(labels.size()) == grid.cols(), ErrorKind::InvalidInput,
    "heatmap: one label per channel column required");
  const double cell = 40.0;
  const double left = 50.0;
  const double top = 40.0;
  const double width = left + cell * static_cast<double>(grid.rows()) + 110.0;
  const double height = top + cell * static_cast<double>(grid.cols()) + 50.0;
  std::ostringstream out;
  out << header(width, height);
  out << text(width / 2, 22, title, 14);
  for (Index k = 0; k < grid.rows(); ++k) {
    for (Index c = 0; c < grid.cols(); ++c) {
      const double value = grid(k, c);
      const double x = left + cell * static_cast<double>(k);
      const double y = top + cell * static_cast<double>(c);
      out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(cell)
          << "\" height=\"" << fmt(cell) << "\" fill=\""
          << rgb(colormap(s_max > 0.0 ? value / s_max : 0.0))
          << "\" stroke=\"white\" stroke-width=\"1\"><title>step " << k + 1 << " "
          << escape(labels[static_cast<std::size_t>(c)]) << ": " << fmt(value)
          << "</title></rect>\n";
    }
  }
  for (Index k = 0; k < grid.rows(); ++k) {
    out << text(left + cell * (static_cast<double>(k) + 0.5), top + cell *
      static_cast<double>(grid.cols()) + 16, std::to_string(k + 1));
  }
  out << text(left + cell * static_cast<double>(grid.rows()) / 2, height - 10, "step k");
  for (Index c = 0; c < grid.cols(); ++c) {
    out << text(left - 8, top + cell * (static_cast<double>(c) + 0.5) + 4,
      labels[static_cast<std::size_t>(c)], 12, "end");
  }
  // color bar
  const double bx = left + cell * static_cast<double>(grid.rows()) + 20.0;
  const double bh = cell * static_cast<double>(grid.cols());
  const int steps = 50;
  for (int i = 0; i < steps; ++i) {
    const double f = static_cast<double>(i) / (steps - 1);
    out << "<rect x=\"" << fmt(bx) << "\" y=\"" << fmt(top + bh * (1.0 - f) - bh / steps)
        << "\" width=\"16\" height=\"" << fmt(bh / steps + 0.5) << "\" fill=\""
        << rgb(colormap(f)) << "\"/>\n";
  }
  out << text(bx + 22, top + 10, fmt(s_max), 11, "start");
  out << text(bx + 22, top + bh, "0", 11, "start");
  out << "</svg>\n";
  return out.str();
}

std::string trajectory_svg(const NominalTrajectory & nominal, const SensingTopology & topology)
{
  double lo = -1.0;
  double hi = 1.0;
  for (const auto & s : nominal.states) {
    lo = std::min(lo, s.minCoeff());
    hi = std::max(hi, s.maxCoeff());
  }
  for (const auto & st : topology.stations) {
    lo = std::min({lo, st.x(), st.y()});
    hi = std::max({hi, st.x(), st.y()});
  }
  const double pad = 0.08 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double size = 480.0;
  const double margin = 40.0;
  auto px = [&](double v) {return margin + (v - lo) / (hi - lo) * size;};
  auto py = [&](double v) {return margin + (hi - v) / (hi - lo) * size;};
  std::ostringstream out;
  out << header(size + 2 * margin + 120, size + 2 * margin);
  out << "<rect x=\"" << fmt(margin) << "\" y=\"" << fmt(margin) << "\" width=\"" << fmt(size)
      << "\" height=\"" << fmt(size) << "\" fill=\"none\" stroke=\"#999\"/>\n";
  const std::size_t agents = nominal.config.agents.size();
  for (std::size_t a = 0; a < agents; ++a) {
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[a % kPalette.size()]
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto & s : nominal.states) {
      const auto i = static_cast<Index>(2 * a);
      out << fmt(px(s(i))) << "," << fmt(py(s(i + 1))) << " ";
    }
    out << "\"/>\n";
    const auto & s0 = nominal.states.front();
    out << "<circle cx=\"" << fmt(px(s0(static_cast<Index>(2 * a)))) << "\" cy=\""
        << fmt(py(s0(static_cast<Index>(2 * a + 1)))) << "\" r=\"4\" fill=\""
        << kPalette[a % kPalette.size()] << "\"/>\n";
    out << text(size + 2 * margin + 10, margin + 20.0 * static_cast<double>(a + 1),
      "agent " + std::to_string(a + 1) + " (" + to_string(nominal.config.agents[a].kind) + ")",
      11, "start");
  }
  for (std::size_t s = 0; s < topology.stations.size(); ++s) {
    const auto & st = topology.stations[s];
    out << "<rect x=\"" << fmt(px(st.x()) - 5) << "\" y=\"" << fmt(py(st.y()) - 5)
        << "\" width=\"10\" height=\"10\" fill=\"black\"/>\n";
    out << text(px(st.x()), py(st.y()) - 9, "S" + std::to_string(s + 1), 11);
  }
  out << text(margin + size / 2, size + 2 * margin - 8, "x");
  out << text(14, margin + size / 2, "z");
  out << "</svg>\n";
  return out.str();
}

std::string envelope_svg(const CovarianceSeries & series)
{
  require(!series.states.empty(), ErrorKind::InvalidInput, "empty covariance series");
  const Index n = series.states.front().mean.size();
  const double pw = 300.0;
  const double ph = 140.0;
  const double margin = 45.0;
  const Index cols = 2;
  const Index rows = (n + cols - 1) / cols;
  std::ostringstream out;
  out << header(cols * (pw + margin) + margin, rows * (ph + margin) + margin);
  const double t0 = series.times.front();
  const double t1 = std::max(series.times.back(), t0 + 1e-12);
  for (Index j = 0; j < n; ++j) {
    const double ox = margin + static_cast<double>(j % cols) * (pw + margin);
    const double oy = margin + static_cast<double>(j / cols) * (ph + margin);
    double lo = 0.0;
    double hi = 0.0;
    for (const auto & s : series.states) {
      const double sd = std::sqrt(std::max(0.0, s.cov(j, j)));
      lo = std::min(lo, s.mean(j) - sd);
      hi = std::max(hi, s.mean(j) + sd);
    }
    if (hi - lo < 1e-12) {
      hi = lo + 1.0;
    }
    auto px = [&](double t) {return ox + (t - t0) / (t1 - t0) * pw;};
    auto py = [&](double v) {return oy + (hi - v) / (hi - lo) * ph;};
    out << "<rect x=\"" << fmt(ox) << "\" y=\"" << fmt(oy) << "\" width=\"" << fmt(pw)
        << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#999\"/>\n";
    out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.6\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < series.states.size(); ++i) {
      const auto & s = series.states[i];
      out << fmt(px(series.times[i])) << "," <<
        fmt(py(s.mean(j) + std::sqrt(std::max(0.0, s.cov(j, j))))) << " ";
    }
    for (std::size_t i = series.states.size(); i-- > 0; ) {
      const auto & s = series.states[i];
      out << fmt(px(series.times[i])) << "," <<
        fmt(py(s.mean(j) - std::sqrt(std::max(0.0, s.cov(j, j))))) << " ";
    }
    out << "\"/>\n<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < series.states.size(); ++i) {
      out << fmt(px(series.times[i])) << "," << fmt(py(series.states[i].mean(j))) << " ";
    }
    out << "\"/>\n";
    const std::string name = (j % 2 == 0 ? "x" : "z") + std::to_string(j / 2 + 1);
    out << text(ox + pw / 2, oy - 6, name + " mean and 1-sigma band", 11);
  }
  out << "</svg>\n";
  return out.str();
}

std::string bar_chart_svg(
  const std::vector<std::string> & labels, const std::vector<double> & values,
  const std::string & title, const std::string & y_label)
{
  require(labels.size() == values.size(), ErrorKind::InvalidInput, "bar chart sizes differ");
  const double bw = 60.0;
  const double gap = 30.0;
  const double ph = 240.0;
  const double left = 70.0;
  const double top = 45.0;
  const double width = left + (bw + gap) * static_cast<double>(labels.size()) + gap;
  double hi = 0.0;
  for (double v : values) {
    hi = std::max(hi, v);
  }
  if (hi <= 0.0) {
    hi = 1.0;
  }
  std::ostringstream out;
  out << header(width, top + ph + 50);
  out << text(width / 2, 24, title, 14);
  out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(width)
      << "\" y2=\"" << fmt(top + ph) << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double h = std::max(0.0, values[i]) / hi * ph;
    const double x = left + gap + static_cast<double>(i) * (bw + gap);
    out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(top + ph - h) << "\" width=\"" << fmt(bw)
        << "\" height=\"" << fmt(h) << "\" fill=\"#225ea8\"/>\n";
    out << text(x + bw / 2, top + ph - h - 5, fmt(values[i]), 11);
    out << text(x + bw / 2, top + ph + 18, labels[i], 12);
  }
  out << "<text x=\"18\" y=\"" << fmt(top + ph / 2) << "\" " << kFont
      << " font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << fmt(top + ph / 2) << ")\">" << escape(y_label) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace sensched::report
