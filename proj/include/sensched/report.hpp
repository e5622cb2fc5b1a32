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


// CSV and SVG output. Numbers are printed with a fixed "%.12g" so identical
// inputs give byte-identical files.

#ifndef SENSCHED_REPORT_HPP_
#define SENSCHED_REPORT_HPP_

#include <Eigen/Dense>

#include <array>
#include <ostream>
#include <string>
#include <vector>

#include "sensched/discretization.hpp"
#include "sensched/dynamics.hpp"
#include "sensched/sensing.hpp"

namespace sensched::report
{

std::string fmt(double v);

/// t, x1, z1, x2, z2, ...
void write_trajectory_csv(std::ostream & out, const NominalTrajectory & nominal);

/// t, mean_<i>..., sigma_<i>... (sigma = sqrt of the covariance diagonal)
void write_moments_csv(std::ostream & out, const CovarianceSeries & series);

/// step, y1, ..., y<m>; one row per horizon step, 1-based.
void write_grid_csv(
  std::ostream & out, const Eigen::MatrixXd & grid,
  const std::vector<std::string> & labels);

/// Reads a grid written by write_grid_csv.
Eigen::MatrixXd read_grid_csv(std::istream & in);

/// Linear scale 0..s_max, darkest at zero.
std::array<int, 3> colormap(double fraction);

/// Steps along x (1..p), channels along y (y1 at the top); same cell order as the CSV.
std::string heatmap_svg(
  const Eigen::MatrixXd & grid, const std::vector<std::string> & labels,
  double s_max, const std::string & title);

/// Nominal paths in the plane, one polyline per agent, stations as squares.
std::string trajectory_svg(const NominalTrajectory & nominal, const SensingTopology & topology);

/// One panel per state component: mean with a shaded 1-sigma band.
std::string envelope_svg(const CovarianceSeries & series);

std::string bar_chart_svg(
  const std::vector<std::string> & labels, const std::vector<double> & values,
  const std::string & title, const std::string & y_label);

}  // namespace sensched::report

#endif  // SENSCHED_REPORT_HPP_
