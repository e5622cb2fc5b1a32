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

#include <random>
#include <sstream>

#include "sensched/error.hpp"
#include "sensched/report.hpp"
#include "sensched/scenario.hpp"

using namespace sensched;

namespace
{

std::size_t count(const std::string & haystack, const std::string & needle)
{
  std::size_t n = 0;
  for (auto at = haystack.find(needle); at != std::string::npos;
    at = haystack.find(needle, at + needle.size()))
  {
    ++n;
  }
  return n;
}

}  // namespace

TEST(Report, NumberFormatting)
{
  EXPECT_EQ(report::fmt(0.0), "0");
  EXPECT_EQ(report::fmt(-0.0), "0");
  EXPECT_EQ(report::fmt(1.5), "1.5");
  EXPECT_EQ(report::fmt(1200.0), "1200");
  EXPECT_EQ(std::stod(report::fmt(0.1234567890123)), 0.123456789012);
}

TEST(Report, GridCsvRoundTrip)
{
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1200.0);
  Eigen::MatrixXd grid(10, 6);
  for (Index i = 0; i < grid.size(); ++i) {
    grid(i) = i % 3 ? 0.0 : u(rng);
  }
  std::stringstream buf;
  report::write_grid_csv(buf, grid, reference_topology().channel_labels());
  EXPECT_EQ(buf.str().substr(0, 22), "step,y1,y2,y3,y4,y5,y6");
  const Eigen::MatrixXd back = report::read_grid_csv(buf);
  ASSERT_EQ(back.rows(), 10);
  ASSERT_EQ(back.cols(), 6);
  EXPECT_LT((back - grid).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_TRUE(((back.array() == 0.0) == (grid.array() == 0.0)).all());
}

TEST(Report, GridCsvRejectsMalformedInput)
{
  std::istringstream no_header("1,2,3\n");
  EXPECT_THROW(report::read_grid_csv(no_header), Error);
  std::istringstream ragged("step,y1,y2\n1,0,1\n2,3\n");
  EXPECT_THROW(report::read_grid_csv(ragged), Error);
  std::istringstream order("step,y1\n2,0\n");
  EXPECT_THROW(report::read_grid_csv(order), Error);
  std::istringstream garbage("step,y1\n1,abc\n");
  EXPECT_THROW(report::read_grid_csv(garbage), Error);
  std::istringstream huge("step,y1\n1,1e999\n");
  EXPECT_THROW(report::read_grid_csv(huge), Error);
}

TEST(Report, ColormapEndpoints)
{
  EXPECT_EQ(report::colormap(0.0), (std::array<int, 3>{8, 29, 88}));
  const auto light = report::colormap(1.0);
  EXPECT_GT(light[0] + light[1] + light[2], 600);
  // Lightness grows monotonically with the value fraction.
  int previous = -1;
  for (int i = 0; i <= 20; ++i) {
    const auto c = report::colormap(i / 20.0);
    const int sum = c[0] + c[1] + c[2];
    EXPECT_GE(sum, previous);
    previous = sum;
  }
  EXPECT_EQ(report::colormap(-1.0), report::colormap(0.0));
  EXPECT_EQ(report::colormap(2.0), report::colormap(1.0));
}

TEST(Report, HeatmapHasOneCellPerEntry)
{
  Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(10, 6);
  grid(3, 4) = 1200.0;
  grid(9, 0) = 600.0;
  const std::string svg =
    report::heatmap_svg(grid, reference_topology().channel_labels(), 1200.0, "test");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(count(svg, "</title></rect>"), 60u);
  EXPECT_GE(count(svg, "fill=\"#081d58\""), 58u);
  for (const char * label : {"y1", "y6"}) {
    EXPECT_NE(svg.find(label), std::string::npos);
  }
}

TEST(Report, HeatmapRejectsLabelMismatch)
{
  EXPECT_THROW(
    report::heatmap_svg(Eigen::MatrixXd::Zero(2, 3), {"y1", "y2"}, 1.0, "x"), Error);
}

TEST(Report, TrajectoryCsvHasOneRowPerSample)
{
  const auto c = reference_config();
  const auto nom = propagate_nominal(c.agents, c.period, c.dt() / c.rk4_substeps);
  std::stringstream buf;
  report::write_trajectory_csv(buf, nom);
  std::string line;
  std::getline(buf, line);
  EXPECT_EQ(line.rfind("t,", 0), 0u);
  std::size_t rows = 0;
  while (std::getline(buf, line)) {
    ++rows;
  }
  EXPECT_EQ(rows, nom.size());
  const std::string svg = report::trajectory_svg(nom, c.topology);
  EXPECT_EQ(count(svg, "<polyline"), 3u);
}

TEST(Report, BarChart)
{
  const std::string svg = report::bar_chart_svg({"450", "750"}, {3.0, 1.0}, "t", "y");
  EXPECT_EQ(count(svg, "fill=\"#225ea8\""), 2u);
}
