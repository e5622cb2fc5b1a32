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


#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sensched/conic.hpp"
#include "sensched/error.hpp"

namespace sensched::conic
{

namespace
{

struct LpRow
{
  std::vector<std::pair<Index, double>> coeffs;
  double rhs;  // sum coeffs * v >= rhs
};

std::vector<LpRow> lp_rows(const SdpProblem & problem)
{
  std::vector<LpRow> rows;
  for (const auto & lc : problem.linear) {
    std::vector<std::pair<Index, double>> neg;
    for (const auto & [var, coeff] : lc.coeffs) {
      neg.emplace_back(var, -coeff);
    }
    if (lc.relation != Relation::LessEqual) {
      rows.push_back({lc.coeffs, lc.rhs});
    }
    if (lc.relation != Relation::GreaterEqual) {
      rows.push_back({neg, -lc.rhs});
    }
  }
  for (Index i = 0; i < problem.num_vars; ++i) {
    if (std::isfinite(problem.lower(i))) {
      rows.push_back({{{i, 1.0}}, problem.lower(i)});
    }
    if (std::isfinite(problem.upper(i))) {
      rows.push_back({{{i, -1.0}}, -problem.upper(i)});
    }
  }
  return rows;
}

// Next non-comment line with the SDPA punctuation replaced by blanks.
bool next_line(std::istream & in, std::string & line)
{
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '"' || line[first] == '*') {
      continue;
    }
    for (char & ch : line) {
      if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') {
        ch = ' ';
      }
    }
    return true;
  }
  return false;
}

}  // namespace

void write_sdpa(const SdpProblem & problem, std::ostream & out)
{
  problem.validate();
  const auto rows = lp_rows(problem);
  const std::size_t nblocks = problem.psd.size() + (rows.empty() ? 0 : 1);
  require(nblocks > 0, ErrorKind::InvalidInput, "write_sdpa: problem has no constraints");

  out << std::setprecision(17);
  out << problem.num_vars << "\n" << nblocks << "\n";
  for (const auto & block : problem.psd) {
    out << block.dim << " ";
  }
  if (!rows.empty()) {
    out << -static_cast<long long>(rows.size());
  }
  out << "\n";
  for (Index i = 0; i < problem.num_vars; ++i) {
    out << problem.objective(i) << (i + 1 < problem.num_vars ? " " : "\n");
  }
  for (std::size_t j = 0; j < problem.psd.size(); ++j) {
    for (const auto & e : problem.psd[j].entries) {
      const bool constant = e.var == kConstant;
      out << (constant ? 0 : e.var + 1) << " " << j + 1 << " " << e.col + 1 << " " << e.row + 1
          << " " << (constant ? -e.value : e.value) << "\n";
    }
  }
  const std::size_t lp_block = problem.psd.size() + 1;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index d = static_cast<Index>(r) + 1;
    if (rows[r].rhs != 0.0) {
      out << 0 << " " << lp_block << " " << d << " " << d << " " << rows[r].rhs << "\n";
    }
    for (const auto & [var, coeff] : rows[r].coeffs) {
      out << var + 1 << " " << lp_block << " " << d << " " << d << " " << coeff << "\n";
    }
  }
}

SdpProblem read_sdpa(std::istream & in)
{
  std::string line;
  auto header = [&](const char * what) {
      if (!next_line(in, line)) {
        fail(ErrorKind::InvalidInput, std::string("read_sdpa: missing ") + what);
      }
      return std::istringstream(line);
    };
  long long m = 0;
  long long nblocks = 0;
  header("variable count") >> m;
  header("block count") >> nblocks;
  require(m >= 0 && nblocks > 0, ErrorKind::InvalidInput, "read_sdpa: bad header");

  std::vector<long long> sizes;
  {
    auto s = header("block sizes");
    long long v = 0;
    while (static_cast<long long>(sizes.size()) < nblocks && s >> v) {
      sizes.push_back(v);
    }
    require(
      static_cast<long long>(sizes.size()) == nblocks, ErrorKind::InvalidInput,
      "read_sdpa: block size list is short");
  }

  SdpProblem problem(m);
  {
    std::vector<double> c;
    while (static_cast<long long>(c.size()) < m) {
      auto s = header("objective");
      double v = 0.0;
      while (static_cast<long long>(c.size()) < m && s >> v) {
        c.push_back(v);
      }
    }
    for (Index i = 0; i < m; ++i) {
      problem.objective(i) = c[static_cast<std::size_t>(i)];
    }
  }

  // block index -> psd index or first linear row index
  std::vector<std::size_t> slot(static_cast<std::size_t>(nblocks));
  for (long long b = 0; b < nblocks; ++b) {
    const long long size = sizes[static_cast<std::size_t>(b)];
    require(size != 0, ErrorKind::InvalidInput, "read_sdpa: zero block size");
    if (size > 0) {
      slot[static_cast<std::size_t>(b)] = problem.psd.size();
      PsdConstraint block;
      block.dim = size;
      problem.psd.push_back(std::move(block));
    } else {
      slot[static_cast<std::size_t>(b)] = problem.linear.size();
      for (long long r = 0; r < -size; ++r) {
        LinearConstraint lc;
        lc.relation = Relation::GreaterEqual;
        problem.linear.push_back(std::move(lc));
      }
    }
  }

  while (next_line(in, line)) {
    std::istringstream s(line);
    long long var = 0;
    long long b = 0;
    long long i = 0;
    long long j = 0;
    double value = 0.0;
    if (!(s >> var >> b >> i >> j >> value)) {
      fail(ErrorKind::InvalidInput, "read_sdpa: malformed entry '" + line + "'");
    }
    require(
      var >= 0 && var <= m && b >= 1 && b <= nblocks, ErrorKind::InvalidInput,
      "read_sdpa: entry out of range");
    const long long size = sizes[static_cast<std::size_t>(b - 1)];
    const std::size_t at = slot[static_cast<std::size_t>(b - 1)];
    if (size > 0) {
      require(
        i >= 1 && j >= 1 && i <= size && j <= size, ErrorKind::InvalidInput,
        "read_sdpa: entry outside its block");
      problem.psd[at].add(var == 0 ? kConstant : var - 1, i - 1, j - 1, var == 0 ? -value : value);
    } else {
      require(
        i == j && i >= 1 && i <= -size, ErrorKind::InvalidInput,
        "read_sdpa: off-diagonal entry in a diagonal block");
      LinearConstraint & lc = problem.linear[at + static_cast<std::size_t>(i - 1)];
      if (var == 0) {
        lc.rhs += value;
      } else {
        lc.coeffs.emplace_back(var - 1, value);
      }
    }
  }
  problem.validate();
  return problem;
}

}  // namespace sensched::conic
