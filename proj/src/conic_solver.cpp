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

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <tuple>

#include "sensched/conic.hpp"
#include "sensched/error.hpp"

namespace sensched::conic
{

namespace
{

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Constraint matrices of one PSD block in the internal standard form
// Z = C - sum_k y_k A_k. Entries are lower-triangular and grouped by variable
// (CSR-like through `start`). Each A_k is also kept as a low-rank
// eigen-factorization sum_r w_r q_r q_r^T used to form the Schur complement.
struct Block
{
  Index dim = 0;
  Eigen::MatrixXd constant;
  std::vector<Index> start;
  std::vector<Index> rows;
  std::vector<Index> cols;
  std::vector<double> vals;
  Eigen::MatrixXd factors;
  Eigen::VectorXd weights;
  std::vector<Index> owner;
};

struct StandardForm
{
  Index m = 0;
  Eigen::VectorXd b;
  std::vector<Block> blocks;
  SparseMatrix lp;        // slack = lp_c - lp * y >= 0
  Eigen::VectorXd lp_c;

  // v = offset + transform * (y ./ scale) on the kept variables.
  Eigen::VectorXd offset;
  SparseMatrix transform;
  Eigen::VectorXd scale;
  double objective_offset = 0.0;
};

// Entry of an original-variable constraint expressed in internal variables.
struct InternalEntry
{
  Index var;
  Index row;
  Index col;
  double value;
};

void merge_duplicates(std::vector<InternalEntry> & entries)
{
  std::sort(
    entries.begin(), entries.end(), [](const InternalEntry & a, const InternalEntry & b) {
      return std::tie(a.var, a.row, a.col) < std::tie(b.var, b.row, b.col);
    });
  std::vector<InternalEntry> merged;
  for (const auto & e : entries) {
    if (!merged.empty() && merged.back().var == e.var && merged.back().row == e.row &&
      merged.back().col == e.col)
    {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const InternalEntry & e) {return e.value == 0.0;});
  entries.swap(merged);
}

void factorize_block(Block & block, Index m)
{
  std::vector<Eigen::VectorXd> columns;
  std::vector<double> weights;
  for (Index k = 0; k < m; ++k) {
    const Index begin = block.start[k];
    const Index end = block.start[k + 1];
    if (begin == end) {
      continue;
    }
    std::vector<Index> support;
    for (Index e = begin; e < end; ++e) {
      support.push_back(block.rows[e]);
      support.push_back(block.cols[e]);
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    const auto local = [&](Index global) {
        return static_cast<Index>(
          std::lower_bound(support.begin(), support.end(), global) - support.begin());
      };
    const auto size = static_cast<Index>(support.size());
    Eigen::MatrixXd small = Eigen::MatrixXd::Zero(size, size);
    for (Index e = begin; e < end; ++e) {
      const Index r = local(block.rows[e]);
      const Index c = local(block.cols[e]);
      small(r, c) += block.vals[e];
      if (r != c) {
        small(c, r) += block.vals[e];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(small);
    const double largest = eig.eigenvalues().cwiseAbs().maxCoeff();
    for (Index i = 0; i < size; ++i) {
      const double lambda = eig.eigenvalues()(i);
      if (std::abs(lambda) <= 1e-13 * largest) {
        continue;
      }
      Eigen::VectorXd q = Eigen::VectorXd::Zero(block.dim);
      for (Index s = 0; s < size; ++s) {
        q(support[static_cast<std::size_t>(s)]) = eig.eigenvectors()(s, i);
      }
      columns.push_back(std::move(q));
      weights.push_back(lambda);
      block.owner.push_back(k);
    }
  }
  block.factors.resize(block.dim, static_cast<Index>(columns.size()));
  block.weights.resize(static_cast<Index>(weights.size()));
  for (std::size_t i = 0; i < columns.size(); ++i) {
    block.factors.col(static_cast<Index>(i)) = columns[i];
    block.weights(static_cast<Index>(i)) = weights[i];
  }
}

struct Preprocessed
{
  StandardForm form;
  bool trivially_infeasible = false;
  bool unbounded = false;
  std::string message;
};

// Removes fixed variables and equality constraints, rewrites everything in
// the dual standard form and normalizes each variable's constraint column.
Preprocessed preprocess(const SdpProblem & problem)
{
  Preprocessed out;
  StandardForm & form = out.form;
  const Index n = problem.num_vars;

  Eigen::VectorXd offset = Eigen::VectorXd::Zero(n);
  std::vector<Index> free_vars;
  std::vector<bool> is_fixed(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n; ++i) {
    if (std::isfinite(problem.lower(i)) && problem.lower(i) == problem.upper(i)) {
      offset(i) = problem.lower(i);
      is_fixed[static_cast<std::size_t>(i)] = true;
    } else {
      free_vars.push_back(i);
    }
  }
  const auto nf = static_cast<Index>(free_vars.size());

  std::vector<const LinearConstraint *> equalities;
  for (const auto & lc : problem.linear) {
    if (lc.relation == Relation::Equal) {
      equalities.push_back(&lc);
    }
  }

  SparseMatrix transform(n, nf);
  bool selection = equalities.empty();
  if (selection) {
    std::vector<Triplet> t;
    for (Index k = 0; k < nf; ++k) {
      t.emplace_back(free_vars[static_cast<std::size_t>(k)], k, 1.0);
    }
    transform.setFromTriplets(t.begin(), t.end());
  } else {
    // v_free = w0 + N w with E v_free = e - E_fixed v_fixed.
    Eigen::MatrixXd e_mat = Eigen::MatrixXd::Zero(static_cast<Index>(equalities.size()), nf);
    Eigen::VectorXd e_rhs(static_cast<Index>(equalities.size()));
    std::vector<Index> position(static_cast<std::size_t>(n), -1);
    for (Index k = 0; k < nf; ++k) {
      position[static_cast<std::size_t>(free_vars[static_cast<std::size_t>(k)])] = k;
    }
    for (std::size_t r = 0; r < equalities.size(); ++r) {
      double rhs = equalities[r]->rhs;
      for (const auto & [var, coeff] : equalities[r]->coeffs) {
        if (is_fixed[static_cast<std::size_t>(var)]) {
          rhs -= coeff * offset(var);
        } else {
          e_mat(static_cast<Index>(r), position[static_cast<std::size_t>(var)]) += coeff;
        }
      }
      e_rhs(static_cast<Index>(r)) = rhs;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(e_mat);
    lu.setThreshold(1e-12);
    const Eigen::VectorXd particular = lu.solve(e_rhs);
    if ((e_mat * particular - e_rhs).norm() > 1e-9 * (1.0 + e_rhs.norm())) {
      out.trivially_infeasible = true;
      out.message = "equality constraints are inconsistent";
      return out;
    }
    Eigen::MatrixXd kernel;
    if (lu.rank() == nf) {
      kernel.resize(nf, 0);
    } else {
      kernel = lu.kernel();
    }
    for (Index k = 0; k < nf; ++k) {
      offset(free_vars[static_cast<std::size_t>(k)]) = particular(k);
    }
    std::vector<Triplet> t;
    for (Index c = 0; c < kernel.cols(); ++c) {
      for (Index k = 0; k < nf; ++k) {
        if (kernel(k, c) != 0.0) {
          t.emplace_back(free_vars[static_cast<std::size_t>(k)], c, kernel(k, c));
        }
      }
    }
    transform.resize(n, kernel.cols());
    transform.setFromTriplets(t.begin(), t.end());
  }
  const Index m_all = transform.cols();
  const SparseMatrix transform_rows = transform;  // column-major; need row access below
  Eigen::SparseMatrix<double, Eigen::RowMajor> by_row = transform;

  // Objective: minimize c^T v = c^T offset + (T^T c)^T w  ->  b = -(T^T c).
  form.objective_offset = problem.objective.dot(offset);
  Eigen::VectorXd b_all = -(transform.transpose() * problem.objective);

  // PSD blocks.
  std::vector<std::vector<InternalEntry>> block_entries(problem.psd.size());
  std::vector<Eigen::MatrixXd> constants(problem.psd.size());
  for (std::size_t j = 0; j < problem.psd.size(); ++j) {
    const auto & src = problem.psd[j];
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(src.dim, src.dim);
    auto & dst = block_entries[j];
    for (const auto & e : src.entries) {
      double coeff = 1.0;
      if (e.var != kConstant) {
        coeff = offset(e.var);
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(by_row, e.var); it;
          ++it)
        {
          dst.push_back({it.col(), e.row, e.col, -e.value * it.value()});
        }
      }
      if (coeff != 0.0) {
        c(e.row, e.col) += coeff * e.value;
        if (e.row != e.col) {
          c(e.col, e.row) += coeff * e.value;
        }
      }
    }
    merge_duplicates(dst);
    constants[j] = std::move(c);
  }

  // LP rows: slack = c - a^T w >= 0.
  std::vector<Triplet> lp_triplets;
  std::vector<double> lp_c;
  auto add_row = [&](const std::vector<std::pair<Index, double>> & coeffs, double rhs,
      double sign) {
      // sign * (rhs - a^T v) >= 0
      const auto row = static_cast<Index>(lp_c.size());
      double constant = rhs;
      std::map<Index, double> acc;
      for (const auto & [var, coeff] : coeffs) {
        constant -= coeff * offset(var);
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(by_row, var); it;
          ++it)
        {
          acc[it.col()] += coeff * it.value();
        }
      }
      for (const auto & [col, value] : acc) {
        if (value != 0.0) {
          lp_triplets.emplace_back(row, col, sign * value);
        }
      }
      lp_c.push_back(sign * constant);
    };
  for (const auto & lc : problem.linear) {
    if (lc.relation == Relation::LessEqual) {
      add_row(lc.coeffs, lc.rhs, 1.0);
    } else if (lc.relation == Relation::GreaterEqual) {
      add_row(lc.coeffs, lc.rhs, -1.0);
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (is_fixed[static_cast<std::size_t>(i)]) {
      continue;
    }
    if (std::isfinite(problem.upper(i))) {
      add_row({{i, 1.0}}, problem.upper(i), 1.0);
    }
    if (std::isfinite(problem.lower(i))) {
      add_row({{i, 1.0}}, problem.lower(i), -1.0);
    }
  }
  SparseMatrix lp_all(static_cast<Index>(lp_c.size()), m_all);
  lp_all.setFromTriplets(lp_triplets.begin(), lp_triplets.end());

  // Column norms; variables that appear nowhere are dropped (or signal an
  // unbounded problem when they carry objective weight).
  Eigen::VectorXd norm_sq = Eigen::VectorXd::Zero(m_all);
  for (const auto & entries : block_entries) {
    for (const auto & e : entries) {
      norm_sq(e.var) += e.value * e.value * (e.row == e.col ? 1.0 : 2.0);
    }
  }
  for (Index k = 0; k < lp_all.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(lp_all, k); it; ++it) {
      norm_sq(k) += it.value() * it.value();
    }
  }
  std::vector<Index> kept;
  std::vector<Index> remap(static_cast<std::size_t>(m_all), -1);
  for (Index k = 0; k < m_all; ++k) {
    if (norm_sq(k) > 0.0) {
      remap[static_cast<std::size_t>(k)] = static_cast<Index>(kept.size());
      kept.push_back(k);
    } else if (b_all(k) != 0.0) {
      out.unbounded = true;
      out.message = "a variable with objective weight appears in no constraint";
      return out;
    }
  }
  const auto m = static_cast<Index>(kept.size());
  form.m = m;
  form.scale.resize(m);
  form.b.resize(m);
  for (Index k = 0; k < m; ++k) {
    form.scale(k) = std::sqrt(norm_sq(kept[static_cast<std::size_t>(k)]));
    form.b(k) = b_all(kept[static_cast<std::size_t>(k)]) / form.scale(k);
  }

  for (std::size_t j = 0; j < problem.psd.size(); ++j) {
    Block block;
    block.dim = problem.psd[j].dim;
    block.constant = std::move(constants[j]);
    block.start.assign(static_cast<std::size_t>(m + 1), 0);
    for (const auto & e : block_entries[j]) {
      const Index k = remap[static_cast<std::size_t>(e.var)];
      block.rows.push_back(e.row);
      block.cols.push_back(e.col);
      block.vals.push_back(e.value / form.scale(k));
      block.start[static_cast<std::size_t>(k + 1)]++;
    }
    for (Index k = 0; k < m; ++k) {
      block.start[static_cast<std::size_t>(k + 1)] += block.start[static_cast<std::size_t>(k)];
    }
    factorize_block(block, m);
    form.blocks.push_back(std::move(block));
  }

  std::vector<Triplet> lp_scaled;
  for (Index k = 0; k < lp_all.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(lp_all, k); it; ++it) {
      const Index kk = remap[static_cast<std::size_t>(k)];
      lp_scaled.emplace_back(it.row(), kk, it.value() / form.scale(kk));
    }
  }
  form.lp.resize(lp_all.rows(), m);
  form.lp.setFromTriplets(lp_scaled.begin(), lp_scaled.end());
  form.lp_c = Eigen::Map<const Eigen::VectorXd>(lp_c.data(), static_cast<Index>(lp_c.size()));

  std::vector<Triplet> kept_transform;
  for (Index k = 0; k < m; ++k) {
    for (SparseMatrix::InnerIterator it(transform, kept[static_cast<std::size_t>(k)]); it; ++it) {
      kept_transform.emplace_back(it.row(), k, it.value());
    }
  }
  form.transform.resize(n, m);
  form.transform.setFromTriplets(kept_transform.begin(), kept_transform.end());
  form.offset = offset;
  (void)transform_rows;
  (void)selection;
  return out;
}

// ---------------------------------------------------------------------------
// Interior-point iteration.

struct Iterate
{
  std::vector<Eigen::MatrixXd> x;
  std::vector<Eigen::MatrixXd> z;
  Eigen::VectorXd xl;
  Eigen::VectorXd zl;
  Eigen::VectorXd y;
};

// <A_k, Y> for every k; Y need not be symmetric.
Eigen::VectorXd apply_block(const Block & block, const Eigen::MatrixXd & y_mat, Index m)
{
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  for (Index k = 0; k < m; ++k) {
    double sum = 0.0;
    for (Index e = block.start[k]; e < block.start[k + 1]; ++e) {
      const Index r = block.rows[e];
      const Index c = block.cols[e];
      sum += block.vals[e] * (r == c ? y_mat(r, r) : y_mat(r, c) + y_mat(c, r));
    }
    out(k) = sum;
  }
  return out;
}

// sum_k y_k A_k
Eigen::MatrixXd adjoint_block(const Block & block, const Eigen::VectorXd & y, Index m)
{
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(block.dim, block.dim);
  for (Index k = 0; k < m; ++k) {
    const double yk = y(k);
    if (yk == 0.0) {
      continue;
    }
    for (Index e = block.start[k]; e < block.start[k + 1]; ++e) {
      const Index r = block.rows[e];
      const Index c = block.cols[e];
      out(r, c) += yk * block.vals[e];
      if (r != c) {
        out(c, r) += yk * block.vals[e];
      }
    }
  }
  return out;
}

Eigen::MatrixXd sym(const Eigen::MatrixXd & m)
{
  return 0.5 * (m + m.transpose());
}

// Largest alpha with X + alpha dX >= 0 (infinity when unrestricted).
double max_step_psd(const Eigen::MatrixXd & x, const Eigen::MatrixXd & dx)
{
  Eigen::LLT<Eigen::MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) {
    return 0.0;
  }
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd s = l.triangularView<Eigen::Lower>().solve(dx);
  s = l.triangularView<Eigen::Lower>().solve(s.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym(s), Eigen::EigenvaluesOnly);
  const double lowest = eig.eigenvalues()(0);
  return lowest >= 0.0 ? kInfinity : -1.0 / lowest;
}

double max_step_lp(const Eigen::VectorXd & x, const Eigen::VectorXd & dx)
{
  double alpha = kInfinity;
  for (Index i = 0; i < x.size(); ++i) {
    if (dx(i) < 0.0) {
      alpha = std::min(alpha, -x(i) / dx(i));
    }
  }
  return alpha;
}

class InteriorPoint
{
public:
  InteriorPoint(const StandardForm & form, const SolverOptions & options)
  : form_(form), options_(options), m_(form.m) {}

  ConicSolution run();

private:
  struct Residuals
  {
    Eigen::VectorXd primal;
    std::vector<Eigen::MatrixXd> dual;
    Eigen::VectorXd dual_lp;
    double pobj = 0.0;
    double dobj = 0.0;
    double pinf = 0.0;
    double dinf = 0.0;
    double gap = 0.0;
  };

  struct Direction
  {
    std::vector<Eigen::MatrixXd> dx;
    std::vector<Eigen::MatrixXd> dz;
    Eigen::VectorXd dxl;
    Eigen::VectorXd dzl;
    Eigen::VectorXd dy;
  };

  void initialize();
  Residuals residuals(const Iterate & it) const;
  Eigen::VectorXd apply(const std::vector<Eigen::MatrixXd> & mats, const Eigen::VectorXd & lp)
  const;
  bool schur(const Iterate & it);
  Direction direction(
    const Iterate & it, const Residuals & res, double sigma_mu,
    const Direction * predictor) const;
  void step_lengths(const Iterate & it, const Direction & d, double & ap, double & ad) const;
  double complementarity(
    const Iterate & it, const Direction * d, double ap,
    double ad) const;
  ConicSolution finish(
    const Iterate & it, const Residuals & res, SolveStatus status,
    int iters, std::string message) const;

  const StandardForm & form_;
  SolverOptions options_;
  Index m_;
  Index total_dim_ = 0;
  double norm_b_ = 1.0;
  double norm_c_ = 1.0;
  Iterate iterate_;
  std::vector<Eigen::MatrixXd> z_inv_;
  Eigen::LLT<Eigen::MatrixXd> schur_llt_;
  Eigen::LDLT<Eigen::MatrixXd> schur_ldlt_;
  bool use_ldlt_ = false;
};

void InteriorPoint::initialize()
{
  norm_b_ = 1.0 + form_.b.norm();
  double c_sq = form_.lp_c.squaredNorm();
  for (const auto & block : form_.blocks) {
    c_sq += block.constant.squaredNorm();
  }
  norm_c_ = 1.0 + std::sqrt(c_sq);

  total_dim_ = form_.lp_c.size();
  for (const auto & block : form_.blocks) {
    total_dim_ += block.dim;
    // Column norms of this block's part of A (A is column-normalized overall).
    Eigen::VectorXd a_norm = Eigen::VectorXd::Zero(m_);
    for (Index k = 0; k < m_; ++k) {
      for (Index e = block.start[k]; e < block.start[k + 1]; ++e) {
        a_norm(k) += block.vals[e] * block.vals[e] * (block.rows[e] == block.cols[e] ? 1 : 2);
      }
    }
    a_norm = a_norm.cwiseSqrt();
    const double nd = static_cast<double>(block.dim);
    double xi = std::max(10.0, std::sqrt(nd));
    double eta = std::max({10.0, std::sqrt(nd), block.constant.norm()});
    for (Index k = 0; k < m_; ++k) {
      xi = std::max(xi, nd * (1.0 + std::abs(form_.b(k))) / (1.0 + a_norm(k)));
      eta = std::max(eta, a_norm(k));
    }
    xi *= options_.start_scale;
    eta *= options_.start_scale;
    iterate_.x.push_back(xi * Eigen::MatrixXd::Identity(block.dim, block.dim));
    iterate_.z.push_back(eta * Eigen::MatrixXd::Identity(block.dim, block.dim));
  }
  const Index nl = form_.lp_c.size();
  if (nl > 0) {
    const double nd = static_cast<double>(nl);
    double xi = std::max(10.0, std::sqrt(nd));
    double eta = std::max({10.0, std::sqrt(nd), form_.lp_c.norm()});
    for (Index k = 0; k < m_; ++k) {
      const double a_norm = form_.lp.col(k).norm();
      xi = std::max(xi, std::sqrt(nd) * (1.0 + std::abs(form_.b(k))) / (1.0 + a_norm));
      eta = std::max(eta, a_norm);
    }
    iterate_.xl = Eigen::VectorXd::Constant(nl, xi * options_.start_scale);
    iterate_.zl = Eigen::VectorXd::Constant(nl, eta * options_.start_scale);
  } else {
    iterate_.xl.resize(0);
    iterate_.zl.resize(0);
  }
  iterate_.y = Eigen::VectorXd::Zero(m_);
}

Eigen::VectorXd InteriorPoint::apply(
  const std::vector<Eigen::MatrixXd> & mats,
  const Eigen::VectorXd & lp) const
{
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m_);
  for (std::size_t j = 0; j < form_.blocks.size(); ++j) {
    out += apply_block(form_.blocks[j], mats[j], m_);
  }
  if (lp.size() > 0) {
    out += form_.lp.transpose() * lp;
  }
  return out;
}

InteriorPoint::Residuals InteriorPoint::residuals(const Iterate & it) const
{
  Residuals res;
  res.primal = form_.b - apply(it.x, it.xl);
  double dual_sq = 0.0;
  res.pobj = 0.0;
  for (std::size_t j = 0; j < form_.blocks.size(); ++j) {
    const Block & block = form_.blocks[j];
    Eigen::MatrixXd rd = block.constant - it.z[j] - adjoint_block(block, it.y, m_);
    dual_sq += rd.squaredNorm();
    res.dual.push_back(std::move(rd));
    res.pobj += (block.constant.array() * it.x[j].array()).sum();
  }
  if (it.xl.size() > 0) {
    res.dual_lp = form_.lp_c - it.zl - form_.lp * it.y;
    dual_sq += res.dual_lp.squaredNorm();
    res.pobj += form_.lp_c.dot(it.xl);
  }
  res.dobj = form_.b.dot(it.y);
  res.pinf = res.primal.norm() / norm_b_;
  res.dinf = std::sqrt(dual_sq) / norm_c_;
  res.gap = std::abs(res.pobj - res.dobj) /
    (options_.gap_floor + std::abs(res.pobj) + std::abs(res.dobj));
  return res;
}

bool InteriorPoint::schur(const Iterate & it)
{
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(m_, m_);
  z_inv_.clear();
  for (std::size_t j = 0; j < form_.blocks.size(); ++j) {
    const Block & block = form_.blocks[j];
    Eigen::LLT<Eigen::MatrixXd> llt(it.z[j]);
    if (llt.info() != Eigen::Success) {
      return false;
    }
    Eigen::MatrixXd z_inv = llt.solve(Eigen::MatrixXd::Identity(block.dim, block.dim));
    z_inv = sym(z_inv);
    const Index r = block.factors.cols();
    if (r > 0) {
      const Eigen::MatrixXd px = block.factors.transpose() * (it.x[j] * block.factors);
      const Eigen::MatrixXd pz = block.factors.transpose() * (z_inv * block.factors);
      for (Index l = 0; l < r; ++l) {
        const Index ol = block.owner[static_cast<std::size_t>(l)];
        const double wl = block.weights(l);
        for (Index k = l; k < r; ++k) {
          const Index ok = block.owner[static_cast<std::size_t>(k)];
          const double h = wl * block.weights(k) * px(k, l) * pz(k, l);
          if (k == l) {
            m(ok, ol) += h;
          } else {
            m(ok, ol) += h;
            m(ol, ok) += h;
          }
        }
      }
    }
    z_inv_.push_back(std::move(z_inv));
  }
  if (it.xl.size() > 0) {
    const Eigen::VectorXd ratio = it.xl.cwiseQuotient(it.zl);
    const SparseMatrix weighted = ratio.asDiagonal() * form_.lp;
    m += Eigen::MatrixXd(form_.lp.transpose() * weighted);
  }
  m = sym(m);
  schur_llt_.compute(m);
  use_ldlt_ = schur_llt_.info() != Eigen::Success;
  if (use_ldlt_) {
    schur_ldlt_.compute(m);
    if (schur_ldlt_.info() != Eigen::Success) {
      return false;
    }
  }
  return true;
}

InteriorPoint::Direction InteriorPoint::direction(
  const Iterate & it, const Residuals & res, double sigma_mu,
  const Direction * predictor) const
{
  const std::size_t nb = form_.blocks.size();
  std::vector<Eigen::MatrixXd> rhs_mats(nb);
  std::vector<Eigen::MatrixXd> corr(nb);  // (sigma mu I - dXa dZa) Z^{-1}
  for (std::size_t j = 0; j < nb; ++j) {
    corr[j] = sigma_mu * z_inv_[j];
    if (predictor) {
      corr[j] -= predictor->dx[j] * predictor->dz[j] * z_inv_[j];
    }
    rhs_mats[j] = it.x[j] * res.dual[j] * z_inv_[j] - corr[j];
  }
  Eigen::VectorXd corr_lp;
  Eigen::VectorXd rhs_lp;
  if (it.xl.size() > 0) {
    corr_lp = Eigen::VectorXd::Constant(it.xl.size(), sigma_mu);
    if (predictor) {
      corr_lp -= predictor->dxl.cwiseProduct(predictor->dzl);
    }
    corr_lp = corr_lp.cwiseQuotient(it.zl);
    rhs_lp = it.xl.cwiseProduct(res.dual_lp).cwiseQuotient(it.zl) - corr_lp;
  }
  const Eigen::VectorXd rhs = form_.b + apply(rhs_mats, rhs_lp);

  Direction d;
  d.dy = use_ldlt_ ? Eigen::VectorXd(schur_ldlt_.solve(rhs)) : Eigen::VectorXd(
    schur_llt_.solve(rhs));
  for (std::size_t j = 0; j < nb; ++j) {
    const Block & block = form_.blocks[j];
    Eigen::MatrixXd dz = res.dual[j] - adjoint_block(block, d.dy, m_);
    Eigen::MatrixXd dx = corr[j] - it.x[j] - it.x[j] * dz * z_inv_[j];
    d.dx.push_back(sym(dx));
    d.dz.push_back(std::move(dz));
  }
  if (it.xl.size() > 0) {
    d.dzl = res.dual_lp - form_.lp * d.dy;
    d.dxl = corr_lp - it.xl - it.xl.cwiseProduct(d.dzl).cwiseQuotient(it.zl);
  }
  return d;
}

void InteriorPoint::step_lengths(
  const Iterate & it, const Direction & d, double & ap,
  double & ad) const
{
  ap = kInfinity;
  ad = kInfinity;
  for (std::size_t j = 0; j < form_.blocks.size(); ++j) {
    ap = std::min(ap, max_step_psd(it.x[j], d.dx[j]));
    ad = std::min(ad, max_step_psd(it.z[j], d.dz[j]));
  }
  if (it.xl.size() > 0) {
    ap = std::min(ap, max_step_lp(it.xl, d.dxl));
    ad = std::min(ad, max_step_lp(it.zl, d.dzl));
  }
}

double InteriorPoint::complementarity(
  const Iterate & it, const Direction * d, double ap,
  double ad) const
{
  double sum = 0.0;
  for (std::size_t j = 0; j < form_.blocks.size(); ++j) {
    if (d) {
      sum += ((it.x[j] + ap * d->dx[j]).array() * (it.z[j] + ad * d->dz[j]).array()).sum();
    } else {
      sum += (it.x[j].array() * it.z[j].array()).sum();
    }
  }
  if (it.xl.size() > 0) {
    if (d) {
      sum += (it.xl + ap * d->dxl).dot(it.zl + ad * d->dzl);
    } else {
      sum += it.xl.dot(it.zl);
    }
  }
  return sum / static_cast<double>(std::max<Index>(total_dim_, 1));
}

ConicSolution InteriorPoint::finish(
  const Iterate & it, const Residuals & res, SolveStatus status,
  int iters, std::string message) const
{
  ConicSolution sol;
  sol.status = status;
  const Eigen::VectorXd w = it.y.cwiseQuotient(form_.scale);
  sol.values = form_.offset + form_.transform * w;
  // b = -(T^T c) scaled, so c^T v = offset_term - b^T y.
  sol.objective = form_.objective_offset - res.dobj;
  sol.lower_bound = form_.objective_offset - res.pobj;
  sol.gap = res.gap;
  sol.primal_residual = res.pinf;
  sol.dual_residual = res.dinf;
  sol.iterations = iters;
  sol.message = std::move(message);
  return sol;
}

ConicSolution InteriorPoint::run()
{
  initialize();
  Iterate & it = iterate_;
  Iterate best = it;
  Residuals best_res = residuals(it);
  double best_score = kInfinity;

  for (int iter = 0; iter <= options_.max_iters; ++iter) {
    const Residuals res = residuals(it);
    const double score = std::max({res.pinf, res.dinf, res.gap});
    if (score < best_score) {
      best_score = score;
      best = it;
      best_res = res;
    }
    if (options_.verbose) {
      std::fprintf(
        stderr, "iter %3d pobj % .9e dobj % .9e pinf %.2e dinf %.2e gap %.2e\n", iter,
        res.pobj, res.dobj, res.pinf, res.dinf, res.gap);
    }
    if (res.pinf <= options_.feas_tol && res.dinf <= options_.feas_tol &&
      res.gap <= options_.gap_tol)
    {
      return finish(it, res, SolveStatus::Optimal, iter, "converged");
    }
    if (res.pobj < 0.0) {
      // X / (-<C,X>) approaches a certificate that no y makes C - A^T y PSD.
      const double ax = apply(it.x, it.xl).norm();
      if (ax / -res.pobj <= options_.infeas_tol && res.dinf > options_.feas_tol) {
        return finish(
          it, res, SolveStatus::Infeasible, iter,
          "infeasibility certificate, residual " + std::to_string(ax / -res.pobj));
      }
    }
    if (res.dobj > 0.0) {
      double ray_sq = 0.0;
      for (std::size_t j = 0; j < form_.blocks.size(); ++j) {
        ray_sq += (adjoint_block(form_.blocks[j], it.y, m_) + it.z[j]).squaredNorm();
      }
      if (it.xl.size() > 0) {
        ray_sq += (form_.lp * it.y + it.zl).squaredNorm();
      }
      if (std::sqrt(ray_sq) / res.dobj <= options_.infeas_tol && res.pinf > options_.feas_tol) {
        return finish(it, res, SolveStatus::Unbounded, iter, "unboundedness certificate");
      }
    }
    if (iter == options_.max_iters) {
      break;
    }

    const double mu = complementarity(it, nullptr, 0.0, 0.0);
    if (!schur(it)) {
      return finish(
        best, best_res, SolveStatus::NumericalFailure, iter,
        "Schur complement factorization failed");
    }

    const Direction pred = direction(it, res, 0.0, nullptr);
    double ap = 0.0;
    double ad = 0.0;
    step_lengths(it, pred, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    const double mu_aff = complementarity(it, &pred, ap, ad);
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);
    const double fraction = 0.9 + 0.09 * std::min(ap, ad);

    const Direction corr = direction(it, res, sigma * mu, &pred);
    step_lengths(it, corr, ap, ad);
    ap = std::min(1.0, fraction * ap);
    ad = std::min(1.0, fraction * ad);
    if (!(ap > 1e-12 || ad > 1e-12)) {
      return finish(best, best_res, SolveStatus::NumericalFailure, iter, "step length collapsed");
    }

    for (std::size_t j = 0; j < form_.blocks.size(); ++j) {
      it.x[j] = sym(it.x[j] + ap * corr.dx[j]);
      it.z[j] = sym(it.z[j] + ad * corr.dz[j]);
    }
    if (it.xl.size() > 0) {
      it.xl += ap * corr.dxl;
      it.zl += ad * corr.dzl;
    }
    it.y += ad * corr.dy;
    if (!it.y.allFinite()) {
      return finish(best, best_res, SolveStatus::NumericalFailure, iter, "iterate diverged");
    }
  }
  return finish(best, best_res, SolveStatus::NumericalFailure, options_.max_iters,
    "iteration limit reached");
}

}  // namespace

ConicSolution solve(const SdpProblem & problem, const SolverOptions & options)
{
  problem.validate();
  Preprocessed pre = preprocess(problem);
  if (pre.trivially_infeasible || pre.unbounded) {
    ConicSolution sol;
    sol.status = pre.trivially_infeasible ? SolveStatus::Infeasible : SolveStatus::Unbounded;
    sol.values = pre.form.offset.size() ? pre.form.offset : Eigen::VectorXd::Zero(
      problem.num_vars);
    sol.message = pre.message;
    return sol;
  }
  if (pre.form.m == 0) {
    // Nothing left to optimize: the fixed point is either feasible or not.
    ConicSolution sol;
    sol.values = pre.form.offset;
    sol.objective = problem.objective.dot(sol.values);
    sol.lower_bound = sol.objective;
    const ViolationReport report = verify(problem, sol.values);
    sol.status = report.satisfied(options.feas_tol) ? SolveStatus::Optimal :
      SolveStatus::Infeasible;
    sol.message = "all variables fixed";
    return sol;
  }
  InteriorPoint ipm(pre.form, options);
  return ipm.run();
}

}  // namespace sensched::conic
