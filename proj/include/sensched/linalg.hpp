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

// Small dense helpers shared by the filtering and optimization code.

#ifndef SENSCHED_LINALG_HPP_
#define SENSCHED_LINALG_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace sensched
{

template<typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template<typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Eigen::Index;

template<typename Derived>
Matrix<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived> & m)
{
  return (m + m.transpose()) / typename Derived::Scalar(2);
}

template<typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived> & m)
{
  using Scalar = typename Derived::Scalar;
  if (m.rows() == 0) {
    return Scalar(0);
  }
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(symmetrize(m), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

/// Principal square root of a symmetric PSD matrix. Negative eigenvalues are
/// clipped to zero, so rank-deficient inputs are fine.
template<typename Derived>
Matrix<typename Derived::Scalar> psd_sqrt(const Eigen::MatrixBase<Derived> & m)
{
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(symmetrize(m));
  Vector<Scalar> root = eig.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

/// Clips negative eigenvalues of the symmetric part to zero.
template<typename Derived>
Matrix<typename Derived::Scalar> project_psd(const Eigen::MatrixBase<Derived> & m)
{
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(symmetrize(m));
  if (eig.eigenvalues().size() == 0 || eig.eigenvalues()(0) >= Scalar(0)) {
    return symmetrize(m);
  }
  Vector<Scalar> clipped = eig.eigenvalues().cwiseMax(Scalar(0));
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

template<typename DerivedA, typename DerivedB>
typename DerivedA::Scalar relative_frobenius_error(
  const Eigen::MatrixBase<DerivedA> & actual,
  const Eigen::MatrixBase<DerivedB> & expected)
{
  using std::max;
  const auto denom = max(expected.norm(), typename DerivedA::Scalar(1e-300));
  return (actual - expected).norm() / denom;
}

}  // namespace sensched

#endif  // SENSCHED_LINALG_HPP_
