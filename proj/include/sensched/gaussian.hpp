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

#ifndef SENSCHED_GAUSSIAN_HPP_
#define SENSCHED_GAUSSIAN_HPP_

#include <Eigen/Dense>

namespace sensched
{

/// Mean and covariance of a Gaussian state. The covariance may be singular.
struct GaussianState
{
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

}  // namespace sensched

#endif  // SENSCHED_GAUSSIAN_HPP_
