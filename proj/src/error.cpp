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

#include "sensched/error.hpp"

namespace sensched
{

const char * to_string(ErrorKind kind) noexcept
{
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Singularity: return "singularity";
    case ErrorKind::NotPositiveSemidefinite: return "not-psd";
    case ErrorKind::Inconsistency: return "inconsistency";
    case ErrorKind::Assembly: return "assembly";
    case ErrorKind::ContractViolation: return "contract-violation";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

}  // namespace sensched
