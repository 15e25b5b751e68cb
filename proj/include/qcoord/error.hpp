// Copyright 2026 The qcoord Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace qcoord {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  IllConditioned,
  Saturation,
  Integrity,
  BudgetExceeded,
  LpFailure,
  Divergence,
  Io,
};

/// The single exception type thrown by the library. The code drives the
/// mapping onto C API status values and CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// inv_sqrt_psd hit the positive-definiteness floor; carries the offending eigenvalue.
class IllConditionedError : public Error {
 public:
  IllConditionedError(double min_eigenvalue, const std::string& what)
      : Error(ErrorCode::IllConditioned, what), min_eigenvalue_(min_eigenvalue) {}

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace qcoord
