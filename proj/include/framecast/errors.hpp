// Copyright 2026 The framecast Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace framecast {

/// Root of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration violates its own invariants, or an input does not match it.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor or frame dimensions disagree (includes the parameter shape audit).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside its mathematical domain (dt <= 0, pixel outside [0,1], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

class StreamError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// The mask selected no pixels; the sample must be excluded, not scored.
class EmptyMaskError : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

/// Non-finite loss or gradient during optimization.
class DivergenceError : public Error {
 public:
  DivergenceError(std::int64_t step, const std::string& what)
      : Error("divergence at step " + std::to_string(step) + ": " + what), step_(step) {}

  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

}  // namespace framecast
