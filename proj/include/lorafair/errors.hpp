// Copyright 2026 The lorafair Authors.
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

namespace lorafair {

/// Shape or dimension precondition violated.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input is numerically degenerate (near-zero norm, rank-deficient factor).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative routine hit its iteration cap before reaching tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A client contribution broke the rules of the aggregation protocol.
class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedMethodError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SolverDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration parse failure or violated config invariant.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace lorafair
