//
// Copyright 2026 The dpfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPFL_ERRORS_HPP
#define DPFL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dpfl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values (empty partitions, bad privacy budgets, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Dimension mismatch between models, parameters, and data.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Rank-deficient design or non-invertible normal matrix.
class SingularError : public Error {
 public:
  using Error::Error;
};

// A problem collapsed to a form with no usable solution (e.g. an
// identically-zero stationarity polynomial).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// A derived quantity violated a sign or range that the analysis guarantees;
// indicates parameters outside the regime the closed forms cover.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

class InsufficientTrialsError : public Error {
 public:
  using Error::Error;
};

// Metric requested on a model kind that does not define it.
class UnsupportedMetricError : public Error {
 public:
  using Error::Error;
};

// Malformed binary or text input files.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Configuration schema violation; carries the offending line (0 = global).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0) : Error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Non-finite value produced at runtime; carries round/client context
// (-1 when not applicable).
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, int round = -1, int client = -1)
      : Error(what), round_(round), client_(client) {}
  int round() const { return round_; }
  int client() const { return client_; }

 private:
  int round_;
  int client_;
};

}  // namespace dpfl

#endif  // DPFL_ERRORS_HPP
