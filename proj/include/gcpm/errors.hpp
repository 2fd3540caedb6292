// Copyright 2026 The gcpm Authors
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

#ifndef GCPM_ERRORS_HPP_
#define GCPM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace gcpm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Instance or call arguments violate a documented precondition.
class InstanceInvalid : public Error {
 public:
  using Error::Error;
};

// More agents than residual capacity.
class InfeasibleProblem : public Error {
 public:
  using Error::Error;
};

// Planner threshold above the best achievable mean outcome.
class ThresholdInfeasible : public Error {
 public:
  ThresholdInfeasible(double g_bar, double g_max)
      : Error("threshold " + std::to_string(g_bar) +
              " exceeds maximum achievable mean " + std::to_string(g_max)),
        g_bar_(g_bar),
        g_max_(g_max) {}

  double g_bar() const { return g_bar_; }
  double g_max() const { return g_max_; }

 private:
  double g_bar_;
  double g_max_;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Line and column are 1-based; 0 means "not known".
class ParseError : public Error {
 public:
  ParseError(std::string file, int line, int column, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ":" + std::to_string(column) +
              ": " + what),
        file_(std::move(file)),
        line_(line),
        column_(column) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string file_;
  int line_;
  int column_;
};

}  // namespace gcpm

#endif  // GCPM_ERRORS_HPP_
