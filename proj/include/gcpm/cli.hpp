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

// The `gcpm` command line: gen, gmax, assign, sweep, verify, reorder.

#ifndef GCPM_CLI_HPP_
#define GCPM_CLI_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gcpm/core.hpp"
#include "gcpm/ordering.hpp"

namespace gcpm::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // usage, I/O, invalid configuration
  kExitThresholdInfeasible = 2,
  kExitParseError = 3,
  kExitOracleFail = 4,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Flat configuration: one `key = value` per line, `#` starts a comment.
// Keys are option names without dashes; '_' and '-' are interchangeable.
std::map<std::string, std::string> parse_config(std::string_view text,
                                                const std::string& name = "config");

// Priority order specification:
//   identity | given            agents in index order
//   1,2,3 or 0,1,2              explicit list; 0-based if it contains 0
//   random[:seed=N]
//   increasing_variance | decreasing_variance
//   pseudo:prefs=PATH[,candidates=N][,seed=N]
//   pseudo:noise=X[,noise_seed=N][,candidates=N][,seed=N]
OrderingStrategy parse_order_spec(const std::string& spec, const Instance& inst);

// "start:stop:step" or a comma-separated list of values.
std::vector<double> parse_grid(const std::string& text);

}  // namespace gcpm::cli

#endif  // GCPM_CLI_HPP_
