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

// Threshold sweeps: one mechanism run per grid value.

#ifndef GCPM_SWEEP_HPP_
#define GCPM_SWEEP_HPP_

#include <iosfwd>
#include <vector>

#include "gcpm/core.hpp"
#include "gcpm/ordering.hpp"

namespace gcpm {

// start, start + step, ... up to stop (inclusive within 1e-9 * step).
std::vector<double> grid_from_range(double start, double stop, double step);

// Mean over agents of the worst score.
double lowest_mean_score(const Instance& inst);

// `divisions` + 1 points from lowest_mean_score to the maximum mean.
std::vector<double> default_grid(const Instance& inst, int divisions = 50);

struct SweepSpec {
  std::vector<double> grid;  // sorted ascending, nonempty
  OrderingStrategy strategy;
  int k = 3;
  int threads = 1;
  MechanismOptions mechanism;

  void validate() const;
};

struct SweepRow {
  double g_bar = 0.0;
  bool feasible = false;
  double top_k_proportion = 0.0;  // NaN when infeasible
  double realized_mean = 0.0;     // NaN when infeasible
  int probes_used = 0;
  int holds_count = 0;
};

// Rows follow the grid order. Infeasible thresholds are marked, not thrown.
std::vector<SweepRow> run_sweep(const Instance& inst, const SweepSpec& spec);

SweepRow sweep_point(const Instance& inst, double g_bar,
                     const OrderingStrategy& strategy, int k,
                     const MechanismOptions& options = {});

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace gcpm

#endif  // GCPM_SWEEP_HPP_
