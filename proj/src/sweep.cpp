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

#include "gcpm/sweep.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "gcpm/io.hpp"
#include "gcpm/parallel.hpp"

namespace gcpm {

std::vector<double> grid_from_range(double start, double stop, double step) {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step)) {
    throw InvalidConfig("grid bounds must be finite");
  }
  if (!(step > 0.0)) throw InvalidConfig("grid step must be positive");
  if (stop < start) throw InvalidConfig("grid stop is below start");
  const double count = std::floor((stop - start) / step + 1e-9);
  if (count > 1e6) throw InvalidConfig("grid has too many points");
  std::vector<double> grid;
  for (int i = 0; i <= static_cast<int>(count); ++i) grid.push_back(start + i * step);
  return grid;
}

double lowest_mean_score(const Instance& inst) {
  if (inst.num_agents() == 0 || inst.num_locations() == 0) return 0.0;
  return inst.outcomes().rowwise().minCoeff().mean();
}

std::vector<double> default_grid(const Instance& inst, int divisions) {
  if (divisions < 1) throw InvalidConfig("divisions must be positive");
  const double lo = lowest_mean_score(inst);
  const double hi = solve_max_matching_value(inst);
  std::vector<double> grid;
  grid.reserve(static_cast<size_t>(divisions) + 1);
  for (int i = 0; i < divisions; ++i) grid.push_back(lo + (hi - lo) * i / divisions);
  grid.push_back(hi);
  return grid;
}

void SweepSpec::validate() const {
  if (grid.empty()) throw InvalidConfig("sweep grid is empty");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw InvalidConfig("sweep grid value is not finite");
    if (i > 0 && grid[i] < grid[i - 1]) {
      throw InvalidConfig("sweep grid must be sorted ascending");
    }
  }
  if (k < 1) throw InvalidConfig("k must be positive");
}

SweepRow sweep_point(const Instance& inst, double g_bar,
                     const OrderingStrategy& strategy, int k,
                     const MechanismOptions& options) {
  SweepRow row;
  row.g_bar = g_bar;
  MechanismOptions opts = options;
  opts.record_snapshots = false;
  try {
    const auto order = make_order(inst, strategy, g_bar);
    const auto run = run_mechanism(inst, MechanismParams<double>{g_bar, order}, opts);
    const auto metrics = compute_metrics(run.matching, inst, k);
    row.feasible = true;
    row.top_k_proportion = metrics.top_k_proportion;
    row.realized_mean = metrics.realized_mean;
    row.probes_used = run.trace.probes;
    for (const auto& step : run.trace.steps) {
      if (step.action == StepAction::kHeld) ++row.holds_count;
    }
  } catch (const ThresholdInfeasible&) {
    row.feasible = false;
    row.top_k_proportion = std::numeric_limits<double>::quiet_NaN();
    row.realized_mean = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

std::vector<SweepRow> run_sweep(const Instance& inst, const SweepSpec& spec) {
  spec.validate();
  std::vector<SweepRow> rows(spec.grid.size());
  parallel_for(static_cast<int>(spec.grid.size()), spec.threads, [&](int i) {
    rows[i] = sweep_point(inst, spec.grid[i], spec.strategy, spec.k, spec.mechanism);
  });
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "g_bar,feasible,top_k_proportion,realized_mean,probes_used,holds_count\n";
  for (const auto& r : rows) {
    os << format_score(r.g_bar) << ',' << (r.feasible ? 1 : 0) << ',';
    if (r.feasible) {
      os << format_score(r.top_k_proportion) << ',' << format_score(r.realized_mean);
    } else {
      os << "nan,nan";
    }
    os << ',' << r.probes_used << ',' << r.holds_count << '\n';
  }
}

}  // namespace gcpm
